//! Partitional clustering with particle swarms.
//!
//! Three swarm drivers share one optimizer core:
//!
//! * **PSOC**: every particle encodes all `k` centroids and follows the
//!   global best.
//! * **LPSO**: same encoding, but particles follow the best of their own
//!   neighborhood.
//! * **LCPSO**: every particle is a single centroid candidate. The swarm is
//!   split into `k` neighborhoods, one per cluster, and particles are pulled
//!   toward the center of gravity of their personal best and their
//!   neighborhood's best.
//!
//! A Lloyd k-means baseline, the Adjusted Rand Index and a seeded,
//! multi-replicate experiment harness round out the crate.

pub mod data;
pub mod error;
pub mod harness;
pub mod kmeans;
pub mod metrics;
pub mod pso_cluster;
pub mod pso_core;

pub use data::{generate_blobs, load_csv, normalize_minmax, BoundingBox, Dataset, LabelColumn};
pub use error::{ConfigError, DataError, HarnessError, MetricsError};
pub use kmeans::{kmeans_fit, KMeansConfig, KMeansFit, KMeansInit};
pub use metrics::{adjusted_rand_index, assign_nearest, quantization_error, sse, Distance, Partition};
pub use pso_cluster::{fit, lcpso_fit, lpso_fit, psoc_fit, Algorithm, ClusterFit, ClusterRunConfig, RunResult};
pub use pso_core::{CogVariant, Inertia, PsoConfig, VelocityClamp};
