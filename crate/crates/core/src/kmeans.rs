//! Lloyd's k-means, used as the baseline for the swarm-based methods.

use ndarray::{Array2, ArrayView2};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::ConfigError;
use crate::metrics::{assign_nearest, cluster_means, sse, Distance, Partition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KMeansInit {
    /// `k` distinct data points sampled without replacement.
    #[default]
    RandomPoints,
    /// Uniform draws inside the data's bounding box.
    RandomUniformInBox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub k: usize,
    pub max_iters: usize,
    /// Stop once an iteration improves SSE by less than this.
    pub tol: f64,
    pub seed: u64,
    pub init: KMeansInit,
}

impl KMeansConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            max_iters: 1000,
            tol: 1e-4,
            seed,
            init: KMeansInit::RandomPoints,
        }
    }

    pub fn validate(&self, n: usize) -> Result<(), ConfigError> {
        if self.k == 0 {
            return Err(ConfigError::ZeroClusters);
        }
        if self.k > n {
            return Err(ConfigError::TooManyClusters { k: self.k, n });
        }
        if self.max_iters == 0 {
            return Err(ConfigError::Invalid("max_iters must be >= 1".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(ConfigError::Invalid(format!("tol must be >= 0, got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct KMeansFit {
    pub centroids: Array2<f64>,
    pub partition: Partition,
    /// SSE after each assignment step, starting with the initial one.
    pub sse_trace: Vec<f64>,
}

impl KMeansFit {
    pub fn sse(&self) -> f64 {
        *self.sse_trace.last().expect("trace is never empty")
    }
}

/// Moves points into empty clusters until none is left.
///
/// Each empty cluster takes the point farthest from its own centroid among
/// clusters that can spare a member, and its centroid is placed on that
/// point. Every move strictly lowers (or keeps) SSE. Requires `k <= n`.
pub fn repair_empty_clusters(
    points: ArrayView2<'_, f64>,
    centroids: &mut Array2<f64>,
    partition: &mut Partition,
) {
    assert!(partition.k() <= points.nrows(), "cannot fill {} clusters with {} points", partition.k(), points.nrows());
    loop {
        let mut sizes = partition.cluster_sizes();
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return;
        };
        let mut donor: Option<(usize, f64)> = None;
        for (i, &c) in partition.assignment().iter().enumerate() {
            if sizes[c] < 2 {
                continue;
            }
            let p = points.row(i);
            let dist: f64 = p
                .iter()
                .zip(centroids.row(c).iter())
                .map(|(x, y)| (x - y) * (x - y))
                .sum();
            if donor.is_none_or(|(_, best)| dist > best) {
                donor = Some((i, dist));
            }
        }
        let (i, _) = donor.expect("k <= n leaves a cluster with two members");
        sizes[partition.assignment()[i]] -= 1;
        partition.set(i, empty);
        centroids.row_mut(empty).assign(&points.row(i));
    }
}

fn initial_centroids(ds: &Dataset, cfg: &KMeansConfig, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let d = ds.dim();
    match cfg.init {
        KMeansInit::RandomPoints => {
            let idx = sample(rng, ds.len(), cfg.k);
            let mut c = Array2::zeros((cfg.k, d));
            for (row, i) in idx.iter().enumerate() {
                c.row_mut(row).assign(&ds.points().row(i));
            }
            c
        }
        KMeansInit::RandomUniformInBox => {
            let bbox = ds.bounding_box();
            Array2::from_shape_fn((cfg.k, d), |(_, j)| {
                bbox.min[j] + rng.random::<f64>() * bbox.extent(j)
            })
        }
    }
}

/// Fits k-means by alternating nearest-centroid assignment and mean updates.
///
/// Stops when an iteration improves SSE by less than `tol` or after
/// `max_iters` mean updates. If an update fails to lower SSE at all (which
/// can only happen through rounding) the previous state is kept, so the
/// returned trace is non-increasing.
pub fn kmeans_fit(ds: &Dataset, cfg: &KMeansConfig) -> Result<KMeansFit, ConfigError> {
    cfg.validate(ds.len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let points = ds.points().view();

    let mut centroids = initial_centroids(ds, cfg, &mut rng);
    let mut partition = assign_nearest(points, centroids.view(), Distance::Euclidean);
    repair_empty_clusters(points, &mut centroids, &mut partition);
    let mut sse_trace = vec![sse(points, centroids.view(), &partition)];

    for _ in 0..cfg.max_iters {
        let prev = *sse_trace.last().unwrap();
        let mut next_centroids = cluster_means(points, &partition, centroids.view());
        let mut next_partition = assign_nearest(points, next_centroids.view(), Distance::Euclidean);
        repair_empty_clusters(points, &mut next_centroids, &mut next_partition);
        let next = sse(points, next_centroids.view(), &next_partition);
        if next > prev {
            break;
        }
        centroids = next_centroids;
        partition = next_partition;
        sse_trace.push(next);
        if prev - next < cfg.tol {
            break;
        }
    }

    Ok(KMeansFit {
        centroids,
        partition,
        sse_trace,
    })
}

/// Minimum SSE over every assignment of the points to `k` non-empty
/// clusters. Exponential; only for tiny inputs.
#[cfg(test)]
pub(crate) fn brute_force_min_sse(points: ArrayView2<'_, f64>, k: usize) -> (f64, Vec<usize>) {
    let n = points.nrows();
    let mut best = (f64::INFINITY, Vec::new());
    let total = k.pow(n as u32);
    for code in 0..total {
        let mut a = Vec::with_capacity(n);
        let mut c = code;
        for _ in 0..n {
            a.push(c % k);
            c /= k;
        }
        let mut sums = vec![vec![0.0; points.ncols()]; k];
        let mut counts = vec![0usize; k];
        for (i, &c) in a.iter().enumerate() {
            counts[c] += 1;
            for (s, x) in sums[c].iter_mut().zip(points.row(i)) {
                *s += x;
            }
        }
        if counts.contains(&0) {
            continue;
        }
        let cost: f64 = a
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                points
                    .row(i)
                    .iter()
                    .zip(&sums[c])
                    .map(|(x, s)| (x - s / counts[c] as f64).powi(2))
                    .sum::<f64>()
            })
            .sum();
        if cost < best.0 {
            best = (cost, a);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::generate_blobs;
    use crate::metrics::adjusted_rand_index;
    use ndarray::array;
    use proptest::prelude::*;

    fn ds(points: Array2<f64>) -> Dataset {
        Dataset::new("t", points, None).unwrap()
    }

    #[test]
    fn four_points_two_clusters() {
        let pts = array![[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]];
        let (opt, opt_assign) = brute_force_min_sse(pts.view(), 2);
        assert_eq!(opt, 1.0);
        assert_eq!(adjusted_rand_index(&opt_assign, [0, 0, 1, 1]).unwrap(), 1.0);

        // a seed that picks both initial centroids on one side converges to
        // the local optimum {p1,p3},{p2,p4}; every run is at least optimal
        let mut optimal_runs = 0;
        for seed in 0..20 {
            let fit = kmeans_fit(&ds(pts.clone()), &KMeansConfig::new(2, seed)).unwrap();
            assert!(fit.sse() >= opt);
            if fit.sse() > opt {
                continue;
            }
            optimal_runs += 1;
            assert_eq!(adjusted_rand_index(&fit.partition, [0, 0, 1, 1]).unwrap(), 1.0);
            let mut rows: Vec<Vec<f64>> = fit.centroids.rows().into_iter().map(|r| r.to_vec()).collect();
            rows.sort_by(|a, b| a[0].total_cmp(&b[0]));
            assert_eq!(rows, vec![vec![0.0, 0.5], vec![10.0, 0.5]]);
        }
        assert!(optimal_runs >= 10, "only {optimal_runs} of 20 runs were optimal");
    }

    #[test]
    fn k_equals_n_is_exact() {
        let pts = array![[0.0, 0.0], [1.0, 5.0], [3.0, 2.0]];
        let fit = kmeans_fit(&ds(pts), &KMeansConfig::new(3, 4)).unwrap();
        assert_eq!(fit.sse(), 0.0);
        assert!(fit.partition.no_empty());
    }

    #[test]
    fn k_equals_n_with_duplicates_still_fills_every_cluster() {
        let pts = array![[1.0], [1.0], [1.0]];
        for init in [KMeansInit::RandomPoints, KMeansInit::RandomUniformInBox] {
            let cfg = KMeansConfig { init, ..KMeansConfig::new(3, 0) };
            let fit = kmeans_fit(&ds(pts.clone()), &cfg).unwrap();
            assert!(fit.partition.validate(3).is_ok());
        }
    }

    #[test]
    fn single_cluster_is_the_mean() {
        let pts = array![[0.0, 0.0], [2.0, 0.0], [4.0, 6.0]];
        let fit = kmeans_fit(&ds(pts), &KMeansConfig::new(1, 9)).unwrap();
        assert_eq!(fit.centroids, array![[2.0, 2.0]]);
    }

    #[test]
    fn bad_k() {
        let d = ds(array![[0.0], [1.0]]);
        assert_eq!(kmeans_fit(&d, &KMeansConfig::new(0, 0)).unwrap_err(), ConfigError::ZeroClusters);
        assert_eq!(
            kmeans_fit(&d, &KMeansConfig::new(3, 0)).unwrap_err(),
            ConfigError::TooManyClusters { k: 3, n: 2 }
        );
    }

    #[test]
    fn repair_moves_farthest_point() {
        let pts = array![[0.0], [1.0], [5.0]];
        let mut cen = array![[0.0], [100.0]];
        let mut part = Partition::new(vec![0, 0, 0], 2).unwrap();
        repair_empty_clusters(pts.view(), &mut cen, &mut part);
        assert_eq!(part.assignment(), &[0, 0, 1]);
        assert_eq!(cen, array![[0.0], [5.0]]);
    }

    #[test]
    fn deterministic_under_seed() {
        let data = generate_blobs(3, 20, 2, 0.1, 5).unwrap();
        let cfg = KMeansConfig::new(3, 11);
        let a = kmeans_fit(&data, &cfg).unwrap();
        let b = kmeans_fit(&data, &cfg).unwrap();
        assert_eq!(a.centroids, b.centroids);
        assert_eq!(a.partition, b.partition);
        assert_eq!(a.sse_trace, b.sse_trace);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn never_beats_exhaustive_optimum(
            (n, k, values) in (3usize..=7, 1usize..=3).prop_flat_map(|(n, k)| {
                (Just(n), Just(k.min(n)), proptest::collection::vec(-10.0f64..10.0, n * 2))
            }),
            seed in 0u64..1000,
        ) {
            let pts = Array2::from_shape_vec((n, 2), values).unwrap();
            let (opt, _) = brute_force_min_sse(pts.view(), k);
            let fit = kmeans_fit(&ds(pts), &KMeansConfig::new(k, seed)).unwrap();
            prop_assert!(fit.sse() >= opt - 1e-9 * (1.0 + opt));
            prop_assert!(fit.partition.no_empty());
            prop_assert!(fit.sse_trace.windows(2).all(|w| w[1] <= w[0]));
        }
    }
}
