//! PSOC, LPSO and LCPSO clustering drivers.

use std::time::Instant;

use ndarray::{Array2, ArrayView2};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{BoundingBox, Dataset};
use crate::error::ConfigError;
use crate::kmeans::repair_empty_clusters;
use crate::metrics::{
    adjusted_rand_index, assign_nearest, euclidean, quantization_error, sse, squared_euclidean,
    Distance, Partition,
};
use crate::pso_core::{
    random_velocity, Objective, Particle, PsoConfig, Scope, Swarm, Topology, VelocityRule,
};

/// Initial velocities are drawn within this fraction of the box extent.
const INITIAL_VELOCITY_SCALE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Psoc,
    Lpso,
    Lcpso,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Psoc => "psoc",
            Algorithm::Lpso => "lpso",
            Algorithm::Lcpso => "lcpso",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRunConfig {
    pub k: usize,
    pub pso: PsoConfig,
    pub algorithm: Algorithm,
    /// Size of the contiguous index blocks LPSO uses as neighborhoods.
    pub lpso_neighborhood_size: usize,
}

impl ClusterRunConfig {
    pub fn new(algorithm: Algorithm, k: usize, pso: PsoConfig) -> Self {
        Self {
            k,
            pso,
            algorithm,
            lpso_neighborhood_size: 10,
        }
    }

    pub fn validate(&self, n: usize) -> Result<(), ConfigError> {
        if self.k == 0 {
            return Err(ConfigError::ZeroClusters);
        }
        if self.k > n {
            return Err(ConfigError::TooManyClusters { k: self.k, n });
        }
        self.pso.validate()?;
        match self.algorithm {
            Algorithm::Lpso
                if self.lpso_neighborhood_size < 2 || self.lpso_neighborhood_size > self.pso.swarm_size =>
            {
                Err(ConfigError::NeighborhoodSize {
                    size: self.lpso_neighborhood_size,
                    swarm: self.pso.swarm_size,
                })
            }
            Algorithm::Lcpso if self.pso.swarm_size < self.k => Err(ConfigError::SwarmTooSmall {
                got: self.pso.swarm_size,
                min: self.k,
            }),
            _ => Ok(()),
        }
    }

    fn expect(&self, algorithm: Algorithm) -> Result<(), ConfigError> {
        if self.algorithm == algorithm {
            Ok(())
        } else {
            Err(ConfigError::Invalid(format!(
                "{} driver called with algorithm {}",
                algorithm.name(),
                self.algorithm.name()
            )))
        }
    }
}

/// Summary of one clustering run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub dataset: String,
    pub algorithm: String,
    pub k: usize,
    pub seed: u64,
    /// Against the dataset's labels, when it has any.
    pub ari: Option<f64>,
    pub quantization_error: f64,
    pub sse: f64,
    /// Best fitness after each iteration.
    pub fitness_trace: Vec<f64>,
    pub iterations: usize,
    pub runtime_ms: f64,
    pub config: serde_json::Value,
}

/// Assembles a [`RunResult`] for a final clustering of `ds`.
#[allow(clippy::too_many_arguments)]
pub fn run_result(
    ds: &Dataset,
    algorithm: &str,
    seed: u64,
    centroids: ArrayView2<'_, f64>,
    partition: &Partition,
    fitness_trace: Vec<f64>,
    runtime_ms: f64,
    config: serde_json::Value,
) -> RunResult {
    let points = ds.points().view();
    let ari = ds
        .labels()
        .filter(|l| l.len() >= 2)
        .map(|labels| adjusted_rand_index(labels, partition).expect("lengths agree"));
    RunResult {
        dataset: ds.name().to_string(),
        algorithm: algorithm.to_string(),
        k: partition.k(),
        seed,
        ari,
        quantization_error: quantization_error(points, centroids, partition).expect("n >= 1"),
        sse: sse(points, centroids, partition),
        iterations: fitness_trace.len(),
        fitness_trace,
        runtime_ms,
        config,
    }
}

/// Output of a swarm clustering driver.
#[derive(Debug, Clone)]
pub struct ClusterFit {
    /// `k × d`, row `j` is cluster `j`'s centroid.
    pub centroids: Array2<f64>,
    pub partition: Partition,
    pub result: RunResult,
    /// Leader index per topology scope at the end of the run.
    pub leaders: Vec<usize>,
    /// Final swarm state.
    pub particles: Vec<Particle>,
    /// Per particle: initial personal-best fitness, then one entry per
    /// iteration.
    pub pbest_history: Vec<Vec<f64>>,
}

/// Interprets a flat `k·d` vector as `k` centroid rows laid end to end.
pub fn decode_centroids(flat: &[f64], d: usize) -> ArrayView2<'_, f64> {
    assert!(d > 0 && flat.len() % d == 0, "length {} not divisible by d = {d}", flat.len());
    ArrayView2::from_shape((flat.len() / d, d), flat).expect("shape checked")
}

/// Quantization error of each full-solution particle.
struct PartitionObjective<'a> {
    points: ArrayView2<'a, f64>,
    d: usize,
}

impl Objective for PartitionObjective<'_> {
    fn evaluate(&mut self, positions: &[&[f64]]) -> Vec<f64> {
        positions
            .iter()
            .map(|flat| {
                let centroids = decode_centroids(flat, self.d);
                let part = assign_nearest(self.points, centroids, Distance::Euclidean);
                quantization_error(self.points, centroids, &part).expect("n >= 1")
            })
            .collect()
    }
}

/// Particles are single centroids competing for points: each point goes to
/// the nearest particle in the whole swarm and a particle's fitness is the
/// mean distance of the points it won.
struct CentroidObjective<'a> {
    points: ArrayView2<'a, f64>,
}

impl Objective for CentroidObjective<'_> {
    fn evaluate(&mut self, positions: &[&[f64]]) -> Vec<f64> {
        let mut sums = vec![0.0; positions.len()];
        let mut counts = vec![0usize; positions.len()];
        for p in self.points.rows() {
            let p = p.as_slice().expect("standard layout");
            let mut best = (0, f64::INFINITY);
            for (j, c) in positions.iter().enumerate() {
                let dist = squared_euclidean(p, c);
                if dist < best.1 {
                    best = (j, dist);
                }
            }
            sums[best.0] += best.1.sqrt();
            counts[best.0] += 1;
        }
        sums.iter()
            .zip(&counts)
            .map(|(&s, &c)| if c == 0 { f64::INFINITY } else { s / c as f64 })
            .collect()
    }

    /// Distance to the closest data point.
    fn fallback_rank(&self, position: &[f64]) -> f64 {
        self.points
            .rows()
            .into_iter()
            .map(|p| euclidean(p.as_slice().expect("standard layout"), position))
            .fold(f64::INFINITY, f64::min)
    }
}

/// `count` data point indices: distinct when possible.
fn pick_points(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<usize> {
    if count <= n {
        sample(rng, n, count).into_vec()
    } else {
        (0..count).map(|_| rng.random_range(0..n)).collect()
    }
}

fn gather(ds: &Dataset, idx: &[usize]) -> Vec<f64> {
    idx.iter().flat_map(|&i| ds.point(i).iter().copied()).collect()
}

fn finish(
    ds: &Dataset,
    cfg: &ClusterRunConfig,
    started: Instant,
    mut centroids: Array2<f64>,
    swarm: Swarm,
    leaders: Vec<usize>,
) -> ClusterFit {
    let points = ds.points().view();
    let mut partition = assign_nearest(points, centroids.view(), Distance::Euclidean);
    repair_empty_clusters(points, &mut centroids, &mut partition);
    let runtime_ms = started.elapsed().as_secs_f64() * 1e3;
    let config = serde_json::to_value(cfg).expect("config serializes");
    let result = run_result(
        ds,
        cfg.algorithm.name(),
        cfg.pso.seed,
        centroids.view(),
        &partition,
        swarm.best_trace().to_vec(),
        runtime_ms,
        config,
    );
    ClusterFit {
        centroids,
        partition,
        result,
        leaders,
        particles: swarm.particles().to_vec(),
        pbest_history: swarm.pbest_history().to_vec(),
    }
}

/// Shared driver for full-solution particles (PSOC and LPSO).
fn fit_full_solution(
    ds: &Dataset,
    cfg: &ClusterRunConfig,
    topology: Topology,
    seeded: &[Vec<f64>],
) -> Result<ClusterFit, ConfigError> {
    let started = Instant::now();
    cfg.validate(ds.len())?;
    let (n, d, k) = (ds.len(), ds.dim(), cfg.k);
    let bounds = ds.bounding_box().tile(k);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.pso.seed);

    let mut particles: Vec<Particle> = (0..cfg.pso.swarm_size)
        .map(|_| {
            let position = gather(ds, &pick_points(&mut rng, n, k));
            let pbest = gather(ds, &pick_points(&mut rng, n, k));
            let velocity = random_velocity(&bounds, INITIAL_VELOCITY_SCALE, &mut rng);
            Particle::new(position, velocity, pbest)
        })
        .collect();
    for (p, pos) in particles.iter_mut().zip(seeded) {
        if pos.len() != k * d {
            return Err(ConfigError::Invalid(format!(
                "seeded position has length {}, expected {}",
                pos.len(),
                k * d
            )));
        }
        p.position.clone_from(pos);
    }

    let mut objective = PartitionObjective {
        points: ds.points().view(),
        d,
    };
    let mut swarm = Swarm::new(
        particles,
        topology,
        VelocityRule::Inertia,
        &cfg.pso,
        bounds,
        rng,
        &mut objective,
    );
    swarm.run(&mut objective);

    let leaders = swarm.leaders(&objective);
    let best = *leaders
        .iter()
        .min_by(|&&a, &&b| {
            let pa = swarm.particles()[a].pbest_fitness;
            let pb = swarm.particles()[b].pbest_fitness;
            pa.total_cmp(&pb).then(a.cmp(&b))
        })
        .expect("at least one scope");
    let centroids = decode_centroids(&swarm.particles()[best].pbest_position, d).to_owned();
    Ok(finish(ds, cfg, started, centroids, swarm, leaders))
}

/// Global-best PSO clustering. Each particle holds `k` centroids; the swarm
/// follows its best particle and the final centroids are that particle's
/// personal best.
pub fn psoc_fit(ds: &Dataset, cfg: &ClusterRunConfig) -> Result<ClusterFit, ConfigError> {
    psoc_fit_seeded(ds, cfg, &[])
}

/// [`psoc_fit`] with the first particles' starting positions overridden.
pub fn psoc_fit_seeded(
    ds: &Dataset,
    cfg: &ClusterRunConfig,
    seeded: &[Vec<f64>],
) -> Result<ClusterFit, ConfigError> {
    cfg.expect(Algorithm::Psoc)?;
    fit_full_solution(ds, cfg, Topology::Global, seeded)
}

/// Local-best PSO clustering over contiguous index-block neighborhoods of
/// `lpso_neighborhood_size` particles. The result comes from the best
/// neighborhood leader.
pub fn lpso_fit(ds: &Dataset, cfg: &ClusterRunConfig) -> Result<ClusterFit, ConfigError> {
    cfg.expect(Algorithm::Lpso)?;
    cfg.validate(ds.len())?;
    let topology = Topology::contiguous(cfg.pso.swarm_size, cfg.lpso_neighborhood_size);
    fit_full_solution(ds, cfg, topology, &[])
}

/// Splits the data into `k` non-empty regions, one per neighborhood.
///
/// Region anchors are data points drawn with probability proportional to
/// their squared distance from the anchors chosen so far; every point then
/// joins its nearest anchor's region.
fn seed_regions(ds: &Dataset, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let n = ds.len();
    let mut anchors = vec![rng.random_range(0..n)];
    let mut d2: Vec<f64> = (0..n)
        .map(|i| squared_euclidean(ds.point(i), ds.point(anchors[0])))
        .collect();
    while anchors.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 {
                    pick = Some(i);
                    if target < w {
                        break;
                    }
                    target -= w;
                }
            }
            pick.expect("positive total weight")
        } else {
            // every point coincides with an anchor; take any unused index
            (0..n).find(|i| !anchors.contains(i)).expect("k <= n")
        };
        anchors.push(next);
        for (i, w) in d2.iter_mut().enumerate() {
            *w = w.min(squared_euclidean(ds.point(i), ds.point(next)));
        }
    }
    let mut regions = vec![Vec::new(); k];
    for i in 0..n {
        let mut best = (0, f64::INFINITY);
        for (j, &a) in anchors.iter().enumerate() {
            let dist = squared_euclidean(ds.point(i), ds.point(a));
            if dist < best.1 {
                best = (j, dist);
            }
        }
        regions[best.0].push(i);
    }
    // an anchor sharing coordinates with an earlier one loses all its
    // points to it; fall back to the anchor itself
    for (j, region) in regions.iter_mut().enumerate() {
        if region.is_empty() {
            region.push(anchors[j]);
        }
    }
    regions
}

/// Center-of-gravity local-best PSO clustering.
///
/// The swarm is dealt round-robin into `k` neighborhoods, one per cluster,
/// and each neighborhood starts on data points from its own region (see
/// [`seed_regions`]). Each particle is a single centroid candidate. Every iteration the data
/// points go to their nearest particle, particles score the mean distance of
/// the points they won, and the center-of-gravity rule pulls each particle
/// between its personal best and its neighborhood leader. Cluster `j`'s
/// final centroid is neighborhood `j`'s leader.
pub fn lcpso_fit(ds: &Dataset, cfg: &ClusterRunConfig) -> Result<ClusterFit, ConfigError> {
    let started = Instant::now();
    cfg.expect(Algorithm::Lcpso)?;
    cfg.validate(ds.len())?;
    let (d, k, eta) = (ds.dim(), cfg.k, cfg.pso.swarm_size);
    let bounds: BoundingBox = ds.bounding_box();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.pso.seed);

    let topology = Topology::round_robin(eta, k);
    let regions = seed_regions(ds, k, &mut rng);
    let mut particles: Vec<Option<Particle>> = vec![None; eta];
    for (j, region) in regions.iter().enumerate() {
        let members = topology.members(Scope::Neighborhood(j), eta);
        let starts = pick_points(&mut rng, region.len(), members.len());
        let pbests = pick_points(&mut rng, region.len(), members.len());
        for ((&i, &s), &b) in members.iter().zip(&starts).zip(&pbests) {
            let velocity = random_velocity(&bounds, INITIAL_VELOCITY_SCALE, &mut rng);
            particles[i] = Some(Particle::new(
                ds.point(region[s]).to_vec(),
                velocity,
                ds.point(region[b]).to_vec(),
            ));
        }
    }
    let particles: Vec<Particle> = particles.into_iter().map(|p| p.expect("every particle placed")).collect();

    let mut objective = CentroidObjective {
        points: ds.points().view(),
    };
    let mut swarm = Swarm::new(
        particles,
        topology,
        VelocityRule::CenterOfGravity(cfg.pso.cog_variant),
        &cfg.pso,
        bounds,
        rng,
        &mut objective,
    );
    swarm.run(&mut objective);

    let leaders = swarm.leaders(&objective);
    let mut centroids = Array2::zeros((k, d));
    for (j, &l) in leaders.iter().enumerate() {
        centroids
            .row_mut(j)
            .assign(&ndarray::aview1(&swarm.particles()[l].pbest_position));
    }
    Ok(finish(ds, cfg, started, centroids, swarm, leaders))
}

/// Runs whichever driver `cfg.algorithm` names.
pub fn fit(ds: &Dataset, cfg: &ClusterRunConfig) -> Result<ClusterFit, ConfigError> {
    match cfg.algorithm {
        Algorithm::Psoc => psoc_fit(ds, cfg),
        Algorithm::Lpso => lpso_fit(ds, cfg),
        Algorithm::Lcpso => lcpso_fit(ds, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_blobs, normalize_minmax};
    use crate::pso_core::CogVariant;
    use ndarray::array;

    fn easy_blobs() -> Dataset {
        normalize_minmax(&generate_blobs(2, 50, 2, 0.01, 42).unwrap()).0
    }

    fn cfg(algorithm: Algorithm, k: usize, swarm_size: usize, max_iters: usize, seed: u64) -> ClusterRunConfig {
        ClusterRunConfig::new(
            algorithm,
            k,
            PsoConfig {
                swarm_size,
                max_iters,
                seed,
                ..Default::default()
            },
        )
    }

    fn ari(fit: &ClusterFit) -> f64 {
        fit.result.ari.unwrap()
    }

    #[test]
    fn decode_follows_centroid_major_layout() {
        let flat = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        assert_eq!(decode_centroids(&flat, 3), array![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]);
        assert_eq!(decode_centroids(&flat, 2).nrows(), 3);
    }

    #[test]
    fn psoc_recovers_separated_blobs() {
        let ds = easy_blobs();
        let fit = psoc_fit(&ds, &cfg(Algorithm::Psoc, 2, 30, 100, 1)).unwrap();
        assert_eq!(ari(&fit), 1.0);
        assert_eq!(fit.result.iterations, 100);
        assert_eq!(fit.result.fitness_trace.len(), 100);
    }

    #[test]
    fn psoc_seeded_particle_leads() {
        let ds = easy_blobs();
        let labels = ds.labels().unwrap();
        let mut truth = Vec::new();
        for c in 0..2 {
            let members: Vec<usize> = (0..ds.len()).filter(|&i| labels[i] == c).collect();
            for j in 0..2 {
                truth.push(members.iter().map(|&i| ds.point(i)[j]).sum::<f64>() / members.len() as f64);
            }
        }
        let fit = psoc_fit_seeded(&ds, &cfg(Algorithm::Psoc, 2, 30, 1, 7), &[truth]).unwrap();
        assert_eq!(fit.leaders, vec![0]);
    }

    #[test]
    fn psoc_single_cluster_approaches_mean() {
        let ds = easy_blobs();
        let fit = psoc_fit(&ds, &cfg(Algorithm::Psoc, 1, 20, 50, 3)).unwrap();
        let mean = ds.points().mean_axis(ndarray::Axis(0)).unwrap().insert_axis(ndarray::Axis(0));
        let all = Partition::new(vec![0; ds.len()], 1).unwrap();
        let at_mean = quantization_error(ds.points().view(), mean.view(), &all).unwrap();
        // a single centroid's quantization error is the mean distance, which
        // the geometric median minimizes; the sample mean is an upper-bound
        // reference the swarm should match closely
        assert!(fit.result.quantization_error <= at_mean + 1e-3);
        assert!(fit.partition.no_empty());
    }

    #[test]
    fn lpso_full_neighborhood_equals_psoc() {
        let ds = generate_blobs(3, 20, 2, 0.05, 9).unwrap();
        for seed in 0..3 {
            let a = psoc_fit(&ds, &cfg(Algorithm::Psoc, 3, 12, 40, seed)).unwrap();
            let mut lc = cfg(Algorithm::Lpso, 3, 12, 40, seed);
            lc.lpso_neighborhood_size = 12;
            let b = lpso_fit(&ds, &lc).unwrap();
            assert_eq!(a.particles, b.particles);
            assert_eq!(a.pbest_history, b.pbest_history);
            assert_eq!(a.result.fitness_trace, b.result.fitness_trace);
            assert_eq!(a.centroids, b.centroids);
        }
    }

    #[test]
    fn lpso_neighborhoods_use_their_own_leader() {
        let ds = generate_blobs(3, 20, 2, 0.05, 9).unwrap();
        let mut lc = cfg(Algorithm::Lpso, 3, 12, 15, 4);
        lc.lpso_neighborhood_size = 6;
        let fit = lpso_fit(&ds, &lc).unwrap();
        assert_eq!(fit.leaders.len(), 2);
        assert!(fit.leaders[0] < 6 && fit.leaders[1] >= 6);
    }

    #[test]
    fn lpso_recovers_separated_blobs() {
        let fit = lpso_fit(&easy_blobs(), &cfg(Algorithm::Lpso, 2, 30, 100, 2)).unwrap();
        assert_eq!(ari(&fit), 1.0);
    }

    #[test]
    fn lpso_rejects_bad_neighborhoods() {
        let ds = easy_blobs();
        let mut lc = cfg(Algorithm::Lpso, 2, 10, 5, 0);
        lc.lpso_neighborhood_size = 1;
        assert!(matches!(lpso_fit(&ds, &lc), Err(ConfigError::NeighborhoodSize { .. })));
        lc.lpso_neighborhood_size = 11;
        assert!(matches!(lpso_fit(&ds, &lc), Err(ConfigError::NeighborhoodSize { .. })));
    }

    #[test]
    fn lcpso_neighborhood_layout() {
        let ds = easy_blobs();
        let fit = lcpso_fit(&ds, &cfg(Algorithm::Lcpso, 2, 5, 10, 0)).unwrap();
        assert_eq!(fit.particles.len(), 5);
        assert_eq!(Topology::round_robin(5, 2).sizes(5), vec![3, 2]);
        assert_eq!(fit.leaders.len(), 2);
        assert_eq!(fit.leaders.iter().map(|l| l % 2).collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn lcpso_singleton_neighborhoods_lead_themselves() {
        let ds = easy_blobs();
        let fit = lcpso_fit(&ds, &cfg(Algorithm::Lcpso, 2, 2, 30, 5)).unwrap();
        assert_eq!(fit.leaders, vec![0, 1]);
    }

    #[test]
    fn lcpso_recovers_separated_blobs() {
        let ds = easy_blobs();
        let perfect = (0..10)
            .filter(|&seed| ari(&lcpso_fit(&ds, &cfg(Algorithm::Lcpso, 2, 20, 200, seed)).unwrap()) == 1.0)
            .count();
        assert!(perfect >= 9, "{perfect}/10");
    }

    #[test]
    fn lcpso_mean_attractor_variant_runs() {
        let ds = easy_blobs();
        let mut c = cfg(Algorithm::Lcpso, 2, 10, 50, 1);
        c.pso.cog_variant = CogVariant::MeanAttractor;
        let fit = lcpso_fit(&ds, &c).unwrap();
        assert!(fit.partition.validate(ds.len()).is_ok());
    }

    #[test]
    fn lcpso_needs_a_particle_per_cluster() {
        let ds = generate_blobs(3, 10, 2, 0.05, 1).unwrap();
        assert_eq!(
            lcpso_fit(&ds, &cfg(Algorithm::Lcpso, 3, 2, 5, 0)).unwrap_err(),
            ConfigError::SwarmTooSmall { got: 2, min: 3 }
        );
    }

    #[test]
    fn driver_errors() {
        let ds = generate_blobs(1, 3, 2, 0.05, 1).unwrap();
        assert_eq!(
            psoc_fit(&ds, &cfg(Algorithm::Psoc, 4, 10, 5, 0)).unwrap_err(),
            ConfigError::TooManyClusters { k: 4, n: 3 }
        );
        assert_eq!(
            psoc_fit(&ds, &cfg(Algorithm::Psoc, 2, 1, 5, 0)).unwrap_err(),
            ConfigError::SwarmTooSmall { got: 1, min: 2 }
        );
        assert!(psoc_fit(&ds, &cfg(Algorithm::Lcpso, 2, 10, 5, 0)).is_err());
    }

    #[test]
    fn unlabelled_runs_have_no_ari() {
        let labelled = generate_blobs(2, 10, 2, 0.05, 1).unwrap();
        let ds = Dataset::new("raw", labelled.points().clone(), None).unwrap();
        for alg in [Algorithm::Psoc, Algorithm::Lpso, Algorithm::Lcpso] {
            let fit = fit(&ds, &cfg(alg, 2, 10, 10, 0)).unwrap();
            assert_eq!(fit.result.ari, None);
        }
    }

    #[test]
    fn traces_and_partitions_hold_their_invariants() {
        let ds = generate_blobs(3, 15, 3, 0.1, 8).unwrap();
        for alg in [Algorithm::Psoc, Algorithm::Lpso, Algorithm::Lcpso] {
            for seed in 0..3 {
                let a = fit(&ds, &cfg(alg, 3, 12, 30, seed)).unwrap();
                let b = fit(&ds, &cfg(alg, 3, 12, 30, seed)).unwrap();
                assert_eq!(a.particles, b.particles, "{alg:?} not deterministic");
                assert_eq!(a.result.fitness_trace, b.result.fitness_trace);
                assert!(a.result.fitness_trace.windows(2).all(|w| w[1] <= w[0]));
                for hist in &a.pbest_history {
                    assert_eq!(hist.len(), 31);
                    assert!(hist.windows(2).all(|w| w[1] <= w[0]));
                }
                assert!(a.partition.validate(ds.len()).is_ok());
            }
        }
    }
}
