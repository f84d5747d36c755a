//! Particle swarm state and update rules shared by the clustering drivers.
//!
//! A [`Swarm`] owns its particles, a [`Topology`] that decides which
//! particle each one follows, a [`VelocityRule`] and its own RNG. Fitness
//! comes from an [`Objective`], which sees every particle position at once so
//! that objectives coupling particles together (one particle per centroid)
//! fit the same loop as independent ones (one particle per full solution).

use rand::distr::Open01;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::BoundingBox;
use crate::error::ConfigError;

/// Inertia weight, constant or decreasing linearly over the run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Inertia {
    Constant { value: f64 },
    Linear { start: f64, end: f64 },
}

impl Inertia {
    /// Weight used at zero-based iteration `iter` of `max_iters`.
    pub fn at(&self, iter: usize, max_iters: usize) -> f64 {
        match *self {
            Inertia::Constant { value } => value,
            Inertia::Linear { start, end } => {
                if max_iters <= 1 {
                    start
                } else {
                    let t = iter.min(max_iters - 1) as f64 / (max_iters - 1) as f64;
                    start + (end - start) * t
                }
            }
        }
    }
}

impl Default for Inertia {
    fn default() -> Self {
        Inertia::Linear { start: 0.9, end: 0.4 }
    }
}

/// Per-dimension velocity limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum VelocityClamp {
    Off,
    /// Same absolute limit in every dimension.
    Absolute { value: f64 },
    /// Fraction of the search box extent in each dimension.
    ExtentFraction { value: f64 },
}

impl Default for VelocityClamp {
    fn default() -> Self {
        VelocityClamp::ExtentFraction { value: 0.5 }
    }
}

impl VelocityClamp {
    pub fn limits(&self, bounds: &BoundingBox) -> Option<Vec<f64>> {
        match *self {
            VelocityClamp::Off => None,
            VelocityClamp::Absolute { value } => Some(vec![value; bounds.dim()]),
            VelocityClamp::ExtentFraction { value } => {
                Some((0..bounds.dim()).map(|j| value * bounds.extent(j)).collect())
            }
        }
    }
}

/// Form of the second attractor in the center-of-gravity velocity rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CogVariant {
    /// `φ₂·((pbest − lbest)/2 − x)`
    #[default]
    AsPrinted,
    /// `φ₂·(lbest − x)`
    MeanAttractor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PsoConfig {
    pub swarm_size: usize,
    pub inertia: Inertia,
    /// Upper bound of the cognitive coefficient draw.
    pub ac1: f64,
    /// Upper bound of the social coefficient draw.
    pub ac2: f64,
    pub max_iters: usize,
    pub v_max: VelocityClamp,
    pub seed: u64,
    pub cog_variant: CogVariant,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            swarm_size: 30,
            inertia: Inertia::default(),
            ac1: 1.49,
            ac2: 1.49,
            max_iters: 200,
            v_max: VelocityClamp::default(),
            seed: 0,
            cog_variant: CogVariant::AsPrinted,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.swarm_size < 2 {
            return Err(ConfigError::SwarmTooSmall {
                got: self.swarm_size,
                min: 2,
            });
        }
        if !(self.ac1 >= 0.0 && self.ac2 >= 0.0) {
            return Err(ConfigError::Invalid(format!(
                "acceleration coefficients must be >= 0 (ac1={}, ac2={})",
                self.ac1, self.ac2
            )));
        }
        if self.max_iters == 0 {
            return Err(ConfigError::Invalid("max_iters must be >= 1".into()));
        }
        match self.v_max {
            VelocityClamp::Absolute { value } | VelocityClamp::ExtentFraction { value }
                if !(value > 0.0) =>
            {
                Err(ConfigError::Invalid(format!("v_max must be > 0, got {value}")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub pbest_position: Vec<f64>,
    pub pbest_fitness: f64,
    /// Fitness of `position` at the last evaluation.
    pub fitness: f64,
}

impl Particle {
    /// A particle whose personal best has not been evaluated yet.
    pub fn new(position: Vec<f64>, velocity: Vec<f64>, pbest_position: Vec<f64>) -> Self {
        assert_eq!(position.len(), velocity.len());
        assert_eq!(position.len(), pbest_position.len());
        Self {
            position,
            velocity,
            pbest_position,
            pbest_fitness: f64::INFINITY,
            fitness: f64::INFINITY,
        }
    }

    pub fn dim(&self) -> usize {
        self.position.len()
    }
}

/// Which particles share a social attractor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Topology {
    Global,
    Neighborhoods { membership: Vec<usize>, count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    Global,
    Neighborhood(usize),
}

impl Topology {
    /// Particle `i` joins neighborhood `i % k`, so sizes differ by at most one.
    pub fn round_robin(swarm_size: usize, k: usize) -> Self {
        assert!(k >= 1 && swarm_size >= k);
        Topology::Neighborhoods {
            membership: (0..swarm_size).map(|i| i % k).collect(),
            count: k,
        }
    }

    /// Consecutive index blocks of `block` particles; the last block takes
    /// whatever remains.
    pub fn contiguous(swarm_size: usize, block: usize) -> Self {
        assert!(block >= 1);
        let membership: Vec<usize> = (0..swarm_size).map(|i| i / block).collect();
        let count = membership.last().map_or(0, |m| m + 1);
        Topology::Neighborhoods { membership, count }
    }

    pub fn scope_count(&self) -> usize {
        match self {
            Topology::Global => 1,
            Topology::Neighborhoods { count, .. } => *count,
        }
    }

    pub fn scope_of(&self, particle: usize) -> Scope {
        match self {
            Topology::Global => Scope::Global,
            Topology::Neighborhoods { membership, .. } => Scope::Neighborhood(membership[particle]),
        }
    }

    fn scope_index(&self, particle: usize) -> usize {
        match self.scope_of(particle) {
            Scope::Global => 0,
            Scope::Neighborhood(j) => j,
        }
    }

    pub fn scopes(&self) -> Vec<Scope> {
        match self {
            Topology::Global => vec![Scope::Global],
            Topology::Neighborhoods { count, .. } => (0..*count).map(Scope::Neighborhood).collect(),
        }
    }

    pub fn contains(&self, scope: Scope, particle: usize) -> bool {
        match (scope, self) {
            (Scope::Global, _) => true,
            (Scope::Neighborhood(_), Topology::Global) => false,
            (Scope::Neighborhood(j), Topology::Neighborhoods { membership, .. }) => membership[particle] == j,
        }
    }

    pub fn members(&self, scope: Scope, swarm_size: usize) -> Vec<usize> {
        (0..swarm_size).filter(|&i| self.contains(scope, i)).collect()
    }

    pub fn sizes(&self, swarm_size: usize) -> Vec<usize> {
        self.scopes().into_iter().map(|s| self.members(s, swarm_size).len()).collect()
    }
}

/// `rnd · ac` with `rnd` uniform on the open interval (0, 1).
pub fn draw_phi<R: Rng + ?Sized>(ac: f64, rng: &mut R) -> f64 {
    let rnd: f64 = rng.sample(Open01);
    rnd * ac
}

fn clamp(v: &mut [f64], limits: Option<&[f64]>) {
    if let Some(limits) = limits {
        for (x, &lim) in v.iter_mut().zip(limits) {
            *x = x.clamp(-lim, lim);
        }
    }
}

/// Inertia velocity rule with a cognitive and a social attractor:
/// `v' = ω·v + φ₁·(pbest − x) + φ₂·(social − x)`.
pub fn velocity_update_gbest(
    p: &Particle,
    social: &[f64],
    omega: f64,
    phi1: &[f64],
    phi2: &[f64],
    limits: Option<&[f64]>,
) -> Vec<f64> {
    let mut v: Vec<f64> = (0..p.dim())
        .map(|j| {
            let x = p.position[j];
            omega * p.velocity[j] + phi1[j] * (p.pbest_position[j] - x) + phi2[j] * (social[j] - x)
        })
        .collect();
    clamp(&mut v, limits);
    v
}

/// Center-of-gravity rule:
/// `v' = ω·v + φ₁·((pbest + lbest)/2 − x) + φ₂·(second − x)` where `second`
/// is `(pbest − lbest)/2` as printed, or `lbest` for [`CogVariant::MeanAttractor`].
pub fn velocity_update_cog(
    p: &Particle,
    lbest: &[f64],
    omega: f64,
    phi1: &[f64],
    phi2: &[f64],
    variant: CogVariant,
    limits: Option<&[f64]>,
) -> Vec<f64> {
    let mut v: Vec<f64> = (0..p.dim())
        .map(|j| {
            let x = p.position[j];
            let pb = p.pbest_position[j];
            let lb = lbest[j];
            let center = (pb + lb) / 2.0;
            let second = match variant {
                CogVariant::AsPrinted => (pb - lb) / 2.0,
                CogVariant::MeanAttractor => lb,
            };
            omega * p.velocity[j] + phi1[j] * (center - x) + phi2[j] * (second - x)
        })
        .collect();
    clamp(&mut v, limits);
    v
}

/// `x' = x + v'`, reflected back into `bounds`. A coordinate that leaves the
/// box is mirrored at the violated bound and its velocity component negated.
pub fn position_update(p: &mut Particle, velocity: Vec<f64>, bounds: &BoundingBox) {
    debug_assert_eq!(bounds.dim(), p.dim());
    p.velocity = velocity;
    for j in 0..p.dim() {
        let (lo, hi) = (bounds.min[j], bounds.max[j]);
        let mut x = p.position[j] + p.velocity[j];
        if hi <= lo {
            x = lo;
            p.velocity[j] = 0.0;
        } else if x > hi {
            x = hi - (x - hi);
            p.velocity[j] = -p.velocity[j];
        } else if x < lo {
            x = lo + (lo - x);
            p.velocity[j] = -p.velocity[j];
        }
        // overshoot wider than the box itself
        p.position[j] = x.clamp(lo, hi);
    }
}

/// Replaces the personal best when `fitness` is strictly better.
pub fn pbest_update(p: &mut Particle, fitness: f64) -> bool {
    p.fitness = fitness;
    if fitness < p.pbest_fitness {
        p.pbest_fitness = fitness;
        p.pbest_position.clone_from(&p.position);
        true
    } else {
        false
    }
}

/// Index of the lowest personal-best fitness within `scope`, ties to the
/// lowest index. `None` when the scope is empty.
pub fn best_of(topology: &Topology, particles: &[Particle], scope: Scope) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, p) in particles.iter().enumerate() {
        if !topology.contains(scope, i) {
            continue;
        }
        match best {
            Some(b) if !(p.pbest_fitness < particles[b].pbest_fitness) => {}
            _ => best = Some(i),
        }
    }
    best
}

/// How particle fitness is computed for a swarm.
pub trait Objective {
    /// Fitness of every position, same order. Lower is better.
    fn evaluate(&mut self, positions: &[&[f64]]) -> Vec<f64>;

    /// Ranks positions when no particle in a scope has a finite personal
    /// best. Lower wins.
    fn fallback_rank(&self, _position: &[f64]) -> f64 {
        0.0
    }
}

impl<F> Objective for F
where
    F: FnMut(&[f64]) -> f64,
{
    fn evaluate(&mut self, positions: &[&[f64]]) -> Vec<f64> {
        positions.iter().map(|p| self(p)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VelocityRule {
    /// Inertia + personal best + leader.
    Inertia,
    /// Inertia + center of gravity of personal best and leader.
    CenterOfGravity(CogVariant),
}

/// A swarm and everything needed to advance it one iteration.
#[derive(Debug, Clone)]
pub struct Swarm {
    particles: Vec<Particle>,
    topology: Topology,
    rule: VelocityRule,
    inertia: Inertia,
    ac1: f64,
    ac2: f64,
    max_iters: usize,
    bounds: BoundingBox,
    limits: Option<Vec<f64>>,
    rng: ChaCha8Rng,
    iteration: usize,
    best_trace: Vec<f64>,
    pbest_history: Vec<Vec<f64>>,
}

impl Swarm {
    /// Builds the swarm and evaluates the initial personal bests.
    pub fn new(
        particles: Vec<Particle>,
        topology: Topology,
        rule: VelocityRule,
        cfg: &PsoConfig,
        bounds: BoundingBox,
        rng: ChaCha8Rng,
        objective: &mut impl Objective,
    ) -> Self {
        assert!(!particles.is_empty(), "empty swarm");
        if let Topology::Neighborhoods { membership, .. } = &topology {
            assert_eq!(membership.len(), particles.len(), "topology does not cover the swarm");
        }
        let limits = cfg.v_max.limits(&bounds);
        let mut particles = particles;
        let fitness = {
            let pb: Vec<&[f64]> = particles.iter().map(|p| p.pbest_position.as_slice()).collect();
            objective.evaluate(&pb)
        };
        for (p, f) in particles.iter_mut().zip(fitness) {
            p.pbest_fitness = f;
        }
        let pbest_history = particles.iter().map(|p| vec![p.pbest_fitness]).collect();
        Self {
            particles,
            topology,
            rule,
            inertia: cfg.inertia,
            ac1: cfg.ac1,
            ac2: cfg.ac2,
            max_iters: cfg.max_iters,
            bounds,
            limits,
            rng,
            iteration: 0,
            best_trace: Vec::new(),
            pbest_history,
        }
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Lowest personal-best fitness in the swarm after each iteration.
    pub fn best_trace(&self) -> &[f64] {
        &self.best_trace
    }

    /// Personal-best fitness of every particle: the initial value followed by
    /// one entry per iteration.
    pub fn pbest_history(&self) -> &[Vec<f64>] {
        &self.pbest_history
    }

    /// Leader of `scope`. If nobody in the scope has a finite personal best
    /// the objective's fallback rank decides.
    pub fn leader(&self, scope: Scope, objective: &impl Objective) -> usize {
        let best = best_of(&self.topology, &self.particles, scope).expect("scope has no particles");
        if self.particles[best].pbest_fitness.is_finite() {
            return best;
        }
        let mut pick = (best, f64::INFINITY);
        for i in self.topology.members(scope, self.particles.len()) {
            let rank = objective.fallback_rank(&self.particles[i].pbest_position);
            if rank < pick.1 {
                pick = (i, rank);
            }
        }
        pick.0
    }

    pub fn leaders(&self, objective: &impl Objective) -> Vec<usize> {
        self.topology
            .scopes()
            .into_iter()
            .map(|s| self.leader(s, objective))
            .collect()
    }

    /// One synchronous iteration: evaluate, update personal bests, pick
    /// leaders, then move every particle.
    pub fn step(&mut self, objective: &mut impl Objective) {
        let fitness = {
            let pos: Vec<&[f64]> = self.particles.iter().map(|p| p.position.as_slice()).collect();
            objective.evaluate(&pos)
        };
        for ((p, f), hist) in self.particles.iter_mut().zip(fitness).zip(&mut self.pbest_history) {
            pbest_update(p, f);
            hist.push(p.pbest_fitness);
        }

        let leaders = self.leaders(objective);
        let best = self
            .particles
            .iter()
            .map(|p| p.pbest_fitness)
            .fold(f64::INFINITY, f64::min);
        self.best_trace.push(best);

        let omega = self.inertia.at(self.iteration, self.max_iters);
        let dim = self.bounds.dim();
        for i in 0..self.particles.len() {
            let leader = leaders[self.topology.scope_index(i)];
            let social = self.particles[leader].pbest_position.clone();
            let phi1: Vec<f64> = (0..dim).map(|_| draw_phi(self.ac1, &mut self.rng)).collect();
            let phi2: Vec<f64> = (0..dim).map(|_| draw_phi(self.ac2, &mut self.rng)).collect();
            let p = &self.particles[i];
            let v = match self.rule {
                VelocityRule::Inertia => {
                    velocity_update_gbest(p, &social, omega, &phi1, &phi2, self.limits.as_deref())
                }
                VelocityRule::CenterOfGravity(variant) => velocity_update_cog(
                    p,
                    &social,
                    omega,
                    &phi1,
                    &phi2,
                    variant,
                    self.limits.as_deref(),
                ),
            };
            position_update(&mut self.particles[i], v, &self.bounds);
        }
        self.iteration += 1;
    }

    /// Steps until `max_iters` iterations have run.
    pub fn run(&mut self, objective: &mut impl Objective) {
        while self.iteration < self.max_iters {
            self.step(objective);
        }
    }
}

/// Uniform velocity in `[-scale·extent, scale·extent]` per dimension.
pub fn random_velocity<R: Rng + ?Sized>(bounds: &BoundingBox, scale: f64, rng: &mut R) -> Vec<f64> {
    (0..bounds.dim())
        .map(|j| {
            let r = scale * bounds.extent(j);
            if r > 0.0 {
                rng.random_range(-r..=r)
            } else {
                0.0
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn particle(x: &[f64], v: &[f64], pbest: &[f64]) -> Particle {
        Particle::new(x.to_vec(), v.to_vec(), pbest.to_vec())
    }

    #[test]
    fn phi_range_and_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(draw_phi(0.0, &mut rng), 0.0);
        let draws: Vec<f64> = (0..100_000).map(|_| draw_phi(2.0, &mut rng)).collect();
        assert!(draws.iter().all(|&d| d > 0.0 && d < 2.0));
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        assert!((mean - 1.0).abs() <= 0.02, "mean {mean}");
    }

    #[test]
    fn gbest_rule_examples() {
        let still = particle(&[3.0, -1.0], &[0.0, 0.0], &[3.0, -1.0]);
        assert_eq!(velocity_update_gbest(&still, &[3.0, -1.0], 0.7, &[1.2, 0.3], &[0.4, 1.1], None), vec![0.0, 0.0]);

        let moving = particle(&[1.0, 2.0], &[0.5, -4.0], &[7.0, 7.0]);
        assert_eq!(velocity_update_gbest(&moving, &[9.0, 9.0], 1.0, &[0.0; 2], &[0.0; 2], None), vec![0.5, -4.0]);

        let p = particle(&[1.0], &[2.0], &[3.0]);
        assert_eq!(velocity_update_gbest(&p, &[5.0], 0.5, &[1.0], &[1.0], None), vec![7.0]);
        assert_eq!(velocity_update_gbest(&p, &[5.0], 0.5, &[1.0], &[1.0], Some(&[2.5])), vec![2.5]);
    }

    #[test]
    fn cog_rule_examples() {
        let p = particle(&[2.0], &[1.0], &[4.0]);
        assert_eq!(velocity_update_cog(&p, &[6.0], 0.5, &[1.0], &[1.0], CogVariant::AsPrinted, None), vec![0.5]);

        let q = particle(&[2.0, 3.0], &[-1.5, 0.25], &[8.0, 1.0]);
        assert_eq!(
            velocity_update_cog(&q, &[0.0, 4.0], 1.0, &[0.0; 2], &[0.0; 2], CogVariant::AsPrinted, None),
            vec![-1.5, 0.25]
        );

        let z = particle(&[0.0], &[0.0], &[0.0]);
        assert_eq!(velocity_update_cog(&z, &[0.0], 0.9, &[1.3], &[0.2], CogVariant::AsPrinted, None), vec![0.0]);
    }

    #[test]
    fn cog_mean_attractor_variant() {
        // 0.5 + (5 - 2) + (6 - 2)
        let p = particle(&[2.0], &[1.0], &[4.0]);
        assert_eq!(velocity_update_cog(&p, &[6.0], 0.5, &[1.0], &[1.0], CogVariant::MeanAttractor, None), vec![7.5]);
    }

    #[test]
    fn position_examples() {
        let bx = BoundingBox::new(vec![0.0, 0.0], vec![10.0, 10.0]);
        let mut p = particle(&[1.0, 1.0], &[0.0, 0.0], &[1.0, 1.0]);
        position_update(&mut p, vec![0.0, 0.0], &bx);
        assert_eq!(p.position, vec![1.0, 1.0]);

        let b1 = BoundingBox::new(vec![0.0], vec![10.0]);
        let mut p = particle(&[1.0], &[0.0], &[1.0]);
        position_update(&mut p, vec![2.0], &b1);
        assert_eq!(p.position, vec![3.0]);

        let unit = BoundingBox::new(vec![0.0], vec![1.0]);
        let mut p = particle(&[0.9], &[0.0], &[0.9]);
        position_update(&mut p, vec![0.3], &unit);
        assert!((p.position[0] - 0.8).abs() < 1e-15);
        assert_eq!(p.velocity, vec![-0.3]);

        let mut p = particle(&[0.1], &[0.0], &[0.1]);
        position_update(&mut p, vec![-0.3], &unit);
        assert!((p.position[0] - 0.2).abs() < 1e-15);
        assert_eq!(p.velocity, vec![0.3]);

        let flat = BoundingBox::new(vec![2.0], vec![2.0]);
        let mut p = particle(&[2.0], &[0.0], &[2.0]);
        position_update(&mut p, vec![0.7], &flat);
        assert_eq!((p.position[0], p.velocity[0]), (2.0, 0.0));
    }

    #[test]
    fn pbest_fold() {
        let mut p = particle(&[0.0], &[0.0], &[0.0]);
        p.pbest_fitness = 5.0;
        assert!(!pbest_update(&mut p, 5.0));
        assert!(pbest_update(&mut p, 4.0));

        let mut p = particle(&[0.0], &[0.0], &[0.0]);
        let mut trace = Vec::new();
        for (step, f) in [5.0, 3.0, 4.0, 2.0].into_iter().enumerate() {
            p.position = vec![step as f64];
            pbest_update(&mut p, f);
            trace.push(p.pbest_fitness);
        }
        assert_eq!(trace, vec![5.0, 3.0, 3.0, 2.0]);
        assert_eq!(p.pbest_position, vec![3.0]);
    }

    fn with_fitness(values: &[f64]) -> Vec<Particle> {
        values
            .iter()
            .map(|&f| {
                let mut p = particle(&[0.0], &[0.0], &[0.0]);
                p.pbest_fitness = f;
                p
            })
            .collect()
    }

    #[test]
    fn best_of_examples() {
        let ps = with_fitness(&[3.0, 1.0, 1.0]);
        assert_eq!(best_of(&Topology::Global, &ps, Scope::Global), Some(1));

        let single = Topology::Neighborhoods { membership: vec![0, 1, 1], count: 2 };
        assert_eq!(best_of(&single, &ps, Scope::Neighborhood(0)), Some(0));

        let one_hood = Topology::round_robin(3, 1);
        assert_eq!(
            best_of(&one_hood, &ps, Scope::Neighborhood(0)),
            best_of(&Topology::Global, &ps, Scope::Global)
        );
    }

    #[test]
    fn topology_builders() {
        assert_eq!(Topology::round_robin(5, 2).sizes(5), vec![3, 2]);
        assert_eq!(Topology::contiguous(7, 3).sizes(7), vec![3, 3, 1]);
        assert_eq!(Topology::contiguous(6, 6).scope_count(), 1);
    }

    #[test]
    fn inertia_schedule() {
        let lin = Inertia::default();
        assert_eq!(lin.at(0, 11), 0.9);
        assert!((lin.at(10, 11) - 0.4).abs() < 1e-15);
        assert!((lin.at(5, 11) - 0.65).abs() < 1e-15);
        assert_eq!(lin.at(0, 1), 0.9);
        assert_eq!(Inertia::Constant { value: 0.7 }.at(3, 10), 0.7);
    }

    #[test]
    fn config_validation() {
        assert!(PsoConfig::default().validate().is_ok());
        let bad = PsoConfig { swarm_size: 1, ..Default::default() };
        assert_eq!(bad.validate(), Err(ConfigError::SwarmTooSmall { got: 1, min: 2 }));
        assert!(PsoConfig { ac1: -1.0, ..Default::default() }.validate().is_err());
        assert!(PsoConfig { max_iters: 0, ..Default::default() }.validate().is_err());
        assert!(PsoConfig { v_max: VelocityClamp::Absolute { value: 0.0 }, ..Default::default() }
            .validate()
            .is_err());
    }

    fn sphere_swarm(n: usize, topology: Topology, seed: u64, clamp: VelocityClamp) -> (Swarm, impl FnMut(&[f64]) -> f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bounds = BoundingBox::new(vec![-5.0; 3], vec![5.0; 3]);
        let particles = (0..n)
            .map(|_| {
                let x: Vec<f64> = (0..3).map(|_| rng.random_range(-5.0..5.0)).collect();
                let pb: Vec<f64> = (0..3).map(|_| rng.random_range(-5.0..5.0)).collect();
                Particle::new(x, random_velocity(&bounds, 0.1, &mut rng), pb)
            })
            .collect();
        let cfg = PsoConfig { swarm_size: n, max_iters: 60, v_max: clamp, ..Default::default() };
        let mut f = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        let swarm = Swarm::new(particles, topology, VelocityRule::Inertia, &cfg, bounds, rng, &mut f);
        (swarm, f)
    }

    #[test]
    fn swarm_minimizes_sphere() {
        let (mut swarm, mut f) = sphere_swarm(20, Topology::Global, 3, VelocityClamp::default());
        swarm.run(&mut f);
        assert_eq!(swarm.best_trace().len(), 60);
        assert!(*swarm.best_trace().last().unwrap() < 1e-2);
    }

    #[test]
    fn single_particle_swarm_follows_itself() {
        let (mut swarm, mut f) = sphere_swarm(1, Topology::Global, 8, VelocityClamp::default());
        swarm.run(&mut f);
        assert_eq!(swarm.leaders(&f), vec![0]);
        assert!(swarm.best_trace().windows(2).all(|w| w[1] <= w[0]));
        assert!(swarm.particles()[0].position.iter().all(|x| x.abs() <= 5.0));
    }

    #[test]
    fn one_neighborhood_matches_global() {
        let (mut a, mut fa) = sphere_swarm(12, Topology::Global, 5, VelocityClamp::default());
        let (mut b, mut fb) = sphere_swarm(12, Topology::round_robin(12, 1), 5, VelocityClamp::default());
        for _ in 0..30 {
            assert_eq!(a.leaders(&fa), b.leaders(&fb));
            a.step(&mut fa);
            b.step(&mut fb);
        }
        assert_eq!(a.particles(), b.particles());
    }

    struct Sparse;
    impl Objective for Sparse {
        fn evaluate(&mut self, positions: &[&[f64]]) -> Vec<f64> {
            vec![f64::INFINITY; positions.len()]
        }
        fn fallback_rank(&self, position: &[f64]) -> f64 {
            (position[0] - 3.0).abs()
        }
    }

    #[test]
    fn fallback_leader_when_scope_has_no_finite_fitness() {
        let bounds = BoundingBox::new(vec![0.0], vec![10.0]);
        let particles = [0.0, 9.0, 2.5, 7.0]
            .iter()
            .map(|&x| Particle::new(vec![x], vec![0.0], vec![x]))
            .collect();
        let cfg = PsoConfig { swarm_size: 4, ..Default::default() };
        let swarm = Swarm::new(
            particles,
            Topology::round_robin(4, 2),
            VelocityRule::CenterOfGravity(CogVariant::AsPrinted),
            &cfg,
            bounds,
            ChaCha8Rng::seed_from_u64(0),
            &mut Sparse,
        );
        // neighborhood 0 = {0, 2}, neighborhood 1 = {1, 3}
        assert_eq!(swarm.leaders(&Sparse), vec![2, 3]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn swarm_invariants(seed in 0u64..10_000, n in 2usize..12, hoods in 1usize..4) {
            let hoods = hoods.min(n);
            let (mut swarm, mut f) = sphere_swarm(n, Topology::round_robin(n, hoods), seed, VelocityClamp::Absolute { value: 0.75 });
            let (mut twin, mut g) = sphere_swarm(n, Topology::round_robin(n, hoods), seed, VelocityClamp::Absolute { value: 0.75 });
            for _ in 0..25 {
                swarm.step(&mut f);
                twin.step(&mut g);
                let gbest = best_of(swarm.topology(), swarm.particles(), Scope::Global).unwrap();
                let g_fit = swarm.particles()[gbest].pbest_fitness;
                for p in swarm.particles() {
                    prop_assert!(p.velocity.iter().all(|v| v.abs() <= 0.75));
                    prop_assert!(g_fit <= p.pbest_fitness);
                }
            }
            for hist in swarm.pbest_history() {
                prop_assert!(hist.windows(2).all(|w| w[1] <= w[0]));
            }
            prop_assert_eq!(swarm.particles(), twin.particles());
        }
    }
}
