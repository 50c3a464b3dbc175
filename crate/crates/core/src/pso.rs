//! Constriction-factor particle swarm over (tilt, azimuth, panel count) with a
//! multi-stage penalty for bound violations and hypercube nearest-vertex
//! discretization.
//!
//! The optimizer minimizes. Callers maximizing a quantity pass its negation.

use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DIMENSIONS: usize = 3;

pub type Point = [f64; DIMENSIONS];

/// `g(x) = |x − mid| − half_width ≤ 0`, i.e. `lo ≤ x ≤ hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConstraint {
    pub lo: f64,
    pub hi: f64,
}

impl BoundConstraint {
    pub fn new(lo: f64, hi: f64) -> Self {
        BoundConstraint { lo, hi }
    }

    pub fn g(&self, x: f64) -> f64 {
        let mid = 0.5 * (self.lo + self.hi);
        let half = 0.5 * (self.hi - self.lo);
        (x - mid).abs() - half
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub tilt: BoundConstraint,
    pub azimuth: BoundConstraint,
    pub panels: BoundConstraint,
}

impl ConstraintSet {
    /// Tilt in [0, 90], azimuth in [−180, 180], panels in [0, z_max].
    pub fn with_max_panels(z_max: u32) -> Self {
        ConstraintSet {
            tilt: BoundConstraint::new(0.0, 90.0),
            azimuth: BoundConstraint::new(-180.0, 180.0),
            panels: BoundConstraint::new(0.0, z_max as f64),
        }
    }

    /// The printed constraint forms `|β − 90| − 90`, `|γ| − 180` and
    /// `|Z − Z_max| − Z_max`, which admit β up to 180 and Z up to 2·Z_max.
    pub fn literal(z_max: u32) -> Self {
        ConstraintSet {
            tilt: BoundConstraint::new(0.0, 180.0),
            azimuth: BoundConstraint::new(-180.0, 180.0),
            panels: BoundConstraint::new(0.0, 2.0 * z_max as f64),
        }
    }

    pub fn bounds(&self) -> [BoundConstraint; DIMENSIONS] {
        [self.tilt, self.azimuth, self.panels]
    }

    pub fn g(&self, x: &Point) -> Point {
        let b = self.bounds();
        [b[0].g(x[0]), b[1].g(x[1]), b[2].g(x[2])]
    }

    pub fn is_feasible(&self, x: &Point) -> bool {
        self.g(x).iter().all(|&g| g <= 0.0)
    }

    /// Sum of positive constraint values.
    pub fn violation(&self, x: &Point) -> f64 {
        self.g(x).iter().map(|g| g.max(0.0)).sum()
    }

    pub fn clamp(&self, x: &Point) -> Point {
        let b = self.bounds();
        std::array::from_fn(|j| x[j].clamp(b[j].lo, b[j].hi))
    }

    pub fn validate(&self) -> Result<()> {
        for b in self.bounds() {
            if !(b.lo <= b.hi) {
                return Err(Error::Config(format!("bound [{}, {}] is empty", b.lo, b.hi)));
            }
        }
        Ok(())
    }
}

/// Dynamically increasing penalty weight `h(n) = n·√n`.
pub fn penalty_weight(iteration: usize) -> f64 {
    let n = iteration as f64;
    n * n.sqrt()
}

/// Multi-stage assignment `θ(y)`.
pub fn penalty_stage(y: f64) -> f64 {
    if y < 0.001 {
        10.0
    } else if y < 0.1 {
        20.0
    } else if y < 1.0 {
        100.0
    } else {
        300.0
    }
}

pub fn penalty_power(y: f64) -> i32 {
    if y < 1.0 {
        1
    } else {
        2
    }
}

/// `H(x, n) = h(n) Σ θ(y_j) y_j^α(y_j)` with `y_j = max(0, g_j(x))`.
pub fn penalty(position: &Point, iteration: usize, constraints: &ConstraintSet) -> f64 {
    let sum: f64 = constraints
        .g(position)
        .iter()
        .map(|&g| g.max(0.0))
        .filter(|&y| y > 0.0)
        .map(|y| penalty_stage(y) * y.powi(penalty_power(y)))
        .sum();
    if sum == 0.0 {
        0.0
    } else {
        penalty_weight(iteration) * sum
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Discretization {
    /// Fitness is always measured at the best integer vertex around a particle.
    #[default]
    VertexSnap,
    /// Particles are evaluated where they are; only the final answer is snapped.
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SwarmConfig {
    pub particle_count: usize,
    pub max_iterations: usize,
    pub c1: f64,
    pub c2: f64,
    pub chi: f64,
    pub seed: u64,
    /// Minimum improvement of the global best over `stall_iterations`.
    pub tolerance: f64,
    pub stall_iterations: usize,
    /// Per-dimension velocity cap; half the box width when unset.
    pub v_max: Option<Point>,
    pub discretization: Discretization,
}

impl Default for SwarmConfig {
    fn default() -> Self {
        SwarmConfig {
            particle_count: 50,
            max_iterations: 200,
            c1: 2.05,
            c2: 2.05,
            chi: 0.729,
            seed: 1,
            tolerance: 1e-10,
            stall_iterations: 30,
            v_max: None,
            discretization: Discretization::VertexSnap,
        }
    }
}

impl SwarmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.particle_count < 2 {
            return Err(Error::Config("swarm needs at least two particles".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be positive".into()));
        }
        Ok(())
    }

    fn velocity_cap(&self, constraints: &ConstraintSet) -> Point {
        self.v_max.unwrap_or_else(|| {
            let b = constraints.bounds();
            std::array::from_fn(|j| 0.5 * b[j].width())
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Point,
    pub velocity: Point,
    pub personal_best_position: Point,
    pub personal_best_score: f64,
}

/// `χ[v + c1·r·(P − x) + c2·R·(G − x)]` per component, clamped to `±v_max`.
pub fn constricted_velocity(
    particle: &Particle,
    global_best: &Point,
    cfg: &SwarmConfig,
    v_max: &Point,
    r: &Point,
    big_r: &Point,
) -> Point {
    std::array::from_fn(|j| {
        let x = particle.position[j];
        let v = cfg.chi
            * (particle.velocity[j]
                + cfg.c1 * r[j] * (particle.personal_best_position[j] - x)
                + cfg.c2 * big_r[j] * (global_best[j] - x));
        v.clamp(-v_max[j], v_max[j])
    })
}

/// Velocity update drawing the two uniform(0, 1) sequences from `rng`.
pub fn velocity_update<R: Rng>(
    particle: &Particle,
    global_best: &Point,
    cfg: &SwarmConfig,
    v_max: &Point,
    rng: &mut R,
) -> Point {
    let r: Point = std::array::from_fn(|_| rng.random::<f64>());
    let big_r: Point = std::array::from_fn(|_| rng.random::<f64>());
    constricted_velocity(particle, global_best, cfg, v_max, &r, &big_r)
}

/// Integer vertices of the unit cube containing `position`, in lexicographic order.
pub fn cube_vertices(position: &Point) -> Vec<Point> {
    let axes: [Vec<f64>; DIMENSIONS] = std::array::from_fn(|j| {
        let (lo, hi) = (position[j].floor(), position[j].ceil());
        if lo == hi {
            vec![lo]
        } else {
            vec![lo, hi]
        }
    });
    let mut out = Vec::with_capacity(8);
    for &a in &axes[0] {
        for &b in &axes[1] {
            for &c in &axes[2] {
                out.push([a, b, c]);
            }
        }
    }
    out
}

/// Best integer vertex around `position`; ties go to the lexicographically lowest.
pub fn nearest_vertex_snap(position: &Point, mut objective: impl FnMut(&Point) -> f64) -> Point {
    let mut best: Option<(Point, f64)> = None;
    for v in cube_vertices(position) {
        let score = objective(&v);
        if best.is_none_or(|(_, s)| score < s) {
            best = Some((v, score));
        }
    }
    best.expect("a cube has at least one vertex").0
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    /// Integral, feasible optimum.
    pub position: Point,
    /// Objective at `position`.
    pub score: f64,
    /// Swarm global best before the final snap (equals `position` in vertex mode).
    pub unsnapped_position: Point,
    /// Penalized fitness of `unsnapped_position`.
    pub unsnapped_score: f64,
    /// Global best fitness after initialization (index 0) and each iteration.
    pub history: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
}

type Key = [u64; DIMENSIONS];

fn vertex_key(p: &Point) -> Key {
    std::array::from_fn(|j| p[j].to_bits())
}

struct Evaluator<'a, F> {
    objective: &'a F,
    constraints: &'a ConstraintSet,
    memo: HashMap<Key, f64>,
    evaluations: usize,
}

impl<F: Fn(&Point) -> f64 + Sync> Evaluator<'_, F> {
    /// Objective at the box projection of each point, evaluated in parallel.
    fn raw(&mut self, points: &[Point]) -> Vec<f64> {
        self.evaluations += points.len();
        let (objective, constraints) = (self.objective, self.constraints);
        points
            .par_iter()
            .map(|p| objective(&constraints.clamp(p)))
            .collect()
    }

    /// Objective at (clamped) integer vertices, memoized.
    fn vertices(&mut self, needed: &BTreeSet<Key>) {
        let missing: Vec<Key> = needed
            .iter()
            .filter(|k| !self.memo.contains_key(*k))
            .copied()
            .collect();
        let points: Vec<Point> = missing
            .iter()
            .map(|k| std::array::from_fn(|j| f64::from_bits(k[j])))
            .collect();
        let values = self.raw(&points);
        self.memo.extend(missing.into_iter().zip(values));
    }
}

/// Candidate (point, fitness, objective) for one particle.
type Scored = (Point, f64, f64);

fn score_particles<F: Fn(&Point) -> f64 + Sync>(
    eval: &mut Evaluator<'_, F>,
    particles: &[Particle],
    iteration: usize,
    mode: Discretization,
) -> Vec<Scored> {
    let constraints = *eval.constraints;
    match mode {
        Discretization::Continuous => {
            let points: Vec<Point> = particles.iter().map(|p| p.position).collect();
            let values = eval.raw(&points);
            points
                .into_iter()
                .zip(values)
                .map(|(p, f)| (p, f + penalty(&p, iteration, &constraints), f))
                .collect()
        }
        Discretization::VertexSnap => {
            let per_particle: Vec<Vec<Point>> =
                particles.iter().map(|p| cube_vertices(&p.position)).collect();
            let needed: BTreeSet<_> = per_particle
                .iter()
                .flatten()
                .map(|v| vertex_key(&constraints.clamp(v)))
                .collect();
            eval.vertices(&needed);
            per_particle
                .iter()
                .map(|verts| {
                    let mut best: Option<Scored> = None;
                    for v in verts {
                        let f = eval.memo[&vertex_key(&constraints.clamp(v))];
                        let fitness = f + penalty(v, iteration, &constraints);
                        if best.is_none_or(|(_, s, _)| fitness < s) {
                            best = Some((*v, fitness, f));
                        }
                    }
                    best.expect("non-empty cube")
                })
                .collect()
        }
    }
}

fn particle_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

/// Minimize `objective` over the constraint box.
///
/// The objective is evaluated at the box projection of every candidate, so it
/// only needs to be meaningful inside the box; bound violations are priced by
/// [`penalty`]. Each particle owns an RNG stream derived from the seed, so
/// results are reproducible regardless of thread scheduling.
pub fn optimize<F>(objective: F, constraints: &ConstraintSet, cfg: &SwarmConfig) -> Result<OptimizeResult>
where
    F: Fn(&Point) -> f64 + Sync,
{
    cfg.validate()?;
    constraints.validate()?;
    let bounds = constraints.bounds();
    let v_max = cfg.velocity_cap(constraints);
    let mut rngs: Vec<ChaCha8Rng> = (0..cfg.particle_count)
        .map(|i| particle_rng(cfg.seed, i))
        .collect();

    let mut particles: Vec<Particle> = rngs
        .iter_mut()
        .map(|rng| {
            let position: Point = std::array::from_fn(|j| bounds[j].lo + rng.random::<f64>() * bounds[j].width());
            let velocity: Point =
                std::array::from_fn(|j| (rng.random::<f64>() * 2.0 - 1.0) * 0.1 * bounds[j].width());
            Particle {
                position,
                velocity,
                personal_best_position: position,
                personal_best_score: f64::INFINITY,
            }
        })
        .collect();

    let mut eval = Evaluator {
        objective: &objective,
        constraints,
        memo: HashMap::new(),
        evaluations: 0,
    };

    let mut global: (Point, f64) = (particles[0].position, f64::INFINITY);
    let mut best_feasible: Option<(Point, f64)> = None;
    let mut history = Vec::with_capacity(cfg.max_iterations + 1);

    let mut absorb = |particles: &mut [Particle], scored: Vec<Scored>, global: &mut (Point, f64)| {
        for (p, (point, fitness, f)) in particles.iter_mut().zip(scored) {
            if fitness < p.personal_best_score {
                p.personal_best_score = fitness;
                p.personal_best_position = point;
            }
            if constraints.is_feasible(&point) && best_feasible.is_none_or(|(_, s)| f < s) {
                best_feasible = Some((point, f));
            }
        }
        for p in particles.iter() {
            if p.personal_best_score < global.1 {
                *global = (p.personal_best_position, p.personal_best_score);
            }
        }
    };

    let scored = score_particles(&mut eval, &particles, 1, cfg.discretization);
    absorb(&mut particles, scored, &mut global);
    history.push(global.1);

    let mut iterations = 0;
    for n in 1..=cfg.max_iterations {
        for (p, rng) in particles.iter_mut().zip(rngs.iter_mut()) {
            p.velocity = velocity_update(p, &global.0, cfg, &v_max, rng);
            for j in 0..DIMENSIONS {
                p.position[j] += p.velocity[j];
            }
        }
        let scored = score_particles(&mut eval, &particles, n, cfg.discretization);
        absorb(&mut particles, scored, &mut global);
        history.push(global.1);
        iterations = n;

        if history.len() > cfg.stall_iterations && cfg.stall_iterations > 0 {
            let past = history[history.len() - 1 - cfg.stall_iterations];
            if past - global.1 < cfg.tolerance {
                break;
            }
        }
    }

    let Some(feasible) = best_feasible else {
        return Err(Error::NoFeasibleSolution {
            position: global.0,
            violation: constraints.violation(&global.0),
        });
    };

    let (position, score) = match cfg.discretization {
        Discretization::VertexSnap => feasible,
        Discretization::Continuous => {
            let base = constraints.clamp(&global.0);
            let vertices = cube_vertices(&base);
            let values = eval.raw(&vertices);
            let lookup: Vec<(Point, f64)> = vertices.into_iter().zip(values).collect();
            let snapped = nearest_vertex_snap(&base, |v| {
                lookup.iter().find(|(p, _)| p == v).map_or(f64::INFINITY, |(_, s)| *s)
            });
            let score = lookup.iter().find(|(p, _)| *p == snapped).map(|(_, s)| *s).unwrap_or(f64::INFINITY);
            (snapped, score)
        }
    };

    Ok(OptimizeResult {
        position,
        score,
        unsnapped_position: global.0,
        unsnapped_score: global.1,
        history,
        iterations,
        evaluations: eval.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn box30() -> ConstraintSet {
        ConstraintSet::with_max_panels(30)
    }

    #[test]
    fn penalty_examples() {
        let c = box30();
        assert_eq!(penalty(&[30.0, 10.0, 10.0], 1, &c), 0.0);
        assert_eq!(penalty(&[30.0, 200.0, 10.0], 4, &c), 960000.0);
        assert_abs_diff_eq!(penalty(&[30.0, 10.0, 30.5], 1, &c), 50.0, epsilon = 1e-12);
        assert_abs_diff_eq!(penalty(&[-0.0005, 0.0, 0.0], 1, &c), 10.0 * 0.0005, epsilon = 1e-12);
        assert_abs_diff_eq!(penalty(&[0.0, 0.0, -0.05], 1, &c), 20.0 * 0.05, epsilon = 1e-12);
    }

    #[test]
    fn literal_constraints_match_printed_forms() {
        let c = ConstraintSet::literal(30);
        for b in [-5.0f64, 100.0, 185.0] {
            assert_abs_diff_eq!(c.tilt.g(b), (b - 90.0).abs() - 90.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(c.panels.g(45.0), (45.0f64 - 30.0).abs() - 30.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.azimuth.g(-190.0), 10.0, epsilon = 1e-12);
    }

    #[test]
    fn velocity_examples() {
        let cfg = SwarmConfig::default();
        let vmax = [1e9; 3];
        let p = Particle {
            position: [1.0, 2.0, 3.0],
            velocity: [0.5, -1.0, 2.0],
            personal_best_position: [1.0, 2.0, 3.0],
            personal_best_score: 0.0,
        };
        let v = constricted_velocity(&p, &[1.0, 2.0, 3.0], &cfg, &vmax, &[0.3; 3], &[0.9; 3]);
        for j in 0..3 {
            assert_abs_diff_eq!(v[j], 0.729 * p.velocity[j], epsilon = 1e-15);
        }

        let q = Particle {
            position: [0.0; 3],
            velocity: [0.0; 3],
            personal_best_position: [1.0, -2.0, 0.5],
            personal_best_score: 0.0,
        };
        let v = constricted_velocity(&q, &[1.0, -2.0, 0.5], &cfg, &vmax, &[1.0; 3], &[1.0; 3]);
        for (j, d) in [1.0, -2.0, 0.5].into_iter().enumerate() {
            assert_abs_diff_eq!(v[j], 0.729 * 4.1 * d, epsilon = 1e-12);
        }

        let zero = SwarmConfig { chi: 0.0, ..cfg };
        assert_eq!(constricted_velocity(&q, &[5.0; 3], &zero, &vmax, &[1.0; 3], &[1.0; 3]), [0.0; 3]);

        let capped = constricted_velocity(&q, &[100.0; 3], &cfg, &[2.0; 3], &[1.0; 3], &[1.0; 3]);
        assert_eq!(capped[0], 2.0);
    }

    #[test]
    fn snap_examples() {
        assert_eq!(nearest_vertex_snap(&[3.0, -4.0, 7.0], |_| 1.0), [3.0, -4.0, 7.0]);
        let target = [29.6, 34.2, 16.8];
        let separable = |v: &Point| (0..3).map(|j| (v[j] - target[j]).powi(2)).sum::<f64>();
        // brute force over all eight vertices
        let brute = cube_vertices(&target)
            .into_iter()
            .min_by(|a, b| separable(a).total_cmp(&separable(b)))
            .unwrap();
        assert_eq!(brute, [30.0, 34.0, 17.0]);
        assert_eq!(nearest_vertex_snap(&target, separable), brute);
        assert_eq!(nearest_vertex_snap(&target, |_| 0.0), [29.0, 34.0, 16.0]);
        assert_eq!(cube_vertices(&target).len(), 8);
    }

    #[test]
    fn integer_toy_problem() {
        let cfg = SwarmConfig::default();
        let r = optimize(|x| (x[2] - 7.3).powi(2), &box30(), &cfg).unwrap();
        assert_eq!(r.position[2], 7.0);
        assert!(box30().is_feasible(&r.position));
    }

    #[test]
    fn sphere_reaches_origin() {
        let cfg = SwarmConfig {
            discretization: Discretization::Continuous,
            ..SwarmConfig::default()
        };
        let sphere = |x: &Point| x.iter().map(|v| v * v).sum::<f64>();
        let r = optimize(sphere, &box30(), &cfg).unwrap();
        assert!(r.unsnapped_score < 1e-6, "{}", r.unsnapped_score);
        assert_eq!(r.position, [0.0, 0.0, 0.0]);
        assert_eq!(r.score, 0.0);
    }

    #[test]
    fn infeasible_everywhere_is_reported() {
        // an empty-interior box still has feasible points; make the objective
        // irrelevant and the bound unreachable instead
        let c = ConstraintSet {
            panels: BoundConstraint::new(0.5, 0.5),
            ..box30()
        };
        let cfg = SwarmConfig {
            max_iterations: 20,
            ..SwarmConfig::default()
        };
        let err = optimize(|_| 0.0, &c, &cfg).unwrap_err();
        assert!(matches!(err, Error::NoFeasibleSolution { .. }));
    }

    #[test]
    fn deterministic_under_seed() {
        let f = |x: &Point| (x[0] - 31.2).powi(2) + (x[1] + 12.7).abs() + (x[2] - 9.0).powi(2);
        let cfg = SwarmConfig { seed: 99, ..SwarmConfig::default() };
        let a = optimize(f, &box30(), &cfg).unwrap();
        let b = optimize(f, &box30(), &cfg).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn penalty_zero_iff_feasible(b in -50.0..200.0f64, g in -250.0..250.0f64, z in -10.0..50.0f64, n in 1usize..500) {
            let c = box30();
            let x = [b, g, z];
            prop_assert_eq!(penalty(&x, n, &c) == 0.0, c.is_feasible(&x));
        }

        #[test]
        fn penalty_grows_with_iteration(b in 90.001..200.0f64, n in 1usize..500) {
            let c = box30();
            let x = [b, 0.0, 5.0];
            prop_assert!(penalty(&x, n + 1, &c) >= penalty(&x, n, &c));
        }

        #[test]
        fn history_monotone_and_result_feasible(seed in 0u64..1000, tb in 0.0..90.0f64, tz in 0.0..30.0f64) {
            let cfg = SwarmConfig { seed, particle_count: 12, max_iterations: 40, ..SwarmConfig::default() };
            let r = optimize(|x| (x[0] - tb).powi(2) + (x[2] - tz).powi(2) + 1e-3 * x[1].abs(), &box30(), &cfg).unwrap();
            prop_assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
            prop_assert!(box30().is_feasible(&r.position));
            prop_assert!(r.position.iter().all(|v| v.fract() == 0.0));
        }
    }
}
