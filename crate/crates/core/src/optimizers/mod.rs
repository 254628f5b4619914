//! Population-based optimizers over box-bounded continuous spaces, and the
//! adapter that puts control polygons behind them.

pub mod bbo;
pub mod de;
pub mod fa;
pub mod pso;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::CostBreakdown;
use crate::error::{Error, Result};
use crate::spline::{ControlPolygon, CorridorBounds};

pub use bbo::BboConfig;
pub use de::DeConfig;
pub use fa::FaConfig;
pub use pso::PsoConfig;

/// Objective value plus the collision part that is traced separately.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fitness {
    pub total: f64,
    pub violation: f64,
}

impl Fitness {
    pub fn new(total: f64) -> Self {
        Self { total, violation: 0.0 }
    }
}

/// A minimization problem over the box `[lower, upper]`.
pub trait Problem: Sync {
    fn lower(&self) -> &[f64];
    fn upper(&self) -> &[f64];
    fn evaluate(&self, x: &[f64]) -> Fitness;

    fn dim(&self) -> usize {
        self.lower().len()
    }
}

/// A closure over a box.
pub struct FnProblem<F> {
    lower: Vec<f64>,
    upper: Vec<f64>,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnProblem<F> {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, f: F) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() || lower.iter().zip(&upper).any(|(l, u)| !(l <= u)) {
            return Err(Error::InvalidInput("bounds must be non-empty with lower <= upper".into()));
        }
        Ok(Self { lower, upper, f })
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Problem for FnProblem<F> {
    fn lower(&self) -> &[f64] {
        &self.lower
    }

    fn upper(&self) -> &[f64] {
        &self.upper
    }

    fn evaluate(&self, x: &[f64]) -> Fitness {
        Fitness::new((self.f)(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Best total found so far.
    pub best_total: f64,
    pub mean_total: f64,
    /// Collision term of the best-so-far candidate.
    pub collision_violation: f64,
}

/// Result of a run on a bare [`Problem`].
#[derive(Debug, Clone, PartialEq)]
pub struct RawRun {
    pub best: Vec<f64>,
    pub best_fitness: Fitness,
    pub history: Vec<IterationRecord>,
    pub iterations_used: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Pso,
    Bbo,
    Fa,
    De,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Pso, Algorithm::Bbo, Algorithm::Fa, Algorithm::De];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Pso => "pso",
            Self::Bbo => "bbo",
            Self::Fa => "fa",
            Self::De => "de",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pso" => Ok(Self::Pso),
            "bbo" => Ok(Self::Bbo),
            "fa" => Ok(Self::Fa),
            "de" => Ok(Self::De),
            _ => Err(Error::UnknownAlgorithm(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub pso: PsoConfig,
    pub bbo: BboConfig,
    pub fa: FaConfig,
    pub de: DeConfig,
}

impl OptimizerConfig {
    /// Same population and iteration budget for every algorithm.
    pub fn with_budget(pop: usize, t_max: usize) -> Self {
        let mut c = Self::default();
        c.set_budget(pop, t_max);
        c
    }

    pub fn set_budget(&mut self, pop: usize, t_max: usize) {
        self.pso.pop = pop;
        self.pso.t_max = t_max;
        self.bbo.set_pop(pop);
        self.bbo.t_max = t_max;
        self.fa.pop = pop;
        self.fa.t_max = t_max;
        self.de.pop = pop;
        self.de.t_max = t_max;
    }

    pub fn t_max(&self, algo: Algorithm) -> usize {
        match algo {
            Algorithm::Pso => self.pso.t_max,
            Algorithm::Bbo => self.bbo.t_max,
            Algorithm::Fa => self.fa.t_max,
            Algorithm::De => self.de.t_max,
        }
    }

    pub fn set_t_max(&mut self, t_max: usize) {
        self.pso.t_max = t_max;
        self.bbo.t_max = t_max;
        self.fa.t_max = t_max;
        self.de.t_max = t_max;
    }
}

/// Runs `algo` on a bare problem.
pub fn run(algo: Algorithm, problem: &dyn Problem, cfg: &OptimizerConfig, seed: u64, warm_start: Option<&[f64]>) -> Result<RawRun> {
    if let Some(w) = warm_start {
        if w.len() != problem.dim() {
            return Err(Error::InvalidInput(format!("warm start has {} coordinates, expected {}", w.len(), problem.dim())));
        }
    }
    match algo {
        Algorithm::Pso => pso::run(problem, &cfg.pso, seed, warm_start),
        Algorithm::Bbo => bbo::run(problem, &cfg.bbo, seed, warm_start),
        Algorithm::Fa => fa::run(problem, &cfg.fa, seed, warm_start),
        Algorithm::De => de::run(problem, &cfg.de, seed, warm_start),
    }
}

/// Decision space of control polygons and the cost attached to each.
pub struct ObjectiveContext<'a> {
    pub bounds: CorridorBounds,
    lower: Vec<f64>,
    upper: Vec<f64>,
    objective: Box<dyn Fn(&ControlPolygon) -> CostBreakdown + Send + Sync + 'a>,
}

impl<'a> ObjectiveContext<'a> {
    pub fn new(bounds: CorridorBounds, objective: impl Fn(&ControlPolygon) -> CostBreakdown + Send + Sync + 'a) -> Self {
        let lower = bounds.flat_lower();
        let upper = bounds.flat_upper();
        Self { bounds, lower, upper, objective: Box::new(objective) }
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn cost(&self, poly: &ControlPolygon) -> CostBreakdown {
        (self.objective)(poly)
    }
}

impl Problem for ObjectiveContext<'_> {
    fn lower(&self) -> &[f64] {
        &self.lower
    }

    fn upper(&self) -> &[f64] {
        &self.upper
    }

    fn evaluate(&self, x: &[f64]) -> Fitness {
        let c = self.cost(&self.bounds.polygon(x));
        Fitness { total: c.total, violation: c.collision_violation() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerRun {
    pub algorithm: Algorithm,
    pub best: ControlPolygon,
    pub best_cost: CostBreakdown,
    pub history: Vec<IterationRecord>,
    pub iterations_used: usize,
    pub evaluations: usize,
    pub seed: u64,
}

/// Uniform entry point over the four algorithms. The warm start, clipped into the
/// bounds, seeds one member of the initial population.
pub fn optimize(
    algo: Algorithm,
    ctx: &ObjectiveContext<'_>,
    cfg: &OptimizerConfig,
    seed: u64,
    warm_start: Option<&ControlPolygon>,
) -> Result<OptimizerRun> {
    let warm = warm_start.map(|p| {
        let mut flat = p.to_flat();
        if flat.len() == ctx.dimension() {
            ctx.bounds.clip(&mut flat);
        }
        flat
    });
    let raw = run(algo, ctx, cfg, seed, warm.as_deref())?;
    let best = ctx.bounds.polygon(&raw.best);
    let best_cost = ctx.cost(&best);
    Ok(OptimizerRun {
        algorithm: algo,
        best,
        best_cost,
        history: raw.history,
        iterations_used: raw.iterations_used,
        evaluations: raw.evaluations,
        seed,
    })
}

pub fn optimize_named(
    algo: &str,
    ctx: &ObjectiveContext<'_>,
    cfg: &OptimizerConfig,
    seed: u64,
    warm_start: Option<&ControlPolygon>,
) -> Result<OptimizerRun> {
    optimize(algo.parse()?, ctx, cfg, seed, warm_start)
}

pub(crate) fn evaluate_all(problem: &dyn Problem, xs: &[Vec<f64>]) -> Vec<Fitness> {
    xs.par_iter().map(|x| problem.evaluate(x)).collect()
}

pub(crate) fn clip(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((v, l), u) in x.iter_mut().zip(lower).zip(upper) {
        *v = v.clamp(*l, *u);
    }
}

pub(crate) fn random_point<R: Rng>(rng: &mut R, lower: &[f64], upper: &[f64]) -> Vec<f64> {
    lower.iter().zip(upper).map(|(l, u)| l + rng.random::<f64>() * (u - l)).collect()
}

/// Initial population: uniform draws, with the warm start (if any) in slot 0.
pub(crate) fn initial_population<R: Rng>(rng: &mut R, problem: &dyn Problem, pop: usize, warm: Option<&[f64]>) -> Vec<Vec<f64>> {
    let (lo, hi) = (problem.lower(), problem.upper());
    (0..pop)
        .map(|i| match (i, warm) {
            (0, Some(w)) => {
                let mut x = w.to_vec();
                clip(&mut x, lo, hi);
                x
            }
            _ => random_point(rng, lo, hi),
        })
        .collect()
}

/// Best-so-far bookkeeping shared by every algorithm.
pub(crate) struct Tracker {
    pub best: Vec<f64>,
    pub best_fitness: Fitness,
    pub history: Vec<IterationRecord>,
    pub evaluations: usize,
}

impl Tracker {
    pub fn new(dim: usize) -> Self {
        Self {
            best: vec![0.0; dim],
            best_fitness: Fitness { total: f64::INFINITY, violation: f64::INFINITY },
            history: Vec::new(),
            evaluations: 0,
        }
    }

    /// Folds a freshly evaluated batch into the record. Ties keep the earlier best.
    pub fn observe(&mut self, xs: &[Vec<f64>], fit: &[Fitness]) {
        self.evaluations += fit.len();
        for (x, f) in xs.iter().zip(fit) {
            if f.total < self.best_fitness.total {
                self.best_fitness = *f;
                self.best.clone_from(x);
            }
        }
    }

    /// Closes an iteration; `population` is the fitness of the current members.
    pub fn record(&mut self, iteration: usize, population: &[Fitness]) {
        let mean = population.iter().map(|f| f.total).sum::<f64>() / population.len().max(1) as f64;
        self.history.push(IterationRecord {
            iteration,
            best_total: self.best_fitness.total,
            mean_total: mean,
            collision_violation: self.best_fitness.violation,
        });
    }

    pub fn finish(self, iterations_used: usize) -> RawRun {
        RawRun {
            best: self.best,
            best_fitness: self.best_fitness,
            history: self.history,
            iterations_used,
            evaluations: self.evaluations,
        }
    }
}

/// Indices sorted by ascending total; ties by index.
pub(crate) fn ranking(fit: &[Fitness]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..fit.len()).collect();
    idx.sort_by(|&a, &b| fit[a].total.total_cmp(&fit[b].total).then(a.cmp(&b)));
    idx
}


#[cfg(test)]
mod tests {
    use super::test_problems::*;
    use super::*;
    use crate::spline::corridor_bounds;
    use crate::Point3;

    #[test]
    fn algorithm_tags() {
        assert_eq!("PSO".parse::<Algorithm>().unwrap(), Algorithm::Pso);
        assert!(matches!("ga".parse::<Algorithm>(), Err(Error::UnknownAlgorithm(_))));
        for a in Algorithm::ALL {
            assert_eq!(a.as_str().parse::<Algorithm>().unwrap(), a);
        }
    }

    #[test]
    fn constant_objective_gives_a_flat_history() {
        let bounds = corridor_bounds(Point3::new(0.0, 0.0, 0.0), Point3::new(100.0, 50.0, 10.0), 2).unwrap();
        let ctx = ObjectiveContext::new(bounds, |_| CostBreakdown::constant(3.5));
        for algo in Algorithm::ALL {
            let r = optimize(algo, &ctx, &OptimizerConfig::with_budget(8, 5), 1, None).unwrap();
            assert_eq!(r.best_cost.total, 3.5);
            assert!(r.history.iter().all(|h| h.best_total == 3.5 && h.mean_total == 3.5));
            assert_eq!(r.history.len(), 6);
        }
        assert!(optimize_named("sa", &ctx, &OptimizerConfig::default(), 0, None).is_err());
    }

    #[test]
    fn every_algorithm_is_deterministic_and_elitist() {
        let p = sphere(4, 3.0);
        let cfg = OptimizerConfig::with_budget(12, 15);
        for algo in Algorithm::ALL {
            let a = run(algo, &p, &cfg, 9, None).unwrap();
            let b = run(algo, &p, &cfg, 9, None).unwrap();
            assert_eq!(a, b, "{algo}");
            assert_monotone(&a);
            assert!(a.best.iter().zip(p.lower()).all(|(x, l)| x >= l));
        }
    }

    #[test]
    fn warm_start_at_the_optimum_is_never_lost() {
        let p = sphere(3, 5.0);
        let cfg = OptimizerConfig::with_budget(10, 10);
        for algo in Algorithm::ALL {
            let r = run(algo, &p, &cfg, 4, Some(&[0.0, 0.0, 0.0])).unwrap();
            assert!(r.history.iter().all(|h| h.best_total == 0.0), "{algo}");
        }
        assert!(run(Algorithm::Pso, &p, &cfg, 4, Some(&[0.0])).is_err());
    }
}
