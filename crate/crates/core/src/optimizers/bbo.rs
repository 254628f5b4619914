//! Biogeography-based optimization: rank-driven migration, species-count driven mutation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{evaluate_all, initial_population, ranking, Fitness, Problem, RawRun, Tracker};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BboConfig {
    pub pop: usize,
    pub t_max: usize,
    /// Best habitats carried over unchanged.
    pub kept: usize,
    /// Best offspring admitted each generation.
    pub new: usize,
    pub immigration_max: f64,
    pub emigration_max: f64,
    pub mutation_max: f64,
}

impl Default for BboConfig {
    fn default() -> Self {
        Self { pop: 100, t_max: 100, kept: 40, new: 40, immigration_max: 1.0, emigration_max: 1.0, mutation_max: 0.1 }
    }
}

impl BboConfig {
    /// Resizes the population, keeping the kept/new split proportional.
    pub fn set_pop(&mut self, pop: usize) {
        let old = self.pop.max(1) as f64;
        self.kept = ((self.kept as f64 / old) * pop as f64).round() as usize;
        self.new = ((self.new as f64 / old) * pop as f64).round() as usize;
        self.pop = pop;
    }

    pub fn validate(&self) -> Result<()> {
        if self.pop < 2 {
            return Err(Error::InvalidConfig("bbo needs at least two habitats".into()));
        }
        if self.kept + self.new > self.pop {
            return Err(Error::InvalidConfig("bbo kept + new exceeds the population".into()));
        }
        if !(0.0..=1.0).contains(&self.mutation_max) || self.immigration_max <= 0.0 || self.emigration_max <= 0.0 {
            return Err(Error::InvalidConfig("bbo rates out of range".into()));
        }
        Ok(())
    }
}

/// Immigration and emigration rates for a habitat holding `s` of `s_max` species.
pub fn migration_rates(s: usize, s_max: usize, i_max: f64, e_max: f64) -> (f64, f64) {
    let k = s as f64 / s_max as f64;
    (i_max * (1.0 - k), e_max * k)
}

/// Stationary species-count distribution of the birth/death chain on `0..=s_max`.
pub fn species_probabilities(s_max: usize, i_max: f64, e_max: f64) -> Vec<f64> {
    let mut log_p = vec![0.0; s_max + 1];
    for s in 0..s_max {
        let (lambda, _) = migration_rates(s, s_max, i_max, e_max);
        let (_, mu_next) = migration_rates(s + 1, s_max, i_max, e_max);
        log_p[s + 1] = log_p[s] + (lambda / mu_next).ln();
    }
    let peak = log_p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_p.iter().map(|l| (l - peak).exp()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|v| v / total).collect()
}

/// Per-variable mutation probability for each species count.
pub fn mutation_rates(probabilities: &[f64], m_max: f64) -> Vec<f64> {
    let p_max = probabilities.iter().cloned().fold(0.0, f64::max);
    probabilities.iter().map(|p| m_max * (1.0 - p / p_max)).collect()
}

pub fn run(problem: &dyn Problem, cfg: &BboConfig, seed: u64, warm: Option<&[f64]>) -> Result<RawRun> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (problem.lower(), problem.upper());
    let dim = problem.dim();
    let n = cfg.pop;
    // The best ranked habitat holds s_max species, the worst one.
    let s_max = n;
    let mutation = mutation_rates(&species_probabilities(s_max, cfg.immigration_max, cfg.emigration_max), cfg.mutation_max);

    let mut xs = initial_population(&mut rng, problem, n, warm);
    let mut fit = evaluate_all(problem, &xs);
    let mut tracker = Tracker::new(dim);
    tracker.observe(&xs, &fit);
    tracker.record(0, &fit);

    for t in 1..=cfg.t_max {
        let order = ranking(&fit);
        xs = order.iter().map(|&i| xs[i].clone()).collect();
        fit = order.iter().map(|&i| fit[i]).collect();
        let species: Vec<usize> = (0..n).map(|rank| s_max - rank).collect();
        let rates: Vec<(f64, f64)> =
            species.iter().map(|&s| migration_rates(s, s_max, cfg.immigration_max, cfg.emigration_max)).collect();

        let mut offspring = xs.clone();
        for i in 0..n {
            if rng.random::<f64>() < rates[i].0 {
                for j in 0..n {
                    if j != i && rng.random::<f64>() < rates[j].1 {
                        let d = rng.random_range(0..dim);
                        offspring[i][d] = xs[j][d];
                    }
                }
            }
            let m = mutation[species[i]];
            for d in 0..dim {
                if rng.random::<f64>() < m {
                    offspring[i][d] = lo[d] + rng.random::<f64>() * (hi[d] - lo[d]);
                }
            }
        }
        let off_fit = evaluate_all(problem, &offspring);
        tracker.observe(&offspring, &off_fit);
        (xs, fit) = next_generation(cfg, xs, fit, offspring, off_fit);
        tracker.record(t, &fit);
    }
    Ok(tracker.finish(cfg.t_max))
}

/// Keeps the `kept` best parents and the `new` best offspring, then fills the rest
/// from whatever remains, best first. Parents arrive sorted.
fn next_generation(
    cfg: &BboConfig,
    parents: Vec<Vec<f64>>,
    parent_fit: Vec<Fitness>,
    offspring: Vec<Vec<f64>>,
    off_fit: Vec<Fitness>,
) -> (Vec<Vec<f64>>, Vec<Fitness>) {
    let off_order = ranking(&off_fit);
    let mut xs = Vec::with_capacity(cfg.pop);
    let mut fit = Vec::with_capacity(cfg.pop);
    for i in 0..cfg.kept {
        xs.push(parents[i].clone());
        fit.push(parent_fit[i]);
    }
    for &i in off_order.iter().take(cfg.new) {
        xs.push(offspring[i].clone());
        fit.push(off_fit[i]);
    }
    let mut rest: Vec<(Fitness, &Vec<f64>)> = (cfg.kept..cfg.pop)
        .map(|i| (parent_fit[i], &parents[i]))
        .chain(off_order.iter().skip(cfg.new).map(|&i| (off_fit[i], &offspring[i])))
        .collect();
    rest.sort_by(|a, b| a.0.total.total_cmp(&b.0.total));
    for (f, x) in rest.into_iter().take(cfg.pop - xs.len()) {
        xs.push(x.clone());
        fit.push(f);
    }
    (xs, fit)
}
