//! Differential evolution, rand/1 with binomial crossover.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{clip, evaluate_all, initial_population, Fitness, Problem, RawRun, Tracker};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeConfig {
    pub pop: usize,
    pub t_max: usize,
    pub scale_min: f64,
    pub scale_max: f64,
    pub crossover_rate: f64,
    /// Base vector is a random convex blend of the three picks instead of the third one.
    pub donor_blend: bool,
}

impl Default for DeConfig {
    fn default() -> Self {
        Self { pop: 100, t_max: 100, scale_min: 0.2, scale_max: 0.8, crossover_rate: 0.2, donor_blend: false }
    }
}

impl DeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pop < 4 {
            return Err(Error::InvalidConfig(format!("de needs a population of at least 4, got {}", self.pop)));
        }
        if !(0.0 <= self.scale_min && self.scale_min <= self.scale_max) || !(0.0..=1.0).contains(&self.crossover_rate) {
            return Err(Error::InvalidConfig("de scale or crossover rate out of range".into()));
        }
        Ok(())
    }
}

pub fn mutant(base: &[f64], x1: &[f64], x2: &[f64], scale: f64) -> Vec<f64> {
    base.iter().zip(x1).zip(x2).map(|((b, a), c)| b + scale * (a - c)).collect()
}

/// Convex combination of the picks with the given (unnormalized) weights.
pub fn donor(picks: [&[f64]; 3], weights: [f64; 3]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    let w = if total > 0.0 { weights.map(|v| v / total) } else { [1.0 / 3.0; 3] };
    (0..picks[0].len()).map(|d| (0..3).map(|k| w[k] * picks[k][d]).sum()).collect()
}

/// Binomial crossover; coordinate `k` always comes from the mutant.
pub fn crossover(parent: &[f64], mutant: &[f64], rate: f64, k: usize, draws: &[f64]) -> Vec<f64> {
    (0..parent.len()).map(|j| if draws[j] <= rate || j == k { mutant[j] } else { parent[j] }).collect()
}

/// Index of the survivor: 0 parent, 1 mutant, 2 offspring.
pub fn select(parent: f64, mutant: f64, offspring: f64) -> usize {
    if parent <= mutant {
        if parent <= offspring {
            0
        } else {
            2
        }
    } else {
        1
    }
}

fn distinct<R: Rng>(rng: &mut R, n: usize, i: usize) -> [usize; 3] {
    let mut out = [usize::MAX; 3];
    for k in 0..3 {
        loop {
            let r = rng.random_range(0..n);
            if r != i && !out[..k].contains(&r) {
                out[k] = r;
                break;
            }
        }
    }
    out
}

pub fn run(problem: &dyn Problem, cfg: &DeConfig, seed: u64, warm: Option<&[f64]>) -> Result<RawRun> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (problem.lower(), problem.upper());
    let dim = problem.dim();
    let n = cfg.pop;

    let mut xs = initial_population(&mut rng, problem, n, warm);
    let mut fit = evaluate_all(problem, &xs);
    let mut tracker = Tracker::new(dim);
    tracker.observe(&xs, &fit);
    tracker.record(0, &fit);

    for t in 1..=cfg.t_max {
        let scale = rng.random_range(cfg.scale_min..=cfg.scale_max);
        let mut mutants = Vec::with_capacity(n);
        let mut trials = Vec::with_capacity(n);
        for i in 0..n {
            let [r1, r2, r3] = distinct(&mut rng, n, i);
            let base = if cfg.donor_blend {
                let w = [rng.random(), rng.random(), rng.random()];
                donor([&xs[r1], &xs[r2], &xs[r3]], w)
            } else {
                xs[r3].clone()
            };
            let mut m = mutant(&base, &xs[r1], &xs[r2], scale);
            clip(&mut m, lo, hi);
            let k = rng.random_range(0..dim);
            let draws: Vec<f64> = (0..dim).map(|_| rng.random()).collect();
            trials.push(crossover(&xs[i], &m, cfg.crossover_rate, k, &draws));
            mutants.push(m);
        }
        let m_fit = evaluate_all(problem, &mutants);
        let o_fit = evaluate_all(problem, &trials);
        tracker.observe(&mutants, &m_fit);
        tracker.observe(&trials, &o_fit);
        let mut next: Vec<Fitness> = Vec::with_capacity(n);
        for i in 0..n {
            match select(fit[i].total, m_fit[i].total, o_fit[i].total) {
                0 => next.push(fit[i]),
                1 => {
                    xs[i] = mutants[i].clone();
                    next.push(m_fit[i]);
                }
                _ => {
                    xs[i] = trials[i].clone();
                    next.push(o_fit[i]);
                }
            }
        }
        fit = next;
        tracker.record(t, &fit);
    }
    Ok(tracker.finish(cfg.t_max))
}

#[cfg(test)]
mod tests {
    use super::super::test_problems::*;
    use super::*;

    #[test]
    fn mutation_by_hand() {
        assert_eq!(mutant(&[0.0], &[2.0], &[1.0], 0.5), vec![0.5]);
        assert_eq!(mutant(&[3.0, 4.0], &[1.0, 1.0], &[1.0, 1.0], 0.7), vec![3.0, 4.0]);
    }

    #[test]
    fn donor_is_a_weighted_mean() {
        let d = donor([&[0.0], &[3.0], &[6.0]], [1.0, 1.0, 1.0]);
        assert_eq!(d, vec![3.0]);
        assert_eq!(donor([&[0.0], &[3.0], &[6.0]], [0.0, 0.0, 2.0]), vec![6.0]);
    }

    #[test]
    fn full_crossover_takes_the_mutant() {
        let o = crossover(&[1.0, 2.0, 3.0], &[7.0, 8.0, 9.0], 1.0, 0, &[0.9, 0.99, 0.5]);
        assert_eq!(o, vec![7.0, 8.0, 9.0]);
        let o = crossover(&[1.0, 2.0, 3.0], &[7.0, 8.0, 9.0], 0.0, 1, &[0.9, 0.99, 0.5]);
        assert_eq!(o, vec![1.0, 8.0, 3.0]);
    }

    #[test]
    fn selection_prefers_the_parent_on_ties() {
        assert_eq!(select(1.0, 1.0, 1.0), 0);
        assert_eq!(select(1.0, 2.0, 0.5), 2);
        assert_eq!(select(1.0, 0.5, 0.1), 1);
    }

    #[test]
    fn small_population_is_rejected() {
        let p = sphere(2, 1.0);
        assert!(matches!(run(&p, &DeConfig { pop: 3, ..Default::default() }, 0, None), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn improves_on_the_sphere() {
        let p = sphere(3, 5.0);
        for donor_blend in [false, true] {
            let r = run(&p, &DeConfig { donor_blend, ..Default::default() }, 3, None).unwrap();
            assert!(r.best_fitness.total < 1e-3, "{}", r.best_fitness.total);
            assert_monotone(&r);
        }
    }
}
