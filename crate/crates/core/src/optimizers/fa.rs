//! Firefly algorithm. Distances and random steps are measured in box-normalized
//! coordinates so that one attractiveness scale fits every dimension.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{clip, evaluate_all, initial_population, ranking, Problem, RawRun, Tracker};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FaConfig {
    pub pop: usize,
    pub t_max: usize,
    /// Attractiveness at zero distance.
    pub beta0: f64,
    /// Light absorption.
    pub gamma: f64,
    /// Initial randomization.
    pub alpha0: f64,
    /// Per-iteration decay of the randomization.
    pub delta: f64,
}

impl Default for FaConfig {
    fn default() -> Self {
        Self { pop: 100, t_max: 100, beta0: 2.0, gamma: 1.0, alpha0: 0.4, delta: 0.96 }
    }
}

impl FaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pop < 2 {
            return Err(Error::InvalidConfig("fa needs at least two fireflies".into()));
        }
        if !(self.gamma >= 0.0 && self.beta0 >= 0.0 && self.alpha0 >= 0.0 && self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::InvalidConfig("fa parameters out of range".into()));
        }
        Ok(())
    }

    pub fn alpha(&self, t: usize) -> f64 {
        self.alpha0 * self.delta.powi(t as i32)
    }
}

pub fn attractiveness(beta0: f64, gamma: f64, distance: f64) -> f64 {
    beta0 * (-gamma * distance * distance).exp()
}

/// Moves `xi` toward `xj`; `noise` holds one uniform draw in [0, 1) per coordinate.
pub fn fa_step(xi: &[f64], xj: &[f64], beta0: f64, gamma: f64, alpha: f64, noise: &[f64]) -> Vec<f64> {
    let r2: f64 = xi.iter().zip(xj).map(|(a, b)| (a - b) * (a - b)).sum();
    let beta = attractiveness(beta0, gamma, r2.sqrt());
    xi.iter().zip(xj).zip(noise).map(|((a, b), e)| a + beta * (b - a) + alpha * (e - 0.5)).collect()
}

pub fn run(problem: &dyn Problem, cfg: &FaConfig, seed: u64, warm: Option<&[f64]>) -> Result<RawRun> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (problem.lower(), problem.upper());
    let dim = problem.dim();
    let width: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| h - l).collect();
    let to_unit = |x: &[f64]| -> Vec<f64> {
        x.iter().zip(lo).zip(&width).map(|((v, l), w)| if *w > 0.0 { (v - l) / w } else { 0.0 }).collect()
    };
    let from_unit = |u: &[f64]| -> Vec<f64> {
        let mut x: Vec<f64> = u.iter().zip(lo).zip(&width).map(|((v, l), w)| l + v * w).collect();
        clip(&mut x, lo, hi);
        x
    };

    let mut xs = initial_population(&mut rng, problem, cfg.pop, warm);
    let mut fit = evaluate_all(problem, &xs);
    let mut tracker = Tracker::new(dim);
    tracker.observe(&xs, &fit);
    tracker.record(0, &fit);

    for t in 1..=cfg.t_max {
        let alpha = cfg.alpha(t - 1);
        let order = ranking(&fit);
        xs = order.iter().map(|&i| xs[i].clone()).collect();
        fit = order.iter().map(|&i| fit[i]).collect();
        let units: Vec<Vec<f64>> = xs.iter().map(|x| to_unit(x)).collect();

        let mut moved = Vec::with_capacity(cfg.pop);
        for i in 0..cfg.pop {
            let mut ui = units[i].clone();
            if i == 0 {
                let noise: Vec<f64> = (0..dim).map(|_| rng.random()).collect();
                ui = ui.iter().zip(&noise).map(|(v, e)| v + alpha * (e - 0.5)).collect();
            } else {
                for j in 0..i {
                    if fit[j].total < fit[i].total {
                        let noise: Vec<f64> = (0..dim).map(|_| rng.random()).collect();
                        ui = fa_step(&ui, &units[j], cfg.beta0, cfg.gamma, alpha, &noise);
                    }
                }
            }
            moved.push(from_unit(&ui));
        }
        let moved_fit = evaluate_all(problem, &moved);
        tracker.observe(&moved, &moved_fit);
        // The brightest only moves when its random walk helps.
        for i in 0..cfg.pop {
            if i != 0 || moved_fit[0].total < fit[0].total {
                xs[i] = moved[i].clone();
                fit[i] = moved_fit[i];
            }
        }
        tracker.record(t, &fit);
    }
    Ok(tracker.finish(cfg.t_max))
}

#[cfg(test)]
mod tests {
    use super::super::test_problems::*;
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn attractiveness_decays_with_distance() {
        assert_eq!(attractiveness(2.0, 1.0, 0.0), 2.0);
        assert_relative_eq!(attractiveness(2.0, 1.0, 1.0), 2.0 / std::f64::consts::E);
        assert_relative_eq!(attractiveness(1.0, 0.5, 2.0), (-2.0f64).exp());
    }

    #[test]
    fn step_by_hand() {
        // distance 1, beta = 2/e, noise centred so the random part vanishes
        let x = fa_step(&[0.0, 0.0], &[1.0, 0.0], 2.0, 1.0, 0.4, &[0.5, 0.5]);
        assert_relative_eq!(x[0], 2.0 / std::f64::consts::E);
        assert_eq!(x[1], 0.0);
        let y = fa_step(&[0.0], &[0.0], 2.0, 1.0, 0.4, &[1.0]);
        assert_relative_eq!(y[0], 0.2);
    }

    #[test]
    fn randomization_decays() {
        let c = FaConfig::default();
        assert_eq!(c.alpha(0), 0.4);
        assert_relative_eq!(c.alpha(2), 0.4 * 0.96 * 0.96);
    }

    #[test]
    fn without_randomization_moves_are_pure_attraction() {
        // beta0 = 1 keeps beta <= 1, so the move stays on the segment towards the brighter one
        for noise in [[0.0, 0.0], [1.0, 0.3], [0.9, 0.1]] {
            let x = fa_step(&[1.0, 2.0], &[3.0, -2.0], 1.0, 0.1, 0.0, &noise);
            let beta = (-2.0f64).exp();
            assert_relative_eq!(x[0], 1.0 + 2.0 * beta, epsilon = 1e-12);
            assert_relative_eq!(x[1], 2.0 - 4.0 * beta, epsilon = 1e-12);
        }
    }

    #[test]
    fn improves_on_the_sphere() {
        let p = sphere(3, 5.0);
        let r = run(&p, &FaConfig::default(), 5, None).unwrap();
        assert!(r.best_fitness.total < 0.05, "{}", r.best_fitness.total);
        assert_monotone(&r);
    }
}
