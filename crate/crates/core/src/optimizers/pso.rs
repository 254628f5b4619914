//! Particle swarm with a linearly decreasing inertia weight.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{clip, evaluate_all, initial_population, Problem, RawRun, Tracker};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PsoConfig {
    pub pop: usize,
    pub t_max: usize,
    pub c1: f64,
    pub c2: f64,
    pub inertia_start: f64,
    pub inertia_end: f64,
    /// Velocity cap as a fraction of each coordinate's range.
    pub velocity_clamp: f64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self { pop: 100, t_max: 100, c1: 2.0, c2: 2.0, inertia_start: 1.4, inertia_end: 0.5, velocity_clamp: 0.2 }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pop < 2 {
            return Err(Error::InvalidConfig("pso needs at least two particles".into()));
        }
        if !(self.c1 >= 0.0 && self.c2 >= 0.0 && self.velocity_clamp > 0.0) {
            return Err(Error::InvalidConfig("pso coefficients must be non-negative".into()));
        }
        Ok(())
    }

    /// Inertia at iteration `t` (1-based) of `t_max`.
    pub fn inertia(&self, t: usize) -> f64 {
        if self.t_max <= 1 {
            return self.inertia_end;
        }
        let f = (t.saturating_sub(1)) as f64 / (self.t_max - 1) as f64;
        self.inertia_start + (self.inertia_end - self.inertia_start) * f
    }
}

/// One coordinate of the velocity update.
pub fn pso_velocity(v: f64, x: f64, pbest: f64, gbest: f64, w: f64, c1: f64, c2: f64, r1: f64, r2: f64) -> f64 {
    w * v + c1 * r1 * (pbest - x) + c2 * r2 * (gbest - x)
}

pub fn run(problem: &dyn Problem, cfg: &PsoConfig, seed: u64, warm: Option<&[f64]>) -> Result<RawRun> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (problem.lower(), problem.upper());
    let dim = problem.dim();
    let vmax: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| cfg.velocity_clamp * (h - l)).collect();

    let mut xs = initial_population(&mut rng, problem, cfg.pop, warm);
    let mut vs: Vec<Vec<f64>> =
        (0..cfg.pop).map(|_| vmax.iter().map(|m| (2.0 * rng.random::<f64>() - 1.0) * m).collect()).collect();
    let mut fit = evaluate_all(problem, &xs);
    let mut tracker = Tracker::new(dim);
    tracker.observe(&xs, &fit);
    tracker.record(0, &fit);
    let mut pbest = xs.clone();
    let mut pbest_fit = fit.clone();

    for t in 1..=cfg.t_max {
        let w = cfg.inertia(t);
        let g = tracker.best.clone();
        for i in 0..cfg.pop {
            for d in 0..dim {
                let (r1, r2) = (rng.random::<f64>(), rng.random::<f64>());
                let v = pso_velocity(vs[i][d], xs[i][d], pbest[i][d], g[d], w, cfg.c1, cfg.c2, r1, r2);
                vs[i][d] = v.clamp(-vmax[d], vmax[d]);
                xs[i][d] += vs[i][d];
            }
            clip(&mut xs[i], lo, hi);
        }
        fit = evaluate_all(problem, &xs);
        for i in 0..cfg.pop {
            if fit[i].total <= pbest_fit[i].total {
                pbest[i].clone_from(&xs[i]);
                pbest_fit[i] = fit[i];
            }
        }
        tracker.observe(&xs, &fit);
        tracker.record(t, &fit);
    }
    Ok(tracker.finish(cfg.t_max))
}

#[cfg(test)]
mod tests {
    use super::super::test_problems::*;
    use super::*;

    #[test]
    fn velocity_update_by_hand() {
        // 0.5*1 + 2*0.5*(3-1) + 2*0.25*(10-1)
        assert_eq!(pso_velocity(1.0, 1.0, 3.0, 10.0, 0.5, 2.0, 2.0, 0.5, 0.25), 7.0);
        assert_eq!(pso_velocity(1.0, 0.0, 2.0, 4.0, 0.5, 1.0, 1.0, 1.0, 1.0), 6.5);
        assert_eq!(pso_velocity(3.0, 2.0, 2.0, 2.0, 0.0, 2.0, 2.0, 0.3, 0.9), 0.0);
        assert_eq!(pso_velocity(2.0, 0.0, 1.0, 2.0, 1.0, 2.0, 2.0, 0.5, 0.5), 5.0);
    }

    #[test]
    fn inertia_schedule_runs_from_start_to_end() {
        let c = PsoConfig::default();
        assert_eq!(c.inertia(1), 1.4);
        assert!((c.inertia(100) - 0.5).abs() < 1e-12);
        assert!(c.inertia(50) < 1.4 && c.inertia(50) > 0.5);
    }

    #[test]
    fn finds_the_sphere_minimum() {
        let p = sphere(3, 5.0);
        for seed in 0..30 {
            let r = run(&p, &PsoConfig::default(), seed, None).unwrap();
            assert!(r.best_fitness.total < 1e-3, "seed {seed}: {}", r.best_fitness.total);
            assert_monotone(&r);
        }
    }

    #[test]
    fn empty_swarm_is_rejected() {
        let p = sphere(2, 1.0);
        assert!(run(&p, &PsoConfig { pop: 0, ..Default::default() }, 0, None).is_err());
    }
}
