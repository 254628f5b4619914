use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use proptest::prelude::*;

use auv_rendezvous::cost::{check_feasible, evaluate, PenaltyWeights, RendezvousSpec, VehicleLimits};
use auv_rendezvous::current_field::{CurrentConfig, CurrentField};
use auv_rendezvous::env_map::GridMap;
use auv_rendezvous::environment::EnvironmentSnapshot;
use auv_rendezvous::obstacles::{Obstacle, ObstacleKind, ObstacleSet};
use auv_rendezvous::optimizers::{self, Algorithm, FnProblem, OptimizerConfig};
use auv_rendezvous::spline::{corridor_bounds, heading_profile, synthesize, synthesize_trajectory, wrap_angle, CurveSampler, Trajectory};
use auv_rendezvous::{Point2, Point3};

const START: Point3 = Point3::new(200.0, 300.0, 40.0);
const TARGET: Point3 = Point3::new(1700.0, 1600.0, 80.0);

fn env(with_obstacle: bool) -> EnvironmentSnapshot {
    let map = Arc::new(GridMap::open(100, 100, 20.0, Point2::zeros(), 1000.0).unwrap());
    let current = CurrentField::random(6, Point2::zeros(), Point2::new(2000.0, 2000.0), 28.0, 120.0, &CurrentConfig::default(), 3).unwrap();
    let obstacles = if with_obstacle {
        vec![Obstacle::fixed(ObstacleKind::QuasiStatic, Point3::new(950.0, 950.0, 60.0), 80.0, 10.0, 1.0, 0)]
    } else {
        vec![]
    };
    EnvironmentSnapshot::new(map, current, ObstacleSet::new(obstacles, 2.0).unwrap(), 0.0)
}

fn trajectory(env: &EnvironmentSnapshot, unit: &[f64]) -> Trajectory {
    let bounds = corridor_bounds(START, TARGET, 4).unwrap();
    let mut it = unit.iter().copied();
    let poly = bounds.random_polygon_with(move || it.next().unwrap_or(0.5));
    let sampler = CurveSampler::new(6, 100, 3).unwrap();
    synthesize_trajectory(&poly, 2.5, &env.current, &sampler).unwrap()
}

fn spec(t_r: f64, epsilon: f64, clearance: f64) -> RendezvousSpec {
    RendezvousSpec { t_r, epsilon, start: START, target: TARGET, clearance_threshold: clearance }
}

fn point() -> impl Strategy<Value = Point3> {
    (-500.0..500.0f64, -500.0..500.0f64, 0.0..200.0f64).prop_map(|(x, y, z)| Point3::new(x, y, z))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn still_water_arrival_time_falls_with_speed(pts in prop::collection::vec(point(), 2..12), a in 0.2..4.0f64, b in 0.2..4.0f64) {
        let (slow, fast) = if a < b { (a, b) } else { (b, a) };
        let still = CurrentField::still();
        let t_slow = synthesize(&pts, slow, &still).unwrap().t_f;
        let t_fast = synthesize(&pts, fast, &still).unwrap().t_f;
        prop_assert!(t_fast <= t_slow * (1.0 + 1e-12), "{t_fast} > {t_slow}");
    }

    #[test]
    fn reversed_path_turns_heading_around(pts in prop::collection::vec(point(), 2..12)) {
        prop_assume!(pts.windows(2).all(|w| (w[1] - w[0]).xy().norm() > 1e-3));
        let n = pts.len() - 1;
        let fwd = heading_profile(&pts, &vec![1.0; n]).unwrap();
        let rev_pts: Vec<Point3> = pts.iter().rev().copied().collect();
        let rev = heading_profile(&rev_pts, &vec![1.0; n]).unwrap();
        for i in 0..n {
            let d = wrap_angle(rev[n - 1 - i].psi - fwd[i].psi - std::f64::consts::PI);
            prop_assert!(d.abs() < 1e-9, "segment {i}: {d}");
        }
    }

    #[test]
    fn length_is_the_sample_polyline(unit in prop::collection::vec(0.0..1.0f64, 12)) {
        let e = env(false);
        let traj = trajectory(&e, &unit);
        let poly: f64 = traj.samples.windows(2).map(|w| (w[1].position - w[0].position).norm()).sum();
        prop_assert!((traj.length - poly).abs() < 1e-9);
    }

    #[test]
    fn raising_a_weight_never_lowers_the_total(unit in prop::collection::vec(0.0..1.0f64, 12), i in 0usize..7, bump in 0.0..50.0f64) {
        let e = env(true);
        let traj = trajectory(&e, &unit);
        let s = spec(600.0, 100.0, 30.0);
        let w = PenaltyWeights::default();
        let mut heavier = w;
        heavier.beta[i] += bump;
        let lo = evaluate(&traj, &e, &VehicleLimits::default(), &s, &w).unwrap();
        let hi = evaluate(&traj, &e, &VehicleLimits::default(), &s, &heavier).unwrap();
        prop_assert!(hi.total >= lo.total);
    }

    #[test]
    fn evaluate_and_check_agree_on_feasibility(unit in prop::collection::vec(0.0..1.0f64, 12), t_r in 500.0..1500.0f64, eps in 10.0..800.0f64) {
        let e = env(true);
        let traj = trajectory(&e, &unit);
        let s = spec(t_r, eps, 30.0);
        let lim = VehicleLimits::default();
        let c = evaluate(&traj, &e, &lim, &s, &PenaltyWeights::default()).unwrap();
        let r = check_feasible(&traj, &e, &lim, &s).unwrap();
        prop_assert_eq!(c.feasible, r.feasible, "{:?}", r.violations);
    }

    #[test]
    fn doubling_weights_keeps_the_order_of_feasible_paths(a in prop::collection::vec(0.0..1.0f64, 12), b in prop::collection::vec(0.0..1.0f64, 12)) {
        let e = env(false);
        let (ta, tb) = (trajectory(&e, &a), trajectory(&e, &b));
        let s = spec(2000.0, 1999.0, 0.0);
        let lim = VehicleLimits { r_max: 10.0, theta_max: 1.5, ..VehicleLimits::default() };
        let w = PenaltyWeights::default();
        let ca = evaluate(&ta, &e, &lim, &s, &w).unwrap();
        let cb = evaluate(&tb, &e, &lim, &s, &w).unwrap();
        prop_assume!(ca.feasible && cb.feasible);
        let da = evaluate(&ta, &e, &lim, &s, &w.scaled(2.0)).unwrap();
        let db = evaluate(&tb, &e, &lim, &s, &w.scaled(2.0)).unwrap();
        prop_assert_eq!(ca.total < cb.total, da.total < db.total);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn optimizers_only_evaluate_inside_the_box(
        lower in prop::collection::vec(-100.0..0.0f64, 1..5),
        width in 0.5..50.0f64,
        seed in any::<u64>(),
    ) {
        let upper: Vec<f64> = lower.iter().map(|l| l + width).collect();
        for algo in Algorithm::ALL {
            let outside = AtomicBool::new(false);
            let (lo, hi) = (lower.clone(), upper.clone());
            let p = FnProblem::new(lower.clone(), upper.clone(), |x: &[f64]| {
                if x.iter().zip(&lo).zip(&hi).any(|((v, l), h)| v < l || v > h) {
                    outside.store(true, Ordering::Relaxed);
                }
                x.iter().map(|v| (v - 1.0).powi(2)).sum()
            }).unwrap();
            optimizers::run(algo, &p, &OptimizerConfig::with_budget(12, 10), seed, None).unwrap();
            prop_assert!(!outside.load(Ordering::Relaxed), "{algo} left the box");
        }
    }
}
