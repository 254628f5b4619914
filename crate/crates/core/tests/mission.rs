use std::sync::Arc;

use auv_rendezvous::env_map::{Cell, GridMap};
use auv_rendezvous::environment::EnvironmentSnapshot;
use auv_rendezvous::mission::{Decision, Plan, Planner, Trigger};
use auv_rendezvous::mission::{message, run_mission, run_mission_with_map, Outcome};
use auv_rendezvous::obstacles::ObstacleSet;
use auv_rendezvous::optimizers::OptimizerConfig;
use auv_rendezvous::scenario::Scenario;
use auv_rendezvous::Point2;

fn quick(name: &str) -> Scenario {
    let mut s = Scenario::preset(name).unwrap();
    s.optimizer.config = OptimizerConfig::with_budget(30, 40);
    s
}

fn still_water() -> Scenario {
    let mut s = quick("scenario1");
    s.current.updates = false;
    s
}

#[test]
fn static_world_flies_its_first_plan() {
    let s = still_water();
    let log = run_mission(&s, 3).unwrap();
    assert_eq!(log.outcome, Outcome::Rendezvous, "{}", log.reason);
    assert_eq!(log.plans.len(), 1);
    assert_eq!(log.replans(), 0);
    assert!(log.within_window());
    assert_eq!(log.incursions, 0);
}

#[test]
fn unreachable_deadline_cancels() {
    let mut s = still_water();
    s.rendezvous.t_r = 300.0;
    s.rendezvous.epsilon = 100.0;
    let log = run_mission(&s, 1).unwrap();
    assert_eq!(log.outcome, Outcome::Cancel);
    assert!(log.reason.contains("rendezvous_time"), "{}", log.reason);
    assert_eq!(log.flown.len(), 1);
}

#[test]
fn walled_in_target_cancels() {
    let s = still_water();
    let (w, h, cs) = (350, 350, 10.0);
    let t = s.rendezvous.target.xy();
    let occupancy = (0..w * h)
        .map(|i| {
            let c = Point2::new((i % w) as f64 * cs + 5.0, (i / w) as f64 * cs + 5.0);
            let d = (c - t).norm();
            if (100.0..=160.0).contains(&d) {
                Cell::Forbidden
            } else {
                Cell::Feasible
            }
        })
        .collect();
    let map = Arc::new(GridMap::new(w, h, cs, Point2::zeros(), 1000.0, occupancy).unwrap());
    let log = run_mission_with_map(&s, map, 2).unwrap();
    assert_eq!(log.outcome, Outcome::Cancel);
    assert!(log.reason.contains("no_intersection"), "{}", log.reason);
}

fn first_plan(s: &Scenario, seed: u64) -> (Planner, EnvironmentSnapshot, Box<Plan>) {
    let map = s.load_map().unwrap();
    let current = s.current_field(&map, seed).unwrap();
    let env = EnvironmentSnapshot::new(map.clone(), current, ObstacleSet::new(vec![], 2.0).unwrap(), 0.0);
    let planner = Planner::from_scenario(s, map);
    let plan = match planner.initial_plan(&message(s), s.rendezvous.start, &env, seed).unwrap() {
        Decision::Proceed(p) => p,
        Decision::Cancel { reason, .. } => panic!("{reason}"),
    };
    (planner, env, plan)
}

#[test]
fn replan_in_an_unchanged_world_never_worsens() {
    let s = still_water();
    for seed in 0..3 {
        let (planner, env, plan) = first_plan(&s, seed);
        let r = &s.rendezvous;
        let again = planner.replan(&plan, r.start, 0.0, 0.0, (r.t_r, r.epsilon), &env, Trigger::FieldUpdate, seed + 99).unwrap();
        let warm = planner.objective(plan.polygon(), &env, &again.objective).unwrap();
        assert!(again.cost().total <= warm.total, "seed {seed}: {} > {}", again.cost().total, warm.total);
    }
}

#[test]
fn replan_starts_where_the_vehicle_is() {
    let s = still_water();
    let (planner, env, plan) = first_plan(&s, 5);
    let r = &s.rendezvous;
    for (k, u) in [(20, 0.2), (50, 0.5), (90, 0.9)] {
        let at = plan.trajectory.samples[k].position;
        let now = plan.trajectory.samples[k].t;
        let next = planner.replan(&plan, at, u, now, (r.t_r, r.epsilon), &env, Trigger::Drift, 7).unwrap();
        assert!((next.trajectory.start() - at).norm() < 1e-6);
        assert!((next.trajectory.end() - r.target).norm() < 1e-6);
        assert!((next.polygon().start - at).norm() == 0.0);
    }
}

#[test]
fn missions_are_deterministic_per_seed() {
    let s = quick("scenario3");
    let a = run_mission(&s, 11).unwrap();
    let b = run_mission(&s, 11).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}
