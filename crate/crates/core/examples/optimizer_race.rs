//! Run the four optimizers on the same planning problem and print their convergence.
//!
//! cargo run --release --example optimizer_race

use auv_rendezvous::cost;
use auv_rendezvous::environment::EnvironmentSnapshot;
use auv_rendezvous::mission::Planner;
use auv_rendezvous::optimizers::{optimize, Algorithm, ObjectiveContext, OptimizerConfig};
use auv_rendezvous::scenario::Scenario;

fn main() -> auv_rendezvous::Result<()> {
    let s = Scenario::preset("scenario3")?;
    let map = s.load_map()?;
    let env = EnvironmentSnapshot::new(map.clone(), s.current_field(&map, 5)?, s.obstacle_set(&map, 5)?, 0.0);
    let planner = Planner::from_scenario(&s, map);
    let leg = s.rendezvous.spec();
    let bounds = planner.corridor(leg.start, leg.target, s.planner.control_points - 2)?;
    let ctx = ObjectiveContext::new(bounds, |poly| {
        let traj = planner.trajectory(poly, &env).expect("positive speed");
        cost::evaluate(&traj, &env, &s.limits, &leg, &s.weights).expect("valid leg")
    });
    let cfg = OptimizerConfig::with_budget(50, 60);
    println!("{:<4} {:>12} {:>12} {:>12} {:>9} {:>7}", "algo", "iter 1", "iter 30", "final", "t_f", "evals");
    for algo in Algorithm::ALL {
        let run = optimize(algo, &ctx, &cfg, 9, None)?;
        let at = |i: usize| run.history.get(i).map_or(f64::NAN, |h| h.best_total);
        println!(
            "{:<4} {:>12.4e} {:>12.4e} {:>12.4e} {:>9.1} {:>7}",
            algo.as_str(),
            at(0),
            at(29),
            run.best_cost.total,
            run.best_cost.t_f,
            run.evaluations
        );
    }
    Ok(())
}
