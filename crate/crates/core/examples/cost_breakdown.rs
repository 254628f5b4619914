//! Score candidate paths for scenario 4 and list every penalty term.
//!
//! cargo run --example cost_breakdown

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use auv_rendezvous::cost;
use auv_rendezvous::environment::EnvironmentSnapshot;
use auv_rendezvous::mission::Planner;
use auv_rendezvous::scenario::Scenario;

fn main() -> auv_rendezvous::Result<()> {
    let s = Scenario::preset("scenario4")?;
    let map = s.load_map()?;
    let env = EnvironmentSnapshot::new(map.clone(), s.current_field(&map, 1)?, s.obstacle_set(&map, 1)?, 0.0);
    let planner = Planner::from_scenario(&s, map);
    let leg = s.rendezvous.spec();
    let bounds = planner.corridor(leg.start, leg.target, s.planner.control_points - 2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    println!("pi_term,term_1,term_2,term_3,term_4,term_5,term_6,term_7,total,t_f,violations");
    for _ in 0..5 {
        let poly = bounds.random_polygon(&mut rng);
        let traj = planner.trajectory(&poly, &env)?;
        let c = cost::evaluate(&traj, &env, &s.limits, &leg, &s.weights)?;
        let rep = cost::check_feasible(&traj, &env, &s.limits, &leg)?;
        let names: Vec<&str> = rep.violations.iter().map(|v| v.clause.as_str()).collect();
        let terms: Vec<String> = std::iter::once(c.pi_term).chain(c.terms()).chain([c.total, c.t_f]).map(|v| format!("{v:.4e}")).collect();
        println!("{},{}", terms.join(","), names.join("|"));
    }
    Ok(())
}
