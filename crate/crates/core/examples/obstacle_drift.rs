//! Spawn uncertain obstacles between two points and watch them move.
//!
//! cargo run --example obstacle_drift

use auv_rendezvous::current_field::{CurrentConfig, CurrentField};
use auv_rendezvous::obstacles::ObstacleRoster;
use auv_rendezvous::{Point2, Point3};

fn main() -> auv_rendezvous::Result<()> {
    let start = Point3::new(300.0, 350.0, 30.0);
    let dest = Point3::new(3130.0, 3180.0, 80.0);
    let roster = ObstacleRoster { quasi_static: 2, moving: 2, dynamic: 2, ..Default::default() };
    let current = CurrentField::random(50, Point2::zeros(), Point2::new(3500.0, 3500.0), 28.0, 120.0, &CurrentConfig::default(), 3)?;
    let mut set = roster.spawn(start, dest, 11, |_| true)?;
    let mut done = 0;
    for step in [0, 50, 100] {
        while done < step {
            set = set.step(&current);
            done += 1;
        }
        println!("after {step} steps:");
        for o in &set.obstacles {
            let p = o.position;
            println!(
                "  {:<12} ({:7.1}, {:7.1}, {:5.1}) r={:5.1} boundary={:5.1}",
                o.kind.as_str(),
                p.x,
                p.y,
                p.z,
                o.radius,
                o.confidence_radius(set.confidence_multiplier)
            );
        }
    }
    let mid = (start + dest) * 0.5;
    println!("clearance at the midpoint: {:.1} m", set.clearance(mid));
    Ok(())
}
