//! Build corridor boxes, draw a control polygon, and time the resulting spline through a current.
//!
//! cargo run --example spline_path

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use auv_rendezvous::current_field::{CurrentConfig, CurrentField};
use auv_rendezvous::spline::{corridor_bounds, synthesize_trajectory, CurveSampler};
use auv_rendezvous::{Point2, Point3};

fn main() -> auv_rendezvous::Result<()> {
    let start = Point3::new(300.0, 350.0, 30.0);
    let target = Point3::new(3130.0, 3180.0, 80.0);
    let bounds = corridor_bounds(start, target, 5)?.padded(Point3::new(300.0, 300.0, 40.0), Point3::zeros(), Point3::new(3500.0, 3500.0, 1000.0));
    for (i, (lo, hi)) in bounds.lower.iter().zip(&bounds.upper).enumerate() {
        println!("box {i}: x {:.0}..{:.0} y {:.0}..{:.0} z {:.0}..{:.0}", lo.x, hi.x, lo.y, hi.y, lo.z, hi.z);
    }
    let current = CurrentField::random(50, Point2::zeros(), Point2::new(3500.0, 3500.0), 28.0, 120.0, &CurrentConfig::default(), 1)?;
    let sampler = CurveSampler::new(7, 100, 3)?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for k in 0..3 {
        let poly = bounds.random_polygon(&mut rng);
        let traj = synthesize_trajectory(&poly, 2.5, &current, &sampler)?;
        let peak_r = traj.samples.iter().map(|s| s.r.abs()).fold(0.0, f64::max);
        println!("polygon {k}: length {:.0} m, t_f {:.1} s, peak yaw rate {:.4} rad/s", traj.length, traj.t_f, peak_r);
    }
    Ok(())
}
