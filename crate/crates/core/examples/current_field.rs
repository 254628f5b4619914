//! Sample a multi-vortex current field, let it evolve, and dump a velocity grid.
//!
//! cargo run --example current_field

use auv_rendezvous::current_field::{CurrentConfig, CurrentField};
use auv_rendezvous::{Point2, Point3};

fn main() -> auv_rendezvous::Result<()> {
    let (lo, hi) = (Point2::zeros(), Point2::new(3500.0, 3500.0));
    let mut field = CurrentField::random(50, lo, hi, 28.0, 120.0, &CurrentConfig::default(), 7)?;
    let probe = Point3::new(1700.0, 1800.0, 50.0);
    for step in 0..=5 {
        let c = field.velocity_3d(probe);
        println!("t={:>4.0}s |V|={:.3} m/s psi={:+.2} rad w={:+.4} m/s", step as f64 * field.update_period(), c.magnitude, c.psi_c, c.w_c);
        field = field.evolve();
    }
    let peak = field.sample_grid(lo, hi, 70, 70, 0.0).iter().map(|(_, c)| c.magnitude).fold(0.0, f64::max);
    println!("peak speed on a 70x70 lattice: {peak:.3} m/s");
    field.write_grid_csv(lo, hi, 8, 8, 0.0, std::io::stdout())?;
    Ok(())
}
