//! Render a synthetic coastal chart, cluster it into water and land, and export a PGM.
//!
//! cargo run --example chart_clustering -- [out.pgm]

use auv_rendezvous::env_map::io::write_pgm;
use auv_rendezvous::env_map::synthetic::CoastSpec;
use auv_rendezvous::env_map::{cluster_map_with, ClusterOptions};
use auv_rendezvous::Point2;

fn main() -> auv_rendezvous::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "chart.pgm".into());
    let coast = CoastSpec::default();
    let raster = coast.render()?;
    let opts = ClusterOptions { k: 2, water_seed: Some(Point2::new(1500.0, 1500.0)), ..Default::default() };
    let clustered = cluster_map_with(&raster, &opts)?;
    let map = &clustered.map;
    println!(
        "{}x{} cells, {} feasible, {} Lloyd iterations, objective {:.3}",
        map.width(),
        map.height(),
        map.feasible_count(),
        clustered.kmeans.iterations,
        clustered.kmeans.objective()
    );
    let probe = Point2::new(1500.0, 1500.0);
    println!("distance from {probe:?} to the nearest land: {:.1} m", map.distance_to_forbidden(probe));
    write_pgm(map, std::fs::File::create(&out)?)?;
    println!("wrote {out}");
    Ok(())
}
