//! Fly one seeded mission of a preset and write its artifacts.
//!
//! cargo run --release --example mission -- [preset] [seed] [out-dir]

use std::path::PathBuf;

use auv_rendezvous::mission::run_mission_with_map;
use auv_rendezvous::report::write_artifacts;
use auv_rendezvous::scenario::{Format, Scenario};

fn main() -> auv_rendezvous::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "scenario4".into());
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| format!("out/{name}-{seed}")));
    let s = Scenario::preset(&name)?;
    let map = s.load_map()?;
    let log = run_mission_with_map(&s, map.clone(), seed)?;
    for e in &log.events {
        println!("{}", e.line());
    }
    let files = write_artifacts(&log, &s, &map, &out, &[Format::Csv, Format::Json, Format::Svg])?;
    println!("{} files in {}", files.len(), out.display());
    Ok(())
}
