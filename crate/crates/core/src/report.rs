//! Run artifacts: JSON summaries, CSV tables, an event log and top-down SVG overlays.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::env_map::{Cell, GridMap};
use crate::error::Result;
use crate::mission::{MissionLog, Outcome, PlanRecord};
use crate::optimizers::{Algorithm, OptimizerConfig};
use crate::scenario::{Format, PlannerSettings, Scenario, SvgLayers};
use crate::spline::write_samples_csv;
use crate::{Point2, Point3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSummary {
    pub index: usize,
    pub time: f64,
    pub trigger: String,
    pub best_total: f64,
    /// Predicted arrival on the mission clock.
    pub predicted_arrival: f64,
    pub collision_violation: f64,
    pub feasible: bool,
    pub iterations: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub scenario: String,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub outcome: Outcome,
    pub reason: String,
    pub t_r: f64,
    pub epsilon: f64,
    pub achieved_t_f: Option<f64>,
    pub replans: usize,
    pub incursions: usize,
    pub min_clearance: f64,
    pub final_collision_violation: f64,
    pub plans: Vec<PlanSummary>,
    pub optimizer: OptimizerConfig,
    pub planner: PlannerSettings,
}

impl RunSummary {
    pub fn new(log: &MissionLog, scenario: &Scenario) -> Self {
        let plans = log
            .plans
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let p = &r.plan;
                PlanSummary {
                    index: i,
                    time: p.time,
                    trigger: p.trigger.as_str().to_string(),
                    best_total: p.run.best_cost.total,
                    predicted_arrival: p.time + p.run.best_cost.t_f,
                    collision_violation: p.run.best_cost.term_6,
                    feasible: p.report.feasible,
                    iterations: p.run.iterations_used,
                    evaluations: p.run.evaluations,
                }
            })
            .collect();
        Self {
            schema_version: crate::scenario::SCHEMA_VERSION,
            scenario: log.scenario.clone(),
            algorithm: log.algorithm,
            seed: log.seed,
            outcome: log.outcome,
            reason: log.reason.clone(),
            t_r: log.t_r,
            epsilon: log.epsilon,
            achieved_t_f: log.achieved_t_f,
            replans: log.replans(),
            incursions: log.incursions,
            min_clearance: finite_or(log.min_clearance, -1.0),
            final_collision_violation: log.final_collision_violation(),
            plans,
            optimizer: scenario.optimizer.config.clone(),
            planner: scenario.planner.clone(),
        }
    }
}

/// JSON has no infinity; empty sets report the fallback.
fn finite_or(v: f64, fallback: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        fallback
    }
}

/// `plan, iteration, best_total, mean_total, collision_violation` for every plan.
pub fn write_convergence_csv<W: Write>(log: &MissionLog, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["plan", "iteration", "best_total", "mean_total", "collision_violation"])?;
    for (i, r) in log.plans.iter().enumerate() {
        for h in &r.plan.run.history {
            w.write_record([
                i.to_string(),
                h.iteration.to_string(),
                format!("{:.9e}", h.best_total),
                format!("{:.9e}", h.mean_total),
                format!("{:.9e}", h.collision_violation),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes the requested artifacts into `dir` and returns their paths.
pub fn write_artifacts(log: &MissionLog, scenario: &Scenario, map: &GridMap, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: String, bytes: Vec<u8>| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, bytes)?;
        written.push(path);
        Ok(())
    };
    let mut events = Vec::new();
    log.write_events(&mut events)?;
    put("events.log".into(), events)?;
    if formats.contains(&Format::Json) {
        let summary = RunSummary::new(log, scenario);
        put("summary.json".into(), serde_json::to_vec_pretty(&summary)?)?;
        put("mission.json".into(), serde_json::to_vec(log)?)?;
    }
    if formats.contains(&Format::Csv) {
        let mut buf = Vec::new();
        write_samples_csv(&log.flown, 0.0, &mut buf)?;
        put("flown.csv".into(), buf)?;
        let mut buf = Vec::new();
        write_convergence_csv(log, &mut buf)?;
        put("convergence.csv".into(), buf)?;
        for (i, r) in log.plans.iter().enumerate() {
            let mut buf = Vec::new();
            r.plan.trajectory.write_csv(r.plan.time, &mut buf)?;
            put(format!("plan_{i:02}.csv"), buf)?;
        }
    }
    if formats.contains(&Format::Svg) {
        let layers = scenario.output.svg_layers;
        for (i, r) in log.plans.iter().enumerate() {
            let svg = render_step(map, log, r, &layers, scenario.output.quiver);
            put(format!("step_{i:02}.svg"), svg.into_bytes())?;
        }
    }
    Ok(written)
}

/// Top-down projection: north up, east right.
struct View {
    lo: Point2,
    hi: Point2,
    scale: f64,
}

impl View {
    const SIZE: f64 = 700.0;

    fn new(map: &GridMap) -> Self {
        let (lo, hi) = map.extent();
        let span = (hi.x - lo.x).max(hi.y - lo.y).max(1.0);
        Self { lo, hi, scale: Self::SIZE / span }
    }

    fn xy(&self, x: f64, y: f64) -> (f64, f64) {
        ((y - self.lo.y) * self.scale, (self.hi.x - x) * self.scale)
    }

    fn width(&self) -> f64 {
        (self.hi.y - self.lo.y) * self.scale
    }

    fn height(&self) -> f64 {
        (self.hi.x - self.lo.x) * self.scale
    }
}

fn depth_shade(z: f64, zmax: f64) -> String {
    let f = (z / zmax.max(1.0)).clamp(0.0, 1.0);
    let l = (70.0 - 45.0 * f).round();
    format!("hsl(210,80%,{l}%)")
}

/// One frame: chart, current quiver, obstacles at planning time, flown and planned paths.
pub fn render_step(map: &GridMap, log: &MissionLog, rec: &PlanRecord, layers: &SvgLayers, quiver: usize) -> String {
    let v = View::new(map);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" viewBox="0 0 {:.1} {:.1}">"#,
        v.width(),
        v.height(),
        v.width(),
        v.height()
    );
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#f4f8fb"/>"##);
    if layers.map {
        s.push_str(&map_layer(map, &v));
    }
    if layers.current {
        s.push_str(&current_layer(rec, &v, quiver, rec.plan.leg.start.z));
    }
    if layers.obstacles {
        let _ = writeln!(s, r#"<g id="obstacles">"#);
        let k = rec.obstacles.confidence_multiplier;
        for o in &rec.obstacles.obstacles {
            let (cx, cy) = v.xy(o.position.x, o.position.y);
            let _ = writeln!(
                s,
                r##"<circle cx="{cx:.1}" cy="{cy:.1}" r="{:.1}" fill="#3cb371" fill-opacity="0.25" stroke="#2e8b57" stroke-dasharray="3,2"/>"##,
                o.confidence_radius(k) * v.scale
            );
            let _ = writeln!(s, r##"<circle cx="{cx:.1}" cy="{cy:.1}" r="{:.1}" fill="#555"/>"##, o.radius * v.scale);
        }
        let _ = writeln!(s, "</g>");
    }
    if layers.path {
        s.push_str(&path_layer(log, rec, &v, map.depth_limit()));
    }
    let _ = writeln!(s, "</svg>");
    s
}

fn map_layer(map: &GridMap, v: &View) -> String {
    let mut s = String::from("<g id=\"map\" fill=\"#c8b88a\">\n");
    let cs = map.cell_size();
    let origin = map.origin();
    // one rectangle per run of land cells along x
    for iy in 0..map.height() {
        let mut ix = 0;
        while ix < map.width() {
            if map.cell(ix, iy) != Cell::Forbidden {
                ix += 1;
                continue;
            }
            let start = ix;
            while ix < map.width() && map.cell(ix, iy) == Cell::Forbidden {
                ix += 1;
            }
            let x_hi = origin.x + ix as f64 * cs;
            let y_lo = origin.y + iy as f64 * cs;
            let (px, py) = v.xy(x_hi, y_lo);
            let _ = writeln!(
                s,
                r#"<rect x="{px:.1}" y="{py:.1}" width="{:.2}" height="{:.2}"/>"#,
                cs * v.scale,
                (ix - start) as f64 * cs * v.scale
            );
        }
    }
    s.push_str("</g>\n");
    s
}

fn current_layer(rec: &PlanRecord, v: &View, n: usize, depth: f64) -> String {
    let mut s = String::from("<g id=\"current\" stroke=\"#4682b4\" stroke-width=\"0.8\">\n");
    if n >= 2 {
        let grid = rec.current.sample_grid(v.lo, v.hi, n, n, depth);
        let cell = (v.hi.x - v.lo.x).max(v.hi.y - v.lo.y) / n as f64;
        let peak = grid.iter().map(|(_, c)| c.magnitude).fold(0.0, f64::max);
        for (p, c) in grid {
            if peak <= 0.0 || c.magnitude <= 0.0 {
                continue;
            }
            let k = 0.8 * cell / peak;
            let (x0, y0) = v.xy(p.x, p.y);
            let (x1, y1) = v.xy(p.x + c.u_c * k, p.y + c.v_c * k);
            let _ = writeln!(s, r#"<line x1="{x0:.1}" y1="{y0:.1}" x2="{x1:.1}" y2="{y1:.1}"/>"#);
        }
    }
    s.push_str("</g>\n");
    s
}

fn polyline(points: impl Iterator<Item = Point3>, v: &View) -> String {
    points
        .map(|p| {
            let (x, y) = v.xy(p.x, p.y);
            format!("{x:.1},{y:.1}")
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn path_layer(log: &MissionLog, rec: &PlanRecord, v: &View, zmax: f64) -> String {
    let mut s = String::from("<g id=\"path\" fill=\"none\">\n");
    let flown = &log.flown[..=rec.flown_index.min(log.flown.len().saturating_sub(1))];
    if flown.len() > 1 {
        let _ = writeln!(
            s,
            r##"<polyline points="{}" stroke="#222" stroke-width="1.5"/>"##,
            polyline(flown.iter().map(|f| f.position), v)
        );
    }
    for w in rec.plan.trajectory.samples.windows(2) {
        let (a, b) = (w[0].position, w[1].position);
        let (x0, y0) = v.xy(a.x, a.y);
        let (x1, y1) = v.xy(b.x, b.y);
        let _ = writeln!(
            s,
            r#"<line x1="{x0:.1}" y1="{y0:.1}" x2="{x1:.1}" y2="{y1:.1}" stroke="{}" stroke-width="2.5"/>"#,
            depth_shade(0.5 * (a.z + b.z), zmax)
        );
    }
    if let Some(first) = log.flown.first() {
        let (x, y) = v.xy(first.position.x, first.position.y);
        let _ = writeln!(s, r##"<circle cx="{x:.1}" cy="{y:.1}" r="5" fill="#d62728"/>"##);
    }
    let t = rec.plan.leg.target;
    let (x, y) = v.xy(t.x, t.y);
    let _ = writeln!(s, r##"<rect x="{:.1}" y="{:.1}" width="10" height="10" fill="#ffd700" stroke="#333"/>"##, x - 5.0, y - 5.0);
    let start = rec.plan.leg.start;
    let (x, y) = v.xy(start.x, start.y);
    let _ = writeln!(s, r##"<polygon points="{:.1},{:.1} {:.1},{:.1} {:.1},{:.1}" fill="#ffd700" stroke="#333"/>"##, x, y - 6.0, x - 5.0, y + 4.0, x + 5.0, y + 4.0);
    s.push_str("</g>\n");
    s
}

/// Per-algorithm statistics of a comparison sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub algorithm: Algorithm,
    pub runs: usize,
    pub rendezvous: usize,
    pub mean_t_f: Option<f64>,
    pub std_t_f: Option<f64>,
    pub mean_replans: f64,
    pub collisions: usize,
}

impl ComparisonRow {
    pub fn from_logs(algorithm: Algorithm, logs: &[MissionLog]) -> Self {
        let times: Vec<f64> = logs.iter().filter(|l| l.outcome == Outcome::Rendezvous).filter_map(|l| l.achieved_t_f).collect();
        let (mean, std) = if times.is_empty() {
            (None, None)
        } else {
            let n = times.len() as f64;
            let m = times.iter().sum::<f64>() / n;
            let var = if times.len() > 1 { times.iter().map(|t| (t - m).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
            (Some(m), Some(var.sqrt()))
        };
        Self {
            algorithm,
            runs: logs.len(),
            rendezvous: times.len(),
            mean_t_f: mean,
            std_t_f: std,
            mean_replans: logs.iter().map(|l| l.replans() as f64).sum::<f64>() / logs.len().max(1) as f64,
            collisions: logs.iter().filter(|l| l.incursions > 0).count(),
        }
    }
}

pub fn comparison_table(rows: &[ComparisonRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<6} {:>5} {:>11} {:>10} {:>9} {:>8} {:>10}", "algo", "runs", "rendezvous", "mean t_f", "std t_f", "replans", "collisions");
    let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.1}"));
    for r in rows {
        let _ = writeln!(
            s,
            "{:<6} {:>5} {:>11} {:>10} {:>9} {:>8.1} {:>10}",
            r.algorithm.as_str(),
            r.runs,
            r.rendezvous,
            opt(r.mean_t_f),
            opt(r.std_t_f),
            r.mean_replans,
            r.collisions
        );
    }
    s
}

pub fn write_comparison_csv<W: Write>(rows: &[ComparisonRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["algorithm", "runs", "rendezvous", "mean_t_f", "std_t_f", "mean_replans", "collisions"])?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.3}"));
    for r in rows {
        w.write_record([
            r.algorithm.as_str().to_string(),
            r.runs.to_string(),
            r.rendezvous.to_string(),
            opt(r.mean_t_f),
            opt(r.std_t_f),
            format!("{:.3}", r.mean_replans),
            r.collisions.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shading_darkens_with_depth() {
        assert_eq!(depth_shade(0.0, 100.0), "hsl(210,80%,70%)");
        assert_eq!(depth_shade(100.0, 100.0), "hsl(210,80%,25%)");
    }

    #[test]
    fn view_puts_north_up() {
        let map = GridMap::open(10, 10, 10.0, Point2::zeros(), 100.0).unwrap();
        let v = View::new(&map);
        assert_eq!(v.xy(100.0, 0.0), (0.0, 0.0));
        assert_eq!(v.xy(0.0, 100.0), (700.0, 700.0));
    }
}
