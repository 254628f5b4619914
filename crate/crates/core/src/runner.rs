//! Command-line plumbing: seeded single runs, comparison sweeps and exit codes.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::env_map::GridMap;
use crate::error::{Error, Result};
use crate::mission::{run_mission_with_map, MissionLog, Outcome};
use crate::optimizers::Algorithm;
use crate::report::{comparison_table, write_artifacts, write_comparison_csv, ComparisonRow, RunSummary};
use crate::scenario::{Format, Scenario};

pub const EXIT_RENDEZVOUS: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CANCEL: i32 = 10;
pub const EXIT_FAILED: i32 = 11;
pub const EXIT_CONFIG: i32 = 20;
pub const EXIT_MAP: i32 = 21;
pub const EXIT_ALGORITHM: i32 = 22;
pub const EXIT_OUTPUT: i32 = 23;

pub fn outcome_code(outcome: Outcome) -> i32 {
    match outcome {
        Outcome::Rendezvous => EXIT_RENDEZVOUS,
        Outcome::Cancel => EXIT_CANCEL,
        Outcome::Failed => EXIT_FAILED,
    }
}

pub fn error_code(err: &Error) -> i32 {
    match err {
        Error::UnknownAlgorithm(_) => EXIT_ALGORITHM,
        Error::MapRead { .. } => EXIT_MAP,
        Error::Io(_) | Error::Csv(_) => EXIT_OUTPUT,
        _ => EXIT_CONFIG,
    }
}

/// Everything one invocation needs.
#[derive(Debug, Clone)]
pub struct Request {
    pub scenario: Scenario,
    /// Seed of the first run; run `i` uses `seed + i`.
    pub seed: u64,
    pub runs: usize,
    pub compare: bool,
    pub out: PathBuf,
    pub formats: Vec<Format>,
}

#[derive(Debug)]
pub enum Report {
    Runs(Vec<MissionLog>),
    Compare(Vec<ComparisonRow>),
}

impl Report {
    /// Worst outcome across the runs; comparisons always succeed.
    pub fn exit_code(&self) -> i32 {
        match self {
            Report::Runs(logs) => logs.iter().map(|l| outcome_code(l.outcome)).max().unwrap_or(EXIT_RENDEZVOUS),
            Report::Compare(_) => EXIT_RENDEZVOUS,
        }
    }
}

fn seeds(req: &Request) -> Vec<u64> {
    (0..req.runs as u64).map(|i| req.seed.wrapping_add(i)).collect()
}

pub fn execute(req: &Request) -> Result<Report> {
    req.scenario.validate()?;
    if req.runs == 0 {
        return Err(Error::InvalidConfig("runs must be positive".into()));
    }
    let map = req.scenario.load_map()?;
    fs::create_dir_all(&req.out)?;
    if req.compare {
        compare(req, map).map(Report::Compare)
    } else {
        single(req, map).map(Report::Runs)
    }
}

fn single(req: &Request, map: Arc<GridMap>) -> Result<Vec<MissionLog>> {
    let mut logs = Vec::new();
    for seed in seeds(req) {
        let log = run_mission_with_map(&req.scenario, map.clone(), seed)?;
        let dir = if req.runs == 1 { req.out.clone() } else { req.out.join(format!("seed_{seed}")) };
        write_artifacts(&log, &req.scenario, &map, &dir, &req.formats)?;
        log::info!("seed {seed}: {} {}", log.outcome, log.reason);
        logs.push(log);
    }
    Ok(logs)
}

#[derive(Serialize)]
struct Comparison<'a> {
    scenario: &'a str,
    seeds: Vec<u64>,
    rows: &'a [ComparisonRow],
}

fn compare(req: &Request, map: Arc<GridMap>) -> Result<Vec<ComparisonRow>> {
    let seeds = seeds(req);
    let mut rows = Vec::new();
    for algo in Algorithm::ALL {
        let scenario = req.scenario.clone().with_algorithm(algo);
        let logs = seeds.par_iter().map(|&s| run_mission_with_map(&scenario, map.clone(), s)).collect::<Result<Vec<_>>>()?;
        let dir = req.out.join(algo.as_str());
        fs::create_dir_all(&dir)?;
        for log in &logs {
            let summary = RunSummary::new(log, &scenario);
            fs::write(dir.join(format!("seed_{}.json", log.seed)), serde_json::to_vec_pretty(&summary)?)?;
        }
        let row = ComparisonRow::from_logs(algo, &logs);
        log::info!("{algo}: {}/{} rendezvous", row.rendezvous, row.runs);
        rows.push(row);
    }
    write_comparison(&req.out, &req.scenario.name, &seeds, &rows)?;
    Ok(rows)
}

fn write_comparison(out: &Path, name: &str, seeds: &[u64], rows: &[ComparisonRow]) -> Result<()> {
    let mut csv = Vec::new();
    write_comparison_csv(rows, &mut csv)?;
    fs::write(out.join("comparison.csv"), csv)?;
    let doc = Comparison { scenario: name, seeds: seeds.to_vec(), rows };
    fs::write(out.join("comparison.json"), serde_json::to_vec_pretty(&doc)?)?;
    fs::write(out.join("comparison.txt"), comparison_table(rows))?;
    Ok(())
}
