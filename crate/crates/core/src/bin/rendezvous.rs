use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use auv_rendezvous::optimizers::Algorithm;
use auv_rendezvous::report::comparison_table;
use auv_rendezvous::runner::{error_code, execute, Report, Request};
use auv_rendezvous::scenario::{Format, Scenario};
use auv_rendezvous::Error;

/// Plan and fly a time-constrained AUV rendezvous through a dynamic current field.
#[derive(Parser, Debug)]
#[command(name = "rendezvous", version)]
struct Args {
    /// Scenario JSON file, or a preset name (scenario1..scenario4).
    #[arg(long)]
    scenario: PathBuf,
    /// Optimizer: pso, bbo, de or fa. Defaults to the scenario's choice.
    #[arg(long)]
    algo: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Missions to fly (consecutive seeds). With --compare, per algorithm.
    #[arg(long)]
    runs: Option<usize>,
    /// Fly every algorithm over the same seeds and tabulate arrival times.
    #[arg(long)]
    compare: bool,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Comma-separated subset of csv,json,svg.
    #[arg(long, value_delimiter = ',')]
    format: Option<Vec<String>>,
}

fn request(args: Args) -> Result<Request, Error> {
    let mut scenario = Scenario::load(&args.scenario)?;
    if let Some(a) = &args.algo {
        scenario = scenario.with_algorithm(a.parse::<Algorithm>()?);
    }
    let formats = match &args.format {
        Some(list) => list.iter().map(|f| f.parse::<Format>()).collect::<Result<Vec<_>, _>>()?,
        None => scenario.output.formats.clone(),
    };
    let runs = args.runs.unwrap_or(if args.compare { scenario.runs } else { 1 });
    Ok(Request { seed: args.seed.unwrap_or(scenario.seed), runs, compare: args.compare, out: args.out, formats, scenario })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("RP_LOG_LEVEL", "warn")).init();
    let args = Args::parse();
    let result = request(args).and_then(|req| execute(&req));
    match result {
        Ok(report) => {
            match &report {
                Report::Runs(logs) => {
                    for l in logs {
                        let t_f = l.achieved_t_f.map_or("-".to_string(), |t| format!("{t:.1}"));
                        println!("seed {}: {} t_f={t_f} replans={} {}", l.seed, l.outcome, l.replans(), l.reason);
                    }
                }
                Report::Compare(rows) => print!("{}", comparison_table(rows)),
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_code(&e) as u8)
        }
    }
}
