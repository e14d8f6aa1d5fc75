use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use fsuc_core::error::Error;
use fsuc_core::experiment::{compare_runs, run_experiment, EfrMode, ExperimentSpec, ScenarioName};

const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;

/// Frequency-secured stochastic unit commitment case studies.
#[derive(Parser, Debug)]
#[command(name = "fsuc", version, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    #[command(flatten)]
    run: RunArgs,

    /// More log output (repeat for debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cost deltas between two hourly reports.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Energy-only hourly report over the same hours.
        #[arg(long)]
        baseline: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    /// unlink-1, unlink-2, co-opt-1, co-opt-2 or custom.
    #[arg(long)]
    scenario: Option<String>,
    /// Comma-separated months or ranges, e.g. `1,3-5`; default all twelve.
    #[arg(long)]
    months: Option<String>,
    #[arg(long)]
    wind_capacity_mw: Option<f64>,
    #[arg(long)]
    largest_loss_mw: Option<f64>,
    /// none, fixed-200 or optimized.
    #[arg(long)]
    efr: Option<String>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Also run the wind/loss grid of frequency-service costs.
    #[arg(long)]
    sensitivity_grid: bool,
    /// Simulate whole months instead of one representative week each.
    #[arg(long)]
    full_month: bool,
    #[arg(long, env = "FSUC_OUT_DIR", default_value = "fsuc-out")]
    out: PathBuf,
    /// Relative MIP gap per rolling solve.
    #[arg(long)]
    gap: Option<f64>,
    /// Seconds per rolling solve. Results then depend on machine speed.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Branch-and-bound nodes per rolling solve.
    #[arg(long)]
    node_limit: Option<usize>,
}

fn parse_months(s: &str) -> Result<Vec<u32>, Error> {
    let bad = || Error::Validation {
        field: "months".into(),
        reason: format!("cannot parse {s:?}"),
    };
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim) {
        match part.split_once('-') {
            Some((a, b)) => {
                let a: u32 = a.trim().parse().map_err(|_| bad())?;
                let b: u32 = b.trim().parse().map_err(|_| bad())?;
                if a > b {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    Ok(out)
}

fn build_spec(a: &RunArgs) -> Result<ExperimentSpec, Error> {
    let scenario: ScenarioName = a
        .scenario
        .as_deref()
        .ok_or_else(|| Error::Validation {
            field: "scenario".into(),
            reason: "required".into(),
        })?
        .parse()?;
    let mut spec = ExperimentSpec::new(scenario, &a.out);
    if let Some(m) = &a.months {
        spec.months = parse_months(m)?;
    }
    if let Some(w) = a.wind_capacity_mw {
        spec.wind_capacity = w;
    }
    if let Some(l) = a.largest_loss_mw {
        spec.largest_loss = l;
    }
    if let Some(e) = &a.efr {
        spec.efr_mode = Some(e.parse::<EfrMode>()?);
    }
    spec.seed = a.seed;
    spec.sensitivity_grid = a.sensitivity_grid;
    spec.full_month = a.full_month;
    if let Some(g) = a.gap {
        spec.solve.gap_tol = g;
    }
    if let Some(t) = a.time_limit {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::Validation {
                field: "time_limit".into(),
                reason: "must be > 0 seconds".into(),
            });
        }
        spec.solve.time_limit = Some(Duration::from_secs_f64(t));
    }
    if let Some(n) = a.node_limit {
        spec.solve.node_limit = Some(n);
    }
    spec.validate()?;
    Ok(spec)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) | Error::Validation { .. } | Error::OptionConflict(_) | Error::InvalidQuantile(_) => {
            EXIT_CONFIG
        }
        Error::Planner { source, .. } => exit_code(source).max(EXIT_SOLVER),
        Error::Solver(_) | Error::Unsolved(_) | Error::InfeasibleInertia { .. } | Error::NoNadir { .. } => {
            EXIT_SOLVER
        }
        _ => 1,
    }
}

fn run(args: &RunArgs) -> Result<(), (u8, anyhow::Error)> {
    let spec = build_spec(args).map_err(|e| (exit_code(&e), anyhow::Error::new(e)))?;
    log::info!(
        "{} months {:?} wind {} MW loss {} MW",
        spec.scenario,
        spec.months,
        spec.wind_capacity,
        spec.largest_loss
    );
    let report = run_experiment(&spec).map_err(|e| (exit_code(&e), anyhow::Error::new(e)))?;
    for s in &report.summary.strategies {
        println!("{:<14} total £{:.0}", s.label, s.total_cost);
        if let Some(f) = s.frequency_service_cost {
            println!("{:<14} frequency services £{:.0}", "", f);
        }
    }
    if let Some(s) = report.summary.savings {
        println!("co-optimized saves £{s:.0}");
    }
    for f in &report.files {
        log::info!("wrote {}", f.display());
    }
    Ok(())
}

fn compare(a: &Path, b: &Path, baseline: Option<&Path>) -> anyhow::Result<()> {
    let r = compare_runs(a, b, baseline)
        .with_context(|| format!("comparing {} and {}", a.display(), b.display()))?;
    println!("{}", serde_json::to_string_pretty(&r)?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match &cli.command {
        Some(Command::Compare { a, b, baseline }) => match compare(a, b, baseline.as_deref()) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e:#}");
                let code = match e.downcast_ref::<Error>() {
                    Some(Error::Coverage(_)) => EXIT_CONFIG,
                    _ => 1,
                };
                ExitCode::from(code)
            }
        },
        None => match run(&cli.run) {
            Ok(()) => ExitCode::SUCCESS,
            Err((code, e)) => {
                eprintln!("error: {e:#}");
                ExitCode::from(code)
            }
        },
    }
}
