//! Command-line front end.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{LhfError, Result};
use crate::occupations::Side;
pub use commands::{beta_table, run_jump, run_scan, run_single, wick_verify, JumpSummary};
pub use config::{load_config, parse_config, RunConfig, ScanRange};
pub use output::{fmt_num, profile_csv, scan_csv, PointRecord};

pub const WICK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(name = "lhfrac", version, about = "Localized Hartree-Fock potentials at fractional particle number")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `output.path`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Gauge at integer particle number.
    #[arg(long, default_value = "below")]
    pub side: Side,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One self-consistent run, JSON record.
    Single(RunArgs),
    /// E(N) over `scan.start..=scan.stop`, CSV.
    Scan(RunArgs),
    /// Potential jumps across the integer `N_total`.
    Jump {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
    },
    /// Renormalized HOMO fraction against the physical one, CSV.
    BetaTable {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Randomized Fock-space checks of the density-matrix factorization.
    WickVerify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn exit_code(err: &LhfError) -> i32 {
    match err {
        LhfError::NotConverged { .. } | LhfError::Singular(_) | LhfError::Eigensolver { .. } => 3,
        LhfError::Unbound(_) => 4,
        LhfError::Io(_) => 1,
        _ => 2,
    }
}

fn json<T: serde::Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| LhfError::Config(format!("serialization failed: {e}")))
}

fn profile_path(out: &std::path::Path) -> PathBuf {
    out.with_extension("profile.csv")
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Single(args) => {
            let config = load_config(&args.config)?;
            let out = args.out.or_else(|| config.output_path.clone());
            if config.output_profiles && out.is_none() {
                return Err(LhfError::Config("output.profiles needs an output path".into()));
            }
            let (grid, res, record) = run_single(&config, args.side)?;
            let text = json(&record)?;
            if let Some(path) = &out {
                if config.output_profiles {
                    std::fs::write(profile_path(path), profile_csv(&grid, &res)?)?;
                }
            }
            output::emit(out.as_deref(), &text)?;
        }
        Command::Scan(args) => {
            let config = load_config(&args.config)?;
            let range = config
                .scan
                .ok_or_else(|| LhfError::Config("scan needs scan.start, scan.stop, scan.step".into()))?;
            let rows = run_scan(&config, &range.points(), args.side)?;
            let out = args.out.or_else(|| config.output_path.clone());
            output::emit(out.as_deref(), &scan_csv(&rows))?;
        }
        Command::Jump { run, delta } => {
            let config = load_config(&run.config)?;
            let (summary, csv) = run_jump(&config, delta, run.side)?;
            let out = run.out.or_else(|| config.output_path.clone());
            output::emit(out.as_deref(), &csv)?;
            eprint!("{}", json(&summary)?);
        }
        Command::BetaTable { out } => output::emit(out.as_deref(), &beta_table()?)?,
        Command::WickVerify { seed, trials, out } => {
            let report = wick_verify(seed, trials)?;
            output::emit(out.as_deref(), &json(&report)?)?;
            if !report.passed(WICK_TOLERANCE) {
                return Ok(1);
            }
        }
    }
    Ok(0)
}
