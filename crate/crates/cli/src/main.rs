//! `cebp`: simulate CEBP paths, analyse crossing trees, run verification suites.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 resource budget
//! exceeded, 4 analysis failure (including a verification suite that ran but
//! did not pass).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cebp::verify::Suite;

#[derive(Debug, Parser)]
#[command(
    name = "cebp",
    version,
    about = "Crossing-tree simulation and analysis of embedded branching processes"
)]
struct Cli {
    /// Worker threads for ensemble runs; defaults to all cores.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one path; writes <out>.path.csv, <out>.tree.ndjson and <out>.json.
    Simulate(SimulateArgs),
    /// Extract the crossing forest of a path CSV and estimate H.
    Analyze(AnalyzeArgs),
    /// Run a verification suite and print its verdict JSON.
    Verify(VerifyArgs),
    /// Report moments and the dominance offset of an offspring law.
    CheckDist(CheckDistArgs),
    /// Read an external CSV and write it as a canonical path artifact.
    Ingest(IngestArgs),
}

/// Offspring-law flags shared by several subcommands.
#[derive(Debug, Clone, Args, Default)]
pub struct FamilyArgs {
    /// geometric-pairs | poisson-pairs | fixed-pairs | custom
    #[arg(long)]
    pub family: Option<String>,
    /// Success probability of geometric-pairs.
    #[arg(long)]
    pub p: Option<f64>,
    /// Rate of poisson-pairs.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Pair count of fixed-pairs (Z = 2b).
    #[arg(long)]
    pub b: Option<u32>,
    /// Custom pmf as `z:p,z:p,...`.
    #[arg(long)]
    pub pmf: Option<String>,
    /// Geometric-pairs law with this Hurst index.
    #[arg(long = "H", value_name = "H")]
    pub hurst: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// JSON config; flags override its fields. A sidecar `.json` written by
    /// this tool is accepted and reproduces its run.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long)]
    pub depth: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// mean | sampled
    #[arg(long)]
    pub duration_mode: Option<String>,
    /// Generations per sampled leaf duration.
    #[arg(long)]
    pub k: Option<u32>,
    /// Concatenate root crossings until this horizon.
    #[arg(long)]
    pub tile_horizon: Option<f64>,
    #[arg(long)]
    pub node_budget: Option<usize>,
    /// Output prefix.
    #[arg(long, default_value = "cebp")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Path CSV (`time,value`).
    pub input: PathBuf,
    /// JSON config; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Inclusive level range `lo:hi`, e.g. `-3:0`.
    #[arg(long, allow_hyphen_values = true)]
    pub levels: Option<String>,
    /// Also compute local Hölder exponents over this inclusive eps level range.
    #[arg(long, allow_hyphen_values = true)]
    pub holder_eps: Option<String>,
    #[arg(long)]
    pub holder_grid: Option<usize>,
    /// Also compute modulus ratios over this inclusive dyadic range.
    #[arg(long, allow_hyphen_values = true)]
    pub modulus_l: Option<String>,
    /// Gauge index for the modulus; defaults to the estimated H.
    #[arg(long = "H", value_name = "H")]
    pub hurst: Option<f64>,
    /// Output prefix; defaults to the input path without extension.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write two-column CSVs for plotting next to the outputs.
    #[arg(long)]
    pub emit_plots: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_parser = parse_suite)]
    pub suite: Suite,
    /// JSON config; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long)]
    pub depth: Option<u32>,
    /// Ensemble size of the modulus suite.
    #[arg(long)]
    pub seeds: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Set any config field: `--set key=<json>`; repeatable.
    #[arg(long = "set", value_name = "KEY=JSON")]
    pub set: Vec<String>,
    /// Write the verdict here as well as to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Prefix for two-column plot CSVs.
    #[arg(long)]
    pub emit_plots: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckDistArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long)]
    pub y_max: Option<u32>,
    #[arg(long)]
    pub zeta_max: Option<u32>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    pub input: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub time_col: usize,
    #[arg(long, default_value_t = 1)]
    pub value_col: usize,
    /// auto | present | absent
    #[arg(long, default_value = "auto")]
    pub header: String,
    /// Shift values so the path starts at 0.
    #[arg(long)]
    pub anchor: bool,
    #[arg(long, default_value = "ingested")]
    pub out: PathBuf,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|_| {
        let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
        format!("unknown suite {s:?}; expected one of {}", names.join(", "))
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot start {n} workers: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Analyze(a) => commands::analyze(a),
        Command::Verify(a) => commands::verify(a),
        Command::CheckDist(a) => commands::check_dist(a),
        Command::Ingest(a) => commands::ingest(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.exit)
        }
    }
}
