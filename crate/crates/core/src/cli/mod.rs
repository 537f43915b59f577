//! Config-driven front end: `simulate`, `gate`, `sweep` and `phase`, each
//! writing its outputs plus a manifest into `--out`.

pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{
    gate_report, phase_summary, simulate_trajectory, sweep_rows, GateReportJson, PhaseSummary, RunManifest, SweepRow,
};
pub use config::{ConfigError, ExperimentConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_INTEGRATION: i32 = 2;
pub const EXIT_PARTIAL_SWEEP: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Run(#[from] crate::Error),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{failed} of {total} sweep points failed")]
    PartialSweep { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Run(e) if is_config_like(e) => EXIT_CONFIG,
            CliError::Run(_) => EXIT_INTEGRATION,
            CliError::PartialSweep { .. } => EXIT_PARTIAL_SWEEP,
        }
    }
}

fn is_config_like(e: &crate::Error) -> bool {
    use crate::Error::*;
    matches!(
        e,
        InvalidParameter { .. } | InvalidSchedule(_) | NonMonotonicRamp | UnknownLevel(_)
    )
}

#[derive(Debug, Parser)]
#[command(name = "stirap", version, about = "STIRAP geometric-phase simulations and gate certification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Propagate the initial state and write the trajectory CSV.
    Simulate(CommonArgs),
    /// Run the configured gate and write its report JSON.
    Gate(CommonArgs),
    /// Run the gate over the sweep grid and write one CSV row per point.
    Sweep(CommonArgs),
    /// Compare the numeric and closed-form geometric phases.
    Phase(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML experiment config.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads; defaults to the available cores.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub verbose: bool,
}

impl Command {
    fn args(&self) -> &CommonArgs {
        match self {
            Command::Simulate(a) | Command::Gate(a) | Command::Sweep(a) | Command::Phase(a) => a,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Gate(_) => "gate",
            Command::Sweep(_) => "sweep",
            Command::Phase(_) => "phase",
        }
    }
}

/// Runs one subcommand.
pub fn run(cmd: &Command) -> Result<RunManifest, CliError> {
    let args = cmd.args();
    let bytes = std::fs::read(&args.config).map_err(|e| CliError::Io(format!("{}: {e}", args.config.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|_| ConfigError::new("config", "not valid UTF-8"))?;
    let cfg = ExperimentConfig::parse(text)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    if args.verbose {
        eprintln!("{}: {} -> {}", cmd.name(), args.config.display(), args.out.display());
    }
    let out = &args.out;
    let result = pool.install(|| match cmd {
        Command::Simulate(_) => commands::simulate(&cfg, &bytes, out),
        Command::Gate(_) => commands::gate(&cfg, &bytes, out),
        Command::Sweep(_) => commands::sweep(&cfg, &bytes, out),
        Command::Phase(_) => commands::phase(&cfg, &bytes, out),
    });
    if args.verbose {
        if let Ok(m) = &result {
            for o in &m.outputs {
                eprintln!("  wrote {} ({:.3} s)", o.path, o.wall_clock_seconds);
            }
        }
    }
    result
}

/// Parses `args`, runs, reports errors on stderr and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run(&cli.command) {
        Ok(_) => EXIT_OK,
        Err(e) => {
            eprintln!("stirap {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}
