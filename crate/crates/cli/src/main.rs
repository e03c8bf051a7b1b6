use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use topdc_cli::commands::{self, Options, PhysicsError};
use topdc_cli::config::{ConfigError, RunConfig};

#[derive(Parser)]
#[command(name = "topdc", version, about = "Photon-triplet generation rates in waveguides and microrings")]
struct Cli {
    /// Run configuration (TOML)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for reports, tables and charts
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Print machine-readable JSON instead of a table
    #[arg(long, global = true)]
    json: bool,

    /// Monte-Carlo seed, recorded in every output
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[arg(long, short, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Evaluate every scenario
    Rate,
    /// Run every sweep and fit its scaling exponent
    Sweep,
    /// Search for phase-matched wavelengths
    Phasematch,
    /// Waveguide generation bandwidths
    Bandwidth,
    /// Effective areas from mode profiles
    Overlap,
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let path = cli.config.as_ref().ok_or_else(|| ConfigError("--config is required".into()))?;
    let cfg = RunConfig::load(path)?;
    let opts = Options { out: cli.out.clone(), json: cli.json, seed: cli.seed };
    match cli.command {
        Command::Rate => commands::rate(&cfg, &opts),
        Command::Sweep => commands::sweep(&cfg, &opts),
        Command::Phasematch => commands::phasematch(&cfg, &opts),
        Command::Bandwidth => commands::bandwidth(&cfg, &opts),
        Command::Overlap => commands::overlap(&cfg, &opts),
    }
    .map(|_| ())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "debug" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else if e.downcast_ref::<PhysicsError>().is_some() {
                ExitCode::from(3)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
