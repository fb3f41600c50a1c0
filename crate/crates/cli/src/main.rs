//! `stakesim`: analytic tables, Monte Carlo experiments, length races, and
//! bound verification for dual-threshold stake systems.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error,
//! 3 I/O error.

mod config;
mod jobs;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ConfigFile, JobKind, OutputFormat, Overrides};

const THREADS_ENV: &str = "STAKESIM_THREADS";

#[derive(Parser)]
#[command(
    name = "stakesim",
    version,
    about = "Stake-system experiments: closed forms, Monte Carlo, races, bound checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form expected times and upper bounds, one row per chain length
    Analytic(CommonArgs),
    /// Monte Carlo chain-building trials with summary statistics
    Simulate(CommonArgs),
    /// Independent attacker-versus-honest length races (exploratory)
    Race(CommonArgs),
    /// Inequality grid verification; exits 1 if a mandatory check fails
    VerifyBounds(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment configuration file (TOML)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (overrides the file)
    #[arg(long)]
    seed: Option<u64>,
    /// Trial count (overrides the file)
    #[arg(long)]
    trials: Option<u64>,
    /// Worker thread cap; STAKESIM_THREADS is the fallback default
    #[arg(long)]
    threads: Option<usize>,
    /// Output format
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Output path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(arg: FormatArg) -> Self {
        match arg {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (job, args) = match cli.command {
        Command::Analytic(args) => (JobKind::Analytic, args),
        Command::Simulate(args) => (JobKind::Simulate, args),
        Command::Race(args) => (JobKind::Race, args),
        Command::VerifyBounds(args) => (JobKind::VerifyBounds, args),
    };
    ExitCode::from(run(job, args))
}

fn env_threads() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.parse().ok()
}

fn run(job: JobKind, args: CommonArgs) -> u8 {
    let file = match &args.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(text) => match ConfigFile::parse(&text) {
                Ok(file) => file,
                Err(error) => {
                    eprintln!("stakesim: {error}");
                    return 2;
                }
            },
            Err(error) => {
                eprintln!("stakesim: config error: cannot read {}: {error}", path.display());
                return 2;
            }
        },
        None => ConfigFile::default(),
    };

    let overrides = Overrides {
        seed: args.seed,
        trials: args.trials,
        threads: args.threads.or_else(env_threads),
        format: args.format.map(OutputFormat::from),
        out: args.out,
    };
    let experiment = match config::resolve(job, &file, &overrides) {
        Ok(experiment) => experiment,
        Err(error) => {
            eprintln!("stakesim: {error}");
            return 2;
        }
    };

    if let Some(threads) = experiment.threads {
        // Trial substreams are seed-derived, so the thread count bounds
        // parallelism without changing any output.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }

    let output = match jobs::run_plan(&experiment.plan, experiment.format) {
        Ok(output) => output,
        Err(error) => {
            eprintln!("stakesim: {error}");
            return 2;
        }
    };
    for warning in &output.warnings {
        eprintln!("stakesim: warning: {warning}");
    }

    match &experiment.out {
        Some(path) => {
            if let Err(error) = std::fs::write(path, &output.text) {
                eprintln!("stakesim: io error: cannot write {}: {error}", path.display());
                return 3;
            }
        }
        None => {
            use std::io::Write;
            if std::io::stdout().write_all(output.text.as_bytes()).is_err() {
                return 3;
            }
        }
    }
    output.exit_code as u8
}
