use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use jrt_cli::config::{ConfigError, OutputFormat, Overrides, ScenarioConfig};
use jrt_cli::{list_suites, output, run_suite};

/// Run seeded verification suites for exact orbital-integral computations.
#[derive(Debug, Parser)]
#[command(name = "jrt", version)]
struct Cli {
    /// JSON scenario file; flags given on the command line override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// odd prime p (q = p)
    #[arg(long)]
    prime: Option<u64>,
    /// n for suites that take it (1..=3)
    #[arg(long)]
    rank: Option<usize>,
    /// samples per sampled suite
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// suite to run; repeat for several (default: all default suites)
    #[arg(long = "suite")]
    suites: Vec<String>,
    /// largest log_p of a lattice index an enumeration may visit
    #[arg(long)]
    budget: Option<u64>,
    /// height bound for sampled matrix entries
    #[arg(long)]
    height_bound: Option<i64>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// record wall-clock milliseconds per check (report is then not reproducible)
    #[arg(long)]
    timings: bool,
    /// list the available suites and exit
    #[arg(long)]
    list: bool,
}

fn run(cli: Cli) -> Result<bool, ConfigError> {
    let base = match &cli.config {
        Some(p) => ScenarioConfig::from_file(p)?,
        None => ScenarioConfig::default(),
    };
    let config = base.apply(Overrides {
        prime: cli.prime,
        rank: cli.rank,
        samples: cli.samples,
        seed: cli.seed,
        suites: cli.suites,
        budget: cli.budget,
        output: cli.format,
        height_bound: cli.height_bound,
        timings: cli.timings,
    });
    let (text, ok) = if cli.list {
        (output::render_suites(&list_suites(), config.output), true)
    } else {
        let report = run_suite(&config)?;
        (output::render(&report, config.output), report.all_pass())
    };
    match &cli.out {
        Some(p) => std::fs::write(p, text).map_err(|source| ConfigError::Io { path: p.display().to_string(), source })?,
        None => print!("{text}"),
    }
    Ok(ok)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
