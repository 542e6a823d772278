//! `radbound`: evaluate, check and verify the a-priori bounds from a TOML
//! run configuration.
//!
//! Exit status: 0 when everything ran and every check passed, 1 when a
//! verification record failed, 2 for configuration and regime errors, 3 for
//! numerical failures (solver breakdown, non-finite constants).

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Config;
use output::Format;

#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("regime error: {0}")]
    Regime(String),
    #[error("{0}")]
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) | Failure::Regime(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }
}

impl From<radbound_core::Error> for Failure {
    fn from(e: radbound_core::Error) -> Self {
        use radbound_core::Error as E;
        match e {
            E::Regime { .. } | E::BlowUp { .. } => Failure::Regime(e.to_string()),
            E::Config(_) | E::MissingNorm { .. } | E::MissingEmbedding { .. } => Failure::Config(e.to_string()),
            E::Constant(_) | E::Solver(_) => Failure::Runtime(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "radbound", version, about = "Explicit a-priori bounds for radiation-type elliptic problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (TOML); see configs/unit_square.toml
    #[arg(long, global = true)]
    spec: Option<PathBuf>,
    /// Output file, written atomically; stdout when absent
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Recorded in the output; every command is deterministic
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Relative tolerance replacing the per-record tolerances of verify and green
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Every applicable bound report for [spec]
    Bounds,
    /// The hypothesis check of every estimate for [spec]
    Regimes,
    /// Solve [instance] and tabulate norms of the solution
    Solve,
    /// Run the [verify] studies on [instance]
    Verify,
    /// Run the Green-function study of [green]
    Green,
    /// Sweep one parameter of [spec] as set in [sweep]
    Sweep,
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    let path = cli
        .spec
        .as_ref()
        .ok_or_else(|| Failure::Config("--spec <path> is required".into()))?;
    if let Some(t) = cli.tol {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Failure::Config(format!("--tol {t} must be a finite nonnegative number")));
        }
    }
    let cfg = Config::load(path)?;
    let seed = cli.seed;
    let result = match cli.command {
        Command::Bounds => commands::bounds(&cfg, seed)?,
        Command::Regimes => commands::regimes(&cfg, seed)?,
        Command::Solve => commands::solve(&cfg, seed)?,
        Command::Verify => commands::verify(&cfg, seed, cli.tol)?,
        Command::Green => commands::green(&cfg, seed, cli.tol)?,
        Command::Sweep => commands::sweep_cmd(&cfg, seed)?,
    };
    let text = result.artifact.render(cli.format)?;
    match &cli.out {
        Some(p) => output::write_atomic(p, &text)?,
        None => print!("{text}"),
    }
    Ok(result.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("radbound: verification failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("radbound: {e}");
            ExitCode::from(e.code())
        }
    }
}
