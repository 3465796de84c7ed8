//! `rqdyn`: run log-linear quotient dynamics from JSON configs and write
//! CSV/JSON result bundles.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

mod commands;
mod error;
mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use commands::{load_config, Overrides};
use error::{CliError, CliResult};
use output::{compare_summaries, write_bundle, Bundle};

#[derive(Debug, Parser)]
#[command(name = "rqdyn", version, about = "Log-linear reaction-quotient dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output directory for CSV/JSON files.
    #[arg(long, global = true, default_value = "rqdyn-out")]
    out: PathBuf,

    /// Override the end of the time grid.
    #[arg(long, global = true)]
    t_end: Option<f64>,

    /// Override the number of time samples.
    #[arg(long, global = true)]
    samples: Option<usize>,

    /// Reserved; every computation is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Recompute and compare summary values (and any existing summary.json in --out).
    #[arg(long, global = true)]
    validate: bool,

    /// Override a scenario parameter, e.g. `--set ratio=10` or `--set sweep.points=11`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Args)]
struct Source {
    /// Scenario JSON file.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Embedded preset to use instead of a file.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the configured system and write trajectory.csv.
    Simulate(Source),

    /// Steady state x_ss = K⁻¹u and Q_ss.
    SteadyState {
        #[command(flatten)]
        source: Source,
        /// Constant drive (comma separated); defaults to the configured constant drive.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        u: Option<Vec<f64>>,
    },

    /// Eigenvalues, eigenvectors and oscillation parameters of K.
    Eigen(Source),

    /// Concentrations from target ln Q and conserved totals.
    Reconstruct {
        /// Network JSON file.
        #[arg(long, alias = "network")]
        config: PathBuf,
        /// Target ln Q, one per reaction (comma separated).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        x_star: Vec<f64>,
        /// Conserved totals, one per conservation law (comma separated).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        y_star: Vec<f64>,
    },

    /// Run a preset (or a scenario file) and write every series.
    Scenario {
        /// Preset name, e.g. hexokinase or coupled_transport.
        name: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// ATP/ADP ratio (hexokinase shorthand for `--set ratio=...`).
        #[arg(long)]
        ratio: Option<f64>,
    },

    /// Wegscheider cycle check and optional achievability of ln Q.
    Check {
        /// Network JSON file.
        #[arg(long, alias = "network")]
        config: PathBuf,
        /// Equilibrium constants, one per reaction (comma separated).
        #[arg(long, value_delimiter = ',', required = true)]
        k_eq: Vec<f64>,
        /// ln Q vector to test against Im(Sᵀ).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Option<Vec<f64>>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::SteadyState { .. } => "steady-state",
            Command::Eigen(_) => "eigen",
            Command::Reconstruct { .. } => "reconstruct",
            Command::Scenario { .. } => "scenario",
            Command::Check { .. } => "check",
        }
    }
}

fn execute(cli: &Cli) -> CliResult<Bundle> {
    let mut ov = Overrides {
        t_end: cli.t_end,
        samples: cli.samples,
        set: cli.set.clone(),
    };
    let cfg = |s: &Source, ov: &Overrides| load_config(s.config.as_deref(), s.preset.as_deref(), ov);
    match &cli.command {
        Command::Simulate(s) => commands::simulate(&cfg(s, &ov)?),
        Command::SteadyState { source, u } => commands::steady(&cfg(source, &ov)?, u.as_deref()),
        Command::Eigen(s) => commands::eigen(&cfg(s, &ov)?),
        Command::Reconstruct { config, x_star, y_star } => commands::reconstruct(config, x_star, y_star),
        Command::Scenario { name, config, ratio } => {
            if let Some(r) = ratio {
                ov.set.push(format!("ratio={}", output::fmt_num(*r)));
            }
            commands::scenario(&load_config(config.as_deref(), name.as_deref(), &ov)?)
        }
        Command::Check { config, k_eq, x } => commands::check(config, k_eq, x.as_deref()),
    }
}

fn validate(cli: &Cli, bundle: &Bundle) -> CliResult<()> {
    let again = execute(cli)?;
    compare_summaries(&bundle.summary, &again.summary).map_err(CliError::Validation)?;
    let previous = cli.out.join("summary.json");
    if previous.exists() {
        let text = fs::read_to_string(&previous)
            .map_err(|e| CliError::Input(format!("{}: {e}", previous.display())))?;
        let stored: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("{}: {e}", previous.display())))?;
        compare_summaries(&stored, &bundle.summary).map_err(CliError::Validation)?;
    }
    Ok(())
}

fn run(cli: &Cli) -> CliResult<()> {
    let started = Instant::now();
    let bundle = execute(cli)?;
    if cli.validate {
        validate(cli, &bundle)?;
    }
    let written = write_bundle(&cli.out, cli.command.name(), &bundle, started.elapsed())?;
    print!("{}", bundle.report);
    if cli.validate {
        println!("validated: summary reproduces within {:e} relative", output::VALIDATE_RTOL);
    }
    println!("wrote {} files to {}", written.len(), cli.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = match e {
                CliError::Input(_) => "configuration error",
                CliError::Numerical(_) => "numerical failure",
                CliError::Validation(_) => "validation error",
            };
            eprintln!("rqdyn {}: {kind}: {e}", cli.command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
