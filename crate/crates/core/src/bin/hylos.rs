use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hylos::lab::{run_evolve, run_experiment, run_groundstate, Report, RunConfig, EXPERIMENTS};

/// Laboratory for hylomorphic solitons of the nonlinear Schrödinger and
/// Klein–Gordon equations.
///
/// Exit status: 0 when every verdict passes, 2 when a verdict fails,
/// 1 on configuration or numerical errors.
#[derive(Parser)]
#[command(name = "hylos", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for a radial ground-state profile and validate it.
    Groundstate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evolve the configured initial state and write diagnostics.
    Evolve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named experiment and write report.json plus CSV artifacts.
    Experiment {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(EXPERIMENTS))]
        name: Option<String>,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and validate a configuration without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn execute(cli: Cli) -> hylos::Result<Option<Report>> {
    match cli.command {
        Command::Groundstate { config, out } => {
            run_groundstate(&RunConfig::load(&config)?, out.as_deref()).map(Some)
        }
        Command::Evolve { config, out } => run_evolve(&RunConfig::load(&config)?, out.as_deref()).map(Some),
        Command::Experiment { name, config, out } => {
            run_experiment(name.as_deref(), &RunConfig::load(&config)?, out.as_deref()).map(Some)
        }
        Command::Validate { config } => {
            let cfg = RunConfig::load(&config)?;
            cfg.validate()?;
            println!("valid, hash {}", cfg.hash());
            Ok(None)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // keep 2 reserved for failed verdicts
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(report)) => {
            print!("{}", report.summary());
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
