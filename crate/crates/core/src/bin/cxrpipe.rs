//! Command-line front end: `preprocess`, `run` and `report`.
//!
//! Exit codes: 0 success, 1 configuration error, 2 data error, 3 numerical
//! failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cxrpipe::pipeline::{cmd_preprocess, cmd_report, cmd_run, Experiment, PipelineConfig, RunOptions};

#[derive(Parser)]
#[command(name = "cxrpipe", version, about = "Pre-processing experiments for multi-label radiograph classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Materialize every image variant into the cache.
    Preprocess {
        #[arg(long)]
        config: PathBuf,
    },
    /// Train and evaluate the configured experiments over all resamples.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads (defaults to all cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Comma-separated subset of the configured experiments.
        #[arg(long, value_delimiter = ',')]
        experiments: Option<Vec<String>>,
    },
    /// Render plots and the results table of a finished run.
    Report {
        #[arg(long)]
        output: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> cxrpipe::Result<ExitCode> {
    match cli.command {
        Command::Preprocess { config } => {
            let cfg = PipelineConfig::load(&config)?;
            let summary = cmd_preprocess(&cfg)?;
            print!("{summary}");
            Ok(if summary.is_success() { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        Command::Run { config, workers, experiments } => {
            let cfg = PipelineConfig::load(&config)?;
            let experiments = experiments
                .map(|names| names.iter().map(|n| n.trim().parse::<Experiment>()).collect())
                .transpose()?;
            let summary = cmd_run(&cfg, &RunOptions { workers, experiments })?;
            println!(
                "{}: {} models trained, {} reused",
                summary.run_dir.display(),
                summary.trained,
                summary.reused
            );
            let table = std::fs::read_to_string(summary.run_dir.join("auc_report.txt"))
                .map_err(|e| cxrpipe::Error::Artifacts(e.to_string()))?;
            print!("{table}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { output } => {
            let summary = cmd_report(&output)?;
            print!("{}", summary.table);
            println!("{} files written under {}", summary.files.len(), summary.run_dir.join("report").display());
            Ok(ExitCode::SUCCESS)
        }
    }
}
