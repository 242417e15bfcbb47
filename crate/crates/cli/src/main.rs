// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use zeno_cli::{
    experiment_reference, output_dir, run_to_dir, CliError, ExperimentConfig, RunOptions,
};

#[derive(Debug, Parser)]
#[command(name = "zeno", version, about = "Zeno-effect search experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Output directory; overrides `output` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; 0 uses one per core.
        #[arg(long, default_value_t = 0)]
        threads: usize,
        /// RNG seed for trajectory sampling in `custom` runs.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check a config and print it back.
    Validate { config: PathBuf },
    /// Show every experiment, the keys it reads and the CSVs it writes.
    ListExperiments,
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            config,
            out,
            threads,
            seed,
        } => {
            let parsed = ExperimentConfig::load(&config)?;
            let dir = output_dir(&parsed, out.as_deref());
            for path in run_to_dir(&parsed, &dir, threads, RunOptions { seed })? {
                println!("{}", path.display());
            }
        }
        Command::Validate { config } => {
            print!("{}", ExperimentConfig::load(&config)?.echo());
        }
        Command::ListExperiments => print!("{}", experiment_reference()),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
