// SPDX-License-Identifier: Apache-2.0

//! Config-driven experiment runner for the `zeno` command.

pub mod config;
pub mod error;
pub mod experiments;
pub mod table;

use std::path::{Path, PathBuf};

pub use config::{ExperimentConfig, ExperimentId};
pub use error::{CliError, ConfigIssue};
pub use experiments::{describe, run, Description, RunOptions};
pub use table::{Cell, Table};

/// Output directory: the flag wins over the config, which wins over `.`.
pub fn output_dir(config: &ExperimentConfig, flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| config.output.clone())
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Validates, checks the output directory, runs on a pool of `threads`
/// workers (0 = rayon default) and writes every table. Returns the paths
/// written.
pub fn run_to_dir(
    config: &ExperimentConfig,
    dir: &Path,
    threads: usize,
    options: RunOptions,
) -> Result<Vec<PathBuf>, CliError> {
    table::ensure_writable(dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {threads} worker threads: {e}")))?;
    let tables = pool.install(|| run(config, options))?;
    tables.iter().map(|t| t.write_to(dir)).collect()
}

/// Text printed by `list-experiments`.
pub fn experiment_reference() -> String {
    let mut out = String::new();
    for id in ExperimentId::ALL {
        let d = describe(id);
        out.push_str(&format!("{id}\n    {}\n", d.summary));
        for (key, default) in &d.reads {
            out.push_str(&format!("    {key} = {default}\n"));
        }
        for (name, columns) in &d.outputs {
            out.push_str(&format!("    -> {name}.csv: {}\n", columns.join(",")));
        }
    }
    out
}
