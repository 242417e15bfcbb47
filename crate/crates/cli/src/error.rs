// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

/// One validation problem, located by line when the value has a span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub origin: PathBuf,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{line}: {}", self.origin.display(), self.message),
            None => write!(f, "{}: {}", self.origin.display(), self.message),
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}", join_lines(.0))]
    Config(Vec<ConfigIssue>),

    #[error("{0}")]
    Usage(String),

    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{experiment} failed at {point}: {source}")]
    Runtime {
        experiment: &'static str,
        point: String,
        #[source]
        source: zeno_core::Error,
    },
}

fn join_lines(issues: &[ConfigIssue]) -> String {
    issues
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("\n")
}

impl CliError {
    /// 1 for anything the user can fix in the config or flags, 2 for
    /// failures while running.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Usage(_) | CliError::Output { .. } => 1,
            CliError::Runtime { .. } => 2,
        }
    }
}
