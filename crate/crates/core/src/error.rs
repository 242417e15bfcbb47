// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integrator failed at {at}: {reason}")]
    Integrator { at: f64, reason: String },

    #[error("eigensolver did not converge (index {index})")]
    Eigensolver { index: usize },

    #[error("Fock truncation leak: population {population:e} on boundary states at t = {t}")]
    TruncationLeak { t: f64, population: f64 },

    #[error("pointer precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(name: &'static str, value: f64, domain: &'static str) -> Error {
    Error::Domain {
        name,
        value,
        domain,
    }
}
