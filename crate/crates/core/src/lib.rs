// SPDX-License-Identifier: Apache-2.0

//! Zeno-effect search on the single avoided crossing.

pub mod blockade;
pub mod channels;
pub mod continuum;
pub mod error;
pub mod hypercube;
pub mod model;
pub mod ode;
pub mod pointer;
pub mod protocols;
pub mod state;

pub use error::{Error, Result};
