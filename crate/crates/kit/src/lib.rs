//! Driver library behind the `gordon-kit` binary: configuration parsing,
//! report emission, the truncated-spectrum cross-check, and the mode
//! dispatcher. Everything numerical lives in `gordon-core`; this crate owns
//! the I/O contracts.

// negated comparisons are deliberate: `!(x >= 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod report;
pub mod run;
pub mod spectrum;

pub use config::{parse_config, Format, Mode, RunConfig};
pub use report::{Cell, Report};
pub use run::{run, RunOutcome};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum KitError {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error: field `{field}`: {msg}")]
    Semantic { field: String, msg: String },

    #[error("run error: {0}")]
    Run(String),

    #[error(transparent)]
    Core(#[from] gordon_core::CoreError),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
