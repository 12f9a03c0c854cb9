//! Command line front end: configuration handling, OBJ and CSV I/O, and the
//! generate / flow / energy / diagnose subcommands.

pub mod commands;
pub mod config;
pub mod obj;
pub mod trace;

use mengerflow_core::CurveError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid arguments: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

pub use config::{CurveSpec, Formats, RunConfig};
