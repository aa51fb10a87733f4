//! Command-line front end: text formats, run manifests, the
//! factor-graph-preservation suite and the `ufg` subcommands.

pub mod commands;
mod error;
pub mod formats;
pub mod manifest;
pub mod suite;

pub use crate::error::{CliError, Result};
