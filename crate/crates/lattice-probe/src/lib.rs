//! File formats, an HTTP probability-provider client and the command-line
//! driver around [`lattice_probe_core`].

pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod output;
pub mod provider;

pub use error::{CliError, CliResult};
