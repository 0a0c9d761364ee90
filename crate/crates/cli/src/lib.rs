//! Command-line front end for the `rotcool` library.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use config::{load, load_str, ConfigSources, RunConfig};
pub use error::CliError;
