//! Command-line driver for kickrotor: configuration, subcommands and output files.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod presets;

pub use args::run;
pub use config::{load_config, parse_config, RunConfig};
pub use error::{CliError, CliResult};
