//! Command-line pipeline around `condloc-core`: configuration, file
//! formats, and the synth, fuse, localize, eval and report commands.

pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod report;

pub use config::{Background, RunConfig, WeightsArg};
pub use error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
}
