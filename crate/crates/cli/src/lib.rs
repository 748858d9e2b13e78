//! Command implementations behind the `elastoinverse` binary.

pub mod commands;
pub mod config;

use std::path::PathBuf;

pub use commands::{run_command, Command, Report};
pub use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{code} {0}", code = .0.code())]
    Core(#[from] elastoinverse_core::Error),
}
