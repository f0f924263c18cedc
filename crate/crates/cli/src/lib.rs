//! Pipeline orchestration and experiment grids for `ppcard`.

pub mod commands;
pub mod config;
pub mod error;
pub mod grid;
pub mod io;
pub mod pipeline;
pub mod seeds;

pub use config::ExperimentConfig;
pub use error::{CliError, CliResult, ErrorKind};
