//! Command implementations behind the `sgml` binary.

pub mod commands;
pub mod cyber;
pub mod discover;
pub mod error;
pub mod output;
pub mod pipeline;

pub use error::CliError;
pub use pipeline::{Pipeline, PipelineConfig, RunReport};
