//! File formats, configuration and the `ame` command line on top of `ame-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod json;
pub mod oa_text;
pub mod reproduce;

pub use cli::run_cli;
pub use config::RunConfig;
pub use error::{CliError, CliResult};
