//! Command-line front end: data ingestion, artifacts and commands.

pub mod commands;
pub mod error;
pub mod io;

pub use commands::{run, Cli};
pub use error::CliError;
