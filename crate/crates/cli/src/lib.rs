//! Front end for the symbolic and numeric checks: fixture parsing, the
//! subcommands and their JSON reports.

pub mod commands;
pub mod config;
pub mod crosscheck;
pub mod error;
pub mod fixture;

pub use config::{Outcome, RunConfig, RunReport};
pub use error::{CliError, ParseError, Result};
pub use fixture::Fixture;
