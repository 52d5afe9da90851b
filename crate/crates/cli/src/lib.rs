//! Command-line front end: figure sweeps, one-off evaluations and seeded
//! simulations, written as CSV or JSON.

pub mod args;
pub mod config;
pub mod error;
pub mod format;
pub mod run;

pub use args::Cli;
pub use error::{CliError, CliResult};
pub use run::{emit, run, Rendered};
