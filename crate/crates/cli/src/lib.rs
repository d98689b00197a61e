//! Command-line front end for `specpool`: parameter sweeps to CSV,
//! closed-form versus Monte Carlo verification, and the switching
//! threshold table.

pub mod config;
mod error;
pub mod run;
pub mod table;

pub use error::{CliError, CliResult};
