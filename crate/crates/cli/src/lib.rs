//! Command-line front end for `spectral-causality`: CSV ingestion,
//! preprocessing, TOML configuration and the `simulate`, `test` and
//! `monitor` workflows.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
//! failure.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod output;
pub mod preprocess;

pub use commands::{main_with_args, run};
pub use error::{CliError, Result};
