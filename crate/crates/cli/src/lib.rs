//! Driver and benchmark harness for the `dcfunm` library: matrix ingestion and generation,
//! method selection, dense references and CSV reporting.

pub mod args;
pub mod container;
pub mod error;
pub mod mmio;
pub mod reference;
pub mod run;
pub mod specs;

pub use error::{Category, CliError, CliResult};
