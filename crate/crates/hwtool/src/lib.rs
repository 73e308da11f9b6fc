//! Configuration, suites and reports for the `hwtool` command line.

pub mod config;
pub mod report;
pub mod suites;

pub use config::{RunConfig, Suite};
pub use report::{Check, Format, Report, Status};
