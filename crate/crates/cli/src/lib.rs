//! Suite orchestration, caching and reporting for the `lie-star` checks.

pub mod cache;
pub mod config;
pub mod report;
pub mod sampling;
pub mod suite;

pub use config::{default_suite, SuiteConfig};
pub use report::{Record, Report, Status};
pub use suite::{run_suite, run_suites};
