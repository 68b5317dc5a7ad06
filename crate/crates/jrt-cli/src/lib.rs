//! Seeded verification suites over the jrt library, with deterministic
//! JSON, text and CSV reports.

pub mod config;
pub mod output;
pub mod report;
pub mod runner;
pub mod suites;

pub use config::{ConfigError, OutputFormat, Overrides, ScenarioConfig};
pub use report::{Record, Report, Status};
pub use runner::run_suite;
pub use suites::{list_suites, SuiteEntry};
