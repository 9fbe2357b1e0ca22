//! Scenario-driven front-end for `teleport-core`: load a JSON scenario, build
//! and verify the scheme it describes, optionally simulate the protocol, and
//! emit a JSON report.

pub mod app;
pub mod config;
pub mod report;

pub use app::{execute, CliError, Command, Options, Outcome};
pub use config::ScenarioConfig;
pub use report::ReportDocument;
