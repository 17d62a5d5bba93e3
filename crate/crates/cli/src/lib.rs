//! Configuration-driven front end for the `hausdorff` crate: scenario files,
//! reports and the `hausdorff` binary.

pub mod config;
pub mod error;
pub mod expr;
pub mod report;
pub mod run;
pub mod scenarios;

pub use config::{parse_config, ConfigError, Instance, Overrides, ScenarioConfig};
pub use error::CliError;
pub use report::{NormReport, Verdict};
