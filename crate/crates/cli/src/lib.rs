//! Command-line driver for the measurement-chain scenarios.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod report;
pub mod runner;

pub use config::{parse_config, parse_config_with, ConfigError, ScenarioConfig, ScenarioKind};
pub use report::{emit_csv, emit_json, Check, ReportError, Row, RunReport};
pub use runner::{run_scenario, RunError};
