//! Scenario configuration, report bundles and the verification suite behind
//! the `blockspec` command.
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod emit;
pub mod error;
pub mod scenario;
pub mod verify;

pub use config::{parse_config, parse_config_str, ScenarioConfig, ScenarioKind};
pub use emit::{emit, load_bundle, Formats};
pub use error::{CliError, Result};
pub use scenario::{run_scenario, ReportBundle, Verdict};
pub use verify::{verify_all, VerifyOptions, VerifySummary};
