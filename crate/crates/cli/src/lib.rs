// SPDX-License-Identifier: Apache-2.0

//! Configuration, run orchestration and file output for the `trion-dynamics`
//! command-line tool.

pub mod config;
pub mod fitting;
pub mod output;
pub mod run;
pub mod selftest;

pub use config::{load_config, parse_config, AxisSpec, ConfigError, Experiment, Grids, RunConfig, MANIFEST_FORMAT};
pub use run::{run, RunSummary};
