//! Configuration parsing and command execution for the `terrace` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod run;

pub use config::{parse_config, parse_config_with, Command, ConfigError, RunConfig};
pub use run::{execute, RunError, ERROR_RECORD, MANIFEST};
