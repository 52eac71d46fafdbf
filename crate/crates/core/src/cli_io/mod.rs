//! Run configuration, command dispatch and deterministic export.

mod commands;
mod config;
mod export;

pub use commands::{execute, Diagnostics, Outcome, RunReport, SCHEMA_VERSION};
pub use config::{parse_config, parse_preset, preset_spec, Cli, CommandKind, RunConfig};
pub use export::{export_trajectory, import_trajectory, write_report, TrajectoryRow, CSV_HEADER};

#[cfg(test)]
mod tests;
