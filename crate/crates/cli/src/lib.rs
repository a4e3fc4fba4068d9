//! Command-line front end: circuit JSON, reports and the four subcommands.

pub mod commands;
pub mod error;
pub mod report;
pub mod spec;
pub mod template;

pub use commands::{
    cmd_export, cmd_scan, cmd_simulate, cmd_verify, ExportArgs, RecipeName, ScanArgs,
    ScanReport, SimulateArgs, VerifyArgs,
};
pub use error::{exit, CliError, CliResult};
pub use report::{to_json, Precision, Report};
pub use spec::CircuitSpec;
