//! File formats, reports, plots and command orchestration around
//! `hdrtriad-core`.

use std::fmt;

pub mod commands;
pub mod corpus;
pub mod exec;
pub mod io;
pub mod manifest;
pub mod plot;
pub mod report;

pub use hdrtriad_core as core;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARTIAL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// A problem with the run's inputs or options rather than with one frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn is_config_error(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.is::<ConfigError>() || matches!(c.downcast_ref::<hdrtriad_core::Error>(), Some(hdrtriad_core::Error::Config(_)))
    })
}

/// Process exit code for an error that ended a run.
pub fn exit_code_for(e: &anyhow::Error) -> i32 {
    if is_config_error(e) {
        EXIT_CONFIG
    } else {
        EXIT_PARTIAL
    }
}
