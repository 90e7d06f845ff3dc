//! Configuration, orchestration and artifact output for `bbm`.

pub mod config;
pub mod output;
pub mod simulate;
pub mod sweep;

use std::path::Path;

use bbm_core::BbmError;
use thiserror::Error;

pub use config::SimConfig;
pub use simulate::{run_simulate, RunReport};
pub use sweep::{run_sweep, SweepConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

/// Overrides the configured output directory when set.
pub const OUTPUT_DIR_ENV: &str = "BBM_OUTPUT_DIR";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("integration failed{}: {message}", failure_time.map(|t| format!(" at t = {t}")).unwrap_or_default())]
    Integration { message: String, failure_time: Option<f64> },
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    pub(crate) fn from_core(e: BbmError) -> Self {
        match e {
            BbmError::Io(e) => CliError::Io(e.to_string()),
            other => CliError::Integration {
                failure_time: other.failure_time(),
                message: other.to_string(),
            },
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Integration { .. } | CliError::Io(_) => EXIT_RUNTIME,
        }
    }
}

/// `BBM_OUTPUT_DIR` if set and nonempty, otherwise `configured`.
pub fn output_dir(configured: &Path) -> std::path::PathBuf {
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(v) if !v.is_empty() => v.into(),
        _ => configured.to_path_buf(),
    }
}
