//! Command-line harness for the `rotwave` solver: configuration files,
//! `WWS1` snapshots, diagnostics CSVs, and the experiment drivers behind the
//! `rotwave` binary.

pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod snapshot;

pub use error::{HarnessError, Result};

/// Environment variable that overrides the configured output directory.
pub const OUT_ENV: &str = "ROTWAVE_OUT";

/// Output directory precedence: command line, then [`OUT_ENV`], then config.
pub fn resolve_out_dir(
    cli: Option<std::path::PathBuf>,
    env: Option<std::ffi::OsString>,
    configured: &std::path::Path,
) -> std::path::PathBuf {
    cli.or_else(|| env.filter(|v| !v.is_empty()).map(Into::into)).unwrap_or_else(|| configured.to_path_buf())
}
