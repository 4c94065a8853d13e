//! Pipelines behind the `vcausal` binary. Each command returns an
//! [`Outcome`] holding a human-readable report, the same report as JSON, and
//! whether its checks passed.

use std::fmt;
use std::path::Path;

use serde::Serialize;

pub mod battery;
pub mod certify;
pub mod optimize;
pub mod project;
pub mod reproduce;
pub mod spacetime;

pub use vcausal_core::scalar::fmt_sig;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub passed: bool,
    pub text: String,
    pub json: serde_json::Value,
}

impl Outcome {
    pub fn new<R: Serialize>(passed: bool, text: String, report: &R) -> anyhow::Result<Self> {
        Ok(Outcome {
            passed,
            text,
            json: serde_json::to_value(report)?,
        })
    }
}

/// Bad invocation or unreadable input; maps to exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn read_input(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())).into())
}

/// Parses file contents, reporting failures against the path as usage
/// errors.
pub fn parse_input<T>(path: &Path, parse: impl FnOnce(&str) -> vcausal_core::Result<T>) -> anyhow::Result<T> {
    let text = read_input(path)?;
    parse(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())).into())
}

/// Row cap for Fourier–Motzkin steps, overridable by `VCAUSAL_FM_ROW_CAP`.
pub fn fm_options() -> anyhow::Result<vcausal_core::geometry::FmOptions> {
    let mut options = vcausal_core::geometry::FmOptions::default();
    if let Ok(v) = std::env::var("VCAUSAL_FM_ROW_CAP") {
        options.row_cap = v
            .parse()
            .map_err(|_| UsageError(format!("VCAUSAL_FM_ROW_CAP must be a positive integer, got {v:?}")))?;
    }
    Ok(options)
}
