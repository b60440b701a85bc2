//! Library half of the `fermi-rmt` command-line tool: configuration parsing,
//! CSV/JSON output, verification suites, figure data and parameter sweeps.

pub mod config;
pub mod figures;
pub mod output;
pub mod sweep;
pub mod verify;

use std::fmt;
use std::str::FromStr;

use fermi_rmt::closed_forms::ClosedFormError;
use fermi_rmt::jacobi::JacobiError;
use thiserror::Error;

/// Statistics with a closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, clap::ValueEnum)]
pub enum Stat {
    MeanEntropy,
    VarianceEntropy,
    MeanCapacity,
}

impl Stat {
    pub fn name(self) -> &'static str {
        match self {
            Stat::MeanEntropy => "mean-entropy",
            Stat::VarianceEntropy => "variance-entropy",
            Stat::MeanCapacity => "mean-capacity",
        }
    }
}

impl fmt::Display for Stat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "mean-entropy" => Ok(Stat::MeanEntropy),
            "variance-entropy" => Ok(Stat::VarianceEntropy),
            "mean-capacity" => Ok(Stat::MeanCapacity),
            other => Err(format!("unknown statistic `{other}`")),
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("{0}")]
    Unsupported(String),
    #[error("I/O error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Invalid(_) => 2,
            CliError::Unsupported(_) => 3,
            CliError::Io { .. } => 4,
        }
    }
}

impl From<JacobiError> for CliError {
    fn from(e: JacobiError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<ClosedFormError> for CliError {
    fn from(e: ClosedFormError) -> Self {
        match e {
            ClosedFormError::UnsupportedDifference(_) => CliError::Unsupported(e.to_string()),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<config::ConfigError> for CliError {
    fn from(e: config::ConfigError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
