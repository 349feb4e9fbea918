use std::path::PathBuf;

use serde_json::json;
use thiserror::Error;

use kamjet::arithmetic::ArithmeticError;
use kamjet::birkhoff::BirkhoffError;
use kamjet::jets::JetError;
use kamjet::kamengine::KamError;
use kamjet::poisson::PoissonError;
use kamjet::torusverify::TorusError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Schema(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Arithmetic(#[from] ArithmeticError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Poisson(#[from] PoissonError),
    #[error(transparent)]
    Birkhoff(#[from] BirkhoffError),
    #[error(transparent)]
    Kam(#[from] KamError),
    #[error(transparent)]
    Torus(#[from] TorusError),
}

impl CliError {
    /// Process exit status.
    pub fn code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Arithmetic(_) => 10,
            CliError::Jet(_) => 11,
            CliError::Poisson(_) => 12,
            CliError::Birkhoff(_) => 13,
            CliError::Kam(_) => 14,
            CliError::Torus(_) => 15,
        }
    }

    pub fn module(&self) -> &'static str {
        match self {
            CliError::Schema(_) => "config",
            CliError::Io { .. } => "io",
            CliError::Arithmetic(_) => "arithmetic",
            CliError::Jet(_) => "jets",
            CliError::Poisson(_) => "poisson",
            CliError::Birkhoff(_) => "birkhoff",
            CliError::Kam(_) => "kamengine",
            CliError::Torus(_) => "torusverify",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({ "error": { "module": self.module(), "code": self.code(), "message": self.to_string() } })
    }
}
