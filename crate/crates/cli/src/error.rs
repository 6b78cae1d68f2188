use std::path::PathBuf;

use qosc_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("missing artifact {}: {reason}", path.display())]
    MissingArtifact { path: PathBuf, reason: String },
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("cannot write {}: {source}", path.display())]
    Output { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// 0 pass, 1 configuration, 2 mixing angle, 3 parameter domain,
    /// 4 missing artifact, 5 verification.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Output { .. } => 1,
            CliError::MissingArtifact { .. } => 4,
            CliError::Verification(_) => 5,
            CliError::Core(e) => match e {
                CoreError::ThetaNotConstant { .. } => 2,
                CoreError::NegativeRadicand { .. } | CoreError::NonpositiveMass { .. } => 3,
                CoreError::RhoNonPositive { .. } | CoreError::DependentSolutions { .. } => 3,
                CoreError::NormDrift { .. } | CoreError::NoConvergence { .. } => 5,
                CoreError::Dump(_) => 4,
                _ => 1,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
