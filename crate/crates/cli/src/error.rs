use thiserror::Error;

/// Failures mapped to process exit codes: usage problems exit with 2,
/// everything else with 1.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{failed} of {total} verification cases disagree beyond 3 standard errors")]
    Verification { failed: usize, total: usize },
    #[error(transparent)]
    Other(#[from] anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 2,
            Self::Verification { .. } | Self::Other(_) => 1,
        }
    }
}

impl From<cibound::Error> for CliError {
    fn from(e: cibound::Error) -> Self {
        match e {
            cibound::Error::Domain { .. } | cibound::Error::Config(_) | cibound::Error::Prior(_) => Self::Usage(e.to_string()),
            other => Self::Other(other.into()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Other(e.into())
    }
}
