use ehypo_core::ingest::IngestError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Core(#[from] ehypo_core::Error),
    #[error("cannot write {path}: {message}")]
    Output { path: String, message: String },
    /// The report was produced but the optimiser did not converge.
    #[error("fit did not converge")]
    NotConverged,
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self::Usage(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        use ehypo_core::Error as E;
        match self {
            Self::Usage(_) | Self::Output { .. } => 1,
            Self::Ingest(_) => 2,
            Self::Core(e) => match e {
                E::Domain(_) | E::CoefficientSingularity { .. } | E::NonIntegerExponent(_) => 1,
                E::InvalidSample(_) => 2,
                _ => 3,
            },
            Self::NotConverged => 3,
        }
    }
}
