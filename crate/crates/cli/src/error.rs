use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{0}")]
    Model(chainstore::Error),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("degenerate case: {0}")]
    Degenerate(chainstore::Error),

    #[error("output error: {0}")]
    Io(#[from] std::io::Error),

    #[error("output error: {0}")]
    Csv(#[from] csv::Error),
}

impl From<chainstore::Error> for CliError {
    fn from(e: chainstore::Error) -> Self {
        use chainstore::Error::*;
        match e {
            NoEquilibrium(_) | NoPureAcquisitionEquilibrium { .. } | UndefinedPosterior(_) => {
                CliError::Degenerate(e)
            }
            other => CliError::Model(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Model(_) => 2,
            CliError::Verification(_) => 3,
            CliError::Degenerate(_) => 4,
            CliError::Io(_) | CliError::Csv(_) => 1,
        }
    }
}
