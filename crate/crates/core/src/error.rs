use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid payoffs: {0}")]
    InvalidPayoffs(String),

    #[error("{name} = {value} is not a probability in [0, 1]")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("prior p0 = {0} is degenerate (reputation needs p0 strictly inside (0, 1))")]
    DegeneratePrior(f64),

    #[error("error rate {name} = {value} must lie in [0, 1)")]
    InvalidErrorRate { name: &'static str, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("undefined posterior: the {0} report has zero probability")]
    UndefinedPosterior(&'static str),

    #[error("no pure acquisition equilibrium at k = {k}: neither acquisition choice is self-consistent")]
    NoPureAcquisitionEquilibrium { k: f64 },

    #[error("no equilibrium assessment found: {0}")]
    NoEquilibrium(String),
}

pub type Result<T> = std::result::Result<T, Error>;
