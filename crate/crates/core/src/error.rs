use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("unknown payoff tag `{0}`")]
    UnknownPayoff(String),

    #[error("singular tridiagonal system at time step {step} (row {row})")]
    SingularSystem { step: usize, row: usize },

    #[error("non-finite value at time step {step}, node {node} (t = {t})")]
    Unstable { step: usize, node: usize, t: f64 },

    #[error("insufficient resolution near the boundary: {0}")]
    Resolution(String),

    #[error("model violates a required bound: {0}")]
    ModelBound(String),

    #[error("payoff evaluation produced a non-finite value at sample {0}")]
    NonFinitePayoff(usize),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(LabError::Parameter(msg.into()))
}
