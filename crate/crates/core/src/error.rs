use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-invertible zero mode: field has nonzero mean (|mean| = {mean:e})")]
    NonInvertibleZeroMode { mean: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("time index {index} out of range for {nodes} nodes")]
    TimeIndexOutOfRange { index: usize, nodes: usize },

    #[error("CFL violation: dt * |xi|_max = {courant:.4} exceeds 1")]
    Cfl { courant: f64 },

    #[error("iteration diverged at k = {iteration}: difference grew for 3 consecutive iterations")]
    Diverged { iteration: usize },

    #[error("missing time derivative: {0}")]
    MissingVelocity(String),

    #[error("numerical check failed: {0}")]
    Numerical(String),

    #[error("decode error: {0}")]
    Decode(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{command}: {source}")]
    Experiment {
        command: String,
        #[source]
        source: Box<Error>,
    },

    #[error("replay: {0}")]
    Replay(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }
}
