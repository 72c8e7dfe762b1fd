use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The objective returned a non-finite value somewhere along a draw.
    #[error("non-finite function value {value} at point {point:?}")]
    NonFinite { point: Vec<f64>, value: f64 },

    #[error("descent step {iteration}: {source}")]
    Descent {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("trial {trial}: {source}")]
    Trial {
        trial: u64,
        #[source]
        source: Box<Error>,
    },

    /// One entry per violated hypothesis, phrased as the failed inequality.
    #[error("hypotheses violated: {}", .0.join("; "))]
    Hypothesis(Vec<String>),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub fn is_input_error(&self) -> bool {
        match self {
            Error::DimensionMismatch { .. } | Error::InvalidParameter(_) | Error::Hypothesis(_) => {
                true
            }
            Error::NonFinite { .. } => false,
            Error::Descent { source, .. } | Error::Trial { source, .. } => source.is_input_error(),
        }
    }
}
