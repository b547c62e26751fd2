use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{operation} is not available for the {family} family")]
    UnsupportedFamily {
        operation: &'static str,
        family: &'static str,
    },

    #[error("probability {0} lies outside the open interval (0, 1)")]
    ProbabilityOutOfRange(f64),

    #[error("component index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("state has {got} components, model expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("state component {index} is {value}, expected a finite value")]
    NonFiniteState { index: usize, value: f64 },

    #[error("Adler overrelaxation requires a Gaussian full conditional, got {0}")]
    NonGaussianConditional(&'static str),

    #[error("series has {len} points after burn-in, at least {min} required")]
    SeriesTooShort { len: usize, min: usize },

    #[error("series has zero variance")]
    ZeroVariance,

    #[error("no monitored function named `{0}`")]
    UnknownMonitor(String),

    #[error("iteration {iteration}, component {component}: {source}")]
    Update {
        iteration: usize,
        component: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Wrap `self` with the name of the pipeline stage that failed.
    pub fn in_stage(self, stage: impl Into<String>) -> Self {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }
}
