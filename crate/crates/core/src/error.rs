use thiserror::Error;

/// Errors raised by the probability models, the instance tooling and the oracles.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// A precondition on sizes was violated (e.g. `n = 0`).
    #[error("domain error: {0}")]
    Domain(String),

    /// A size profile lacks a field required by the requested case.
    #[error("missing size field `{0}` for the requested case")]
    MissingField(&'static str),

    /// The conditioning event has no instances, so the conditional probability is undefined.
    #[error("impossible conditioning event: {0}")]
    ImpossibleCondition(String),

    /// An enumeration or search would exceed a hard cap.
    #[error("cap exceeded: {what} would require {required}")]
    CapExceeded { what: String, required: String },

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    /// The instance does not have exactly two groups.
    #[error("expected exactly two groups, found {0}")]
    GroupCount(usize),

    /// Two identical observations belong to different groups.
    #[error("unsatisfiable instance: observations {0} and {1} are identical but in different groups")]
    Unsatisfiable(usize, usize),

    #[error("attribute subset is not a solution")]
    NotASolution,

    #[error("invalid attribute subset: {0}")]
    InvalidSubset(String),

    /// Rejection sampling could not produce enough accepted draws.
    #[error("sampler stalled: {accepted} of {wanted} draws accepted after {attempts} attempts")]
    SamplerStalled {
        accepted: u64,
        wanted: u64,
        attempts: u64,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable code, used by the command-line front end.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::MissingField(_) => "missing-field",
            Error::ImpossibleCondition(_) => "impossible-event",
            Error::CapExceeded { .. } => "cap-exceeded",
            Error::Parse { .. } => "parse",
            Error::GroupCount(_) => "group-count",
            Error::Unsatisfiable(..) => "unsatisfiable",
            Error::NotASolution => "not-a-solution",
            Error::InvalidSubset(_) => "invalid-subset",
            Error::SamplerStalled { .. } => "sampler-stalled",
            Error::Io(_) => "io",
        }
    }

    /// True for errors caused by malformed input rather than by the computation itself.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::MissingField(_)
                | Error::Parse { .. }
                | Error::GroupCount(_)
                | Error::InvalidSubset(_)
                | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
