use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("argument {value} outside the domain {domain}")]
    Domain { value: f64, domain: String },

    #[error("tau = {tau} exceeds U'(a) = {max}; the inverse derivative is undefined there")]
    OutOfRange { tau: f64, max: f64 },

    #[error("vertex enumeration limited to I + J <= {limit}, got {size}")]
    SizeGuard { size: usize, limit: usize },

    #[error("assumption violated: {0}")]
    Assumption(String),

    #[error("generator not admissible: {0}")]
    NotAdmissible(String),

    #[error("eps = {eps} outside the valid interval (0, {eps_max}]")]
    EpsilonOutOfInterval { eps: f64, eps_max: f64 },

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("cannot parse {what}: {detail}")]
    Parse { what: String, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Assumption(_) => 3,
            Error::Convergence(_) => 4,
            _ => 2,
        }
    }
}
