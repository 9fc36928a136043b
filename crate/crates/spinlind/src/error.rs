use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid label: {0}")]
    InvalidLabel(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("Hilbert dimension {dim} exceeds the cap of {cap}")]
    DimensionTooLarge { dim: usize, cap: usize },
    #[error("no block with n = {n}, omega = {omega}")]
    Lookup { n: i32, omega: f64 },
    #[error("principal value kernel evaluated on its pole at {0}")]
    Pole(f64),
    #[error("initial state is not the Boltzmann state of the model (max deviation {0:e})")]
    DomainViolation(f64),
    #[error("accuracy target not met: {0}")]
    Accuracy(String),
    #[error("no stationary state: transition rate is zero")]
    NoStationaryState,
    #[error("singular coefficient matrix: {0}")]
    Singular(String),
    #[error("non-CP witness inapplicable: {0}")]
    WitnessInapplicable(String),
    #[error("contract violated: {0}")]
    Contract(String),
    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => 3,
            Error::Accuracy(_) | Error::InternalConsistency(_) => 2,
            _ => 1,
        }
    }
}
