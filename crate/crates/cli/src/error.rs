use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] teleprobe::Error),
    #[error("{0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("pipelines disagree: max deviation {deviation:e} exceeds tolerance {tol:e}")]
    Mismatch { deviation: f64, tol: f64 },
}

impl CliError {
    /// 0 ok, 2 bad input, 3 numerical integrity, 4 not enough data, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use teleprobe::Error as E;
        match self {
            CliError::Core(E::NumericalIntegrity(_)) => 3,
            CliError::Core(E::InsufficientStatistics { .. } | E::Unmeasurable { .. }) => 4,
            CliError::Core(_) | CliError::Usage(_) => 2,
            CliError::Io(_) | CliError::Json(_) | CliError::Csv(_) | CliError::Mismatch { .. } => 1,
        }
    }
}
