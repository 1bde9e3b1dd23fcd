use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("config error: {0}")]
    Config(String),

    #[error("solver failure: {0}")]
    Solver(#[from] qnsplit::Error),

    /// A run that failed without a solver error, such as a panicked
    /// worker or a failed self test.
    #[error("run failed: {0}")]
    Failed(String),

    #[error("problem setup: {0}")]
    Imaging(#[from] qnsplit_imaging::ImagingError),

    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl BenchError {
    pub fn config(msg: impl Into<String>) -> Self {
        BenchError::Config(msg.into())
    }

    /// Process exit code: 2 config, 3 solver, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        use qnsplit_imaging::ImagingError as I;
        match self {
            BenchError::Config(_) | BenchError::Json(_) => 2,
            BenchError::Imaging(I::Io(_)) => 4,
            BenchError::Imaging(I::Core(_)) => 3,
            BenchError::Imaging(_) => 2,
            BenchError::Solver(_) | BenchError::Failed(_) => 3,
            BenchError::Io(_) | BenchError::Csv(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, BenchError>;
