use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImagingError {
    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("malformed PGM: {0}")]
    Pgm(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Core(#[from] qnsplit::Error),
}

pub type Result<T> = std::result::Result<T, ImagingError>;
