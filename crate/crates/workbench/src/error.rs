use thiserror::Error;

pub type Result<T, E = WbError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum WbError {
    #[error(transparent)]
    Core(#[from] qforge_core::Error),

    #[error(transparent)]
    Nn(#[from] qforge_nn::NnError),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("integrity check failed: {0}")]
    Integrity(String),

    #[error("unsupported dataset version {0}")]
    Version(u32),

    #[error("invalid configuration: {0}")]
    Config(String),
}
