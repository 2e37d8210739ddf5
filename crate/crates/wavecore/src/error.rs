use thiserror::Error;

#[derive(Debug, Error)]
pub enum WaveError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
}

impl WaveError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        WaveError::InvalidArgument(msg.into())
    }
}
