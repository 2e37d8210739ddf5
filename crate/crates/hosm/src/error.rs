use thiserror::Error;

#[derive(Debug, Error)]
pub enum HosmError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("solver diverged at t = {time:.3} s (step {step}): {reason}")]
    SolverDiverged {
        time: f64,
        step: usize,
        reason: String,
    },
    #[error(transparent)]
    Wave(#[from] wavecore::WaveError),
    #[error("dataset writer: {0}")]
    Writer(String),
}
