//! Shared primitives for pseudospectral wave modelling: periodic grids,
//! Tukey windows, Fourier-space differentiation, dealiased products and
//! JONSWAP-TMA initial conditions.
//!
//! All operations are pure functions on immutable inputs and are safe to
//! call concurrently from multiple threads.

pub mod grid;
pub mod spectral;
pub mod spectrum;
pub mod window;

mod error;

pub use error::WaveError;
pub use grid::{Grid, WaveField};
pub use spectrum::{sample_spectrum_realization, SpectrumParams, SurfaceRealization};
pub use window::{tukey_window, FlatRegion, LossWindows};

pub type Result<T> = std::result::Result<T, WaveError>;

/// Standard gravity used throughout when no override is given [m/s^2].
pub const GRAVITY: f64 = 9.81;
