//! Fourier neural operator for reconstructing space-time wave fields from
//! sparse measurements, with an exact hand-rolled reverse-mode gradient.
//!
//! Architecture: a dense lift `I` expands the sparse axis (space for buoy
//! input, time for radar input), a channel lift `P` maps to `n_w` latent
//! channels, the latent field is zero-padded on both axes and passed
//! through `n_F` Fourier layers (spectral channel mixing over retained
//! low-frequency modes plus a pointwise linear path, GeLU activation),
//! unpadded, and projected back to one channel by a small pointwise MLP
//! `Q` (n_w -> 128 -> 32 -> 1).

pub mod backward;
pub mod forward;
pub mod model;

use thiserror::Error;

pub use backward::{backward, Gradients};
pub use forward::{forward, forward_cached, spectral_conv, ForwardTape};
pub use model::{init_parameters, FnoScalar, ModelParams, OperatorModel};

pub type Result<T> = std::result::Result<T, PinoError>;

#[derive(Debug, Error)]
pub enum PinoError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("contract violation: {0}")]
    ContractViolation(String),
}

/// Reconstruction task variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    /// Buoy time series input `[n_buoy, n_t]`; the lift expands space.
    Buoy,
    /// Radar snapshot input `[n_x, n_snap]`; the lift expands time.
    Radar,
}

/// Activation of the Fourier layers and projection MLP. `Identity` exists
/// for linear-model oracle tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Gelu,
    Identity,
}

/// Hidden widths of the projection MLP.
pub const Q_HIDDEN_1: usize = 128;
pub const Q_HIDDEN_2: usize = 32;

/// Architecture hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArchConfig {
    pub case: Case,
    /// Fourier layer count n_F.
    pub n_fourier: usize,
    /// Retained modes per axis n_m (per half-plane on the space axis).
    pub n_modes: usize,
    /// Latent channel count n_w.
    pub n_width: usize,
    /// Zero padding added to both axes before the Fourier layers.
    pub pad: usize,
    /// Input shape `[rows, cols]`.
    pub input_rows: usize,
    pub input_cols: usize,
    /// Output field shape.
    pub out_nx: usize,
    pub out_nt: usize,
    pub activation: Activation,
}

impl ArchConfig {
    /// Paper case-A configuration on a given grid.
    pub fn case_a(n_buoy: usize, n_x: usize, n_t: usize) -> Self {
        ArchConfig {
            case: Case::Buoy,
            n_fourier: 3,
            n_modes: 128,
            n_width: 32,
            pad: 12,
            input_rows: n_buoy,
            input_cols: n_t,
            out_nx: n_x,
            out_nt: n_t,
            activation: Activation::Gelu,
        }
    }

    /// Paper case-B configuration on a given grid.
    pub fn case_b(n_snap: usize, n_x: usize, n_t: usize) -> Self {
        ArchConfig {
            case: Case::Radar,
            n_fourier: 3,
            n_modes: 128,
            n_width: 64,
            pad: 12,
            input_rows: n_x,
            input_cols: n_snap,
            out_nx: n_x,
            out_nt: n_t,
            activation: Activation::Gelu,
        }
    }

    /// Padded latent shape.
    pub fn padded(&self) -> (usize, usize) {
        (self.out_nx + 2 * self.pad, self.out_nt + 2 * self.pad)
    }

    /// Lift dimensions (sparse-axis in, dense-axis out).
    pub fn lift_dims(&self) -> (usize, usize) {
        match self.case {
            Case::Buoy => (self.input_rows, self.out_nx),
            Case::Radar => (self.input_cols, self.out_nt),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_fourier < 1 || self.n_width < 1 || self.n_modes < 1 {
            return Err(PinoError::InvalidArgument(
                "layer count, width and modes must all be >= 1".into(),
            ));
        }
        let (nxp, ntp) = self.padded();
        if 2 * self.n_modes > nxp {
            return Err(PinoError::InvalidArgument(format!(
                "n_modes {} too large for padded space axis {nxp} (need 2 n_m <= n_x + 2 pad)",
                self.n_modes
            )));
        }
        if 2 * self.n_modes > ntp {
            return Err(PinoError::InvalidArgument(format!(
                "n_modes {} too large for padded time axis {ntp}",
                self.n_modes
            )));
        }
        match self.case {
            Case::Buoy => {
                if self.input_cols != self.out_nt {
                    return Err(PinoError::InvalidArgument(
                        "buoy input must share the output time axis".into(),
                    ));
                }
            }
            Case::Radar => {
                if self.input_rows != self.out_nx {
                    return Err(PinoError::InvalidArgument(
                        "radar input must share the output space axis".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Total number of real parameters.
    ///
    /// Spectral weights hold complex entries for `2 n_m` space rows (both
    /// half-planes) by `n_m` time columns per channel pair; the projection
    /// MLP is n_w -> 128 -> 32 -> 1.
    pub fn parameter_count(&self) -> u64 {
        let nf = self.n_fourier as u64;
        let nm = self.n_modes as u64;
        let nw = self.n_width as u64;
        let spectral = 4 * nf * nm * nm * nw * nw;
        let pointwise = nf * (nw * nw + nw);
        let (d_in, d_out) = self.lift_dims();
        let lift_i = (d_in as u64) * (d_out as u64) + d_out as u64;
        let lift_p = 2 * nw;
        let h1 = Q_HIDDEN_1 as u64;
        let h2 = Q_HIDDEN_2 as u64;
        let project = nw * h1 + h1 + h1 * h2 + h2 + h2 + 1;
        spectral + pointwise + lift_i + lift_p + project
    }
}
