use ndarray::Array2;

use crate::{Result, WaveError, GRAVITY};

/// Uniform periodic space-time grid for a 1D+t wave field.
///
/// `wavenumbers` and `frequencies` follow the standard DFT ordering for a
/// periodic domain: index 0 is exactly zero, positive frequencies first,
/// then negative ones (even lengths place the Nyquist bin on the negative
/// side).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub domain_length: f64,
    pub n_x: usize,
    pub duration: f64,
    pub n_t: usize,
    pub dx: f64,
    pub dt: f64,
    /// Spatial wavenumbers [1/m], length `n_x`.
    pub wavenumbers: Vec<f64>,
    /// Temporal angular frequencies [rad/s], length `n_t`.
    pub frequencies: Vec<f64>,
    /// Water depth [m].
    pub depth: f64,
    /// Gravitational acceleration [m/s^2].
    pub gravity: f64,
}

/// Signed DFT index: 0, 1, .., n/2-1, [-n/2,] .., -1 (numpy `fftfreq` order).
pub fn signed_index(j: usize, n: usize) -> i64 {
    if j < n.div_ceil(2) {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

impl Grid {
    pub fn new(
        domain_length: f64,
        n_x: usize,
        duration: f64,
        n_t: usize,
        depth: f64,
    ) -> Result<Self> {
        Self::with_gravity(domain_length, n_x, duration, n_t, depth, GRAVITY)
    }

    pub fn with_gravity(
        domain_length: f64,
        n_x: usize,
        duration: f64,
        n_t: usize,
        depth: f64,
        gravity: f64,
    ) -> Result<Self> {
        if n_x < 2 || n_t < 2 {
            return Err(WaveError::invalid(format!(
                "grid needs at least 2 points per axis, got n_x={n_x}, n_t={n_t}"
            )));
        }
        if domain_length <= 0.0 || duration <= 0.0 {
            return Err(WaveError::invalid(format!(
                "grid extents must be positive, got L={domain_length}, T={duration}"
            )));
        }
        if depth <= 0.0 || gravity <= 0.0 {
            return Err(WaveError::invalid(format!(
                "depth and gravity must be positive, got d={depth}, g={gravity}"
            )));
        }
        let two_pi = std::f64::consts::TAU;
        let wavenumbers = (0..n_x)
            .map(|j| two_pi * signed_index(j, n_x) as f64 / domain_length)
            .collect();
        let frequencies = (0..n_t)
            .map(|j| two_pi * signed_index(j, n_t) as f64 / duration)
            .collect();
        Ok(Grid {
            domain_length,
            n_x,
            duration,
            n_t,
            dx: domain_length / n_x as f64,
            dt: duration / n_t as f64,
            wavenumbers,
            frequencies,
            depth,
            gravity,
        })
    }

    /// Finite-depth linear dispersion omega(k) = sqrt(g |k| tanh(|k| d)).
    pub fn dispersion(&self, k: f64) -> f64 {
        let ka = k.abs();
        (self.gravity * ka * (ka * self.depth).tanh()).sqrt()
    }

    /// Peak period of a sea state with peak wavelength `lp` on this grid.
    pub fn peak_period(&self, lp: f64) -> f64 {
        std::f64::consts::TAU / self.dispersion(std::f64::consts::TAU / lp)
    }

    pub fn x_coords(&self) -> Vec<f64> {
        (0..self.n_x).map(|i| i as f64 * self.dx).collect()
    }

    pub fn t_coords(&self) -> Vec<f64> {
        (0..self.n_t).map(|j| j as f64 * self.dt).collect()
    }
}

/// Space-time surface elevation and surface velocity potential on a [`Grid`].
///
/// Arrays are indexed `[space, time]`.
#[derive(Debug, Clone)]
pub struct WaveField {
    pub eta: Array2<f64>,
    pub phis: Array2<f64>,
    pub grid: Grid,
}

impl WaveField {
    pub fn new(eta: Array2<f64>, phis: Array2<f64>, grid: Grid) -> Result<Self> {
        let want = (grid.n_x, grid.n_t);
        if eta.dim() != want || phis.dim() != want {
            return Err(WaveError::invalid(format!(
                "field shape mismatch: eta {:?}, phis {:?}, grid wants {:?}",
                eta.dim(),
                phis.dim(),
                want
            )));
        }
        if !eta.iter().all(|v| v.is_finite()) || !phis.iter().all(|v| v.is_finite()) {
            return Err(WaveError::NonFinite("wave field".into()));
        }
        Ok(WaveField { eta, phis, grid })
    }
}
