//! JONSWAP-TMA spectrum synthesis with random phases.
//!
//! The one-sided JONSWAP frequency spectrum with peak-enhancement factor
//! gamma is multiplied by the Kitaigorodskii depth attenuation
//! (Thompson-Vincent approximation) and mapped to wavenumber space through
//! the finite-depth dispersion relation omega^2 = g k tanh(k d). The
//! realization is rescaled so the measured characteristic steepness
//! eps = k_p * H_s / 2 (with H_s = 4 std(eta)) matches the requested value
//! exactly.

use ndarray::Array1;
use num_complex::Complex;
use rand::distributions::Uniform;
use rand::prelude::*;
use rand_chacha::ChaCha20Rng;

use crate::grid::Grid;
use crate::spectral::ifft_to_real;
use crate::{Result, WaveError};

type C64 = Complex<f64>;

/// Sea-state parameters indexing the dataset grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumParams {
    /// Peak wavelength L_p [m].
    pub peak_wavelength: f64,
    /// Characteristic steepness eps = k_p H_s / 2.
    pub steepness: f64,
    /// Peak enhancement factor gamma.
    pub peak_enhancement: f64,
    /// Water depth [m].
    pub depth: f64,
    /// Seed driving all random phases of the realization.
    pub rng_seed: u64,
}

impl SpectrumParams {
    pub fn new(peak_wavelength: f64, steepness: f64, rng_seed: u64) -> Self {
        SpectrumParams {
            peak_wavelength,
            steepness,
            peak_enhancement: 3.3,
            depth: 500.0,
            rng_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.peak_wavelength <= 0.0 {
            return Err(WaveError::invalid("peak wavelength must be positive"));
        }
        if !(self.steepness > 0.0 && self.steepness <= 0.2) {
            return Err(WaveError::invalid(format!(
                "steepness {} outside (0, 0.2]",
                self.steepness
            )));
        }
        if self.peak_enhancement < 1.0 {
            return Err(WaveError::invalid("peak enhancement must be >= 1"));
        }
        Ok(())
    }
}

/// Initial condition at t = 0: surface elevation and surface potential.
#[derive(Debug, Clone)]
pub struct SurfaceRealization {
    pub eta: Array1<f64>,
    pub phis: Array1<f64>,
}

/// Unnormalised JONSWAP density S(omega); the absolute scale is irrelevant
/// because realizations are rescaled to the target steepness.
pub fn jonswap(omega: f64, omega_p: f64, gamma: f64) -> f64 {
    if omega <= 0.0 {
        return 0.0;
    }
    let sigma = if omega <= omega_p { 0.07 } else { 0.09 };
    let r = (-((omega - omega_p) * (omega - omega_p))
        / (2.0 * sigma * sigma * omega_p * omega_p))
        .exp();
    omega.powi(-5) * (-1.25 * (omega_p / omega).powi(4)).exp() * gamma.powf(r)
}

/// Kitaigorodskii depth attenuation (Thompson-Vincent approximation).
pub fn tma_depth_attenuation(omega: f64, depth: f64, gravity: f64) -> f64 {
    let omega_h = (omega * (depth / gravity).sqrt()).clamp(0.0, 2.0);
    if omega_h <= 1.0 {
        0.5 * omega_h * omega_h
    } else {
        1.0 - 0.5 * (2.0 - omega_h) * (2.0 - omega_h)
    }
}

/// Amplitude (before steepness rescaling) of the discrete component at
/// wavenumber `k > 0`.
fn component_amplitude(k: f64, params: &SpectrumParams, grid: &Grid) -> f64 {
    let g = grid.gravity;
    let d = params.depth;
    let omega = (g * k * (k * d).tanh()).sqrt();
    let omega_p = grid.dispersion(std::f64::consts::TAU / params.peak_wavelength);
    // d omega / d k for the finite-depth dispersion relation.
    let th = (k * d).tanh();
    let sech2 = 1.0 - th * th;
    let domega_dk = (g * th + g * k * d * sech2) / (2.0 * omega);
    let s_k = jonswap(omega, omega_p, params.peak_enhancement)
        * tma_depth_attenuation(omega, d, g)
        * domega_dk;
    let dk = std::f64::consts::TAU / grid.domain_length;
    (2.0 * s_k * dk).max(0.0).sqrt()
}

/// Draw a random-phase realization of the JONSWAP-TMA spectrum on `grid`.
///
/// Returns eta(x, 0) and the linear-theory-consistent Phi_s(x, 0): each
/// component `a cos(k x + theta)` is paired with `(a g / omega) sin(k x +
/// theta)`, which makes every component a right-travelling Airy wave.
pub fn sample_spectrum_realization(
    params: &SpectrumParams,
    grid: &Grid,
) -> Result<SurfaceRealization> {
    params.validate()?;
    if params.peak_wavelength > grid.domain_length / 4.0 {
        return Err(WaveError::invalid(format!(
            "peak wavelength {} too long for domain {} (need Lp <= L/4)",
            params.peak_wavelength, grid.domain_length
        )));
    }
    if (params.depth - grid.depth).abs() > 1e-9 * grid.depth {
        return Err(WaveError::invalid(format!(
            "spectrum depth {} disagrees with grid depth {}",
            params.depth, grid.depth
        )));
    }

    let n = grid.n_x;
    let mut rng = ChaCha20Rng::seed_from_u64(params.rng_seed);
    let phase_dist = Uniform::new(0.0, std::f64::consts::TAU);

    let mut eta_hat = vec![C64::new(0.0, 0.0); n];
    let mut phis_hat = vec![C64::new(0.0, 0.0); n];
    let h = (n - 1) / 2; // strictly positive non-Nyquist bins
    for j in 1..=h {
        let k = grid.wavenumbers[j];
        let a = component_amplitude(k, params, grid);
        let theta = rng.sample(phase_dist);
        let omega = grid.dispersion(k);
        // a cos(kx + theta) -> spectral coefficient (n a / 2) e^{i theta}.
        let ce = C64::from_polar(0.5 * n as f64 * a, theta);
        eta_hat[j] = ce;
        eta_hat[n - j] = ce.conj();
        // (a g / omega) sin(kx + theta) = (a g / omega) cos(kx + theta - pi/2).
        let cp = C64::from_polar(
            0.5 * n as f64 * a * grid.gravity / omega,
            theta - std::f64::consts::FRAC_PI_2,
        );
        phis_hat[j] = cp;
        phis_hat[n - j] = cp.conj();
    }

    let eta_raw = ifft_to_real(eta_hat);
    let phis_raw = ifft_to_real(phis_hat);

    // Rescale so eps = 2 k_p std(eta) exactly.
    let k_p = std::f64::consts::TAU / params.peak_wavelength;
    let mean = eta_raw.iter().sum::<f64>() / n as f64;
    let var = eta_raw.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    let std = var.sqrt();
    if std <= 0.0 {
        return Err(WaveError::invalid(
            "degenerate spectrum realization with zero variance",
        ));
    }
    let scale = params.steepness / (2.0 * k_p * std);

    Ok(SurfaceRealization {
        eta: Array1::from_vec(eta_raw.into_iter().map(|v| v * scale).collect()),
        phis: Array1::from_vec(phis_raw.into_iter().map(|v| v * scale).collect()),
    })
}

/// Measured characteristic steepness of an elevation profile.
pub fn measured_steepness(eta: &[f64], peak_wavelength: f64) -> f64 {
    let n = eta.len() as f64;
    let mean = eta.iter().sum::<f64>() / n;
    let var = eta.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    2.0 * std::f64::consts::TAU / peak_wavelength * var.sqrt()
}
