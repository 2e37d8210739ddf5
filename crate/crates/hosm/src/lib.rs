//! High-Order Spectral Method solver for nonlinear free-surface waves in
//! Zakharov form, plus the reference-dataset generator.
//!
//! The solver evolves surface elevation and surface velocity potential under
//! the kinematic and dynamic free-surface boundary conditions, closing the
//! system with a perturbation-series expansion of the surface vertical
//! velocity up to a configurable order. Spatial derivatives and the vertical
//! structure are handled in wavenumber space; nonlinear products are formed
//! in physical space with zero-padding dealiasing.

pub mod dataset;
pub mod solver;
pub mod vertical;

mod error;

pub use dataset::{generate_dataset, DatasetWriter, GenerationSummary, SampleRecord};
pub use error::HosmError;
pub use solver::{fsbc_rhs, integrate, simulate_field, HosmSolver, SolverState};
pub use vertical::{compute_vertical_velocity, VerticalVelocityOp, WRecursionCache};

pub type Result<T> = std::result::Result<T, HosmError>;

/// Treatment of the nonlinear FSBC products.
///
/// `Consistent` truncates every right-hand-side term at total order M in
/// wave steepness (the West et al. formulation), so M = 1 reproduces linear
/// wave theory exactly and solutions at orders M_a < M_b agree to
/// O(eps^{M_a + 1}). `Full` evaluates the Zakharov-form products exactly
/// with only the vertical velocity truncated (Dommermuth-Yue style).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProductRule {
    #[default]
    Consistent,
    Full,
}

/// Solver configuration.
///
/// `internal_dt` is the RK4 step; output is sampled at the grid cadence.
/// `dealias` pads nonlinear products by `(order + 1) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HosmConfig {
    /// Nonlinearity order M of the perturbation expansion, 1..=8.
    pub order: usize,
    /// Internal integrator time step [s].
    pub internal_dt: f64,
    /// Peak periods of free evolution before data collection starts.
    pub relaxation_periods: f64,
    /// Zero-padding dealiasing of nonlinear products.
    pub dealias: bool,
    /// Divergence guard: run aborts when max |eta| exceeds this multiple of
    /// the significant wave height at the start of the run.
    pub amplitude_cap_factor: f64,
    /// Nonlinear product truncation rule.
    pub product_rule: ProductRule,
}

impl HosmConfig {
    pub fn new(order: usize, internal_dt: f64) -> Self {
        HosmConfig {
            order,
            internal_dt,
            relaxation_periods: 20.0,
            dealias: true,
            amplitude_cap_factor: 5.0,
            product_rule: ProductRule::Consistent,
        }
    }

    /// Paper-configuration defaults: M = 4, internal step = output step / 4.
    pub fn defaults_for_output_dt(output_dt: f64) -> Self {
        Self::new(4, output_dt / 4.0)
    }

    pub fn validate(&self, output_dt: f64) -> Result<()> {
        if !(1..=8).contains(&self.order) {
            return Err(HosmError::InvalidArgument(format!(
                "order {} outside 1..=8",
                self.order
            )));
        }
        if self.internal_dt <= 0.0 || self.internal_dt > output_dt + 1e-12 {
            return Err(HosmError::InvalidArgument(format!(
                "internal_dt {} must be positive and no larger than output dt {}",
                self.internal_dt, output_dt
            )));
        }
        if self.relaxation_periods < 0.0 {
            return Err(HosmError::InvalidArgument(
                "relaxation_periods must be >= 0".into(),
            ));
        }
        Ok(())
    }
}
