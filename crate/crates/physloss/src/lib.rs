//! Physics-informed loss assembly: sensor consistency at calibration
//! buoys, free-surface boundary-condition residuals, amplitude
//! regularization and per-sample normalization, together with the exact
//! gradient of the total with respect to the reconstructed elevation and,
//! chained through the operator's reverse pass, every model parameter.
//!
//! All spectral work happens on Tukey-windowed fields; losses are
//! evaluated on the central region unaffected by the tapers, with
//! half-open floor-rounded index ranges.

use ndarray::Array2;
use num_complex::Complex;
use thiserror::Error;

use hosm::{HosmConfig, VerticalVelocityOp, WRecursionCache};
use pino::{backward, forward_cached, Gradients, OperatorModel};
use sensors::SensorSample;
use wavecore::spectral::{apply_axis_multiplier, derivative_multiplier, FieldAxis};
use wavecore::window::FlatRegion;
use wavecore::{Grid, LossWindows};

pub type Result<T> = std::result::Result<T, LossError>;

type C64 = Complex<f64>;

#[derive(Debug, Error)]
pub enum LossError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid sample: {0}")]
    InvalidSample(String),
    #[error(transparent)]
    Hosm(#[from] hosm::HosmError),
    #[error(transparent)]
    Pino(#[from] pino::PinoError),
}

/// Loss weighting and component toggles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub lambda_reg: f64,
    pub use_sensor: bool,
    pub use_physics: bool,
    pub use_reg: bool,
    /// Treat the vertical-velocity recursion as frozen (no gradient flow
    /// through it); ablation switch, off by default.
    pub freeze_recursion: bool,
    /// Expansion order used when recovering the vertical velocity.
    pub hosm_order: usize,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            lambda_reg: 0.25,
            use_sensor: true,
            use_physics: true,
            use_reg: true,
            freeze_recursion: false,
            hosm_order: 4,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        if self.lambda_reg < 0.0 {
            return Err(LossError::InvalidArgument("lambda_reg must be >= 0".into()));
        }
        Ok(())
    }
}

/// The four loss components, the normalization factor and their weighted
/// sum `total = sensor + phy1 + phy2 + lambda_reg * reg`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossReport {
    pub sensor: f64,
    pub phy1: f64,
    pub phy2: f64,
    pub reg: f64,
    pub n_norm: f64,
    pub total: f64,
}

impl LossReport {
    fn assemble(sensor: f64, phy1: f64, phy2: f64, reg: f64, n_norm: f64, lambda: f64) -> Self {
        LossReport {
            sensor,
            phy1,
            phy2,
            reg,
            n_norm,
            total: sensor + phy1 + phy2 + lambda * reg,
        }
    }
}

/// Per-sample normalization: mean of |eta_cal|^2 over calibration rows and
/// the taper-free time window.
pub fn normalization_factor(eta_cal: &Array2<f64>) -> Result<f64> {
    let n_t = eta_cal.ncols();
    let t0 = n_t / 25;
    let t1 = 24 * n_t / 25;
    if t1 <= t0 {
        return Err(LossError::InvalidArgument(
            "empty time window for normalization".into(),
        ));
    }
    let mut sum = 0.0;
    for k in 0..eta_cal.nrows() {
        for j in t0..t1 {
            sum += eta_cal[[k, j]] * eta_cal[[k, j]];
        }
    }
    let n = (eta_cal.nrows() * (t1 - t0)) as f64;
    let n_norm = sum / n;
    if n_norm <= 0.0 {
        return Err(LossError::InvalidSample("all-zero calibration series".into()));
    }
    Ok(n_norm)
}

fn std_of(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Spectral transfer turning an elevation field into the linear-theory
/// surface potential, one time slice at a time: per spatial wavenumber
/// `phi_hat(k) = -i g sign(k) eta_hat(k) / omega(k)` with the finite-depth
/// dispersion relation and the k = 0 / Nyquist bins suppressed (the mean
/// flow is unobservable from the elevation).
///
/// The sign convention assumes right-travelling waves, fixing the Airy
/// relation `a cos(kx - wt) -> (a g / w) sin(kx - wt)`; it is exact for
/// every spatially periodic linear wave regardless of time sampling.
fn transfer_multiplier(grid: &Grid) -> Vec<C64> {
    let n_x = grid.n_x;
    grid.wavenumbers
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            if i == 0 || (n_x % 2 == 0 && i == n_x / 2) {
                C64::new(0.0, 0.0)
            } else {
                C64::new(0.0, -grid.gravity / grid.dispersion(k) * k.signum())
            }
        })
        .collect()
}

/// The bare linear-theory transfer without any windowing; exact on
/// spatially periodic fields.
pub fn linear_potential_transfer(eta: &Array2<f64>, grid: &Grid) -> Array2<f64> {
    apply_axis_multiplier(eta, FieldAxis::Space, &transfer_multiplier(grid))
}

/// Loss evaluator bound to a grid; precomputes windows, multipliers and
/// the vertical-velocity operator.
pub struct PhysicsLoss {
    grid: Grid,
    pub weights: LossWeights,
    windows: LossWindows,
    region: FlatRegion,
    vertical: VerticalVelocityOp,
    transfer: Vec<C64>,
    dx_mult: Vec<C64>,
    dt_mult: Vec<C64>,
}

impl PhysicsLoss {
    pub fn new(grid: &Grid, weights: LossWeights) -> Result<Self> {
        weights.validate()?;
        let hosm_cfg = HosmConfig::new(weights.hosm_order, grid.dt);
        Ok(PhysicsLoss {
            grid: grid.clone(),
            weights,
            windows: LossWindows::for_grid(grid),
            region: FlatRegion::of_grid(grid.n_x, grid.n_t),
            vertical: VerticalVelocityOp::for_grid(grid, &hosm_cfg)?,
            transfer: transfer_multiplier(grid),
            dx_mult: derivative_multiplier(&grid.wavenumbers, 1),
            dt_mult: derivative_multiplier(&grid.frequencies, 1),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn region(&self) -> FlatRegion {
        self.region
    }

    pub fn windows(&self) -> &LossWindows {
        &self.windows
    }

    fn check_field(&self, field: &Array2<f64>) -> Result<()> {
        if field.dim() != (self.grid.n_x, self.grid.n_t) {
            return Err(LossError::InvalidArgument(format!(
                "field shape {:?} does not match grid ({}, {})",
                field.dim(),
                self.grid.n_x,
                self.grid.n_t
            )));
        }
        Ok(())
    }

    /// Linear-theory recovery of the surface potential from a possibly
    /// non-periodic reconstruction: the spatial Tukey taper periodises the
    /// field, then the dispersion-relation transfer acts per time slice.
    pub fn recover_surface_potential(&self, eta_hat: &Array2<f64>) -> Result<Array2<f64>> {
        self.check_field(eta_hat)?;
        let windowed = self.windows.apply_space(eta_hat);
        Ok(apply_axis_multiplier(
            &windowed,
            FieldAxis::Space,
            &self.transfer,
        ))
    }

    /// Vertical velocity column by column in time; delegates to the solver
    /// recursion. Inputs are used exactly as given.
    pub fn recover_vertical_velocity(
        &self,
        eta: &Array2<f64>,
        phis: &Array2<f64>,
    ) -> Result<Array2<f64>> {
        self.check_field(eta)?;
        self.check_field(phis)?;
        let (w, _) = self.vertical_with_caches(eta, phis)?;
        Ok(w)
    }

    fn vertical_with_caches(
        &self,
        eta: &Array2<f64>,
        phis: &Array2<f64>,
    ) -> Result<(Array2<f64>, Vec<WRecursionCache>)> {
        let (n_x, n_t) = eta.dim();
        let mut w = Array2::zeros((n_x, n_t));
        let mut caches = Vec::with_capacity(n_t);
        let mut ecol = vec![0.0; n_x];
        let mut pcol = vec![0.0; n_x];
        for j in 0..n_t {
            for i in 0..n_x {
                ecol[i] = eta[[i, j]];
                pcol[i] = phis[[i, j]];
            }
            let (wcol, cache) = self.vertical.compute_cached(&ecol, &pcol)?;
            for i in 0..n_x {
                w[[i, j]] = wcol[i];
            }
            caches.push(cache);
        }
        Ok((w, caches))
    }

    /// Sensor loss: mean squared gap between the calibration series and the
    /// reconstruction at the calibration columns, over the taper-free time
    /// window, divided by `n_norm`.
    pub fn sensor_loss(
        &self,
        eta_hat: &Array2<f64>,
        eta_cal: &Array2<f64>,
        columns: &[usize],
        n_norm: f64,
    ) -> Result<f64> {
        self.check_field(eta_hat)?;
        if columns.is_empty() || columns.len() != eta_cal.nrows() {
            return Err(LossError::InvalidArgument(format!(
                "{} calibration columns for {} series",
                columns.len(),
                eta_cal.nrows()
            )));
        }
        let (t0, t1) = (self.region.t_start, self.region.t_end);
        if t1 <= t0 {
            return Err(LossError::InvalidArgument("empty time window".into()));
        }
        let mut sum = 0.0;
        for (k, &col) in columns.iter().enumerate() {
            for j in t0..t1 {
                let d = eta_cal[[k, j]] - eta_hat[[col, j]];
                sum += d * d;
            }
        }
        Ok(sum / ((columns.len() * (t1 - t0)) as f64 * n_norm))
    }

    /// FSBC residual losses on Tukey-windowed fields:
    ///
    /// ```text
    /// r1 = eta_t + eta_x phis_x - W (1 + eta_x^2)
    /// r2 = phis_t + g eta + 1/2 phis_x^2 - 1/2 W^2 (1 + eta_x^2)
    /// ```
    ///
    /// returned as mean squares over the central region divided by
    /// `n_norm`. The dynamic residual keeps the governing-equation form
    /// (spatial gradient squared, negative vertical-velocity term).
    pub fn physics_residual_losses(
        &self,
        eta_hat: &Array2<f64>,
        phis: &Array2<f64>,
        w_field: &Array2<f64>,
        n_norm: f64,
    ) -> Result<(f64, f64)> {
        let (r1, r2) = self.residual_fields(eta_hat, phis, w_field)?;
        Ok(self.region_mean_squares(&r1, &r2, n_norm))
    }

    fn region_mean_squares(&self, r1: &Array2<f64>, r2: &Array2<f64>, n_norm: f64) -> (f64, f64) {
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        for i in self.region.x_start..self.region.x_end {
            for j in self.region.t_start..self.region.t_end {
                s1 += r1[[i, j]] * r1[[i, j]];
                s2 += r2[[i, j]] * r2[[i, j]];
            }
        }
        let n = self.region.n_cells() as f64;
        (s1 / (n * n_norm), s2 / (n * n_norm))
    }

    fn residual_fields(
        &self,
        eta_hat: &Array2<f64>,
        phis: &Array2<f64>,
        w_field: &Array2<f64>,
    ) -> Result<(Array2<f64>, Array2<f64>)> {
        self.check_field(eta_hat)?;
        self.check_field(phis)?;
        self.check_field(w_field)?;
        let u = self.windows.apply(eta_hat);
        let pw = self.windows.apply(phis);
        let ux = apply_axis_multiplier(&u, FieldAxis::Space, &self.dx_mult);
        let ut = apply_axis_multiplier(&u, FieldAxis::Time, &self.dt_mult);
        let px = apply_axis_multiplier(&pw, FieldAxis::Space, &self.dx_mult);
        let pt = apply_axis_multiplier(&pw, FieldAxis::Time, &self.dt_mult);
        let g = self.grid.gravity;
        let (n_x, n_t) = u.dim();
        let mut r1 = Array2::zeros((n_x, n_t));
        let mut r2 = Array2::zeros((n_x, n_t));
        for i in 0..n_x {
            for j in 0..n_t {
                let q = 1.0 + ux[[i, j]] * ux[[i, j]];
                let w = w_field[[i, j]];
                r1[[i, j]] = ut[[i, j]] + ux[[i, j]] * px[[i, j]] - w * q;
                r2[[i, j]] =
                    pt[[i, j]] + g * u[[i, j]] + 0.5 * px[[i, j]] * px[[i, j]] - 0.5 * w * w * q;
            }
        }
        Ok((r1, r2))
    }

    /// Amplitude regularization: squared gap between the standard
    /// deviations of the calibration series and of the reconstruction,
    /// both over the taper-free region, divided by `n_norm`.
    pub fn regularization_loss(
        &self,
        eta_hat: &Array2<f64>,
        eta_cal: &Array2<f64>,
        n_norm: f64,
    ) -> Result<f64> {
        self.check_field(eta_hat)?;
        let (s_cal, s_hat) = self.stds(eta_hat, eta_cal);
        Ok((s_cal - s_hat) * (s_cal - s_hat) / n_norm)
    }

    fn stds(&self, eta_hat: &Array2<f64>, eta_cal: &Array2<f64>) -> (f64, f64) {
        let (t0, t1) = (self.region.t_start, self.region.t_end);
        let cal: Vec<f64> = (0..eta_cal.nrows())
            .flat_map(|k| (t0..t1).map(move |j| (k, j)))
            .map(|(k, j)| eta_cal[[k, j]])
            .collect();
        let hat: Vec<f64> = (self.region.x_start..self.region.x_end)
            .flat_map(|i| (t0..t1).map(move |j| (i, j)))
            .map(|(i, j)| eta_hat[[i, j]])
            .collect();
        (std_of(&cal).1, std_of(&hat).1)
    }

    /// Full loss report for a reconstruction against a sample.
    pub fn report(&self, eta_hat: &Array2<f64>, sample: &SensorSample) -> Result<LossReport> {
        let (report, _) = self.report_with_eta_grad(eta_hat, sample, false)?;
        Ok(report)
    }

    /// Loss report plus, when `with_grad`, the exact gradient of the total
    /// with respect to the reconstructed elevation.
    pub fn report_with_eta_grad(
        &self,
        eta_hat: &Array2<f64>,
        sample: &SensorSample,
        with_grad: bool,
    ) -> Result<(LossReport, Option<Array2<f64>>)> {
        self.check_field(eta_hat)?;
        let n_norm = normalization_factor(&sample.calibration)?;
        let (n_x, n_t) = eta_hat.dim();
        let mut eta_bar = if with_grad {
            Some(Array2::<f64>::zeros((n_x, n_t)))
        } else {
            None
        };

        let mut sensor = 0.0;
        if self.weights.use_sensor {
            sensor = self.sensor_loss(eta_hat, &sample.calibration, &sample.columns, n_norm)?;
            if let Some(gbar) = eta_bar.as_mut() {
                let (t0, t1) = (self.region.t_start, self.region.t_end);
                let scale = 2.0 / ((sample.columns.len() * (t1 - t0)) as f64 * n_norm);
                for (k, &col) in sample.columns.iter().enumerate() {
                    for j in t0..t1 {
                        gbar[[col, j]] += scale * (eta_hat[[col, j]] - sample.calibration[[k, j]]);
                    }
                }
            }
        }

        let mut phy1 = 0.0;
        let mut phy2 = 0.0;
        if self.weights.use_physics {
            // Recover the derived fields the way the residual operator
            // expects them: potential from the space-windowed elevation,
            // then both-axes windows ahead of the order-M recursion.
            let u = self.windows.apply(eta_hat);
            let phis = self.recover_surface_potential(eta_hat)?;
            let pw = self.windows.apply(&phis);
            let (w_field, caches) = self.vertical_with_caches(&u, &pw)?;
            let (r1, r2) = self.residual_fields(eta_hat, &phis, &w_field)?;
            let (p1, p2) = self.region_mean_squares(&r1, &r2, n_norm);
            phy1 = p1;
            phy2 = p2;
            if let Some(gbar) = eta_bar.as_mut() {
                let grad =
                    self.physics_eta_gradient(eta_hat, &phis, &w_field, &caches, &r1, &r2, n_norm);
                *gbar += &grad;
            }
        }

        let mut reg = 0.0;
        if self.weights.use_reg {
            reg = self.regularization_loss(eta_hat, &sample.calibration, n_norm)?;
            if let Some(gbar) = eta_bar.as_mut() {
                let (s_cal, s_hat) = self.stds(eta_hat, &sample.calibration);
                if s_hat > 1e-300 {
                    let (t0, t1) = (self.region.t_start, self.region.t_end);
                    let n_reg = ((self.region.x_end - self.region.x_start) * (t1 - t0)) as f64;
                    let mean: f64 = (self.region.x_start..self.region.x_end)
                        .flat_map(|i| (t0..t1).map(move |j| (i, j)))
                        .map(|(i, j)| eta_hat[[i, j]])
                        .sum::<f64>()
                        / n_reg;
                    let coef =
                        -2.0 * (s_cal - s_hat) * self.weights.lambda_reg / (n_norm * n_reg * s_hat);
                    for i in self.region.x_start..self.region.x_end {
                        for j in t0..t1 {
                            gbar[[i, j]] += coef * (eta_hat[[i, j]] - mean);
                        }
                    }
                }
            }
        }

        let report = LossReport::assemble(sensor, phy1, phy2, reg, n_norm, self.weights.lambda_reg);
        Ok((report, eta_bar))
    }

    /// Gradient of (phy1 + phy2) with respect to the raw reconstruction.
    #[allow(clippy::too_many_arguments)]
    fn physics_eta_gradient(
        &self,
        eta_hat: &Array2<f64>,
        phis: &Array2<f64>,
        w_field: &Array2<f64>,
        caches: &[WRecursionCache],
        r1: &Array2<f64>,
        r2: &Array2<f64>,
        n_norm: f64,
    ) -> Array2<f64> {
        let (n_x, n_t) = eta_hat.dim();
        let n = self.region.n_cells() as f64;
        let scale = 2.0 / (n * n_norm);
        let g = self.grid.gravity;

        // Region-masked residual weights.
        let mut rho1 = Array2::zeros((n_x, n_t));
        let mut rho2 = Array2::zeros((n_x, n_t));
        for i in self.region.x_start..self.region.x_end {
            for j in self.region.t_start..self.region.t_end {
                rho1[[i, j]] = scale * r1[[i, j]];
                rho2[[i, j]] = scale * r2[[i, j]];
            }
        }

        // Windowed fields and derivatives as seen by the residuals.
        let u = self.windows.apply(eta_hat);
        let pw = self.windows.apply(phis);
        let ux = apply_axis_multiplier(&u, FieldAxis::Space, &self.dx_mult);
        let px = apply_axis_multiplier(&pw, FieldAxis::Space, &self.dx_mult);

        let mut u_bar: Array2<f64> = Array2::zeros((n_x, n_t));
        let mut pw_bar: Array2<f64> = Array2::zeros((n_x, n_t));
        let mut w_bar: Array2<f64> = Array2::zeros((n_x, n_t));

        // Spectral derivatives are anti-self-adjoint: D^T = -D.
        let dt_rho1 = apply_axis_multiplier(&rho1, FieldAxis::Time, &self.dt_mult);
        u_bar.zip_mut_with(&dt_rho1, |a, &b| *a -= b);
        let dt_rho2 = apply_axis_multiplier(&rho2, FieldAxis::Time, &self.dt_mult);
        pw_bar.zip_mut_with(&dt_rho2, |a, &b| *a -= b);
        u_bar.zip_mut_with(&rho2, |a, &b| *a += g * b);

        let mut via_ux: Array2<f64> = Array2::zeros((n_x, n_t));
        let mut via_px: Array2<f64> = Array2::zeros((n_x, n_t));
        for i in 0..n_x {
            for j in 0..n_t {
                let w = w_field[[i, j]];
                via_ux[[i, j]] = rho1[[i, j]] * (px[[i, j]] - 2.0 * w * ux[[i, j]])
                    - rho2[[i, j]] * w * w * ux[[i, j]];
                via_px[[i, j]] = rho1[[i, j]] * ux[[i, j]] + rho2[[i, j]] * px[[i, j]];
                let q = 1.0 + ux[[i, j]] * ux[[i, j]];
                w_bar[[i, j]] = -rho1[[i, j]] * q - rho2[[i, j]] * w * q;
            }
        }
        let dx_via_ux = apply_axis_multiplier(&via_ux, FieldAxis::Space, &self.dx_mult);
        u_bar.zip_mut_with(&dx_via_ux, |a, &b| *a -= b);
        let dx_via_px = apply_axis_multiplier(&via_px, FieldAxis::Space, &self.dx_mult);
        pw_bar.zip_mut_with(&dx_via_px, |a, &b| *a -= b);

        // Through the vertical-velocity recursion (unless frozen); its
        // inputs were the windowed elevation and windowed potential.
        if !self.weights.freeze_recursion {
            let mut wcol = vec![0.0; n_x];
            for (j, cache) in caches.iter().enumerate() {
                for i in 0..n_x {
                    wcol[i] = w_bar[[i, j]];
                }
                let (e_adj, p_adj) = self.vertical.adjoint(cache, &wcol);
                for i in 0..n_x {
                    u_bar[[i, j]] += e_adj[i];
                    pw_bar[[i, j]] += p_adj[i];
                }
            }
        }

        // pw = window(phis): window weights are their own adjoint.
        let phis_bar = self.windows.apply(&pw_bar);
        // phis = S(space-window(eta_hat)): the transfer multiplier is
        // anti-Hermitian, so its adjoint is the negation; the space window
        // is its own adjoint.
        let neg_transfer: Vec<C64> = self.transfer.iter().map(|c| -c).collect();
        let s_adj = apply_axis_multiplier(&phis_bar, FieldAxis::Space, &neg_transfer);
        let mut eta_bar = self.windows.apply_space(&s_adj);

        // u = window(eta_hat).
        eta_bar.zip_mut_with(&self.windows.apply(&u_bar), |a, &b| *a += b);
        eta_bar
    }

    /// Loss of a model output on one sample.
    pub fn total_loss(
        &self,
        model: &OperatorModel,
        sample: &SensorSample,
    ) -> Result<(LossReport, Array2<f64>)> {
        let eta_hat = pino::forward(model, sample.measurement())?;
        let report = self.report(&eta_hat, sample)?;
        Ok((report, eta_hat))
    }

    /// Loss plus exact parameter gradients via the operator reverse pass.
    pub fn total_loss_with_grad(
        &self,
        model: &OperatorModel,
        sample: &SensorSample,
    ) -> Result<(LossReport, Gradients, Array2<f64>)> {
        let (eta_hat, tape) = forward_cached(model, sample.measurement())?;
        let (report, eta_bar) = self.report_with_eta_grad(&eta_hat, sample, true)?;
        let eta_bar = eta_bar.expect("gradient requested");
        let grads = backward(model, sample.measurement(), &tape, &eta_bar)?;
        Ok((report, grads, eta_hat))
    }
}

/// Free-function forms of the per-operation contracts.
pub fn recover_surface_potential(eta_hat: &Array2<f64>, grid: &Grid) -> Result<Array2<f64>> {
    PhysicsLoss::new(grid, LossWeights::default())?.recover_surface_potential(eta_hat)
}

pub fn recover_vertical_velocity(
    eta: &Array2<f64>,
    phis: &Array2<f64>,
    grid: &Grid,
    order: usize,
) -> Result<Array2<f64>> {
    let weights = LossWeights {
        hosm_order: order,
        ..Default::default()
    };
    PhysicsLoss::new(grid, weights)?.recover_vertical_velocity(eta, phis)
}

pub fn sensor_loss(
    eta_hat: &Array2<f64>,
    eta_cal: &Array2<f64>,
    columns: &[usize],
    n_norm: f64,
    grid: &Grid,
) -> Result<f64> {
    PhysicsLoss::new(grid, LossWeights::default())?.sensor_loss(eta_hat, eta_cal, columns, n_norm)
}

pub fn physics_residual_losses(
    eta_hat: &Array2<f64>,
    phis: &Array2<f64>,
    w_field: &Array2<f64>,
    grid: &Grid,
    n_norm: f64,
) -> Result<(f64, f64)> {
    PhysicsLoss::new(grid, LossWeights::default())?
        .physics_residual_losses(eta_hat, phis, w_field, n_norm)
}

pub fn regularization_loss(
    eta_hat: &Array2<f64>,
    eta_cal: &Array2<f64>,
    n_norm: f64,
    grid: &Grid,
) -> Result<f64> {
    PhysicsLoss::new(grid, LossWeights::default())?.regularization_loss(eta_hat, eta_cal, n_norm)
}

/// Recover both derived fields from a reconstruction the way the loss
/// pipeline does: potential from the windowed elevation, vertical velocity
/// from the windowed pair.
pub fn recover_fields(
    eta_hat: &Array2<f64>,
    grid: &Grid,
    order: usize,
) -> Result<(Array2<f64>, Array2<f64>)> {
    let weights = LossWeights {
        hosm_order: order,
        ..Default::default()
    };
    let ctx = PhysicsLoss::new(grid, weights)?;
    let phis = ctx.recover_surface_potential(eta_hat)?;
    let u = ctx.windows().apply(eta_hat);
    let pw = ctx.windows().apply(&phis);
    let w = ctx.recover_vertical_velocity(&u, &pw)?;
    Ok((phis, w))
}
