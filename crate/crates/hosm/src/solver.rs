//! Time integration of the free-surface boundary conditions.

use ndarray::{Array1, Array2};
use wavecore::spectral::{vector_derivative, DealiasedProduct};
use wavecore::{sample_spectrum_realization, Grid, SpectrumParams, WaveField};

use crate::vertical::VerticalVelocityOp;
use crate::{HosmConfig, HosmError, ProductRule, Result};

/// Surface state at one instant.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub eta: Array1<f64>,
    pub phis: Array1<f64>,
    pub time: f64,
}

impl SolverState {
    pub fn new(eta: Array1<f64>, phis: Array1<f64>, time: f64) -> Self {
        SolverState { eta, phis, time }
    }

    pub fn zeros(n: usize) -> Self {
        SolverState {
            eta: Array1::zeros(n),
            phis: Array1::zeros(n),
            time: 0.0,
        }
    }
}

/// Solver bound to a grid and configuration; reuses spectral plans.
pub struct HosmSolver {
    grid: Grid,
    cfg: HosmConfig,
    vertical: VerticalVelocityOp,
    dp: DealiasedProduct,
}

impl HosmSolver {
    pub fn new(grid: &Grid, cfg: &HosmConfig) -> Result<Self> {
        cfg.validate(grid.dt)?;
        let vertical = VerticalVelocityOp::for_grid(grid, cfg)?;
        let dp = if cfg.dealias {
            DealiasedProduct::new(grid.n_x, cfg.order + 1)
        } else {
            DealiasedProduct::disabled(grid.n_x)
        };
        Ok(HosmSolver {
            grid: grid.clone(),
            cfg: *cfg,
            vertical,
            dp,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn config(&self) -> &HosmConfig {
        &self.cfg
    }

    /// Right-hand sides of the kinematic and dynamic FSBC:
    ///
    /// ```text
    /// eta_t  = -eta_x phi_x + W (1 + eta_x^2)
    /// phis_t = -g eta - 1/2 phi_x^2 + 1/2 W^2 (1 + eta_x^2)
    /// ```
    ///
    /// Under [`ProductRule::Consistent`] every term is truncated at total
    /// order M in steepness, counting eta, phi_s and W^(m) as orders 1, 1
    /// and m.
    pub fn rhs(&self, state: &SolverState) -> Result<(Array1<f64>, Array1<f64>)> {
        let n = self.grid.n_x;
        if state.eta.len() != n || state.phis.len() != n {
            return Err(HosmError::InvalidArgument(format!(
                "state length {} does not match grid {}",
                state.eta.len(),
                n
            )));
        }
        let eta = state.eta.as_slice().expect("contiguous eta");
        let phis = state.phis.as_slice().expect("contiguous phis");
        let eta_x = vector_derivative(eta, &self.grid.wavenumbers, 1);
        let phi_x = vector_derivative(phis, &self.grid.wavenumbers, 1);
        let g = self.grid.gravity;
        let m = self.cfg.order;

        match self.cfg.product_rule {
            ProductRule::Full => {
                let w = self.vertical.compute(eta, phis)?;
                let q = self.dp.multiply(&eta_x, &eta_x);
                let exl = self.dp.multiply(&eta_x, &phi_x);
                let wq = self.dp.multiply(&w, &q);
                let pxx = self.dp.multiply(&phi_x, &phi_x);
                let ww = self.dp.multiply(&w, &w);
                let wwq = self.dp.multiply(&ww, &q);
                let deta: Array1<f64> = (0..n).map(|i| -exl[i] + w[i] + wq[i]).collect();
                let dphis: Array1<f64> = (0..n)
                    .map(|i| -g * eta[i] - 0.5 * pxx[i] + 0.5 * (ww[i] + wwq[i]))
                    .collect();
                Ok((deta, dphis))
            }
            ProductRule::Consistent => {
                let orders = self.vertical.compute_orders(eta, phis)?;
                // Partial sums S_k = W^(1) + .. + W^(k); S_0 = 0.
                let mut s = vec![vec![0.0; n]];
                for k in 1..=m {
                    let mut next = s[k - 1].clone();
                    for (a, t) in next.iter_mut().zip(&orders[k - 1]) {
                        *a += t;
                    }
                    s.push(next);
                }
                let mut deta = vec![0.0; n];
                let mut dphis = vec![0.0; n];
                for i in 0..n {
                    deta[i] = s[m][i];
                    dphis[i] = -g * eta[i];
                }
                if m >= 2 {
                    let exl = self.dp.multiply(&eta_x, &phi_x);
                    let pxx = self.dp.multiply(&phi_x, &phi_x);
                    // Pairs W^(i) W^(j) with i + j <= M.
                    let mut ww = vec![0.0; n];
                    for i_ord in 1..m {
                        let prod = self.dp.multiply(&orders[i_ord - 1], &s[m - i_ord]);
                        for (a, t) in ww.iter_mut().zip(&prod) {
                            *a += t;
                        }
                    }
                    for i in 0..n {
                        deta[i] -= exl[i];
                        dphis[i] += 0.5 * (ww[i] - pxx[i]);
                    }
                }
                if m >= 3 {
                    // eta_x^2 W keeps W components up to order M - 2.
                    let q = self.dp.multiply(&eta_x, &eta_x);
                    let wq = self.dp.multiply(&s[m - 2], &q);
                    for (a, t) in deta.iter_mut().zip(&wq) {
                        *a += t;
                    }
                }
                if m >= 4 {
                    // eta_x^2 W^2 keeps pairs with i + j <= M - 2.
                    let q = self.dp.multiply(&eta_x, &eta_x);
                    let mut ww2 = vec![0.0; n];
                    for i_ord in 1..(m - 2) {
                        let prod = self.dp.multiply(&orders[i_ord - 1], &s[m - 2 - i_ord]);
                        for (a, t) in ww2.iter_mut().zip(&prod) {
                            *a += t;
                        }
                    }
                    let wwq = self.dp.multiply(&ww2, &q);
                    for (a, t) in dphis.iter_mut().zip(&wwq) {
                        *a += 0.5 * t;
                    }
                }
                Ok((Array1::from_vec(deta), Array1::from_vec(dphis)))
            }
        }
    }

    /// Advance the state to `t_target` with RK4 steps of at most
    /// `internal_dt` (the step is shrunk to land exactly on the target).
    ///
    /// The spatial mean of the elevation tendency is projected out: the
    /// continuous dynamics conserve the mean surface level, so this removes
    /// only truncation-order drift.
    pub fn advance_to(&self, state: &mut SolverState, t_target: f64) -> Result<()> {
        if t_target < state.time - 1e-12 {
            return Err(HosmError::InvalidArgument(format!(
                "target time {t_target} before state time {}",
                state.time
            )));
        }
        let span = t_target - state.time;
        if span <= 0.0 {
            return Ok(());
        }
        let n_steps = (span / self.cfg.internal_dt).ceil().max(1.0) as usize;
        let h = span / n_steps as f64;
        let cap = self.amplitude_cap(&state.eta);
        for step in 0..n_steps {
            self.rk4_step(state, h)?;
            self.check_health(state, step, cap)?;
        }
        state.time = t_target;
        Ok(())
    }

    fn amplitude_cap(&self, eta: &Array1<f64>) -> f64 {
        let n = eta.len() as f64;
        let mean = eta.sum() / n;
        let var = eta.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let hs = 4.0 * var.sqrt();
        if hs > 0.0 {
            self.cfg.amplitude_cap_factor * hs
        } else {
            f64::INFINITY
        }
    }

    fn check_health(&self, state: &SolverState, step: usize, cap: f64) -> Result<()> {
        let mut max_abs: f64 = 0.0;
        for &v in state.eta.iter().chain(state.phis.iter()) {
            if !v.is_finite() {
                return Err(HosmError::SolverDiverged {
                    time: state.time,
                    step,
                    reason: "non-finite state".into(),
                });
            }
            max_abs = max_abs.max(v.abs());
        }
        let max_eta = state.eta.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if max_eta > cap {
            return Err(HosmError::SolverDiverged {
                time: state.time,
                step,
                reason: format!("max |eta| = {max_eta:.3} exceeded amplitude cap {cap:.3}"),
            });
        }
        Ok(())
    }

    fn rk4_step(&self, state: &mut SolverState, h: f64) -> Result<()> {
        let (k1e, k1p) = self.rhs_projected(state)?;
        let s2 = SolverState {
            eta: &state.eta + &(&k1e * (h / 2.0)),
            phis: &state.phis + &(&k1p * (h / 2.0)),
            time: state.time + h / 2.0,
        };
        let (k2e, k2p) = self.rhs_projected(&s2)?;
        let s3 = SolverState {
            eta: &state.eta + &(&k2e * (h / 2.0)),
            phis: &state.phis + &(&k2p * (h / 2.0)),
            time: state.time + h / 2.0,
        };
        let (k3e, k3p) = self.rhs_projected(&s3)?;
        let s4 = SolverState {
            eta: &state.eta + &(&k3e * h),
            phis: &state.phis + &(&k3p * h),
            time: state.time + h,
        };
        let (k4e, k4p) = self.rhs_projected(&s4)?;
        let w = h / 6.0;
        state.eta = &state.eta + &((k1e + &k2e * 2.0 + &k3e * 2.0 + k4e) * w);
        state.phis = &state.phis + &((k1p + &k2p * 2.0 + &k3p * 2.0 + k4p) * w);
        state.time += h;
        Ok(())
    }

    fn rhs_projected(&self, state: &SolverState) -> Result<(Array1<f64>, Array1<f64>)> {
        let (mut deta, dphis) = self.rhs(state)?;
        let mean = deta.sum() / deta.len() as f64;
        deta.mapv_inplace(|v| v - mean);
        Ok((deta, dphis))
    }

    /// Integrate to `until`, returning states sampled at the grid output
    /// cadence (including the initial state).
    pub fn integrate(&self, state: &SolverState, until: f64) -> Result<Vec<SolverState>> {
        if until <= state.time {
            return Err(HosmError::InvalidArgument(format!(
                "until {} must exceed state time {}",
                until, state.time
            )));
        }
        let mut current = state.clone();
        let mut out = vec![current.clone()];
        let n_out = ((until - state.time) / self.grid.dt).round() as usize;
        for j in 1..=n_out {
            let t = state.time + j as f64 * self.grid.dt;
            self.advance_to(&mut current, t.min(until))?;
            out.push(current.clone());
        }
        Ok(out)
    }

    /// Sample an initial condition, relax it, then record a full space-time
    /// field at the grid resolution.
    pub fn simulate_field(&self, params: &SpectrumParams) -> Result<WaveField> {
        let realization = sample_spectrum_realization(params, &self.grid)?;
        let mut state = SolverState::new(realization.eta, realization.phis, 0.0);
        let t_relax = self.cfg.relaxation_periods * self.grid.peak_period(params.peak_wavelength);
        self.advance_to(&mut state, t_relax)?;

        let mut eta = Array2::zeros((self.grid.n_x, self.grid.n_t));
        let mut phis = Array2::zeros((self.grid.n_x, self.grid.n_t));
        for j in 0..self.grid.n_t {
            if j > 0 {
                self.advance_to(&mut state, t_relax + j as f64 * self.grid.dt)?;
            }
            for i in 0..self.grid.n_x {
                eta[[i, j]] = state.eta[i];
                phis[[i, j]] = state.phis[i];
            }
        }
        Ok(WaveField::new(eta, phis, self.grid.clone())?)
    }
}

/// Free-function form of the FSBC right-hand sides.
pub fn fsbc_rhs(
    state: &SolverState,
    grid: &Grid,
    cfg: &HosmConfig,
) -> Result<(Array1<f64>, Array1<f64>)> {
    HosmSolver::new(grid, cfg)?.rhs(state)
}

/// Free-function form of trajectory integration.
pub fn integrate(
    state: &SolverState,
    until: f64,
    grid: &Grid,
    cfg: &HosmConfig,
) -> Result<Vec<SolverState>> {
    HosmSolver::new(grid, cfg)?.integrate(state, until)
}

/// Free-function form of reference-field simulation.
pub fn simulate_field(params: &SpectrumParams, grid: &Grid, cfg: &HosmConfig) -> Result<WaveField> {
    HosmSolver::new(grid, cfg)?.simulate_field(params)
}
