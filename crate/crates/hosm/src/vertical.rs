//! Perturbation-series computation of the surface vertical velocity.
//!
//! The velocity potential is expanded as a series in wave steepness. With
//! the surface potential as the first-order boundary value, the higher
//! orders follow from a Taylor expansion about the mean surface:
//!
//! ```text
//! phi^(1) = phi_s
//! phi^(m) = -sum_{l=1}^{m-1} eta^l / l! * d_z^l phi^(m-l)          (z = 0)
//! W^(m)   =  sum_{l=0}^{m-1} eta^l / l! * d_z^{l+1} phi^(m-l)      (z = 0)
//! ```
//!
//! z-derivatives act per wavenumber through the finite-depth vertical
//! eigenfunction cosh(k(z+d))/cosh(kd): order-l multiplier `|k|^l tanh(|k|d)`
//! for odd l and `|k|^l` for even l. Products are formed in physical space,
//! dealiased by zero padding when enabled.

use num_complex::Complex;
use wavecore::spectral::{apply_multiplier, DealiasedProduct};
use wavecore::Grid;

use crate::{HosmConfig, HosmError, Result};

type C64 = Complex<f64>;

/// Reusable operator computing W from (eta, phi_s) on one spatial column.
#[derive(Debug, Clone)]
pub struct VerticalVelocityOp {
    n: usize,
    order: usize,
    /// z-derivative multipliers, index l-1 holds order l (1..=order).
    z_mults: Vec<Vec<C64>>,
    dp: DealiasedProduct,
}

/// Intermediate fields of one forward evaluation, kept for the adjoint.
#[derive(Debug, Clone)]
pub struct WRecursionCache {
    eta: Vec<f64>,
    /// p[l] = eta^l / l!, dealiased powers, l = 0..order-1.
    p: Vec<Vec<f64>>,
    /// phi[m-1] = m-th order boundary potential, m = 1..=order.
    phi: Vec<Vec<f64>>,
}

impl VerticalVelocityOp {
    pub fn new(wavenumbers: &[f64], depth: f64, cfg: &HosmConfig) -> Result<Self> {
        if !(1..=8).contains(&cfg.order) {
            return Err(HosmError::InvalidArgument(format!(
                "order {} outside 1..=8",
                cfg.order
            )));
        }
        let n = wavenumbers.len();
        let z_mults = (1..=cfg.order)
            .map(|l| {
                wavenumbers
                    .iter()
                    .map(|&k| {
                        let ka = k.abs();
                        let v = if l % 2 == 1 {
                            ka.powi(l as i32) * (ka * depth).tanh()
                        } else {
                            ka.powi(l as i32)
                        };
                        C64::new(v, 0.0)
                    })
                    .collect()
            })
            .collect();
        let dp = if cfg.dealias {
            DealiasedProduct::new(n, cfg.order)
        } else {
            DealiasedProduct::disabled(n)
        };
        Ok(VerticalVelocityOp {
            n,
            order: cfg.order,
            z_mults,
            dp,
        })
    }

    pub fn for_grid(grid: &Grid, cfg: &HosmConfig) -> Result<Self> {
        Self::new(&grid.wavenumbers, grid.depth, cfg)
    }

    fn z_apply(&self, v: &[f64], l: usize) -> Vec<f64> {
        apply_multiplier(v, &self.z_mults[l - 1])
    }

    /// Per-order components W^(1), .., W^(M).
    pub fn compute_orders(&self, eta: &[f64], phis: &[f64]) -> Result<Vec<Vec<f64>>> {
        let (orders, _) = self.compute_orders_cached(eta, phis)?;
        Ok(orders)
    }

    /// Per-order components plus the cache needed by [`Self::adjoint`].
    pub fn compute_orders_cached(
        &self,
        eta: &[f64],
        phis: &[f64],
    ) -> Result<(Vec<Vec<f64>>, WRecursionCache)> {
        if eta.len() != self.n || phis.len() != self.n {
            return Err(HosmError::InvalidArgument(format!(
                "column length mismatch: eta {}, phis {}, op {}",
                eta.len(),
                phis.len(),
                self.n
            )));
        }
        let m_max = self.order;
        // Dealiased powers p[l] = eta^l / l!.
        let mut p: Vec<Vec<f64>> = Vec::with_capacity(m_max);
        p.push(vec![1.0; self.n]);
        for l in 1..m_max {
            let prev = &p[l - 1];
            let mut next = self.dp.multiply(prev, eta);
            let inv = 1.0 / l as f64;
            next.iter_mut().for_each(|v| *v *= inv);
            p.push(next);
        }
        // Boundary potentials per order.
        let mut phi: Vec<Vec<f64>> = Vec::with_capacity(m_max);
        phi.push(phis.to_vec());
        for m in 2..=m_max {
            let mut acc = vec![0.0; self.n];
            for l in 1..m {
                let z = self.z_apply(&phi[m - l - 1], l);
                let term = self.dp.multiply(&p[l], &z);
                for (a, t) in acc.iter_mut().zip(&term) {
                    *a -= t;
                }
            }
            phi.push(acc);
        }
        // Per-order vertical velocity from the z-derivative Taylor series.
        let mut orders = Vec::with_capacity(m_max);
        for m in 1..=m_max {
            let mut wm = vec![0.0; self.n];
            for l in 0..m {
                let z = self.z_apply(&phi[m - l - 1], l + 1);
                if l == 0 {
                    for (a, t) in wm.iter_mut().zip(&z) {
                        *a += t;
                    }
                } else {
                    let term = self.dp.multiply(&p[l], &z);
                    for (a, t) in wm.iter_mut().zip(&term) {
                        *a += t;
                    }
                }
            }
            orders.push(wm);
        }
        Ok((
            orders,
            WRecursionCache {
                eta: eta.to_vec(),
                p,
                phi,
            },
        ))
    }

    /// Total W summed over all orders.
    pub fn compute(&self, eta: &[f64], phis: &[f64]) -> Result<Vec<f64>> {
        Ok(self.compute_cached(eta, phis)?.0)
    }

    /// Total W plus the adjoint cache.
    pub fn compute_cached(&self, eta: &[f64], phis: &[f64]) -> Result<(Vec<f64>, WRecursionCache)> {
        let (orders, cache) = self.compute_orders_cached(eta, phis)?;
        let mut w = vec![0.0; self.n];
        for wm in &orders {
            for (a, t) in w.iter_mut().zip(wm) {
                *a += t;
            }
        }
        Ok((w, cache))
    }

    /// Reverse-mode derivative: given dL/dW, produce (dL/deta, dL/dphis).
    ///
    /// Relies on the z-multipliers being self-adjoint and on the dealiased
    /// product satisfying `<g, B(a,b)> = <a, B(g,b)>`.
    pub fn adjoint(&self, cache: &WRecursionCache, w_bar: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let m_max = self.order;
        let n = self.n;
        let mut phi_bar = vec![vec![0.0; n]; m_max];
        let mut p_bar = vec![vec![0.0; n]; m_max];

        // Through W = sum_m sum_l B(p[l], Z_{l+1} phi[m-l]).
        for m in 1..=m_max {
            for l in 0..m {
                if l == 0 {
                    let z = self.z_apply(w_bar, 1);
                    for (a, t) in phi_bar[m - 1].iter_mut().zip(&z) {
                        *a += t;
                    }
                } else {
                    let z = self.z_apply(&cache.phi[m - l - 1], l + 1);
                    let pb = self.dp.multiply(w_bar, &z);
                    for (a, t) in p_bar[l].iter_mut().zip(&pb) {
                        *a += t;
                    }
                    let inner = self.dp.multiply(w_bar, &cache.p[l]);
                    let z_in = self.z_apply(&inner, l + 1);
                    for (a, t) in phi_bar[m - l - 1].iter_mut().zip(&z_in) {
                        *a += t;
                    }
                }
            }
        }

        // Through the potential recursion, highest order first.
        for m in (2..=m_max).rev() {
            let pb_m = phi_bar[m - 1].clone();
            for l in 1..m {
                let z = self.z_apply(&cache.phi[m - l - 1], l);
                let pb = self.dp.multiply(&pb_m, &z);
                for (a, t) in p_bar[l].iter_mut().zip(&pb) {
                    *a -= t;
                }
                let inner = self.dp.multiply(&pb_m, &cache.p[l]);
                let z_in = self.z_apply(&inner, l);
                for (a, t) in phi_bar[m - l - 1].iter_mut().zip(&z_in) {
                    *a -= t;
                }
            }
        }

        let phis_bar = phi_bar[0].clone();

        // Through the power chain p[l] = B(p[l-1], eta) / l.
        let mut eta_bar = vec![0.0; n];
        for l in (1..m_max).rev() {
            let inv = 1.0 / l as f64;
            let eb = self.dp.multiply(&p_bar[l], &cache.p[l - 1]);
            for (a, t) in eta_bar.iter_mut().zip(&eb) {
                *a += t * inv;
            }
            let pb = self.dp.multiply(&p_bar[l], &cache.eta);
            for (a, t) in p_bar[l - 1].iter_mut().zip(&pb) {
                *a += t * inv;
            }
        }

        (eta_bar, phis_bar)
    }
}

/// Convenience wrapper computing W for a full grid column set is provided by
/// the solver; this free function mirrors the single-column contract.
pub fn compute_vertical_velocity(
    eta: &[f64],
    phis: &[f64],
    grid: &Grid,
    cfg: &HosmConfig,
) -> Result<Vec<f64>> {
    VerticalVelocityOp::for_grid(grid, cfg)?.compute(eta, phis)
}
