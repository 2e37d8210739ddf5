//! Exact reverse-mode gradients of the operator.
//!
//! Every linear stage uses its algebraic adjoint; the spectral path's
//! adjoint follows from `<Re((1/N) F^H S Y), g> = Re <Y, w (1/N) F g>`
//! where `S` is the mirrored scatter of retained bins and the weight `w`
//! is 2 for time columns >= 1 (whose Hermitian mirror carries the same
//! real content) and 1 for column 0.

use ndarray::{Array1, Array2, Array3, Axis};
use num_complex::Complex;
use rayon::prelude::*;

use crate::forward::{fft2_cols, gather_rows, ifft2_scatter, ForwardTape};
use crate::model::{gelu_prime, ModelParams};
use crate::{Activation, Case, PinoError, Result};

type C64 = Complex<f64>;

/// Parameter gradients share the model's tensor layout.
pub type Gradients = ModelParams<f64>;

fn sigma_prime(a: f64, activation: Activation) -> f64 {
    match activation {
        Activation::Gelu => gelu_prime(a),
        Activation::Identity => 1.0,
    }
}

/// Reverse pass: gradients of every parameter for the loss whose gradient
/// with respect to the operator output is `upstream`.
///
/// `tape` must come from [`crate::forward_cached`] on the same
/// `measurement`; a digest mismatch is a contract violation.
pub fn backward(
    model: &ModelParams<f64>,
    measurement: &Array2<f64>,
    tape: &ForwardTape,
    upstream: &Array2<f64>,
) -> Result<Gradients> {
    if crate::forward::input_digest(measurement) != tape.digest {
        return Err(PinoError::ContractViolation(
            "forward tape does not belong to this measurement".into(),
        ));
    }
    let cfg = &model.cfg;
    if upstream.dim() != (cfg.out_nx, cfg.out_nt) {
        return Err(PinoError::InvalidArgument(format!(
            "upstream gradient shape {:?} does not match output ({}, {})",
            upstream.dim(),
            cfg.out_nx,
            cfg.out_nt
        )));
    }
    let mut grads = Gradients::zeros(cfg)?;
    let (nx, nt, nw) = tape.final_latent.dim();
    let n_pts = nx * nt;

    // ---- projection MLP ----
    let z_flat = tape
        .final_latent
        .view()
        .into_shape_with_order((n_pts, nw))
        .expect("layout");
    // Recompute the hidden activations from the cached latent.
    let mut a1 = z_flat.dot(&model.q1);
    for mut row in a1.rows_mut() {
        for (o, v) in row.iter_mut().enumerate() {
            *v += model.q1_b[o];
        }
    }
    let h1 = match cfg.activation {
        Activation::Gelu => a1.mapv(crate::model::gelu),
        Activation::Identity => a1.clone(),
    };
    let mut a2 = h1.dot(&model.q2);
    for mut row in a2.rows_mut() {
        for (o, v) in row.iter_mut().enumerate() {
            *v += model.q2_b[o];
        }
    }
    let h2 = match cfg.activation {
        Activation::Gelu => a2.mapv(crate::model::gelu),
        Activation::Identity => a2.clone(),
    };

    let g_flat: Array1<f64> = Array1::from_iter(upstream.iter().copied());
    grads.q3_b = g_flat.sum();
    grads.q3 = h2.t().dot(&g_flat);
    // dL/dh2 = g outer q3
    let mut a2_bar = Array2::zeros(a2.dim());
    for n in 0..n_pts {
        let g = g_flat[n];
        for k in 0..h2.ncols() {
            a2_bar[[n, k]] = g * model.q3[k] * sigma_prime(a2[[n, k]], cfg.activation);
        }
    }
    grads.q2 = h1.t().dot(&a2_bar);
    grads.q2_b = a2_bar.sum_axis(Axis(0));
    let h1_bar = a2_bar.dot(&model.q2.t());
    let mut a1_bar = Array2::zeros(a1.dim());
    for n in 0..n_pts {
        for k in 0..h1.ncols() {
            a1_bar[[n, k]] = h1_bar[[n, k]] * sigma_prime(a1[[n, k]], cfg.activation);
        }
    }
    grads.q1 = z_flat.t().dot(&a1_bar);
    grads.q1_b = a1_bar.sum_axis(Axis(0));
    let z_bar_flat = a1_bar.dot(&model.q1.t());

    // ---- re-pad the latent gradient ----
    let (nxp, ntp) = cfg.padded();
    let pad = cfg.pad;
    let mut h_bar: Array3<f64> = Array3::zeros((nxp, ntp, nw));
    for x in 0..nx {
        for t in 0..nt {
            for c in 0..nw {
                h_bar[[x + pad, t + pad, c]] = z_bar_flat[[x * nt + t, c]];
            }
        }
    }

    // ---- Fourier layers, last to first ----
    let n_m = cfg.n_modes;
    let n_total = (nxp * ntp) as f64;
    for (li, layer) in model.layers.iter().enumerate().rev() {
        let preact = &tape.preacts[li];
        let v_in = &tape.layer_inputs[li];
        let xhat = &tape.xhats[li];

        // Through the activation.
        let mut s_bar = h_bar;
        for (sb, &a) in s_bar.iter_mut().zip(preact.iter()) {
            *sb *= sigma_prime(a, cfg.activation);
        }

        // Pointwise path.
        let s_flat = s_bar
            .view()
            .into_shape_with_order((nxp * ntp, nw))
            .expect("layout");
        let v_flat = v_in
            .view()
            .into_shape_with_order((nxp * ntp, nw))
            .expect("layout");
        grads.layers[li].w = v_flat.t().dot(&s_flat);
        grads.layers[li].b = s_flat.sum_axis(Axis(0));
        let v_bar_point = s_flat.dot(&layer.w.t());

        // Spectral path: gather (1/N-scaled, column-weighted) upstream
        // spectra per out-channel.
        let g_planes: Vec<Array2<C64>> = (0..nw)
            .into_par_iter()
            .map(|o| {
                let channel = s_bar.index_axis(Axis(2), o).to_owned();
                let cols = fft2_cols(&channel, n_m);
                gather_rows(&cols, n_m)
            })
            .collect();
        let mut y_bar: Array3<C64> = Array3::zeros((2 * n_m, n_m, nw));
        for (o, plane) in g_planes.iter().enumerate() {
            for r in 0..2 * n_m {
                for c in 0..n_m {
                    // Column 0 bins scatter once, except the asymmetric row
                    // whose conjugate is mirrored like the c >= 1 bins.
                    let w = if c == 0 && r != n_m { 1.0 } else { 2.0 };
                    y_bar[[r, c, o]] = plane[[r, c]] * (w / n_total);
                }
            }
        }

        // Spectral weight gradients and input-spectrum gradient.
        let rl = &mut grads.layers[li];
        let mut x_bar: Array3<C64> = Array3::zeros((2 * n_m, n_m, nw));
        for r in 0..2 * n_m {
            for c in 0..n_m {
                for o in 0..nw {
                    let yb = y_bar[[r, c, o]];
                    for i in 0..nw {
                        let g_r = xhat[[r, c, i]].conj() * yb;
                        rl.r_re[[r, c, o, i]] += g_r.re;
                        rl.r_im[[r, c, o, i]] += g_r.im;
                        let w = Complex::new(layer.r_re[[r, c, o, i]], layer.r_im[[r, c, o, i]]);
                        x_bar[[r, c, i]] += yb * w.conj();
                    }
                }
            }
        }

        // Pull the spectrum gradient back to the latent input.
        let v_bar_planes: Vec<Array2<f64>> = (0..nw)
            .into_par_iter()
            .map(|i| {
                let coeffs = x_bar.index_axis(Axis(2), i).to_owned();
                ifft2_scatter(&coeffs, nxp, ntp, false, n_total)
            })
            .collect();

        let mut next_bar = Array3::zeros((nxp, ntp, nw));
        for c in 0..nw {
            let plane = &v_bar_planes[c];
            for i in 0..nxp {
                for j in 0..ntp {
                    next_bar[[i, j, c]] = plane[[i, j]] + v_bar_point[[i * ntp + j, c]];
                }
            }
        }
        h_bar = next_bar;
    }

    // ---- channel lift ----
    let mut v_bar: Array2<f64> = Array2::zeros((cfg.out_nx, cfg.out_nt));
    for x in 0..cfg.out_nx {
        for t in 0..cfg.out_nt {
            let mut acc = 0.0;
            for c in 0..nw {
                let hb = h_bar[[x + pad, t + pad, c]];
                grads.lift_p[c] += tape.expanded[[x, t]] * hb;
                grads.lift_p_b[c] += hb;
                acc += hb * model.lift_p[c];
            }
            v_bar[[x, t]] = acc;
        }
    }

    // ---- sparse-axis lift ----
    match cfg.case {
        Case::Buoy => {
            grads.lift_i = measurement.dot(&v_bar.t());
            grads.lift_i_b = v_bar.sum_axis(Axis(1));
        }
        Case::Radar => {
            grads.lift_i = measurement.t().dot(&v_bar);
            grads.lift_i_b = v_bar.sum_axis(Axis(0));
        }
    }

    Ok(grads)
}

impl Gradients {
    /// Accumulate `other` scaled by `alpha`.
    pub fn axpy(&mut self, alpha: f64, other: &Gradients) {
        let mut mine = self.param_slices_mut();
        let theirs = other.param_slices();
        for (m, t) in mine.iter_mut().zip(theirs) {
            for (a, b) in m.iter_mut().zip(t.iter()) {
                *a += alpha * b;
            }
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        for s in self.param_slices_mut() {
            for v in s {
                *v *= alpha;
            }
        }
    }
}
