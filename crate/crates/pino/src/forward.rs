//! Forward pass of the operator, generic over f32/f64, plus the activation
//! tape consumed by the reverse pass.

use ndarray::{Array2, Array3, Axis};
use num_complex::Complex;
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use wavecore::spectral::{fft_inplace, ifft_inplace};

use crate::model::{gelu, FnoScalar, FourierLayer, ModelParams};
use crate::{Activation, Case, PinoError, Result};

/// Retained spectral coefficients of one latent block:
/// `[2 n_m space rows, n_m time cols, n_w channels]`.
pub type RetainedSpectrum<T> = Array3<Complex<T>>;

/// Activations recorded by [`forward_cached`] for the reverse pass.
pub struct ForwardTape {
    /// SHA-256 of the input the activations belong to.
    pub(crate) digest: [u8; 32],
    /// Sparse-axis expansion result `[n_x, n_t]`.
    pub(crate) expanded: Array2<f64>,
    /// Padded latent inputs of every Fourier layer.
    pub(crate) layer_inputs: Vec<Array3<f64>>,
    /// Pre-activation sums of every Fourier layer.
    pub(crate) preacts: Vec<Array3<f64>>,
    /// Retained input spectra of every Fourier layer.
    pub(crate) xhats: Vec<RetainedSpectrum<f64>>,
    /// Unpadded latent entering the projection MLP `[n_x, n_t, n_w]`.
    pub(crate) final_latent: Array3<f64>,
}

pub(crate) fn input_digest(measurement: &Array2<f64>) -> [u8; 32] {
    let mut hasher = Sha256::new();
    let (r, c) = measurement.dim();
    hasher.update(r.to_le_bytes());
    hasher.update(c.to_le_bytes());
    for v in measurement.iter() {
        hasher.update(v.to_le_bytes());
    }
    hasher.finalize().into()
}

fn check_input_shape<T>(model: &ModelParams<T>, measurement: &Array2<T>) -> Result<()> {
    let want = (model.cfg.input_rows, model.cfg.input_cols);
    if measurement.dim() != want {
        return Err(PinoError::InvalidArgument(format!(
            "measurement shape {:?} does not match configured input {:?}",
            measurement.dim(),
            want
        )));
    }
    Ok(())
}

/// Sparse-axis expansion by the dense lift I.
fn expand<T: FnoScalar>(model: &ModelParams<T>, measurement: &Array2<T>) -> Array2<T> {
    match model.cfg.case {
        // v[x, t] = sum_b I[b, x] m[b, t] + bias[x]
        Case::Buoy => {
            let mut v = model.lift_i.t().dot(measurement);
            for (i, mut row) in v.rows_mut().into_iter().enumerate() {
                let b = model.lift_i_b[i];
                row.mapv_inplace(|x| x + b);
            }
            v
        }
        // v[x, t] = sum_s m[x, s] I[s, t] + bias[t]
        Case::Radar => {
            let mut v = measurement.dot(&model.lift_i);
            for (j, mut col) in v.columns_mut().into_iter().enumerate() {
                let b = model.lift_i_b[j];
                col.mapv_inplace(|x| x + b);
            }
            v
        }
    }
}

/// Channel lift and zero padding: `[n_x, n_t]` -> `[nxp, ntp, n_w]`.
fn lift_and_pad<T: FnoScalar>(model: &ModelParams<T>, v: &Array2<T>) -> Array3<T> {
    let (nxp, ntp) = model.cfg.padded();
    let pad = model.cfg.pad;
    let nw = model.cfg.n_width;
    let mut h = Array3::zeros((nxp, ntp, nw));
    for x in 0..model.cfg.out_nx {
        for t in 0..model.cfg.out_nt {
            let val = v[[x, t]];
            for c in 0..nw {
                h[[x + pad, t + pad, c]] = val * model.lift_p[c] + model.lift_p_b[c];
            }
        }
    }
    h
}

/// Full 2D forward FFT of one channel, keeping only the first `n_cols`
/// time-frequency columns (all space rows).
pub(crate) fn fft2_cols<T: FnoScalar>(field: &Array2<T>, n_cols: usize) -> Array2<Complex<T>> {
    let (nr, nc) = field.dim();
    let mut rows: Array2<Complex<T>> = Array2::zeros((nr, n_cols));
    let mut buf = vec![Complex::new(T::zero(), T::zero()); nc];
    for i in 0..nr {
        for j in 0..nc {
            buf[j] = Complex::new(field[[i, j]], T::zero());
        }
        fft_inplace(&mut buf);
        for j in 0..n_cols {
            rows[[i, j]] = buf[j];
        }
    }
    let mut buf = vec![Complex::new(T::zero(), T::zero()); nr];
    for j in 0..n_cols {
        for i in 0..nr {
            buf[i] = rows[[i, j]];
        }
        fft_inplace(&mut buf);
        for i in 0..nr {
            rows[[i, j]] = buf[i];
        }
    }
    rows
}

/// Gather the retained rows (both half-planes) of a `[nxp, n_m]` spectrum.
pub(crate) fn gather_rows<T: FnoScalar>(cols: &Array2<Complex<T>>, n_m: usize) -> Array2<Complex<T>> {
    let nxp = cols.nrows();
    let mut out = Array2::zeros((2 * n_m, n_m));
    for r in 0..n_m {
        for c in 0..n_m {
            out[[r, c]] = cols[[r, c]];
            out[[n_m + r, c]] = cols[[nxp - n_m + r, c]];
        }
    }
    out
}

fn retained_row_to_full(row: usize, n_m: usize, nxp: usize) -> usize {
    if row < n_m {
        row
    } else {
        nxp - n_m + row - n_m
    }
}

/// Inverse of the truncated transform: scatter retained coefficients (with
/// Hermitian mirrors for time columns >= 1), inverse transform, real part.
///
/// Retained index set, documented for reproducibility: space rows
/// `0..n_m` and `nxp-n_m..nxp`, time columns `0..n_m`, plus the conjugate
/// mirror `(nxp - r mod nxp, ntp - c)` of every retained bin with c >= 1.
pub(crate) fn ifft2_scatter<T: FnoScalar>(
    coeffs: &Array2<Complex<T>>, // [2 n_m, n_m]
    nxp: usize,
    ntp: usize,
    mirror: bool,
    scale: T,
) -> Array2<T> {
    let n_m = coeffs.ncols();
    // Nonzero time columns: 0..n_m and, with mirroring, ntp-n_m+1..ntp;
    // the mirrored column ntp - cm lives in work slot n_m - 1 + cm.
    let mut col_work: Array2<Complex<T>> = Array2::zeros((nxp, 2 * n_m - 1));
    let mut buf = vec![Complex::new(T::zero(), T::zero()); nxp];

    // Space-axis inverse per nonzero column.
    for c in 0..n_m {
        for v in buf.iter_mut() {
            *v = Complex::new(T::zero(), T::zero());
        }
        for r2 in 0..2 * n_m {
            let row = retained_row_to_full(r2, n_m, nxp);
            buf[row] = coeffs[[r2, c]];
        }
        if mirror && c == 0 {
            // Row nxp - n_m is the one retained row whose Hermitian partner
            // (row n_m) lies outside the set; writing the conjugate there
            // keeps column 0 symmetric and the identity-weight operator
            // idempotent.
            buf[n_m] = coeffs[[n_m, 0]].conj();
        }
        ifft_inplace(&mut buf);
        for i in 0..nxp {
            col_work[[i, c]] = buf[i];
        }
    }
    if mirror {
        for cm in 1..n_m {
            // column ntp - cm carries the conjugate of column cm at the
            // mirrored rows
            for v in buf.iter_mut() {
                *v = Complex::new(T::zero(), T::zero());
            }
            for r2 in 0..2 * n_m {
                let row = retained_row_to_full(r2, n_m, nxp);
                let mrow = (nxp - row) % nxp;
                buf[mrow] = coeffs[[r2, cm]].conj();
            }
            ifft_inplace(&mut buf);
            for i in 0..nxp {
                col_work[[i, n_m - 1 + cm]] = buf[i];
            }
        }
    }

    // Time-axis inverse per row.
    let mut out = Array2::zeros((nxp, ntp));
    let mut tbuf = vec![Complex::new(T::zero(), T::zero()); ntp];
    for i in 0..nxp {
        for v in tbuf.iter_mut() {
            *v = Complex::new(T::zero(), T::zero());
        }
        for c in 0..n_m {
            tbuf[c] = col_work[[i, c]];
        }
        if mirror {
            for cm in 1..n_m {
                tbuf[ntp - cm] = col_work[[i, n_m - 1 + cm]];
            }
        }
        ifft_inplace(&mut tbuf);
        for j in 0..ntp {
            out[[i, j]] = tbuf[j].re * scale;
        }
    }
    out
}

/// Spectral channel mixing over retained bins:
/// `Y[r, c, o] = sum_i X[r, c, i] * R[r, c, o, i]`.
fn mix_channels<T: FnoScalar>(
    xhat: &RetainedSpectrum<T>,
    layer: &FourierLayer<T>,
) -> RetainedSpectrum<T> {
    let (rows, cols, nw) = xhat.dim();
    let mut out = Array3::zeros((rows, cols, nw));
    for r in 0..rows {
        for c in 0..cols {
            for o in 0..nw {
                let mut acc = Complex::new(T::zero(), T::zero());
                for i in 0..nw {
                    let w = Complex::new(layer.r_re[[r, c, o, i]], layer.r_im[[r, c, o, i]]);
                    acc = acc + xhat[[r, c, i]] * w;
                }
                out[[r, c, o]] = acc;
            }
        }
    }
    out
}

/// Retained forward spectra of every channel of a latent block.
pub(crate) fn latent_retained_fft<T: FnoScalar>(
    v: &Array3<T>,
    n_m: usize,
) -> RetainedSpectrum<T> {
    let nw = v.dim().2;
    let per_channel: Vec<Array2<Complex<T>>> = (0..nw)
        .into_par_iter()
        .map(|c| {
            let channel = v.index_axis(Axis(2), c).to_owned();
            let cols = fft2_cols(&channel, n_m);
            gather_rows(&cols, n_m)
        })
        .collect();
    let mut out = Array3::zeros((2 * n_m, n_m, nw));
    for (c, plane) in per_channel.iter().enumerate() {
        for r in 0..2 * n_m {
            for cc in 0..n_m {
                out[[r, cc, c]] = plane[[r, cc]];
            }
        }
    }
    out
}

/// Apply one spectral convolution to a padded latent block.
///
/// Standalone form of the layer's upper path; truncation keeps the
/// documented retained index set and the inverse enforces a real output.
pub fn spectral_conv<T: FnoScalar>(v: &Array3<T>, layer: &FourierLayer<T>) -> Array3<T> {
    let (nxp, ntp, nw) = v.dim();
    let n_m = layer.r_re.dim().1;
    let xhat = latent_retained_fft(v, n_m);
    let mixed = mix_channels(&xhat, layer);
    let planes: Vec<Array2<T>> = (0..nw)
        .into_par_iter()
        .map(|o| {
            let coeffs = mixed.index_axis(Axis(2), o).to_owned();
            ifft2_scatter(&coeffs, nxp, ntp, true, T::one())
        })
        .collect();
    let mut out = Array3::zeros((nxp, ntp, nw));
    for (o, plane) in planes.iter().enumerate() {
        for i in 0..nxp {
            for j in 0..ntp {
                out[[i, j, o]] = plane[[i, j]];
            }
        }
    }
    out
}

fn pointwise<T: FnoScalar>(v: &Array3<T>, layer: &FourierLayer<T>) -> Array3<T> {
    let (nxp, ntp, nw) = v.dim();
    let flat = v
        .view()
        .into_shape_with_order((nxp * ntp, nw))
        .expect("standard layout");
    let mut out = flat.dot(&layer.w);
    for mut row in out.rows_mut() {
        for (o, val) in row.iter_mut().enumerate() {
            *val = *val + layer.b[o];
        }
    }
    out.into_shape_with_order((nxp, ntp, nw)).expect("shape")
}

fn activate<T: FnoScalar>(s: &Array3<T>, activation: Activation) -> Array3<T> {
    match activation {
        Activation::Gelu => s.mapv(gelu),
        Activation::Identity => s.clone(),
    }
}

fn unpad<T: FnoScalar>(v: &Array3<T>, pad: usize, nx: usize, nt: usize) -> Array3<T> {
    let nw = v.dim().2;
    let mut out = Array3::zeros((nx, nt, nw));
    for x in 0..nx {
        for t in 0..nt {
            for c in 0..nw {
                out[[x, t, c]] = v[[x + pad, t + pad, c]];
            }
        }
    }
    out
}

/// Projection MLP applied pointwise: n_w -> 128 -> 32 -> 1.
fn project<T: FnoScalar>(model: &ModelParams<T>, z: &Array3<T>) -> Array2<T> {
    let (nx, nt, nw) = z.dim();
    let flat = z
        .view()
        .into_shape_with_order((nx * nt, nw))
        .expect("standard layout");
    let mut a1 = flat.dot(&model.q1);
    for mut row in a1.rows_mut() {
        for (o, val) in row.iter_mut().enumerate() {
            *val = *val + model.q1_b[o];
        }
    }
    let h1 = match model.cfg.activation {
        Activation::Gelu => a1.mapv(gelu),
        Activation::Identity => a1,
    };
    let mut a2 = h1.dot(&model.q2);
    for mut row in a2.rows_mut() {
        for (o, val) in row.iter_mut().enumerate() {
            *val = *val + model.q2_b[o];
        }
    }
    let h2 = match model.cfg.activation {
        Activation::Gelu => a2.mapv(gelu),
        Activation::Identity => a2,
    };
    let out_flat = h2.dot(&model.q3);
    let mut out = Array2::zeros((nx, nt));
    for x in 0..nx {
        for t in 0..nt {
            out[[x, t]] = out_flat[x * nt + t] + model.q3_b;
        }
    }
    out
}

/// Run the operator on one measurement (no tape).
pub fn forward<T: FnoScalar>(model: &ModelParams<T>, measurement: &Array2<T>) -> Result<Array2<T>> {
    check_input_shape(model, measurement)?;
    let v = expand(model, measurement);
    let mut h = lift_and_pad(model, &v);
    for layer in &model.layers {
        let spec = spectral_conv(&h, layer);
        let point = pointwise(&h, layer);
        let s = &spec + &point;
        h = activate(&s, model.cfg.activation);
    }
    let z = unpad(&h, model.cfg.pad, model.cfg.out_nx, model.cfg.out_nt);
    Ok(project(model, &z))
}

/// Run the operator and record the activations needed by the reverse pass.
pub fn forward_cached(
    model: &ModelParams<f64>,
    measurement: &Array2<f64>,
) -> Result<(Array2<f64>, ForwardTape)> {
    check_input_shape(model, measurement)?;
    let digest = input_digest(measurement);
    let expanded = expand(model, measurement);
    let mut h = lift_and_pad(model, &expanded);
    let n_m = model.cfg.n_modes;
    let mut layer_inputs = Vec::with_capacity(model.layers.len());
    let mut preacts = Vec::with_capacity(model.layers.len());
    let mut xhats = Vec::with_capacity(model.layers.len());
    for layer in &model.layers {
        let xhat = latent_retained_fft(&h, n_m);
        let mixed = mix_channels(&xhat, layer);
        let (nxp, ntp, nw) = h.dim();
        let planes: Vec<Array2<f64>> = (0..nw)
            .into_par_iter()
            .map(|o| {
                let coeffs = mixed.index_axis(Axis(2), o).to_owned();
                ifft2_scatter(&coeffs, nxp, ntp, true, 1.0)
            })
            .collect();
        let mut spec = Array3::zeros((nxp, ntp, nw));
        for (o, plane) in planes.iter().enumerate() {
            for i in 0..nxp {
                for j in 0..ntp {
                    spec[[i, j, o]] = plane[[i, j]];
                }
            }
        }
        let point = pointwise(&h, layer);
        let s = &spec + &point;
        let next = activate(&s, model.cfg.activation);
        layer_inputs.push(h);
        preacts.push(s);
        xhats.push(xhat);
        h = next;
    }
    let z = unpad(&h, model.cfg.pad, model.cfg.out_nx, model.cfg.out_nt);
    let out = project(model, &z);
    Ok((
        out,
        ForwardTape {
            digest,
            expanded,
            layer_inputs,
            preacts,
            xhats,
            final_latent: z,
        },
    ))
}


