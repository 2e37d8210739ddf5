//! FFT wrappers and Fourier-multiplier operators.
//!
//! Conventions used across the workspace:
//! - forward transforms are unnormalised, inverse transforms carry `1/n`;
//! - odd-order derivatives zero the (unrepresentable) Nyquist bin, and for
//!   composability the same bin is zeroed for every order;
//! - real fields stay real: multipliers are Hermitian-symmetric and inverse
//!   transforms return the real part.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use ndarray::{Array1, Array2};
use num_complex::Complex;
use rustfft::{Fft, FftNum, FftPlanner};

use crate::grid::Grid;
use crate::{Result, WaveError};

type C64 = Complex<f64>;

pub struct PlanCache<T: FftNum> {
    planner: FftPlanner<T>,
    forward: HashMap<usize, Arc<dyn Fft<T>>>,
    inverse: HashMap<usize, Arc<dyn Fft<T>>>,
}

impl<T: FftNum> PlanCache<T> {
    fn new() -> Self {
        PlanCache {
            planner: FftPlanner::new(),
            forward: HashMap::new(),
            inverse: HashMap::new(),
        }
    }

    fn forward(&mut self, n: usize) -> Arc<dyn Fft<T>> {
        self.forward
            .entry(n)
            .or_insert_with(|| self.planner.plan_fft_forward(n))
            .clone()
    }

    fn inverse(&mut self, n: usize) -> Arc<dyn Fft<T>> {
        self.inverse
            .entry(n)
            .or_insert_with(|| self.planner.plan_fft_inverse(n))
            .clone()
    }
}

thread_local! {
    static PLANS_F64: RefCell<PlanCache<f64>> = RefCell::new(PlanCache::new());
    static PLANS_F32: RefCell<PlanCache<f32>> = RefCell::new(PlanCache::new());
}

/// In-place forward FFT (unnormalised).
pub fn fft_inplace<T: FftScalar>(data: &mut [Complex<T>]) {
    T::with_plans(|cache| cache.forward(data.len()).process(data));
}

/// In-place inverse FFT (normalised by `1/n`).
pub fn ifft_inplace<T: FftScalar>(data: &mut [Complex<T>]) {
    let n = data.len();
    T::with_plans(|cache| cache.inverse(n).process(data));
    let scale = <T as FftScalar>::from_f64(1.0 / n as f64);
    for v in data.iter_mut() {
        *v = *v * scale;
    }
}

/// Scalar types the FFT helpers are instantiated for.
pub trait FftScalar: FftNum + Copy {
    fn with_plans<R>(f: impl FnOnce(&mut PlanCache<Self>) -> R) -> R;
    fn from_f64(v: f64) -> Self;
}

impl FftScalar for f64 {
    fn with_plans<R>(f: impl FnOnce(&mut PlanCache<Self>) -> R) -> R {
        PLANS_F64.with(|c| f(&mut c.borrow_mut()))
    }
    fn from_f64(v: f64) -> Self {
        v
    }
}

impl FftScalar for f32 {
    fn with_plans<R>(f: impl FnOnce(&mut PlanCache<Self>) -> R) -> R {
        PLANS_F32.with(|c| f(&mut c.borrow_mut()))
    }
    fn from_f64(v: f64) -> Self {
        v as f32
    }
}

/// Forward DFT of a real vector (unnormalised).
pub fn fft_real(v: &[f64]) -> Vec<C64> {
    let mut buf: Vec<C64> = v.iter().map(|&x| C64::new(x, 0.0)).collect();
    fft_inplace(&mut buf);
    buf
}

/// Inverse DFT returning the real part.
pub fn ifft_to_real(mut hat: Vec<C64>) -> Vec<f64> {
    ifft_inplace(&mut hat);
    hat.into_iter().map(|c| c.re).collect()
}

/// Apply a Fourier multiplier to a real vector: `ifft(mult * fft(v))`.
pub fn apply_multiplier(v: &[f64], mult: &[C64]) -> Vec<f64> {
    debug_assert_eq!(v.len(), mult.len());
    let mut hat = fft_real(v);
    for (h, m) in hat.iter_mut().zip(mult) {
        *h *= m;
    }
    ifft_to_real(hat)
}

/// Axis selector for space-time fields stored `[space, time]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldAxis {
    Space,
    Time,
}

/// Multiplier `(i k)^order` with the Nyquist bin zeroed for all orders, so
/// that applying order 1 twice equals order 2 exactly.
pub fn derivative_multiplier(freqs: &[f64], order: u32) -> Vec<C64> {
    let n = freqs.len();
    freqs
        .iter()
        .enumerate()
        .map(|(j, &k)| {
            if n % 2 == 0 && j == n / 2 {
                C64::new(0.0, 0.0)
            } else {
                C64::new(0.0, k).powu(order)
            }
        })
        .collect()
}

/// Apply a per-bin multiplier along one axis of a real `[space, time]` field.
pub fn apply_axis_multiplier(field: &Array2<f64>, axis: FieldAxis, mult: &[C64]) -> Array2<f64> {
    let mut out = field.clone();
    match axis {
        FieldAxis::Space => {
            let n = field.nrows();
            debug_assert_eq!(mult.len(), n);
            let mut buf = vec![C64::new(0.0, 0.0); n];
            for j in 0..field.ncols() {
                for i in 0..n {
                    buf[i] = C64::new(field[[i, j]], 0.0);
                }
                fft_inplace(&mut buf);
                for (b, m) in buf.iter_mut().zip(mult) {
                    *b *= m;
                }
                ifft_inplace(&mut buf);
                for i in 0..n {
                    out[[i, j]] = buf[i].re;
                }
            }
        }
        FieldAxis::Time => {
            let n = field.ncols();
            debug_assert_eq!(mult.len(), n);
            let mut buf = vec![C64::new(0.0, 0.0); n];
            for i in 0..field.nrows() {
                for j in 0..n {
                    buf[j] = C64::new(field[[i, j]], 0.0);
                }
                fft_inplace(&mut buf);
                for (b, m) in buf.iter_mut().zip(mult) {
                    *b *= m;
                }
                ifft_inplace(&mut buf);
                for j in 0..n {
                    out[[i, j]] = buf[j].re;
                }
            }
        }
    }
    out
}

/// Spectral derivative of the given order along one axis of a field on `grid`.
pub fn fourier_derivative(
    field: &Array2<f64>,
    grid: &Grid,
    axis: FieldAxis,
    order: u32,
) -> Result<Array2<f64>> {
    if order < 1 {
        return Err(WaveError::invalid("derivative order must be >= 1"));
    }
    if field.dim() != (grid.n_x, grid.n_t) {
        return Err(WaveError::invalid(format!(
            "field shape {:?} does not match grid ({}, {})",
            field.dim(),
            grid.n_x,
            grid.n_t
        )));
    }
    if !field.iter().all(|v| v.is_finite()) {
        return Err(WaveError::NonFinite("fourier_derivative input".into()));
    }
    let mult = match axis {
        FieldAxis::Space => derivative_multiplier(&grid.wavenumbers, order),
        FieldAxis::Time => derivative_multiplier(&grid.frequencies, order),
    };
    Ok(apply_axis_multiplier(field, axis, &mult))
}

/// Spectral derivative of a single spatial column.
pub fn vector_derivative(v: &[f64], wavenumbers: &[f64], order: u32) -> Vec<f64> {
    apply_multiplier(v, &derivative_multiplier(wavenumbers, order))
}

/// Pairwise product with zero-padding dealiasing.
///
/// Spectra are zero-padded by `pad_factor = (m + 1)/2` before multiplying in
/// physical space, which removes aliasing of products of up to `m` fields
/// that are formed pairwise. The Nyquist bin is dropped when padding so the
/// operator maps real fields to real fields.
#[derive(Debug, Clone)]
pub struct DealiasedProduct {
    n: usize,
    n_pad: usize,
}

impl DealiasedProduct {
    pub fn new(n: usize, order: usize) -> Self {
        let n_pad = (n * (order + 1)).div_ceil(2).max(n);
        DealiasedProduct { n, n_pad }
    }

    /// Plain (aliased) product fallback for `dealias = false` paths.
    pub fn disabled(n: usize) -> Self {
        DealiasedProduct { n, n_pad: n }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn padded_len(&self) -> usize {
        self.n_pad
    }

    /// Interpolate onto the padded grid (scaled so values are preserved).
    fn extend(&self, v: &[f64]) -> Vec<f64> {
        if self.n_pad == self.n {
            return v.to_vec();
        }
        let hat = fft_real(v);
        let mut padded = vec![C64::new(0.0, 0.0); self.n_pad];
        let h = (self.n - 1) / 2; // highest strictly positive non-Nyquist bin
        let scale = self.n_pad as f64 / self.n as f64;
        padded[0] = hat[0] * scale;
        for j in 1..=h {
            padded[j] = hat[j] * scale;
            padded[self.n_pad - j] = hat[self.n - j] * scale;
        }
        ifft_to_real(padded)
    }

    /// Truncate a padded-grid field back to `n` points.
    fn restrict(&self, v_pad: &[f64]) -> Vec<f64> {
        if self.n_pad == self.n {
            return v_pad.to_vec();
        }
        let hat = fft_real(v_pad);
        let mut out = vec![C64::new(0.0, 0.0); self.n];
        let h = (self.n - 1) / 2;
        let scale = self.n as f64 / self.n_pad as f64;
        out[0] = hat[0] * scale;
        for j in 1..=h {
            out[j] = hat[j] * scale;
            out[self.n - j] = hat[self.n_pad - j] * scale;
        }
        ifft_to_real(out)
    }

    /// Dealiased pointwise product of two real fields.
    ///
    /// The operator is bilinear and satisfies the adjoint identity
    /// `<g, mul(a, b)> = <a, mul(g, b)>`, which the reverse-mode passes rely
    /// on.
    pub fn multiply(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        debug_assert_eq!(a.len(), self.n);
        debug_assert_eq!(b.len(), self.n);
        if self.n_pad == self.n {
            return a.iter().zip(b).map(|(x, y)| x * y).collect();
        }
        let ea = self.extend(a);
        let eb = self.extend(b);
        let prod: Vec<f64> = ea.iter().zip(&eb).map(|(x, y)| x * y).collect();
        self.restrict(&prod)
    }
}

/// Unnormalised 2D forward FFT of a real field.
pub fn fft2(field: &Array2<f64>) -> Array2<C64> {
    let (nr, nc) = field.dim();
    let mut hat = Array2::from_shape_fn((nr, nc), |(i, j)| C64::new(field[[i, j]], 0.0));
    fft2_complex_inplace(&mut hat);
    hat
}

/// In-place unnormalised 2D forward FFT (rows then columns).
pub fn fft2_complex_inplace(hat: &mut Array2<C64>) {
    let (nr, nc) = hat.dim();
    let mut buf = vec![C64::new(0.0, 0.0); nc];
    for i in 0..nr {
        for j in 0..nc {
            buf[j] = hat[[i, j]];
        }
        fft_inplace(&mut buf);
        for j in 0..nc {
            hat[[i, j]] = buf[j];
        }
    }
    let mut buf = vec![C64::new(0.0, 0.0); nr];
    for j in 0..nc {
        for i in 0..nr {
            buf[i] = hat[[i, j]];
        }
        fft_inplace(&mut buf);
        for i in 0..nr {
            hat[[i, j]] = buf[i];
        }
    }
}

/// Normalised 2D inverse FFT, returning the real part.
pub fn ifft2_real(hat: &Array2<C64>) -> Array2<f64> {
    let (nr, nc) = hat.dim();
    let mut work = hat.clone();
    let mut buf = vec![C64::new(0.0, 0.0); nr];
    for j in 0..nc {
        for i in 0..nr {
            buf[i] = work[[i, j]];
        }
        ifft_inplace(&mut buf);
        for i in 0..nr {
            work[[i, j]] = buf[i];
        }
    }
    let mut out = Array2::zeros((nr, nc));
    let mut buf = vec![C64::new(0.0, 0.0); nc];
    for i in 0..nr {
        for j in 0..nc {
            buf[j] = work[[i, j]];
        }
        ifft_inplace(&mut buf);
        for j in 0..nc {
            out[[i, j]] = buf[j].re;
        }
    }
    out
}

/// Apply a Hermitian-symmetric 2D multiplier `mult[i][j]` to a real field.
pub fn apply_2d_multiplier(field: &Array2<f64>, mult: &Array2<C64>) -> Array2<f64> {
    let mut hat = fft2(field);
    hat.zip_mut_with(mult, |h, m| *h *= m);
    ifft2_real(&hat)
}

/// Energy of a 1D signal and of its DFT, for Parseval checks.
pub fn parseval_pair(v: &[f64]) -> (f64, f64) {
    let sig: f64 = v.iter().map(|x| x * x).sum();
    let hat = fft_real(v);
    let spec: f64 = hat.iter().map(|c| c.norm_sqr()).sum::<f64>() / v.len() as f64;
    (sig, spec)
}

/// Convenience constructor for 1D column vectors from slices.
pub fn to_array1(v: Vec<f64>) -> Array1<f64> {
    Array1::from_vec(v)
}
