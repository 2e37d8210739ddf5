//! Parameter storage, seeded initialization and parameter counting.

use ndarray::{Array1, Array2, Array4};
use num_complex::Complex;
use rand::distributions::Uniform;
use rand::prelude::*;
use rand_chacha::ChaCha20Rng;
use wavecore::spectral::FftScalar;

use crate::{ArchConfig, Result, Q_HIDDEN_1, Q_HIDDEN_2};

/// Scalar types the operator is instantiated for.
pub trait FnoScalar:
    FftScalar + ndarray::LinalgScalar + num_traits::Float + Send + Sync + std::fmt::Debug
{
    fn erf(self) -> Self;
    fn from_f64s(v: f64) -> Self;
}

impl FnoScalar for f64 {
    fn erf(self) -> Self {
        libm::erf(self)
    }
    fn from_f64s(v: f64) -> Self {
        v
    }
}

impl FnoScalar for f32 {
    fn erf(self) -> Self {
        libm::erff(self)
    }
    fn from_f64s(v: f64) -> Self {
        v as f32
    }
}

/// One Fourier layer: complex spectral mixing weights over retained modes
/// (stored as separate real and imaginary tensors, laid out
/// `[2 n_m, n_m, out, in]`) plus the pointwise linear path.
#[derive(Debug, Clone)]
pub struct FourierLayer<T> {
    pub r_re: Array4<T>,
    pub r_im: Array4<T>,
    /// Pointwise weights `[in, out]`.
    pub w: Array2<T>,
    pub b: Array1<T>,
}

/// Full parameter set of the operator.
#[derive(Debug, Clone)]
pub struct ModelParams<T> {
    pub cfg: ArchConfig,
    /// Dense lift over the sparse axis `[d_in, d_out]`.
    pub lift_i: Array2<T>,
    pub lift_i_b: Array1<T>,
    /// Channel lift 1 -> n_w.
    pub lift_p: Array1<T>,
    pub lift_p_b: Array1<T>,
    pub layers: Vec<FourierLayer<T>>,
    /// Projection MLP n_w -> 128 -> 32 -> 1.
    pub q1: Array2<T>,
    pub q1_b: Array1<T>,
    pub q2: Array2<T>,
    pub q2_b: Array1<T>,
    pub q3: Array1<T>,
    pub q3_b: T,
}

/// The double-precision model used for training and gradient checks.
pub type OperatorModel = ModelParams<f64>;

impl<T: FnoScalar> ModelParams<T> {
    /// All-zero parameters (also the shape template for gradients).
    pub fn zeros(cfg: &ArchConfig) -> Result<Self> {
        cfg.validate()?;
        let (d_in, d_out) = cfg.lift_dims();
        let nm = cfg.n_modes;
        let nw = cfg.n_width;
        let layers = (0..cfg.n_fourier)
            .map(|_| FourierLayer {
                r_re: Array4::zeros((2 * nm, nm, nw, nw)),
                r_im: Array4::zeros((2 * nm, nm, nw, nw)),
                w: Array2::zeros((nw, nw)),
                b: Array1::zeros(nw),
            })
            .collect();
        Ok(ModelParams {
            cfg: *cfg,
            lift_i: Array2::zeros((d_in, d_out)),
            lift_i_b: Array1::zeros(d_out),
            lift_p: Array1::zeros(nw),
            lift_p_b: Array1::zeros(nw),
            layers,
            q1: Array2::zeros((nw, Q_HIDDEN_1)),
            q1_b: Array1::zeros(Q_HIDDEN_1),
            q2: Array2::zeros((Q_HIDDEN_1, Q_HIDDEN_2)),
            q2_b: Array1::zeros(Q_HIDDEN_2),
            q3: Array1::zeros(Q_HIDDEN_2),
            q3_b: T::zero(),
        })
    }

    /// Number of stored real parameters; equals
    /// [`ArchConfig::parameter_count`].
    pub fn parameter_count(&self) -> u64 {
        self.param_slices().iter().map(|s| s.len() as u64).sum()
    }

    /// Immutable views of every parameter tensor in a fixed order.
    pub fn param_slices(&self) -> Vec<&[T]> {
        let mut out: Vec<&[T]> = vec![
            self.lift_i.as_slice().expect("standard layout"),
            self.lift_i_b.as_slice().expect("standard layout"),
            self.lift_p.as_slice().expect("standard layout"),
            self.lift_p_b.as_slice().expect("standard layout"),
        ];
        for layer in &self.layers {
            out.push(layer.r_re.as_slice().expect("standard layout"));
            out.push(layer.r_im.as_slice().expect("standard layout"));
            out.push(layer.w.as_slice().expect("standard layout"));
            out.push(layer.b.as_slice().expect("standard layout"));
        }
        out.push(self.q1.as_slice().expect("standard layout"));
        out.push(self.q1_b.as_slice().expect("standard layout"));
        out.push(self.q2.as_slice().expect("standard layout"));
        out.push(self.q2_b.as_slice().expect("standard layout"));
        out.push(self.q3.as_slice().expect("standard layout"));
        out.push(std::slice::from_ref(&self.q3_b));
        out
    }

    /// Mutable views, same order as [`Self::param_slices`].
    pub fn param_slices_mut(&mut self) -> Vec<&mut [T]> {
        let mut out: Vec<&mut [T]> = Vec::new();
        out.push(self.lift_i.as_slice_mut().expect("standard layout"));
        out.push(self.lift_i_b.as_slice_mut().expect("standard layout"));
        out.push(self.lift_p.as_slice_mut().expect("standard layout"));
        out.push(self.lift_p_b.as_slice_mut().expect("standard layout"));
        for layer in &mut self.layers {
            out.push(layer.r_re.as_slice_mut().expect("standard layout"));
            out.push(layer.r_im.as_slice_mut().expect("standard layout"));
            out.push(layer.w.as_slice_mut().expect("standard layout"));
            out.push(layer.b.as_slice_mut().expect("standard layout"));
        }
        out.push(self.q1.as_slice_mut().expect("standard layout"));
        out.push(self.q1_b.as_slice_mut().expect("standard layout"));
        out.push(self.q2.as_slice_mut().expect("standard layout"));
        out.push(self.q2_b.as_slice_mut().expect("standard layout"));
        out.push(self.q3.as_slice_mut().expect("standard layout"));
        out.push(std::slice::from_mut(&mut self.q3_b));
        out
    }

    /// Names of the parameter groups, aligned with the slice order.
    pub fn param_names(&self) -> Vec<String> {
        let mut names = vec![
            "lift_i".to_string(),
            "lift_i_bias".to_string(),
            "lift_p".to_string(),
            "lift_p_bias".to_string(),
        ];
        for i in 0..self.layers.len() {
            names.push(format!("layer{i}_r_re"));
            names.push(format!("layer{i}_r_im"));
            names.push(format!("layer{i}_w"));
            names.push(format!("layer{i}_bias"));
        }
        names.extend(
            ["q1", "q1_bias", "q2", "q2_bias", "q3", "q3_bias"]
                .iter()
                .map(|s| s.to_string()),
        );
        names
    }
}

impl OperatorModel {
    /// Cast to single precision for fast inference.
    pub fn to_f32(&self) -> ModelParams<f32> {
        ModelParams {
            cfg: self.cfg,
            lift_i: self.lift_i.mapv(|v| v as f32),
            lift_i_b: self.lift_i_b.mapv(|v| v as f32),
            lift_p: self.lift_p.mapv(|v| v as f32),
            lift_p_b: self.lift_p_b.mapv(|v| v as f32),
            layers: self
                .layers
                .iter()
                .map(|l| FourierLayer {
                    r_re: l.r_re.mapv(|v| v as f32),
                    r_im: l.r_im.mapv(|v| v as f32),
                    w: l.w.mapv(|v| v as f32),
                    b: l.b.mapv(|v| v as f32),
                })
                .collect(),
            q1: self.q1.mapv(|v| v as f32),
            q1_b: self.q1_b.mapv(|v| v as f32),
            q2: self.q2.mapv(|v| v as f32),
            q2_b: self.q2_b.mapv(|v| v as f32),
            q3: self.q3.mapv(|v| v as f32),
            q3_b: self.q3_b as f32,
        }
    }
}

/// Deterministic seeded initialization: spectral weights uniform with
/// magnitude 1/n_w^2, dense paths uniform with fan-in scaling.
pub fn init_parameters(cfg: &ArchConfig, seed: u64) -> Result<OperatorModel> {
    let mut model = ModelParams::<f64>::zeros(cfg)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);

    let fill_uniform = |slice: &mut [f64], bound: f64, rng: &mut ChaCha20Rng| {
        let dist = Uniform::new_inclusive(-bound, bound);
        for v in slice.iter_mut() {
            *v = rng.sample(dist);
        }
    };

    let (d_in, _) = cfg.lift_dims();
    let lift_bound = 1.0 / (d_in as f64).sqrt();
    fill_uniform(model.lift_i.as_slice_mut().unwrap(), lift_bound, &mut rng);
    fill_uniform(model.lift_i_b.as_slice_mut().unwrap(), lift_bound, &mut rng);
    fill_uniform(model.lift_p.as_slice_mut().unwrap(), 1.0, &mut rng);
    fill_uniform(model.lift_p_b.as_slice_mut().unwrap(), 1.0, &mut rng);

    let nw = cfg.n_width;
    let spectral_bound = 1.0 / (nw * nw) as f64;
    let point_bound = 1.0 / (nw as f64).sqrt();
    for layer in &mut model.layers {
        fill_uniform(layer.r_re.as_slice_mut().unwrap(), spectral_bound, &mut rng);
        fill_uniform(layer.r_im.as_slice_mut().unwrap(), spectral_bound, &mut rng);
        fill_uniform(layer.w.as_slice_mut().unwrap(), point_bound, &mut rng);
        fill_uniform(layer.b.as_slice_mut().unwrap(), point_bound, &mut rng);
    }

    let q1_bound = 1.0 / (nw as f64).sqrt();
    fill_uniform(model.q1.as_slice_mut().unwrap(), q1_bound, &mut rng);
    fill_uniform(model.q1_b.as_slice_mut().unwrap(), q1_bound, &mut rng);
    let q2_bound = 1.0 / (Q_HIDDEN_1 as f64).sqrt();
    fill_uniform(model.q2.as_slice_mut().unwrap(), q2_bound, &mut rng);
    fill_uniform(model.q2_b.as_slice_mut().unwrap(), q2_bound, &mut rng);
    let q3_bound = 1.0 / (Q_HIDDEN_2 as f64).sqrt();
    fill_uniform(model.q3.as_slice_mut().unwrap(), q3_bound, &mut rng);
    model.q3_b = rng.sample(Uniform::new_inclusive(-q3_bound, q3_bound));

    Ok(model)
}

/// Exact GeLU: x * Phi(x) with the Gaussian CDF.
pub fn gelu<T: FnoScalar>(x: T) -> T {
    let half = T::from_f64s(0.5);
    let inv_sqrt2 = T::from_f64s(std::f64::consts::FRAC_1_SQRT_2);
    half * x * (T::one() + (x * inv_sqrt2).erf())
}

/// Derivative of the exact GeLU: Phi(x) + x phi(x).
pub fn gelu_prime(x: f64) -> f64 {
    let phi_cdf = 0.5 * (1.0 + libm::erf(x * std::f64::consts::FRAC_1_SQRT_2));
    let phi_pdf = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    phi_cdf + x * phi_pdf
}

/// Complex helper reused by forward/backward.
pub type CplxT<T> = Complex<T>;
