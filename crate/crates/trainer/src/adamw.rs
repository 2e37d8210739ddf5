//! Adam with decoupled weight decay.

use pino::{Gradients, OperatorModel};

/// Moment state aligned with the model's parameter-slice order.
pub struct AdamW {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: u64,
}

impl AdamW {
    pub fn new(model: &OperatorModel, weight_decay: f64) -> Self {
        let shapes: Vec<usize> = model.param_slices().iter().map(|s| s.len()).collect();
        AdamW {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay,
            m: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            v: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            t: 0,
        }
    }

    /// One update: `theta <- theta - lr m_hat / (sqrt(v_hat) + eps)
    /// - lr wd theta` (decay decoupled from the adaptive step).
    pub fn step(&mut self, model: &mut OperatorModel, grads: &Gradients, lr: f64) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        let mut params = model.param_slices_mut();
        let gslices = grads.param_slices();
        for (gi, (p, g)) in params.iter_mut().zip(gslices.iter()).enumerate() {
            let m = &mut self.m[gi];
            let v = &mut self.v[gi];
            for i in 0..p.len() {
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g[i];
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g[i] * g[i];
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                p[i] -= lr * (m_hat / (v_hat.sqrt() + self.eps) + self.weight_decay * p[i]);
            }
        }
    }
}
