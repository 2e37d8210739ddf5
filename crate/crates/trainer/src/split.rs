//! Deterministic dataset splitting.

use rand::prelude::*;
use rand_chacha::ChaCha20Rng;

use crate::{Result, TrainError};

/// Persistable index sets; applying the same split to the sensor samples
/// and the reference fields keeps them aligned.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

impl SplitIndices {
    pub fn label_of(&self, index: usize) -> Option<&'static str> {
        if self.train.contains(&index) {
            Some("train")
        } else if self.val.contains(&index) {
            Some("val")
        } else if self.test.contains(&index) {
            Some("test")
        } else {
            None
        }
    }
}

/// Seeded shuffle split with rounded ratio boundaries.
pub fn split_dataset(n: usize, ratios: (f64, f64, f64), seed: u64) -> Result<SplitIndices> {
    if n == 0 {
        return Err(TrainError::InvalidArgument("empty dataset".into()));
    }
    let (r_train, r_val, r_test) = ratios;
    if r_train < 0.0 || r_val < 0.0 || r_test < 0.0 {
        return Err(TrainError::InvalidArgument("negative split ratio".into()));
    }
    if (r_train + r_val + r_test - 1.0).abs() > 1e-9 {
        return Err(TrainError::InvalidArgument(format!(
            "split ratios must sum to 1, got {}",
            r_train + r_val + r_test
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let n_train = (r_train * n as f64).round() as usize;
    let n_val = ((r_val * n as f64).round() as usize).min(n - n_train);
    let train = order[..n_train].to_vec();
    let val = order[n_train..n_train + n_val].to_vec();
    let test = order[n_train + n_val..].to_vec();
    Ok(SplitIndices { train, val, test })
}
