//! Averaged-embedding bag-of-links classifier with one-vs-all logistic
//! outputs.
//!
//! A bag of entity IDs is embedded as the mean of its in-vocabulary rows of
//! the input matrix; each topic has an independent logistic unit over that
//! mean.

mod io;
mod model;
mod train;
mod vocab;

use serde::{Deserialize, Serialize};

pub use io::{load_model, read_model, save_model, write_model, FORMAT_VERSION, MAGIC};
pub use model::{init_model, EncodedBag, Forward, Gradients, Model, Prediction};
pub use train::{train, TrainReport, TrainingExample};
pub use vocab::{build_vocabulary, Vocabulary};

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub dim: usize,
    pub min_count: u32,
    pub epochs: u32,
    pub lr: f32,
    /// Kept for configuration parity; bags are unordered so it has no effect.
    pub window: u32,
    pub threshold: f64,
    pub seed: u64,
    pub workers: usize,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            dim: 50,
            min_count: 20,
            epochs: 2,
            lr: 0.1,
            window: 20,
            threshold: 0.5,
            seed: 1,
            workers: 1,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::InvalidHyperparams(msg.to_owned()));
        if self.dim == 0 || self.dim > u32::MAX as usize {
            return fail("dim must be in 1..=u32::MAX");
        }
        if self.min_count == 0 {
            return fail("min_count must be at least 1");
        }
        if self.epochs == 0 {
            return fail("epochs must be at least 1");
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return fail("lr must be positive");
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return fail("threshold must be in (0, 1)");
        }
        if self.workers == 0 {
            return fail("workers must be at least 1");
        }
        Ok(())
    }
}

/// Logistic function, evaluated without overflow.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)`, evaluated without overflow.
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}
