use serde::{Deserialize, Serialize};

use crate::textprep::SparseVector;

use super::{Dataset, ModelError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MnbConfig {
    pub alpha: f64,
}

impl Default for MnbConfig {
    fn default() -> Self {
        Self { alpha: 1.0 }
    }
}

/// Multinomial naive Bayes with additive smoothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MnbParams {
    pub alpha: f64,
    pub log_priors: Vec<f64>,
    /// Row-major `n_classes x dim`.
    pub log_likelihoods: Vec<f64>,
    pub dim: usize,
}

pub fn train_mnb(ds: &Dataset, cfg: &MnbConfig) -> Result<MnbParams, ModelError> {
    if !(cfg.alpha > 0.0 && cfg.alpha.is_finite()) {
        return Err(ModelError::InvalidHyperparameter(format!(
            "alpha must be positive, got {}",
            cfg.alpha
        )));
    }
    let (c, d) = (ds.n_classes(), ds.dim());
    let mut counts = vec![0.0; c * d];
    for (row, (x, &y)) in ds.x().iter().zip(ds.y()).enumerate() {
        for (i, v) in x.iter() {
            if v < 0.0 {
                return Err(ModelError::NegativeFeature { row, index: i });
            }
            counts[y * d + i] += v;
        }
    }
    let n = ds.len() as f64;
    let log_priors = ds.class_counts().iter().map(|&nc| (nc as f64 / n).ln()).collect();
    let mut log_likelihoods = vec![0.0; c * d];
    for k in 0..c {
        let row = &counts[k * d..(k + 1) * d];
        let total: f64 = row.iter().sum();
        let denom = (total + cfg.alpha * d as f64).ln();
        for (t, &cnt) in row.iter().enumerate() {
            log_likelihoods[k * d + t] = (cnt + cfg.alpha).ln() - denom;
        }
    }
    Ok(MnbParams {
        alpha: cfg.alpha,
        log_priors,
        log_likelihoods,
        dim: d,
    })
}

impl MnbParams {
    pub fn n_classes(&self) -> usize {
        self.log_priors.len()
    }

    /// Unnormalized log posteriors.
    pub fn joint_log_likelihood(&self, x: &SparseVector) -> Vec<f64> {
        let d = self.dim;
        self.log_priors
            .iter()
            .enumerate()
            .map(|(k, lp)| lp + x.dot_dense(&self.log_likelihoods[k * d..(k + 1) * d]))
            .collect()
    }

    pub fn predict_proba(&self, x: &SparseVector) -> Vec<f64> {
        super::softmax(&self.joint_log_likelihood(x))
    }
}
