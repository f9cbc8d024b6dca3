//! Linear classifiers over sparse features: multinomial logistic regression
//! and two one-vs-rest hinge-loss learners.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::textprep::SparseVector;

use super::{softmax, Dataset, ModelError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearKind {
    Logreg,
    SvmPegasos,
    SgdHinge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearningRateSchedule {
    Constant,
    /// `lr / (1 + lr * lambda * t)`
    InvT,
}

impl std::str::FromStr for LearningRateSchedule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "constant" => Ok(Self::Constant),
            "inv_t" => Ok(Self::InvT),
            other => Err(format!("unknown schedule '{other}' (expected constant or inv_t)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearParams {
    pub kind: LinearKind,
    /// Row-major `n_classes x dim`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub dim: usize,
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl LinearParams {
    pub fn zeros(kind: LinearKind, n_classes: usize, dim: usize, lambda: f64) -> Self {
        Self {
            kind,
            weights: vec![0.0; n_classes * dim],
            bias: vec![0.0; n_classes],
            dim,
            lambda,
            epochs: 0,
            seed: 0,
        }
    }

    pub fn n_classes(&self) -> usize {
        self.bias.len()
    }

    pub fn row(&self, class: usize) -> &[f64] {
        &self.weights[class * self.dim..(class + 1) * self.dim]
    }

    /// `W x + b` per class.
    pub fn decision(&self, x: &SparseVector) -> Vec<f64> {
        (0..self.n_classes())
            .map(|k| x.dot_dense(self.row(k)) + self.bias[k])
            .collect()
    }

    pub fn weight_norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    /// Weights followed by biases.
    pub fn flat(&self) -> Vec<f64> {
        let mut v = self.weights.clone();
        v.extend_from_slice(&self.bias);
        v
    }

    pub fn set_flat(&mut self, flat: &[f64]) {
        assert_eq!(
            flat.len(),
            self.weights.len() + self.bias.len(),
            "flat parameter length"
        );
        let (w, b) = flat.split_at(self.weights.len());
        self.weights.copy_from_slice(w);
        self.bias.copy_from_slice(b);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogRegConfig {
    pub lambda: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    /// `None` trains on the full batch each step.
    pub batch_size: Option<usize>,
    pub seed: u64,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        Self {
            lambda: 1e-3,
            learning_rate: 0.1,
            epochs: 200,
            batch_size: None,
            seed: 0,
        }
    }
}

fn check_common(lambda: f64, epochs: usize) -> Result<(), ModelError> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(ModelError::InvalidHyperparameter(format!(
            "lambda must be non-negative, got {lambda}"
        )));
    }
    if epochs == 0 {
        return Err(ModelError::InvalidHyperparameter("epochs must be at least 1".into()));
    }
    Ok(())
}

/// Mean softmax cross-entropy plus `lambda/2 * ||W||^2` (bias unpenalized).
pub fn logreg_loss(params: &LinearParams, x: &[SparseVector], y: &[usize]) -> f64 {
    let data: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, &yi)| {
            let z = params.decision(xi);
            log_sum_exp(&z) - z[yi]
        })
        .sum();
    let data = if x.is_empty() { 0.0 } else { data / x.len() as f64 };
    data + 0.5 * params.lambda * params.weights.iter().map(|w| w * w).sum::<f64>()
}

/// Analytic gradient of [`logreg_loss`], laid out like [`LinearParams::flat`].
pub fn logreg_gradient(params: &LinearParams, x: &[SparseVector], y: &[usize]) -> Vec<f64> {
    let mut grad = data_gradient(params, x, y);
    for (g, w) in grad.iter_mut().zip(&params.weights) {
        *g += params.lambda * w;
    }
    grad
}

fn data_gradient(params: &LinearParams, x: &[SparseVector], y: &[usize]) -> Vec<f64> {
    let (c, d) = (params.n_classes(), params.dim);
    let mut grad = vec![0.0; c * d + c];
    if x.is_empty() {
        return grad;
    }
    let inv_n = 1.0 / x.len() as f64;
    for (xi, &yi) in x.iter().zip(y) {
        let p = softmax(&params.decision(xi));
        for k in 0..c {
            let r = (p[k] - if k == yi { 1.0 } else { 0.0 }) * inv_n;
            if r == 0.0 {
                continue;
            }
            for (j, v) in xi.iter() {
                grad[k * d + j] += r * v;
            }
            grad[c * d + k] += r;
        }
    }
    grad
}

fn log_sum_exp(z: &[f64]) -> f64 {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

pub fn train_logreg(ds: &Dataset, cfg: &LogRegConfig) -> Result<LinearParams, ModelError> {
    train_logreg_with_history(ds, cfg).map(|(p, _)| p)
}

/// Gradient descent from zero weights. The L2 term is applied as a
/// proximal shrink `W <- (W - lr * g) / (1 + lr * lambda)`, which is stable
/// for any `lambda`. Returns the training loss after every epoch.
pub fn train_logreg_with_history(ds: &Dataset, cfg: &LogRegConfig) -> Result<(LinearParams, Vec<f64>), ModelError> {
    check_common(cfg.lambda, cfg.epochs)?;
    if !(cfg.learning_rate > 0.0 && cfg.learning_rate.is_finite()) {
        return Err(ModelError::InvalidHyperparameter(format!(
            "learning rate must be positive, got {}",
            cfg.learning_rate
        )));
    }
    let n = ds.len();
    let batch = cfg.batch_size.unwrap_or(n).clamp(1, n);
    let mut params = LinearParams::zeros(LinearKind::Logreg, ds.n_classes(), ds.dim(), cfg.lambda);
    params.epochs = cfg.epochs;
    params.seed = cfg.seed;
    let (c, d) = (ds.n_classes(), ds.dim());
    let lr = cfg.learning_rate;
    let shrink = 1.0 / (1.0 + lr * cfg.lambda);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut bx = Vec::with_capacity(batch);
    let mut by = Vec::with_capacity(batch);
    for epoch in 1..=cfg.epochs {
        if batch < n {
            order.shuffle(&mut rng);
        }
        for chunk in order.chunks(batch) {
            bx.clear();
            by.clear();
            bx.extend(chunk.iter().map(|&i| ds.x()[i].clone()));
            by.extend(chunk.iter().map(|&i| ds.y()[i]));
            let g = data_gradient(&params, &bx, &by);
            for (w, gw) in params.weights.iter_mut().zip(&g[..c * d]) {
                *w = (*w - lr * gw) * shrink;
            }
            for (b, gb) in params.bias.iter_mut().zip(&g[c * d..]) {
                *b -= lr * gb;
            }
        }
        let loss = logreg_loss(&params, ds.x(), ds.y());
        if !loss.is_finite() {
            return Err(ModelError::NonFiniteLoss {
                epoch,
                last_good_epoch: epoch - 1,
            });
        }
        history.push(loss);
    }
    Ok((params, history))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            lambda: 1e-3,
            epochs: 50,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SgdConfig {
    pub lambda: f64,
    pub learning_rate: f64,
    pub schedule: LearningRateSchedule,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SgdConfig {
    fn default() -> Self {
        Self {
            lambda: 1e-3,
            learning_rate: 0.1,
            schedule: LearningRateSchedule::InvT,
            epochs: 50,
            seed: 0,
        }
    }
}

/// One-vs-rest Pegasos: step `1 / (lambda * t)`, prediction from the
/// average of the iterates over the second half of all steps.
pub fn train_linear_svm(ds: &Dataset, cfg: &SvmConfig) -> Result<LinearParams, ModelError> {
    check_common(cfg.lambda, cfg.epochs)?;
    if cfg.lambda <= 0.0 {
        return Err(ModelError::InvalidHyperparameter("Pegasos needs lambda > 0".into()));
    }
    let lambda = cfg.lambda;
    train_ovr_hinge(
        ds,
        LinearKind::SvmPegasos,
        lambda,
        cfg.epochs,
        cfg.seed,
        |t| 1.0 / (lambda * t as f64),
        HingeVariant {
            averaging: true,
            radius: Some(1.0 / lambda.sqrt()),
        },
    )
}

/// One-vs-rest hinge-loss SGD with the configured step schedule and no
/// averaging.
pub fn train_sgd_hinge(ds: &Dataset, cfg: &SgdConfig) -> Result<LinearParams, ModelError> {
    check_common(cfg.lambda, cfg.epochs)?;
    if !(cfg.learning_rate > 0.0 && cfg.learning_rate.is_finite()) {
        return Err(ModelError::InvalidHyperparameter(format!(
            "learning rate must be positive, got {}",
            cfg.learning_rate
        )));
    }
    let (lr, lambda) = (cfg.learning_rate, cfg.lambda);
    let schedule = cfg.schedule;
    train_ovr_hinge(
        ds,
        LinearKind::SgdHinge,
        lambda,
        cfg.epochs,
        cfg.seed,
        move |t| match schedule {
            LearningRateSchedule::Constant => lr,
            LearningRateSchedule::InvT => lr / (1.0 + lr * lambda * t as f64),
        },
        HingeVariant {
            averaging: false,
            radius: None,
        },
    )
}

/// Per-class regularized hinge objective `lambda/2 * (||w||^2 + b^2) +
/// mean(max(0, 1 - y (w.x + b)))`, the quantity the hinge learners minimize
/// (the bias is trained as a regularized constant feature).
pub fn hinge_objective(params: &LinearParams, ds: &Dataset) -> Vec<f64> {
    (0..params.n_classes())
        .map(|k| {
            let reg = params.row(k).iter().map(|w| w * w).sum::<f64>() + params.bias[k].powi(2);
            let loss: f64 = ds
                .x()
                .iter()
                .zip(ds.y())
                .map(|(x, &y)| {
                    let sign = if y == k { 1.0 } else { -1.0 };
                    (1.0 - sign * (x.dot_dense(params.row(k)) + params.bias[k])).max(0.0)
                })
                .sum();
            0.5 * params.lambda * reg + loss / ds.len() as f64
        })
        .collect()
}

/// Weight vector stored as `scale * v` so the L2 shrink is O(1). The last
/// slot of `v` is the bias. When averaging, the running sum of iterates is
/// `sum_p + sum_q * v`, updated sparsely alongside `v`.
struct ScaledWeights {
    v: Vec<f64>,
    scale: f64,
    /// `||v||^2`, so the norm of the weights is `scale * sqrt(sq_norm)`.
    sq_norm: f64,
    sum_p: Vec<f64>,
    sum_q: f64,
}

impl ScaledWeights {
    fn new(len: usize, averaging: bool) -> Self {
        Self {
            v: vec![0.0; len],
            scale: 1.0,
            sq_norm: 0.0,
            sum_p: if averaging { vec![0.0; len] } else { Vec::new() },
            sum_q: 0.0,
        }
    }

    fn margin(&self, x: &SparseVector) -> f64 {
        let bias = self.v.len() - 1;
        self.scale * (x.dot_dense(&self.v[..bias]) + self.v[bias])
    }

    fn shrink(&mut self, factor: f64) {
        if factor <= 0.0 {
            if !self.sum_p.is_empty() && self.sum_q != 0.0 {
                for (p, v) in self.sum_p.iter_mut().zip(&self.v) {
                    *p += self.sum_q * v;
                }
                self.sum_q = 0.0;
            }
            self.v.iter_mut().for_each(|v| *v = 0.0);
            self.scale = 1.0;
            self.sq_norm = 0.0;
            return;
        }
        self.scale *= factor;
        if self.scale < 1e-9 {
            for v in &mut self.v {
                *v *= self.scale;
            }
            self.sum_q /= self.scale;
            self.scale = 1.0;
            self.sq_norm = self.v.iter().map(|v| v * v).sum();
        }
    }

    /// Scales the weights back onto the ball of radius `radius`.
    fn project(&mut self, radius: f64) {
        let norm = self.scale * self.sq_norm.sqrt();
        if norm > radius {
            self.shrink(radius / norm);
        }
    }

    fn add(&mut self, x: &SparseVector, coef: f64) {
        let c = coef / self.scale;
        let bias = self.v.len() - 1;
        let averaging = !self.sum_p.is_empty();
        let dot = x.dot_dense(&self.v[..bias]) + self.v[bias];
        let x_sq = x.iter().map(|(_, v)| v * v).sum::<f64>() + 1.0;
        self.sq_norm = (self.sq_norm + 2.0 * c * dot + c * c * x_sq).max(0.0);
        for (i, xv) in x.iter() {
            let delta = c * xv;
            self.v[i] += delta;
            if averaging {
                self.sum_p[i] -= self.sum_q * delta;
            }
        }
        self.v[bias] += c;
        if averaging {
            self.sum_p[bias] -= self.sum_q * c;
        }
    }

    fn accumulate(&mut self) {
        self.sum_q += self.scale;
    }

    fn current(&self) -> Vec<f64> {
        self.v.iter().map(|v| v * self.scale).collect()
    }

    fn average(&self, steps: usize) -> Vec<f64> {
        self.sum_p
            .iter()
            .zip(&self.v)
            .map(|(p, v)| (p + self.sum_q * v) / steps as f64)
            .collect()
    }
}

/// Pegasos averages the second half of the iterates and projects onto the
/// ball of radius `1/sqrt(lambda)`; plain SGD does neither.
struct HingeVariant {
    averaging: bool,
    radius: Option<f64>,
}

fn train_ovr_hinge(
    ds: &Dataset,
    kind: LinearKind,
    lambda: f64,
    epochs: usize,
    seed: u64,
    step: impl Fn(usize) -> f64,
    variant: HingeVariant,
) -> Result<LinearParams, ModelError> {
    let HingeVariant { averaging, radius } = variant;
    let (n, c, d) = (ds.len(), ds.n_classes(), ds.dim());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut orders = Vec::with_capacity(epochs);
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        orders.push(order.clone());
    }
    let total = epochs * n;
    let avg_start = total / 2;

    let mut params = LinearParams::zeros(kind, c, d, lambda);
    params.epochs = epochs;
    params.seed = seed;
    for k in 0..c {
        let mut w = ScaledWeights::new(d + 1, averaging);
        let mut t = 0;
        for order in &orders {
            for &i in order {
                t += 1;
                let x = &ds.x()[i];
                let y = if ds.y()[i] == k { 1.0 } else { -1.0 };
                let eta = step(t);
                let margin = y * w.margin(x);
                w.shrink(1.0 - eta * lambda);
                if margin < 1.0 {
                    w.add(x, eta * y);
                }
                if let Some(r) = radius {
                    w.project(r);
                }
                if averaging && t > avg_start {
                    w.accumulate();
                }
            }
        }
        let final_w = if averaging {
            w.average(total - avg_start)
        } else {
            w.current()
        };
        if final_w.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFiniteLoss {
                epoch: epochs,
                last_good_epoch: 0,
            });
        }
        params.weights[k * d..(k + 1) * d].copy_from_slice(&final_w[..d]);
        params.bias[k] = final_w[d];
    }
    Ok(params)
}
