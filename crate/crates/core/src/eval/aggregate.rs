use serde::{Deserialize, Serialize};

use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    pub median: f64,
    /// Sample standard deviation (n - 1); zero for a single score.
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

/// Summary statistics. Scores are sorted first so the result does not
/// depend on input order.
pub fn aggregate_runs(scores: &[f64]) -> Result<Aggregate, EvalError> {
    if scores.is_empty() {
        return Err(EvalError::NoScores);
    }
    let mut s = scores.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    let mean = s.iter().sum::<f64>() / n as f64;
    let median = if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    };
    let std = if n < 2 {
        0.0
    } else {
        (s.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    Ok(Aggregate {
        mean,
        median,
        std,
        min: s[0],
        max: s[n - 1],
    })
}
