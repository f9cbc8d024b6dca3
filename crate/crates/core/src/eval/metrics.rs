use serde::{Deserialize, Serialize};

use super::EvalError;

/// Rows are true classes, columns predicted classes.
pub fn confusion_matrix(y_true: &[usize], y_pred: &[usize], n_classes: usize) -> Result<Vec<Vec<u64>>, EvalError> {
    if y_true.len() != y_pred.len() {
        return Err(EvalError::LengthMismatch {
            truth: y_true.len(),
            predicted: y_pred.len(),
        });
    }
    let mut m = vec![vec![0u64; n_classes]; n_classes];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if t >= n_classes || p >= n_classes {
            return Err(EvalError::LabelOutOfRange {
                label: t.max(p),
                n_classes,
            });
        }
        m[t][p] += 1;
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub confusion: Vec<Vec<u64>>,
    pub per_class: Vec<ClassMetrics>,
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub weighted_f1: f64,
    pub accuracy: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Per-class and support-weighted precision, recall and F1. Undefined
/// ratios (0/0) count as zero.
pub fn classification_metrics(matrix: &[Vec<u64>]) -> Result<MetricsReport, EvalError> {
    let c = matrix.len();
    if matrix.iter().any(|row| row.len() != c) {
        return Err(EvalError::NotSquare);
    }
    let total: u64 = matrix.iter().flatten().sum();
    if total == 0 {
        return Err(EvalError::EmptyConfusion);
    }
    let mut per_class = Vec::with_capacity(c);
    let (mut wp, mut wr, mut wf) = (0.0, 0.0, 0.0);
    for k in 0..c {
        let tp = matrix[k][k];
        let support: u64 = matrix[k].iter().sum();
        let predicted: u64 = matrix.iter().map(|row| row[k]).sum();
        let precision = ratio(tp, predicted);
        let recall = ratio(tp, support);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        let w = support as f64 / total as f64;
        wp += w * precision;
        wr += w * recall;
        wf += w * f1;
        per_class.push(ClassMetrics {
            precision,
            recall,
            f1,
            support,
        });
    }
    let trace: u64 = (0..c).map(|k| matrix[k][k]).sum();
    Ok(MetricsReport {
        confusion: matrix.to_vec(),
        per_class,
        weighted_precision: wp,
        weighted_recall: wr,
        weighted_f1: wf,
        accuracy: ratio(trace, total),
    })
}
