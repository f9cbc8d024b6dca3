use crate::textprep::SparseVector;

use super::ModelError;

/// Feature vectors with class indices. Every class in `0..class_names.len()`
/// occurs at least once and all vectors share one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Vec<SparseVector>,
    y: Vec<usize>,
    class_names: Vec<String>,
    dim: usize,
}

impl Dataset {
    pub fn new(x: Vec<SparseVector>, y: Vec<usize>, class_names: Vec<String>) -> Result<Self, ModelError> {
        if x.len() != y.len() {
            return Err(ModelError::InvalidDataset(format!(
                "{} feature vectors but {} labels",
                x.len(),
                y.len()
            )));
        }
        if x.is_empty() {
            return Err(ModelError::InvalidDataset("dataset is empty".into()));
        }
        let n_classes = class_names.len();
        if n_classes < 2 {
            return Err(ModelError::InvalidDataset(format!(
                "need at least two classes, got {n_classes}"
            )));
        }
        let dim = x[0].dim();
        if let Some(bad) = x.iter().position(|v| v.dim() != dim) {
            return Err(ModelError::InvalidDataset(format!(
                "row {bad} has dimension {} but row 0 has {dim}",
                x[bad].dim()
            )));
        }
        let mut seen = vec![false; n_classes];
        for (row, &c) in y.iter().enumerate() {
            if c >= n_classes {
                return Err(ModelError::InvalidDataset(format!(
                    "row {row} has class {c} but only {n_classes} classes are named"
                )));
            }
            seen[c] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(ModelError::InvalidDataset(format!(
                "class '{}' has no samples",
                class_names[missing]
            )));
        }
        Ok(Self { x, y, class_names, dim })
    }

    pub fn x(&self) -> &[SparseVector] {
        &self.x
    }

    pub fn y(&self) -> &[usize] {
        &self.y
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &c in &self.y {
            counts[c] += 1;
        }
        counts
    }

    /// Rows selected by `indices`, keeping class names. Fails if a class
    /// disappears from the subset.
    pub fn subset(&self, indices: &[usize]) -> Result<Self, ModelError> {
        Self::new(
            indices.iter().map(|&i| self.x[i].clone()).collect(),
            indices.iter().map(|&i| self.y[i]).collect(),
            self.class_names.clone(),
        )
    }
}
