//! Stratified splitting, cross-validated grid search, metrics and the
//! repeated randomized-split experiment.

use std::collections::BTreeMap;
use std::path::PathBuf;

use thiserror::Error;

use crate::corpus::{LabeledReport, RootCause};
use crate::models::{ClassifierKind, ModelError};

mod aggregate;
mod experiment;
mod grid;
mod metrics;
mod report;
mod split;

pub use aggregate::{aggregate_runs, Aggregate};
pub use experiment::{
    derive_seed, evaluate_kind, run_experiment, ExperimentConfig, ExperimentReport, ExperimentSettings, KindAggregates,
    KindReport, KindRun,
};
pub use grid::{
    apply_combination, cross_validate, grid_search, Combination, CvCell, CvOptions, Grid, GridSearchResult, HyperValue,
};
pub use metrics::{classification_metrics, confusion_matrix, ClassMetrics, MetricsReport};
pub use report::{render_report, write_report_files, ReportFormat, REPORT_COLUMNS};
pub use split::{stratified_kfold, stratified_split, test_quotas};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("test fraction must lie strictly between 0 and 1, got {0}")]
    InvalidFraction(f64),
    #[error("need at least 2 folds, got {0}")]
    InvalidFolds(usize),
    #[error("class {class} has {count} sample(s); at least {required} required")]
    ClassTooSmall {
        class: usize,
        count: usize,
        required: usize,
    },
    #[error("class '{name}' has {count} sample(s); at least {required} required")]
    NamedClassTooSmall {
        name: String,
        count: usize,
        required: usize,
    },
    #[error("{truth} true labels but {predicted} predictions")]
    LengthMismatch { truth: usize, predicted: usize },
    #[error("label {label} out of range for {n_classes} classes")]
    LabelOutOfRange { label: usize, n_classes: usize },
    #[error("confusion matrix is not square")]
    NotSquare,
    #[error("confusion matrix is empty")]
    EmptyConfusion,
    #[error("no scores to aggregate")]
    NoScores,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("every {kind} grid combination failed; last error: {last_error}")]
    AllCombinationsFailed { kind: ClassifierKind, last_error: String },
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
    #[error("run {run} failed: {source}")]
    Run { run: usize, source: Box<EvalError> },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Report texts with class indices.
#[derive(Debug, Clone, PartialEq)]
pub struct TextCorpus {
    pub docs: Vec<String>,
    pub y: Vec<usize>,
    pub class_names: Vec<String>,
}

impl TextCorpus {
    pub fn new(docs: Vec<String>, y: Vec<usize>, class_names: Vec<String>) -> Result<Self, EvalError> {
        if docs.len() != y.len() {
            return Err(EvalError::LengthMismatch {
                truth: y.len(),
                predicted: docs.len(),
            });
        }
        if let Some(&bad) = y.iter().find(|&&c| c >= class_names.len()) {
            return Err(EvalError::LabelOutOfRange {
                label: bad,
                n_classes: class_names.len(),
            });
        }
        Ok(Self { docs, y, class_names })
    }

    /// Classes are the root causes present, in their canonical order.
    pub fn from_reports(reports: &[LabeledReport]) -> Self {
        let present: Vec<RootCause> = RootCause::ALL
            .into_iter()
            .filter(|c| reports.iter().any(|r| r.label.main() == *c))
            .collect();
        let index: BTreeMap<RootCause, usize> = present.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        Self {
            docs: reports.iter().map(|r| r.issue.text()).collect(),
            y: reports.iter().map(|r| index[&r.label.main()]).collect(),
            class_names: present.iter().map(|c| c.as_str().to_string()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn subset(&self, idx: &[usize]) -> Self {
        Self {
            docs: idx.iter().map(|&i| self.docs[i].clone()).collect(),
            y: idx.iter().map(|&i| self.y[i]).collect(),
            class_names: self.class_names.clone(),
        }
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.class_names.len()];
        for &k in &self.y {
            c[k] += 1;
        }
        c
    }

    pub fn check_class_sizes(&self, required: usize) -> Result<(), EvalError> {
        for (name, count) in self.class_names.iter().zip(self.class_counts()) {
            if count < required {
                return Err(EvalError::NamedClassTooSmall {
                    name: name.clone(),
                    count,
                    required,
                });
            }
        }
        Ok(())
    }
}
