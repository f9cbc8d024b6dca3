//! Classifier families trained on sparse feature vectors, plus the
//! text-to-prediction pipeline and model files.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textprep::{fit_vectorizer, FittedVectorizer, SparseVector, TextprepError, VectorizerConfig};

mod dataset;
mod forest;
mod linear;
mod mnb;
mod persist;

pub use dataset::Dataset;
pub use forest::{train_random_forest, FeatureSubsample, ForestConfig, ForestParams, Tree, TreeNode};
pub use linear::{
    hinge_objective, logreg_gradient, logreg_loss, train_linear_svm, train_logreg, train_logreg_with_history,
    train_sgd_hinge, LearningRateSchedule, LinearKind, LinearParams, LogRegConfig, SgdConfig, SvmConfig,
};
pub use mnb::{train_mnb, MnbConfig, MnbParams};
pub use persist::{load_model, save_model, FORMAT_VERSION};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
    #[error("negative feature value at row {row}, index {index}; multinomial naive Bayes needs counts")]
    NegativeFeature { row: usize, index: usize },
    #[error("training loss became non-finite at epoch {epoch} (last good epoch: {last_good_epoch})")]
    NonFiniteLoss { epoch: usize, last_good_epoch: usize },
    #[error("input has dimension {got} but the model expects at most {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("model file version {found} is not supported (this build reads version {expected})")]
    VersionMismatch { found: u64, expected: u64 },
    #[error("model file checksum failure: {0}")]
    Checksum(String),
    #[error("malformed model file: {0}")]
    Format(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Textprep(#[from] TextprepError),
}

/// The five classifier families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Mnb,
    Lsvc,
    Sgdc,
    Rfc,
    Lrc,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 5] = [
        ClassifierKind::Mnb,
        ClassifierKind::Lsvc,
        ClassifierKind::Sgdc,
        ClassifierKind::Rfc,
        ClassifierKind::Lrc,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Mnb => "mnb",
            ClassifierKind::Lsvc => "lsvc",
            ClassifierKind::Sgdc => "sgdc",
            ClassifierKind::Rfc => "rfc",
            ClassifierKind::Lrc => "lrc",
        }
    }

    /// Whether [`Prediction::scores`] are probabilities.
    pub fn emits_probabilities(self) -> bool {
        !matches!(self, ClassifierKind::Lsvc | ClassifierKind::Sgdc)
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ClassifierKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown classifier kind '{s}' (expected mnb, lsvc, sgdc, rfc or lrc)"))
    }
}

/// Hyperparameters for one classifier family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TrainSpec {
    Mnb(MnbConfig),
    Lsvc(SvmConfig),
    Sgdc(SgdConfig),
    Rfc(ForestConfig),
    Lrc(LogRegConfig),
}

impl TrainSpec {
    pub fn default_for(kind: ClassifierKind) -> Self {
        match kind {
            ClassifierKind::Mnb => TrainSpec::Mnb(MnbConfig::default()),
            ClassifierKind::Lsvc => TrainSpec::Lsvc(SvmConfig::default()),
            ClassifierKind::Sgdc => TrainSpec::Sgdc(SgdConfig::default()),
            ClassifierKind::Rfc => TrainSpec::Rfc(ForestConfig::default()),
            ClassifierKind::Lrc => TrainSpec::Lrc(LogRegConfig::default()),
        }
    }

    pub fn kind(&self) -> ClassifierKind {
        match self {
            TrainSpec::Mnb(_) => ClassifierKind::Mnb,
            TrainSpec::Lsvc(_) => ClassifierKind::Lsvc,
            TrainSpec::Sgdc(_) => ClassifierKind::Sgdc,
            TrainSpec::Rfc(_) => ClassifierKind::Rfc,
            TrainSpec::Lrc(_) => ClassifierKind::Lrc,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        match &mut self {
            TrainSpec::Mnb(_) => {}
            TrainSpec::Lsvc(c) => c.seed = seed,
            TrainSpec::Sgdc(c) => c.seed = seed,
            TrainSpec::Rfc(c) => c.seed = seed,
            TrainSpec::Lrc(c) => c.seed = seed,
        }
        self
    }

    pub fn train(&self, ds: &Dataset) -> Result<Model, ModelError> {
        let class_names = ds.class_names().to_vec();
        let params = match self {
            TrainSpec::Mnb(c) => ModelParams::Mnb(train_mnb(ds, c)?),
            TrainSpec::Lsvc(c) => ModelParams::Linear(train_linear_svm(ds, c)?),
            TrainSpec::Sgdc(c) => ModelParams::Linear(train_sgd_hinge(ds, c)?),
            TrainSpec::Rfc(c) => ModelParams::Forest(train_random_forest(ds, c)?),
            TrainSpec::Lrc(c) => ModelParams::Linear(train_logreg(ds, c)?),
        };
        Ok(Model {
            kind: self.kind(),
            class_names,
            params,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelParams {
    Mnb(MnbParams),
    Linear(LinearParams),
    Forest(ForestParams),
}

/// A trained classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub kind: ClassifierKind,
    pub class_names: Vec<String>,
    pub params: ModelParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub class: usize,
    /// Probabilities for MNB, logistic regression and forests; raw margins
    /// for the hinge models.
    pub scores: Vec<f64>,
}

impl Model {
    pub fn dim(&self) -> usize {
        match &self.params {
            ModelParams::Mnb(p) => p.dim,
            ModelParams::Linear(p) => p.dim,
            ModelParams::Forest(p) => p.dim,
        }
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn predict(&self, x: &SparseVector) -> Result<Prediction, ModelError> {
        if x.dim() > self.dim() {
            return Err(ModelError::DimensionMismatch {
                expected: self.dim(),
                got: x.dim(),
            });
        }
        let scores = match &self.params {
            ModelParams::Mnb(p) => p.predict_proba(x),
            ModelParams::Linear(p) if p.kind == LinearKind::Logreg => softmax(&p.decision(x)),
            ModelParams::Linear(p) => p.decision(x),
            ModelParams::Forest(p) => p.predict_proba(x),
        };
        Ok(Prediction {
            class: argmax(&scores),
            scores,
        })
    }
}

/// Highest score, lowest index on ties.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Vectorizer and classifier fitted together on raw report text.
#[derive(Debug, Clone)]
pub struct TextClassifier {
    pub vectorizer: FittedVectorizer,
    pub model: Model,
}

impl TextClassifier {
    pub fn fit<S: AsRef<str>>(
        docs: &[S],
        y: &[usize],
        class_names: &[String],
        vectorizer: &VectorizerConfig,
        spec: &TrainSpec,
    ) -> Result<Self, ModelError> {
        let fv = fit_vectorizer(docs, vectorizer)?;
        let x = docs.iter().map(|d| fv.transform(d.as_ref())).collect();
        let ds = Dataset::new(x, y.to_vec(), class_names.to_vec())?;
        let model = spec.train(&ds)?;
        Ok(Self { vectorizer: fv, model })
    }

    pub fn predict_text(&self, text: &str) -> Result<Prediction, ModelError> {
        self.model.predict(&self.vectorizer.transform(text))
    }
}
