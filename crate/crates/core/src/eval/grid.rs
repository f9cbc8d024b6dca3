use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::models::{
    ClassifierKind, ForestConfig, LearningRateSchedule, LogRegConfig, MnbConfig, SgdConfig, SvmConfig, TextClassifier,
    TrainSpec,
};
use crate::textprep::{VectorizerConfig, Weighting};

use super::split::stratified_kfold;
use super::{EvalError, TextCorpus};

/// One candidate value for a hyperparameter. `null` (or the string
/// `"none"`) stands for an unset optional such as `max_depth`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HyperValue {
    None,
    Number(f64),
    Text(String),
}

impl fmt::Display for HyperValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HyperValue::None => f.write_str("none"),
            HyperValue::Number(v) => write!(f, "{v}"),
            HyperValue::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for HyperValue {
    fn from(v: f64) -> Self {
        HyperValue::Number(v)
    }
}

impl From<&str> for HyperValue {
    fn from(s: &str) -> Self {
        HyperValue::Text(s.to_string())
    }
}

pub type Combination = BTreeMap<String, HyperValue>;

const VECTORIZER_PARAMS: [&str; 3] = ["min_df", "ngram_max", "weighting"];

fn model_params(kind: ClassifierKind) -> &'static [&'static str] {
    match kind {
        ClassifierKind::Mnb => &["alpha"],
        ClassifierKind::Lsvc => &["epochs", "lambda"],
        ClassifierKind::Sgdc => &["epochs", "lambda", "learning_rate", "schedule"],
        ClassifierKind::Lrc => &["batch_size", "epochs", "lambda", "learning_rate"],
        ClassifierKind::Rfc => &["max_depth", "min_samples_leaf", "n_trees"],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub kind: ClassifierKind,
    pub params: BTreeMap<String, Vec<HyperValue>>,
}

impl Grid {
    pub fn new(kind: ClassifierKind, params: BTreeMap<String, Vec<HyperValue>>) -> Result<Self, EvalError> {
        let g = Self { kind, params };
        g.validate()?;
        Ok(g)
    }

    pub fn default_for(kind: ClassifierKind) -> Self {
        let n = |xs: &[f64]| xs.iter().map(|&v| HyperValue::Number(v)).collect::<Vec<_>>();
        let t = |xs: &[&str]| xs.iter().map(|&v| HyperValue::from(v)).collect::<Vec<_>>();
        let mut params = BTreeMap::new();
        params.insert("weighting".to_string(), t(&["count", "tfidf"]));
        match kind {
            ClassifierKind::Mnb => {
                params.insert("alpha".into(), n(&[0.1, 0.5, 1.0]));
            }
            ClassifierKind::Lsvc | ClassifierKind::Lrc | ClassifierKind::Sgdc => {
                params.insert("lambda".into(), n(&[1e-4, 1e-3, 1e-2]));
                params.insert("epochs".into(), n(&[50.0, 200.0]));
                if kind == ClassifierKind::Sgdc {
                    params.insert("schedule".into(), t(&["constant", "inv_t"]));
                }
            }
            ClassifierKind::Rfc => {
                params.insert("n_trees".into(), n(&[100.0]));
                params.insert("max_depth".into(), vec![HyperValue::None, HyperValue::Number(32.0)]);
            }
        }
        Self { kind, params }
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        if self.params.is_empty() {
            return Err(EvalError::InvalidGrid(format!(
                "{} grid has no hyperparameters",
                self.kind
            )));
        }
        for (name, values) in &self.params {
            if !VECTORIZER_PARAMS.contains(&name.as_str()) && !model_params(self.kind).contains(&name.as_str()) {
                return Err(EvalError::InvalidGrid(format!(
                    "'{name}' is not a hyperparameter of {} (expected one of: {})",
                    self.kind,
                    model_params(self.kind)
                        .iter()
                        .chain(VECTORIZER_PARAMS.iter())
                        .copied()
                        .collect::<Vec<_>>()
                        .join(", ")
                )));
            }
            if values.is_empty() {
                return Err(EvalError::InvalidGrid(format!("'{name}' has no candidate values")));
            }
            for v in values {
                let single = Combination::from([(name.clone(), v.clone())]);
                apply_combination(self.kind, &single, &VectorizerConfig::default())?;
            }
        }
        Ok(())
    }

    /// Cartesian product; names in lexicographic order with the first name
    /// varying slowest, values in the order given.
    pub fn combinations(&self) -> Vec<Combination> {
        let mut out = vec![Combination::new()];
        for (name, values) in &self.params {
            out = out
                .into_iter()
                .flat_map(|c| {
                    values.iter().map(move |v| {
                        let mut c = c.clone();
                        c.insert(name.clone(), v.clone());
                        c
                    })
                })
                .collect();
        }
        out
    }
}

fn bad(name: &str, v: &HyperValue, want: &str) -> EvalError {
    EvalError::InvalidGrid(format!("{name} = {v}: expected {want}"))
}

fn positive(name: &str, v: &HyperValue) -> Result<f64, EvalError> {
    match v {
        HyperValue::Number(x) if x.is_finite() && *x > 0.0 => Ok(*x),
        _ => Err(bad(name, v, "a positive number")),
    }
}

fn count(name: &str, v: &HyperValue) -> Result<usize, EvalError> {
    match v {
        HyperValue::Number(x) if x.is_finite() && *x >= 1.0 && x.fract() == 0.0 => Ok(*x as usize),
        _ => Err(bad(name, v, "a positive integer")),
    }
}

fn optional_count(name: &str, v: &HyperValue) -> Result<Option<usize>, EvalError> {
    match v {
        HyperValue::None => Ok(None),
        HyperValue::Text(s) if s == "none" => Ok(None),
        _ => count(name, v).map(Some),
    }
}

fn text<'a>(name: &str, v: &'a HyperValue) -> Result<&'a str, EvalError> {
    match v {
        HyperValue::Text(s) => Ok(s),
        _ => Err(bad(name, v, "a string")),
    }
}

/// Turns one grid cell into a vectorizer configuration and training spec.
/// Unspecified hyperparameters keep their defaults.
pub fn apply_combination(
    kind: ClassifierKind,
    combo: &Combination,
    base: &VectorizerConfig,
) -> Result<(VectorizerConfig, TrainSpec), EvalError> {
    let mut vec_cfg = base.clone();
    let mut spec = TrainSpec::default_for(kind);
    for (name, v) in combo {
        match name.as_str() {
            "weighting" => {
                vec_cfg.weighting = text(name, v)?
                    .parse::<Weighting>()
                    .map_err(|_| bad(name, v, "count or tfidf"))?;
            }
            "min_df" => vec_cfg.min_df = count(name, v)?,
            "ngram_max" => vec_cfg.ngram_max = count(name, v)?,
            _ => set_model_param(&mut spec, name, v)?,
        }
    }
    vec_cfg.validate().map_err(|e| EvalError::InvalidGrid(e.to_string()))?;
    Ok((vec_cfg, spec))
}

fn set_model_param(spec: &mut TrainSpec, name: &str, v: &HyperValue) -> Result<(), EvalError> {
    let kind = spec.kind();
    let unknown = || EvalError::InvalidGrid(format!("'{name}' is not a hyperparameter of {kind}"));
    match spec {
        TrainSpec::Mnb(MnbConfig { alpha }) => match name {
            "alpha" => *alpha = positive(name, v)?,
            _ => return Err(unknown()),
        },
        TrainSpec::Lsvc(SvmConfig { lambda, epochs, .. }) => match name {
            "lambda" => *lambda = positive(name, v)?,
            "epochs" => *epochs = count(name, v)?,
            _ => return Err(unknown()),
        },
        TrainSpec::Sgdc(SgdConfig {
            lambda,
            learning_rate,
            schedule,
            epochs,
            ..
        }) => match name {
            "lambda" => *lambda = positive(name, v)?,
            "epochs" => *epochs = count(name, v)?,
            "learning_rate" => *learning_rate = positive(name, v)?,
            "schedule" => {
                *schedule = text(name, v)?
                    .parse::<LearningRateSchedule>()
                    .map_err(|_| bad(name, v, "constant or inv_t"))?
            }
            _ => return Err(unknown()),
        },
        TrainSpec::Lrc(LogRegConfig {
            lambda,
            learning_rate,
            epochs,
            batch_size,
            ..
        }) => match name {
            "lambda" => *lambda = positive(name, v)?,
            "epochs" => *epochs = count(name, v)?,
            "learning_rate" => *learning_rate = positive(name, v)?,
            "batch_size" => *batch_size = optional_count(name, v)?,
            _ => return Err(unknown()),
        },
        TrainSpec::Rfc(ForestConfig {
            n_trees,
            max_depth,
            min_samples_leaf,
            ..
        }) => match name {
            "n_trees" => *n_trees = count(name, v)?,
            "max_depth" => *max_depth = optional_count(name, v)?,
            "min_samples_leaf" => *min_samples_leaf = count(name, v)?,
            _ => return Err(unknown()),
        },
    }
    Ok(())
}

/// Options shared by every grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CvOptions {
    pub folds: usize,
    pub vectorizer: VectorizerConfig,
}

impl Default for CvOptions {
    fn default() -> Self {
        Self {
            folds: 5,
            vectorizer: VectorizerConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvCell {
    pub combination: Combination,
    /// `None` when training failed for this cell; it then ranks below every
    /// scored cell.
    pub mean_accuracy: Option<f64>,
    pub fold_accuracies: Vec<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub kind: ClassifierKind,
    pub best_index: usize,
    pub best: Combination,
    pub best_score: f64,
    pub table: Vec<CvCell>,
}

/// Accuracy of one configuration on each of the given folds, training on
/// the remaining folds.
pub fn cross_validate(
    corpus: &TextCorpus,
    folds: &[Vec<usize>],
    vectorizer: &VectorizerConfig,
    spec: &TrainSpec,
) -> Result<Vec<f64>, EvalError> {
    let mut held_out = vec![usize::MAX; corpus.len()];
    for (f, members) in folds.iter().enumerate() {
        for &i in members {
            held_out[i] = f;
        }
    }
    let mut scores = Vec::with_capacity(folds.len());
    for (f, test) in folds.iter().enumerate() {
        let train: Vec<usize> = (0..corpus.len()).filter(|&i| held_out[i] != f).collect();
        let tr = corpus.subset(&train);
        let clf = TextClassifier::fit(&tr.docs, &tr.y, &tr.class_names, vectorizer, spec)?;
        let mut correct = 0usize;
        for &i in test {
            if clf.predict_text(&corpus.docs[i])?.class == corpus.y[i] {
                correct += 1;
            }
        }
        scores.push(correct as f64 / test.len() as f64);
    }
    Ok(scores)
}

/// Exhaustive k-fold grid search scored by mean accuracy. Every cell sees
/// the same folds; ties go to the earliest cell.
pub fn grid_search(
    grid: &Grid,
    corpus: &TextCorpus,
    opts: &CvOptions,
    seed: u64,
) -> Result<GridSearchResult, EvalError> {
    grid.validate()?;
    let folds = stratified_kfold(&corpus.y, opts.folds, seed)?;
    let combos = grid.combinations();
    let table: Vec<CvCell> = combos
        .into_par_iter()
        .map(|combination| {
            let outcome = apply_combination(grid.kind, &combination, &opts.vectorizer)
                .and_then(|(v, s)| cross_validate(corpus, &folds, &v, &s.with_seed(seed)));
            match outcome {
                Ok(fold_accuracies) => CvCell {
                    combination,
                    mean_accuracy: Some(fold_accuracies.iter().sum::<f64>() / fold_accuracies.len() as f64),
                    fold_accuracies,
                    error: None,
                },
                Err(e) => {
                    log::warn!("{} grid cell {:?} failed: {e}", grid.kind, combination);
                    CvCell {
                        combination,
                        mean_accuracy: None,
                        fold_accuracies: Vec::new(),
                        error: Some(e.to_string()),
                    }
                }
            }
        })
        .collect();
    let mut best: Option<(usize, f64)> = None;
    for (i, cell) in table.iter().enumerate() {
        if let Some(score) = cell.mean_accuracy {
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((i, score));
            }
        }
    }
    let (best_index, best_score) = best.ok_or_else(|| EvalError::AllCombinationsFailed {
        kind: grid.kind,
        last_error: table.last().and_then(|c| c.error.clone()).unwrap_or_default(),
    })?;
    Ok(GridSearchResult {
        kind: grid.kind,
        best_index,
        best: table[best_index].combination.clone(),
        best_score,
        table,
    })
}
