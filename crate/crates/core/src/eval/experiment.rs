use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::models::{ClassifierKind, TextClassifier};
use crate::textprep::VectorizerConfig;

use super::aggregate::{aggregate_runs, Aggregate};
use super::grid::{apply_combination, grid_search, Combination, CvOptions, Grid, HyperValue};
use super::metrics::{classification_metrics, confusion_matrix, MetricsReport};
use super::split::stratified_split;
use super::{EvalError, TextCorpus};

/// Per-run seed: the first eight bytes (little endian) of
/// SHA-256(master_seed LE || run LE).
pub fn derive_seed(master_seed: u64, run: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(master_seed.to_le_bytes());
    h.update(run.to_le_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSettings {
    pub n_runs: usize,
    pub master_seed: u64,
    pub test_fraction: f64,
    pub folds: usize,
    pub kinds: Vec<ClassifierKind>,
    /// Overrides of the built-in grids, keyed by classifier kind.
    pub grids: BTreeMap<ClassifierKind, BTreeMap<String, Vec<HyperValue>>>,
    pub vectorizer: VectorizerConfig,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        Self {
            n_runs: 100,
            master_seed: 0,
            test_fraction: 0.2,
            folds: 5,
            kinds: ClassifierKind::ALL.to_vec(),
            grids: BTreeMap::new(),
            vectorizer: VectorizerConfig::default(),
        }
    }
}

impl ExperimentSettings {
    pub fn grid_for(&self, kind: ClassifierKind) -> Result<Grid, EvalError> {
        match self.grids.get(&kind) {
            Some(params) => Grid::new(kind, params.clone()),
            None => Ok(Grid::default_for(kind)),
        }
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        if self.n_runs == 0 {
            return Err(EvalError::InvalidConfig("n_runs must be at least 1".into()));
        }
        if self.kinds.is_empty() {
            return Err(EvalError::InvalidConfig("no classifier kinds selected".into()));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(EvalError::InvalidFraction(self.test_fraction));
        }
        if self.folds < 2 {
            return Err(EvalError::InvalidFolds(self.folds));
        }
        self.vectorizer
            .validate()
            .map_err(|e| EvalError::InvalidConfig(e.to_string()))?;
        for &k in &self.kinds {
            self.grid_for(k)?;
        }
        Ok(())
    }
}

/// Experiment config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Training set (JSONL of labeled reports), or an issue dump when
    /// `labels` is given.
    pub dataset: PathBuf,
    #[serde(default)]
    pub labels: Option<PathBuf>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(flatten)]
    pub settings: ExperimentSettings,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, EvalError> {
        let text = std::fs::read_to_string(path).map_err(|source| EvalError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg: Self =
            serde_json::from_str(&text).map_err(|e| EvalError::InvalidConfig(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.dataset = base.join(&cfg.dataset);
        cfg.labels = cfg.labels.map(|p| base.join(p));
        cfg.output_dir = cfg.output_dir.map(|p| base.join(p));
        cfg.settings.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindRun {
    pub run: usize,
    pub seed: u64,
    pub hyperparameters: Combination,
    pub cv_mean_accuracy: f64,
    pub metrics: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindAggregates {
    pub weighted_precision: Aggregate,
    pub weighted_recall: Aggregate,
    pub weighted_f1: Aggregate,
}

impl KindAggregates {
    pub fn from_runs(runs: &[KindRun]) -> Result<Self, EvalError> {
        let col = |f: fn(&MetricsReport) -> f64| runs.iter().map(|r| f(&r.metrics)).collect::<Vec<_>>();
        Ok(Self {
            weighted_precision: aggregate_runs(&col(|m| m.weighted_precision))?,
            weighted_recall: aggregate_runs(&col(|m| m.weighted_recall))?,
            weighted_f1: aggregate_runs(&col(|m| m.weighted_f1))?,
        })
    }

    pub fn rows(&self) -> [(&'static str, &Aggregate); 3] {
        [
            ("weighted_precision", &self.weighted_precision),
            ("weighted_recall", &self.weighted_recall),
            ("weighted_f1", &self.weighted_f1),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindReport {
    pub kind: ClassifierKind,
    pub runs: Vec<KindRun>,
    pub aggregates: KindAggregates,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub n_runs: usize,
    pub master_seed: u64,
    pub test_fraction: f64,
    pub folds: usize,
    pub class_names: Vec<String>,
    pub seeds: Vec<u64>,
    pub kinds: Vec<KindReport>,
}

impl ExperimentReport {
    /// Recomputes every aggregate from the stored per-run metrics.
    pub fn recompute_aggregates(&self) -> Result<Vec<KindAggregates>, EvalError> {
        self.kinds.iter().map(|k| KindAggregates::from_runs(&k.runs)).collect()
    }

    pub fn kind(&self, kind: ClassifierKind) -> Option<&KindReport> {
        self.kinds.iter().find(|k| k.kind == kind)
    }
}

/// One run for one kind: grid search on the training part, refit of the
/// winner on the whole training part, evaluation on the test part.
pub fn evaluate_kind(
    corpus: &TextCorpus,
    train: &[usize],
    test: &[usize],
    grid: &Grid,
    opts: &CvOptions,
    seed: u64,
) -> Result<(Combination, f64, MetricsReport), EvalError> {
    let tr = corpus.subset(train);
    let search = grid_search(grid, &tr, opts, seed)?;
    let (vec_cfg, spec) = apply_combination(grid.kind, &search.best, &opts.vectorizer)?;
    let clf = TextClassifier::fit(&tr.docs, &tr.y, &tr.class_names, &vec_cfg, &spec.with_seed(seed))?;
    let mut truth = Vec::with_capacity(test.len());
    let mut pred = Vec::with_capacity(test.len());
    for &i in test {
        truth.push(corpus.y[i]);
        pred.push(clf.predict_text(&corpus.docs[i])?.class);
    }
    let cm = confusion_matrix(&truth, &pred, corpus.class_names.len())?;
    Ok((search.best, search.best_score, classification_metrics(&cm)?))
}

fn run_once(
    corpus: &TextCorpus,
    settings: &ExperimentSettings,
    grids: &[Grid],
    run: usize,
) -> Result<Vec<KindRun>, EvalError> {
    let seed = derive_seed(settings.master_seed, run as u64);
    let (train, test) = stratified_split(&corpus.y, settings.test_fraction, seed)?;
    let opts = CvOptions {
        folds: settings.folds,
        vectorizer: settings.vectorizer.clone(),
    };
    grids
        .iter()
        .map(|g| {
            let (hyperparameters, cv_mean_accuracy, metrics) = evaluate_kind(corpus, &train, &test, g, &opts, seed)?;
            Ok(KindRun {
                run,
                seed,
                hyperparameters,
                cv_mean_accuracy,
                metrics,
            })
        })
        .collect()
}

/// The repeated randomized-split protocol. Runs execute in parallel and are
/// gathered in run order.
pub fn run_experiment(corpus: &TextCorpus, settings: &ExperimentSettings) -> Result<ExperimentReport, EvalError> {
    settings.validate()?;
    corpus.check_class_sizes(2)?;
    let grids: Vec<Grid> = settings
        .kinds
        .iter()
        .map(|&k| settings.grid_for(k))
        .collect::<Result<_, _>>()?;
    let per_run: Vec<Vec<KindRun>> = (0..settings.n_runs)
        .into_par_iter()
        .map(|r| {
            let out = run_once(corpus, settings, &grids, r).map_err(|e| EvalError::Run {
                run: r,
                source: Box::new(e),
            });
            if out.is_ok() {
                log::info!("run {} of {} finished", r + 1, settings.n_runs);
            }
            out
        })
        .collect::<Result<_, _>>()?;

    let mut kinds = Vec::with_capacity(grids.len());
    for (ki, g) in grids.iter().enumerate() {
        let runs: Vec<KindRun> = per_run.iter().map(|r| r[ki].clone()).collect();
        kinds.push(KindReport {
            kind: g.kind,
            aggregates: KindAggregates::from_runs(&runs)?,
            runs,
        });
    }
    Ok(ExperimentReport {
        n_runs: settings.n_runs,
        master_seed: settings.master_seed,
        test_fraction: settings.test_fraction,
        folds: settings.folds,
        class_names: corpus.class_names.clone(),
        seeds: (0..settings.n_runs)
            .map(|r| derive_seed(settings.master_seed, r as u64))
            .collect(),
        kinds,
    })
}
