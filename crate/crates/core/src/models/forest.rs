use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::textprep::SparseVector;

use super::{Dataset, ModelError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSubsample {
    /// `floor(sqrt(dim))`, at least one.
    Sqrt,
    Count(usize),
}

impl FeatureSubsample {
    pub fn resolve(self, dim: usize) -> usize {
        let k = match self {
            FeatureSubsample::Sqrt => (dim as f64).sqrt().floor() as usize,
            FeatureSubsample::Count(k) => k,
        };
        k.clamp(1, dim.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub feature_subsample: FeatureSubsample,
    /// Draw a bootstrap sample per tree; disabling trains every tree on the
    /// full dataset.
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: None,
            min_samples_leaf: 1,
            feature_subsample: FeatureSubsample::Sqrt,
            bootstrap: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        distribution: Vec<f64>,
    },
}

/// Binary tree stored as a node array; node 0 is the root. Samples with
/// `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn leaf_distribution(&self, x: &SparseVector) -> &[f64] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { distribution } => return distribution,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x.get(*feature) <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], at: usize) -> usize {
            match &nodes[at] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaves(&self) -> impl Iterator<Item = &[f64]> {
        self.nodes.iter().filter_map(|n| match n {
            TreeNode::Leaf { distribution } => Some(distribution.as_slice()),
            TreeNode::Split { .. } => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub feature_subsample: FeatureSubsample,
    pub bootstrap: bool,
    pub seed: u64,
    pub n_classes: usize,
    pub dim: usize,
    pub trees: Vec<Tree>,
}

impl ForestParams {
    pub fn predict_proba(&self, x: &SparseVector) -> Vec<f64> {
        let mut acc = vec![0.0; self.n_classes];
        for tree in &self.trees {
            for (a, p) in acc.iter_mut().zip(tree.leaf_distribution(x)) {
                *a += p;
            }
        }
        let n = self.trees.len() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        acc
    }
}

pub fn train_random_forest(ds: &Dataset, cfg: &ForestConfig) -> Result<ForestParams, ModelError> {
    if cfg.n_trees == 0 {
        return Err(ModelError::InvalidHyperparameter("n_trees must be at least 1".into()));
    }
    if cfg.min_samples_leaf == 0 {
        return Err(ModelError::InvalidHyperparameter(
            "min_samples_leaf must be at least 1".into(),
        ));
    }
    let dense: Vec<f64> = ds.x().iter().flat_map(|x| x.to_dense()).collect();
    let builder = TreeBuilder {
        data: &dense,
        y: ds.y(),
        dim: ds.dim(),
        n_classes: ds.n_classes(),
        max_depth: cfg.max_depth,
        min_leaf: cfg.min_samples_leaf,
        n_features: cfg.feature_subsample.resolve(ds.dim()),
    };
    let trees = (0..cfg.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(t as u64));
            let n = ds.len();
            let samples: Vec<usize> = if cfg.bootstrap {
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            builder.build(samples, &mut rng)
        })
        .collect();
    Ok(ForestParams {
        n_trees: cfg.n_trees,
        max_depth: cfg.max_depth,
        min_samples_leaf: cfg.min_samples_leaf,
        feature_subsample: cfg.feature_subsample,
        bootstrap: cfg.bootstrap,
        seed: cfg.seed,
        n_classes: ds.n_classes(),
        dim: ds.dim(),
        trees,
    })
}

struct TreeBuilder<'a> {
    /// Row-major `n x dim`.
    data: &'a [f64],
    y: &'a [usize],
    dim: usize,
    n_classes: usize,
    max_depth: Option<usize>,
    min_leaf: usize,
    n_features: usize,
}

struct Split {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

fn gini(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>()
}

impl TreeBuilder<'_> {
    fn value(&self, sample: usize, feature: usize) -> f64 {
        self.data[sample * self.dim + feature]
    }

    fn build(&self, samples: Vec<usize>, rng: &mut ChaCha8Rng) -> Tree {
        let mut nodes = Vec::new();
        let mut features: Vec<usize> = (0..self.dim).collect();
        self.grow(&mut nodes, samples, 0, &mut features, rng);
        Tree { nodes }
    }

    fn grow(
        &self,
        nodes: &mut Vec<TreeNode>,
        samples: Vec<usize>,
        depth: usize,
        features: &mut [usize],
        rng: &mut ChaCha8Rng,
    ) -> usize {
        let id = nodes.len();
        let mut counts = vec![0usize; self.n_classes];
        for &s in &samples {
            counts[self.y[s]] += 1;
        }
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let depth_capped = self.max_depth.is_some_and(|m| depth >= m);
        let split = if pure || depth_capped || samples.len() < 2 * self.min_leaf {
            None
        } else {
            self.best_split(&samples, features, rng)
        };
        let Some(split) = split else {
            let total = samples.len() as f64;
            nodes.push(TreeNode::Leaf {
                distribution: counts.iter().map(|&c| c as f64 / total).collect(),
            });
            return id;
        };
        nodes.push(TreeNode::Leaf {
            distribution: Vec::new(),
        });
        let (left, right): (Vec<usize>, Vec<usize>) = samples
            .into_iter()
            .partition(|&s| self.value(s, split.feature) <= split.threshold);
        let l = self.grow(nodes, left, depth + 1, features, rng);
        let r = self.grow(nodes, right, depth + 1, features, rng);
        nodes[id] = TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: l,
            right: r,
        };
        id
    }

    /// Examines `n_features` features drawn without replacement. If none of
    /// them admits a valid split, keeps drawing until one does or all
    /// features are exhausted.
    fn best_split(&self, samples: &[usize], features: &mut [usize], rng: &mut ChaCha8Rng) -> Option<Split> {
        let mut best: Option<Split> = None;
        let mut pairs: Vec<(f64, usize)> = Vec::with_capacity(samples.len());
        for drawn in 0..features.len() {
            if drawn >= self.n_features && best.is_some() {
                break;
            }
            let pick = rng.gen_range(drawn..features.len());
            features.swap(drawn, pick);
            let f = features[drawn];
            pairs.clear();
            pairs.extend(samples.iter().map(|&s| (self.value(s, f), self.y[s])));
            let first = pairs[0].0;
            if pairs.iter().all(|p| p.0 == first) {
                continue;
            }
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            if let Some(s) = self.scan_feature(f, &pairs) {
                if best.as_ref().is_none_or(|b| s.impurity < b.impurity) {
                    best = Some(s);
                }
            }
        }
        best
    }

    fn scan_feature(&self, feature: usize, sorted: &[(f64, usize)]) -> Option<Split> {
        let n = sorted.len();
        let mut right = vec![0usize; self.n_classes];
        for p in sorted {
            right[p.1] += 1;
        }
        let mut left = vec![0usize; self.n_classes];
        let mut best: Option<Split> = None;
        for i in 0..n - 1 {
            left[sorted[i].1] += 1;
            right[sorted[i].1] -= 1;
            if sorted[i].0 == sorted[i + 1].0 {
                continue;
            }
            let (nl, nr) = (i + 1, n - i - 1);
            if nl < self.min_leaf || nr < self.min_leaf {
                continue;
            }
            let impurity = (nl as f64 * gini(&left, nl) + nr as f64 * gini(&right, nr)) / n as f64;
            if best.as_ref().is_none_or(|b| impurity < b.impurity) {
                best = Some(Split {
                    feature,
                    threshold: 0.5 * (sorted[i].0 + sorted[i + 1].0),
                    impurity,
                });
            }
        }
        best
    }
}
