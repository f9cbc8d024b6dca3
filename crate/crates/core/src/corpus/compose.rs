use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::types::{LabelSource, LabeledReport, RootCause};
use super::CorpusError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositionConfig {
    pub min_confidence: u8,
    /// Upper bound on the keyword-sourced share of semantic reports.
    pub semantic_keyword_cap: f64,
}

impl Default for CompositionConfig {
    fn default() -> Self {
        Self {
            min_confidence: 8,
            semantic_keyword_cap: 0.05,
        }
    }
}

impl CompositionConfig {
    pub fn validate(&self) -> Result<(), CorpusError> {
        if !(0.0..1.0).contains(&self.semantic_keyword_cap) {
            return Err(CorpusError::InvalidConfig(format!(
                "semantic keyword cap must lie in [0, 1), got {}",
                self.semantic_keyword_cap
            )));
        }
        if !(1..=10).contains(&self.min_confidence) {
            return Err(CorpusError::InvalidConfig(format!(
                "min_confidence must lie in 1..=10, got {}",
                self.min_confidence
            )));
        }
        Ok(())
    }
}

/// Largest `k <= available` with `k <= cap * (random + k)`.
pub fn keyword_semantic_allowance(random: usize, available: usize, cap: f64) -> usize {
    let mut k = 0;
    while k < available && ((k + 1) as f64) <= cap * (random + k + 1) as f64 + 1e-12 {
        k += 1;
    }
    k
}

/// Builds the training set: drops low-confidence labels, keeps every memory
/// and concurrency report, keeps all randomly sampled semantic reports and
/// admits a seeded random subset of keyword-found semantic reports up to
/// the cap. Output is sorted by `(repo, issue_id)`.
pub fn compose_training_set(
    labeled: &[LabeledReport],
    cfg: &CompositionConfig,
    seed: u64,
) -> Result<Vec<LabeledReport>, CorpusError> {
    cfg.validate()?;
    let confident = labeled.iter().filter(|r| r.label.confidence() >= cfg.min_confidence);

    let mut out = Vec::new();
    let mut keyword_semantic = Vec::new();
    let mut random_semantic = 0;
    for r in confident {
        match (r.label.main(), r.source) {
            (RootCause::Semantic, LabelSource::KeywordSearch) => keyword_semantic.push(r.clone()),
            (RootCause::Semantic, LabelSource::RandomSample) => {
                random_semantic += 1;
                out.push(r.clone());
            }
            _ => out.push(r.clone()),
        }
    }

    let k = keyword_semantic_allowance(random_semantic, keyword_semantic.len(), cfg.semantic_keyword_cap);
    keyword_semantic.sort_by(|a, b| a.issue.key().cmp(&b.issue.key()));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    keyword_semantic.shuffle(&mut rng);
    out.extend(keyword_semantic.into_iter().take(k));

    out.sort_by(|a, b| a.issue.key().cmp(&b.issue.key()));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn allowance_arithmetic() {
        assert_eq!(keyword_semantic_allowance(119, 150, 0.05), 6);
        assert_eq!(keyword_semantic_allowance(119, 3, 0.05), 3);
        assert_eq!(keyword_semantic_allowance(0, 10, 0.05), 0);
        assert_eq!(keyword_semantic_allowance(19, 10, 0.05), 1);
        assert_eq!(keyword_semantic_allowance(100, 10, 0.0), 0);
    }

    #[test]
    fn cap_must_be_a_fraction() {
        let cfg = CompositionConfig {
            semantic_keyword_cap: 1.0,
            ..Default::default()
        };
        assert!(compose_training_set(&[], &cfg, 1).is_err());
    }
}
