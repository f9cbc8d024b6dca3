use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::labels::LabelRow;
use super::types::{IssueRecord, RootCause};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LengthSummary {
    pub min: usize,
    pub max: usize,
    pub mean: f64,
    pub median: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub issues: usize,
    pub labeled: usize,
    pub per_class: BTreeMap<String, usize>,
    pub per_source: BTreeMap<String, usize>,
    /// Report text length in characters over `issues`.
    pub text_length: LengthSummary,
}

pub fn corpus_stats(issues: &[IssueRecord], labels: &[LabelRow]) -> CorpusStats {
    let mut per_class: BTreeMap<String, usize> = RootCause::ALL.iter().map(|c| (c.as_str().to_string(), 0)).collect();
    let mut per_source = BTreeMap::new();
    for row in labels {
        *per_class.entry(row.label.main().as_str().to_string()).or_insert(0) += 1;
        *per_source.entry(row.source.as_str().to_string()).or_insert(0) += 1;
    }
    let mut lengths: Vec<usize> = issues.iter().map(|i| i.text().chars().count()).collect();
    lengths.sort_unstable();
    let text_length = if lengths.is_empty() {
        LengthSummary::default()
    } else {
        let n = lengths.len();
        let median = if n % 2 == 1 {
            lengths[n / 2] as f64
        } else {
            (lengths[n / 2 - 1] + lengths[n / 2]) as f64 / 2.0
        };
        LengthSummary {
            min: lengths[0],
            max: lengths[n - 1],
            mean: lengths.iter().sum::<usize>() as f64 / n as f64,
            median,
        }
    };
    CorpusStats {
        issues: issues.len(),
        labeled: labels.len(),
        per_class,
        per_source,
        text_length,
    }
}
