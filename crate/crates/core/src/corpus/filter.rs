use serde::{Deserialize, Serialize};

use super::types::{IssueRecord, IssueState};
use super::CorpusError;

/// Inclusion heuristics for the bug corpus. All `max_*` bounds are
/// exclusive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    pub max_commits_per_issue: usize,
    pub max_files_per_commit: usize,
    pub max_lines_per_commit: u64,
    pub bug_label_substrings: Vec<String>,
    pub production_code_suffix: String,
    pub test_path_markers: Vec<String>,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            max_commits_per_issue: 10,
            max_files_per_commit: 20,
            max_lines_per_commit: 250,
            bug_label_substrings: vec!["bug".into(), "defect".into(), "regression".into()],
            production_code_suffix: ".java".into(),
            test_path_markers: vec!["/test/".into(), "/tests/".into(), "src/test".into()],
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.max_commits_per_issue == 0 || self.max_files_per_commit == 0 || self.max_lines_per_commit == 0 {
            return Err(CorpusError::InvalidConfig("filter bounds must be positive".into()));
        }
        if self.bug_label_substrings.is_empty() {
            return Err(CorpusError::InvalidConfig("bug label list must not be empty".into()));
        }
        Ok(())
    }

    /// Production code: the configured suffix, outside any test directory.
    /// Paths are matched with a leading `/` so a top-level `test/` directory
    /// counts as a test marker.
    pub fn is_production_path(&self, path: &str) -> bool {
        if !path.ends_with(&self.production_code_suffix) {
            return false;
        }
        let rooted = format!("/{path}");
        !self.test_path_markers.iter().any(|m| rooted.contains(m.as_str()))
    }
}

/// Why an issue was excluded. Variant order is the rule evaluation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    /// No linked commit, or a linked commit is no longer available.
    NoCommits,
    MultiIssueCommit,
    TooManyCommits,
    TooManyFiles,
    TooManyLines,
    NoProductionCode,
}

impl RejectReason {
    pub const ALL: [RejectReason; 6] = [
        RejectReason::NoCommits,
        RejectReason::MultiIssueCommit,
        RejectReason::TooManyCommits,
        RejectReason::TooManyFiles,
        RejectReason::TooManyLines,
        RejectReason::NoProductionCode,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterDecision {
    Accept,
    Reject(RejectReason),
}

/// Closed issue whose labels, case-folded, contain any configured substring.
pub fn is_bug_issue(issue: &IssueRecord, cfg: &FilterConfig) -> bool {
    issue.state == IssueState::Closed
        && issue.labels.iter().any(|label| {
            let label = label.to_lowercase();
            cfg.bug_label_substrings
                .iter()
                .any(|s| label.contains(&s.to_lowercase()))
        })
}

/// Applies the commit heuristics in fixed order and reports the first rule
/// that fails.
pub fn apply_filters(issue: &IssueRecord, cfg: &FilterConfig) -> FilterDecision {
    use RejectReason::*;
    let commits = &issue.commits;
    if commits.is_empty() || commits.iter().any(|c| !c.available) {
        return FilterDecision::Reject(NoCommits);
    }
    if commits.iter().any(|c| c.linked_issue_ids.len() > 1) {
        return FilterDecision::Reject(MultiIssueCommit);
    }
    if commits.len() >= cfg.max_commits_per_issue {
        return FilterDecision::Reject(TooManyCommits);
    }
    if commits.iter().any(|c| c.files.len() >= cfg.max_files_per_commit) {
        return FilterDecision::Reject(TooManyFiles);
    }
    if commits.iter().any(|c| c.lines_changed() >= cfg.max_lines_per_commit) {
        return FilterDecision::Reject(TooManyLines);
    }
    let touches_production = commits
        .iter()
        .flat_map(|c| &c.files)
        .any(|f| cfg.is_production_path(&f.path));
    if !touches_production {
        return FilterDecision::Reject(NoProductionCode);
    }
    FilterDecision::Accept
}

/// Per-reason rejection counts of one filtering pass.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterReport {
    pub total: usize,
    pub accepted: usize,
    pub not_bug: usize,
    pub no_commits: usize,
    pub multi_issue_commit: usize,
    pub too_many_commits: usize,
    pub too_many_files: usize,
    pub too_many_lines: usize,
    pub no_production_code: usize,
}

impl FilterReport {
    pub fn count(&self, reason: RejectReason) -> usize {
        match reason {
            RejectReason::NoCommits => self.no_commits,
            RejectReason::MultiIssueCommit => self.multi_issue_commit,
            RejectReason::TooManyCommits => self.too_many_commits,
            RejectReason::TooManyFiles => self.too_many_files,
            RejectReason::TooManyLines => self.too_many_lines,
            RejectReason::NoProductionCode => self.no_production_code,
        }
    }

    fn bump(&mut self, reason: RejectReason) {
        let slot = match reason {
            RejectReason::NoCommits => &mut self.no_commits,
            RejectReason::MultiIssueCommit => &mut self.multi_issue_commit,
            RejectReason::TooManyCommits => &mut self.too_many_commits,
            RejectReason::TooManyFiles => &mut self.too_many_files,
            RejectReason::TooManyLines => &mut self.too_many_lines,
            RejectReason::NoProductionCode => &mut self.no_production_code,
        };
        *slot += 1;
    }

    /// Sum of every rejection bucket, including non-bug issues.
    pub fn rejected(&self) -> usize {
        self.not_bug + RejectReason::ALL.iter().map(|r| self.count(*r)).sum::<usize>()
    }
}

pub fn filter_corpus(issues: &[IssueRecord], cfg: &FilterConfig) -> (Vec<IssueRecord>, FilterReport) {
    let mut report = FilterReport {
        total: issues.len(),
        ..Default::default()
    };
    let mut accepted = Vec::new();
    for issue in issues {
        if !is_bug_issue(issue, cfg) {
            report.not_bug += 1;
            continue;
        }
        match apply_filters(issue, cfg) {
            FilterDecision::Accept => accepted.push(issue.clone()),
            FilterDecision::Reject(r) => report.bump(r),
        }
    }
    report.accepted = accepted.len();
    (accepted, report)
}
