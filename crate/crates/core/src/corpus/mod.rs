//! Issue data model, dump and label files, corpus filtering heuristics,
//! keyword bootstrap and training-set composition.

use std::path::{Path, PathBuf};

use thiserror::Error;

mod compose;
mod dump;
mod filter;
mod keywords;
mod labels;
mod stats;
mod types;

pub use compose::{compose_training_set, keyword_semantic_allowance, CompositionConfig};
pub use dump::{load_dump, load_labeled, write_dump, write_labeled, Loaded, SkippedLine};
pub use filter::{
    apply_filters, filter_corpus, is_bug_issue, FilterConfig, FilterDecision, FilterReport, RejectReason,
};
pub use keywords::{keyword_scan, Candidate, CandidateSet, KeywordClass, KeywordConfig};
pub use labels::{join_labels, load_labels, parse_labels, write_labels, LabelRow};
pub use stats::{corpus_stats, CorpusStats, LengthSummary};
pub use types::{
    is_valid_sha, CommitRecord, FileChange, IssueRecord, IssueState, LabelSource, LabeledReport, RootCause,
    RootCauseLabel, SubCategory,
};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("label file line {line}: {message}")]
    Label { line: usize, message: String },
    #[error("invalid label: {0}")]
    InvalidLabel(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl CorpusError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CorpusError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn label(line: usize, message: impl Into<String>) -> Self {
        CorpusError::Label {
            line,
            message: message.into(),
        }
    }
}
