use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::CorpusError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueState {
    Open,
    Closed,
}

/// One changed file in a commit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileChange {
    pub path: String,
    pub insertions: u64,
    pub deletions: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitRecord {
    pub sha: String,
    pub message: String,
    pub files: Vec<FileChange>,
    pub linked_issue_ids: Vec<u64>,
    /// False when the commit is linked to the issue but can no longer be
    /// retrieved from the repository.
    #[serde(default = "default_true")]
    pub available: bool,
}

fn default_true() -> bool {
    true
}

impl CommitRecord {
    pub fn lines_changed(&self) -> u64 {
        self.files.iter().map(|f| f.insertions + f.deletions).sum()
    }

    pub fn validate(&self) -> Result<(), String> {
        if !is_valid_sha(&self.sha) {
            return Err(format!("commit sha '{}' is not 40 lowercase hex digits", self.sha));
        }
        Ok(())
    }
}

pub fn is_valid_sha(sha: &str) -> bool {
    sha.len() == 40 && sha.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b))
}

/// One mined issue ticket.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IssueRecord {
    pub repo: String,
    pub issue_id: u64,
    pub title: String,
    #[serde(default)]
    pub body: String,
    pub labels: Vec<String>,
    pub state: IssueState,
    pub created_at: DateTime<Utc>,
    pub closed_at: Option<DateTime<Utc>>,
    pub reporter: String,
    #[serde(default)]
    pub commits: Vec<CommitRecord>,
}

impl IssueRecord {
    /// The report text fed to the classifiers.
    pub fn text(&self) -> String {
        if self.body.is_empty() {
            self.title.clone()
        } else {
            format!("{}\n\n{}", self.title, self.body)
        }
    }

    pub fn key(&self) -> (&str, u64) {
        (&self.repo, self.issue_id)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.issue_id == 0 {
            return Err("issue_id must be positive".into());
        }
        match self.repo.split_once('/') {
            Some((owner, name)) if !owner.is_empty() && !name.is_empty() && !name.contains('/') => {}
            _ => return Err(format!("repo '{}' is not of the form owner/name", self.repo)),
        }
        if let Some(closed) = self.closed_at {
            if closed < self.created_at {
                return Err(format!("closed_at {closed} precedes created_at {}", self.created_at));
            }
        }
        for c in &self.commits {
            c.validate()?;
        }
        Ok(())
    }
}

/// Main root-cause category. Declaration order is the class index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootCause {
    Semantic,
    Memory,
    Concurrency,
}

impl RootCause {
    pub const ALL: [RootCause; 3] = [RootCause::Semantic, RootCause::Memory, RootCause::Concurrency];

    pub fn as_str(self) -> &'static str {
        match self {
            RootCause::Semantic => "semantic",
            RootCause::Memory => "memory",
            RootCause::Concurrency => "concurrency",
        }
    }

    pub fn subcategories(self) -> &'static [SubCategory] {
        use SubCategory::*;
        match self {
            RootCause::Semantic => &[ExceptionHandling, MissingCase, Processing, Typo, Dependency, Other],
            RootCause::Memory => &[
                BufferOverflow,
                NullPointerDeref,
                UninitMemoryRead,
                MemoryLeak,
                DanglingPointer,
                DoubleFree,
                Other,
            ],
            RootCause::Concurrency => &[OrderViolation, RaceCondition, AtomicViolation, Deadlock, Other],
        }
    }
}

impl fmt::Display for RootCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RootCause {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RootCause::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown root cause category '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubCategory {
    ExceptionHandling,
    MissingCase,
    Processing,
    Typo,
    Dependency,
    BufferOverflow,
    NullPointerDeref,
    UninitMemoryRead,
    MemoryLeak,
    DanglingPointer,
    DoubleFree,
    OrderViolation,
    RaceCondition,
    AtomicViolation,
    Deadlock,
    Other,
}

impl SubCategory {
    const ALL: [SubCategory; 16] = [
        SubCategory::ExceptionHandling,
        SubCategory::MissingCase,
        SubCategory::Processing,
        SubCategory::Typo,
        SubCategory::Dependency,
        SubCategory::BufferOverflow,
        SubCategory::NullPointerDeref,
        SubCategory::UninitMemoryRead,
        SubCategory::MemoryLeak,
        SubCategory::DanglingPointer,
        SubCategory::DoubleFree,
        SubCategory::OrderViolation,
        SubCategory::RaceCondition,
        SubCategory::AtomicViolation,
        SubCategory::Deadlock,
        SubCategory::Other,
    ];

    pub fn as_str(self) -> &'static str {
        use SubCategory::*;
        match self {
            ExceptionHandling => "exception_handling",
            MissingCase => "missing_case",
            Processing => "processing",
            Typo => "typo",
            Dependency => "dependency",
            BufferOverflow => "buffer_overflow",
            NullPointerDeref => "null_pointer_deref",
            UninitMemoryRead => "uninit_memory_read",
            MemoryLeak => "memory_leak",
            DanglingPointer => "dangling_pointer",
            DoubleFree => "double_free",
            OrderViolation => "order_violation",
            RaceCondition => "race_condition",
            AtomicViolation => "atomic_violation",
            Deadlock => "deadlock",
            Other => "other",
        }
    }

    pub fn belongs_to(self, main: RootCause) -> bool {
        main.subcategories().contains(&self)
    }
}

impl fmt::Display for SubCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SubCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SubCategory::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown sub-category '{s}'"))
    }
}

/// A validated root-cause classification of one issue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawLabel", into = "RawLabel")]
pub struct RootCauseLabel {
    main: RootCause,
    sub: SubCategory,
    confidence: u8,
}

#[derive(Serialize, Deserialize)]
struct RawLabel {
    main: RootCause,
    sub: SubCategory,
    confidence: u8,
}

impl TryFrom<RawLabel> for RootCauseLabel {
    type Error = CorpusError;

    fn try_from(raw: RawLabel) -> Result<Self, Self::Error> {
        RootCauseLabel::new(raw.main, raw.sub, raw.confidence)
    }
}

impl From<RootCauseLabel> for RawLabel {
    fn from(l: RootCauseLabel) -> Self {
        RawLabel {
            main: l.main,
            sub: l.sub,
            confidence: l.confidence,
        }
    }
}

impl RootCauseLabel {
    pub fn new(main: RootCause, sub: SubCategory, confidence: u8) -> Result<Self, CorpusError> {
        if !sub.belongs_to(main) {
            return Err(CorpusError::InvalidLabel(format!(
                "sub-category '{sub}' does not belong to '{main}'"
            )));
        }
        if !(1..=10).contains(&confidence) {
            return Err(CorpusError::InvalidLabel(format!(
                "confidence {confidence} outside 1..=10"
            )));
        }
        Ok(Self { main, sub, confidence })
    }

    pub fn main(&self) -> RootCause {
        self.main
    }

    pub fn sub(&self) -> SubCategory {
        self.sub
    }

    pub fn confidence(&self) -> u8 {
        self.confidence
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelSource {
    RandomSample,
    KeywordSearch,
}

impl LabelSource {
    pub fn as_str(self) -> &'static str {
        match self {
            LabelSource::RandomSample => "random_sample",
            LabelSource::KeywordSearch => "keyword_search",
        }
    }
}

impl FromStr for LabelSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random_sample" => Ok(LabelSource::RandomSample),
            "keyword_search" => Ok(LabelSource::KeywordSearch),
            other => Err(format!("unknown label source '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledReport {
    pub issue: IssueRecord,
    pub label: RootCauseLabel,
    pub source: LabelSource,
}
