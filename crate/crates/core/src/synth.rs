//! Deterministic synthetic corpus with class-distinctive vocabulary, for
//! smoke tests and demos.

use chrono::{Duration, TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{IssueRecord, IssueState, LabelSource, LabeledReport, RootCause, RootCauseLabel, SubCategory};

const SEMANTIC: &[&str] = &[
    "incorrect",
    "wrong",
    "result",
    "calculation",
    "format",
    "parser",
    "validation",
    "rounding",
    "logic",
    "mismatch",
    "expected",
    "returns",
    "typo",
    "encoding",
    "condition",
    "branch",
    "comparison",
    "offset",
];
const MEMORY: &[&str] = &[
    "leak",
    "heap",
    "outofmemoryerror",
    "allocation",
    "garbage",
    "buffer",
    "overflow",
    "native",
    "retained",
    "footprint",
    "oom",
    "pool",
    "dangling",
    "pointer",
    "freed",
    "bytes",
    "growing",
    "collector",
];
const CONCURRENCY: &[&str] = &[
    "deadlock",
    "race",
    "thread",
    "threads",
    "lock",
    "synchronized",
    "concurrent",
    "atomic",
    "waiting",
    "monitor",
    "volatile",
    "executor",
    "contention",
    "starvation",
    "interleaving",
    "mutex",
    "parallel",
    "hang",
];
const FILLER: &[&str] = &[
    "server",
    "client",
    "request",
    "version",
    "upgrade",
    "build",
    "module",
    "class",
    "method",
    "error",
    "crash",
    "log",
    "user",
    "report",
    "production",
    "call",
    "service",
    "component",
    "update",
    "start",
    "stop",
    "job",
    "task",
    "api",
    "release",
    "plugin",
    "screen",
    "window",
    "page",
    "file",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub docs_per_class: usize,
    pub seed: u64,
    pub title_words: usize,
    pub body_words: usize,
    /// Probability that a body word comes from the class vocabulary rather
    /// than the shared filler.
    pub class_word_share: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            docs_per_class: 50,
            seed: 42,
            title_words: 5,
            body_words: 24,
            class_word_share: 0.4,
        }
    }
}

fn vocabulary(c: RootCause) -> &'static [&'static str] {
    match c {
        RootCause::Semantic => SEMANTIC,
        RootCause::Memory => MEMORY,
        RootCause::Concurrency => CONCURRENCY,
    }
}

fn sub_category(c: RootCause) -> SubCategory {
    match c {
        RootCause::Semantic => SubCategory::Processing,
        RootCause::Memory => SubCategory::MemoryLeak,
        RootCause::Concurrency => SubCategory::Deadlock,
    }
}

fn words(rng: &mut ChaCha8Rng, own: &[&str], n: usize, share: f64) -> String {
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let pool = if rng.gen_bool(share) { own } else { FILLER };
        out.push(*pool.choose(rng).expect("non-empty vocabulary"));
    }
    out.join(" ")
}

/// `3 * docs_per_class` labeled reports, classes interleaved, issue ids
/// starting at 1.
pub fn synthetic_corpus(cfg: &SynthConfig) -> Vec<LabeledReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let start = Utc.with_ymd_and_hms(2020, 1, 1, 0, 0, 0).unwrap();
    let mut out = Vec::with_capacity(cfg.docs_per_class * 3);
    for i in 0..cfg.docs_per_class * 3 {
        let cause = RootCause::ALL[i % 3];
        let own = vocabulary(cause);
        let id = i as u64 + 1;
        let mut title = words(&mut rng, own, cfg.title_words.saturating_sub(1), cfg.class_word_share);
        let anchor = own.choose(&mut rng).expect("non-empty vocabulary");
        title = if title.is_empty() {
            anchor.to_string()
        } else {
            format!("{anchor} {title}")
        };
        let body = words(&mut rng, own, cfg.body_words, cfg.class_word_share);
        let created_at = start + Duration::hours(id as i64);
        out.push(LabeledReport {
            issue: IssueRecord {
                repo: "synthetic/rootcause".to_string(),
                issue_id: id,
                title,
                body,
                labels: vec!["bug".to_string()],
                state: IssueState::Closed,
                created_at,
                closed_at: Some(created_at + Duration::days(1)),
                reporter: "synth".to_string(),
                commits: Vec::new(),
            },
            label: RootCauseLabel::new(cause, sub_category(cause), 10).expect("sub-category matches"),
            source: LabelSource::RandomSample,
        });
    }
    out
}
