use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::types::IssueRecord;
use super::CorpusError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeywordClass {
    Memory,
    Concurrency,
}

impl KeywordClass {
    pub fn as_str(self) -> &'static str {
        match self {
            KeywordClass::Memory => "memory",
            KeywordClass::Concurrency => "concurrency",
        }
    }
}

/// Keyword lists per rare class, matched as case-folded substrings of
/// commit messages.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordConfig {
    pub memory: Vec<String>,
    pub concurrency: Vec<String>,
}

impl Default for KeywordConfig {
    fn default() -> Self {
        let v = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        Self {
            memory: v(&[
                "leak",
                "null pointer",
                "npe",
                "out of memory",
                "oom",
                "overflow",
                "dangling",
                "double free",
                "uninitialized",
            ]),
            concurrency: v(&[
                "race",
                "deadlock",
                "synchroniz",
                "concurren",
                "atomic",
                "thread-safe",
                "livelock",
            ]),
        }
    }
}

impl KeywordConfig {
    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let text = std::fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
        let cfg: Self =
            serde_json::from_str(&text).map_err(|e| CorpusError::InvalidConfig(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        for (class, list) in self.classes() {
            if list.is_empty() || list.iter().any(|k| k.trim().is_empty()) {
                return Err(CorpusError::InvalidConfig(format!(
                    "keyword list for {} must be non-empty and contain no blank keywords",
                    class.as_str()
                )));
            }
        }
        Ok(())
    }

    fn classes(&self) -> [(KeywordClass, &[String]); 2] {
        [
            (KeywordClass::Memory, &self.memory),
            (KeywordClass::Concurrency, &self.concurrency),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub repo: String,
    pub issue_id: u64,
    pub matched_keywords: Vec<String>,
    pub matched_class: KeywordClass,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CandidateSet {
    pub entries: Vec<Candidate>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// CSV with header `repo,issue_id,class,keywords`; keywords are joined
    /// with `;`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["repo", "issue_id", "class", "keywords"])?;
        for e in &self.entries {
            w.write_record([
                e.repo.as_str(),
                &e.issue_id.to_string(),
                e.matched_class.as_str(),
                &e.matched_keywords.join(";"),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Scans the commit messages linked to each issue. Report titles and bodies
/// are never inspected, keeping the selection signal separate from the
/// classifier input.
pub fn keyword_scan(issues: &[IssueRecord], keywords: &KeywordConfig) -> CandidateSet {
    let mut entries = Vec::new();
    for issue in issues {
        let messages: Vec<String> = issue.commits.iter().map(|c| c.message.to_lowercase()).collect();
        for (class, list) in keywords.classes() {
            let matched: BTreeSet<&str> = list
                .iter()
                .filter(|k| {
                    let k = k.to_lowercase();
                    messages.iter().any(|m| m.contains(&k))
                })
                .map(String::as_str)
                .collect();
            if !matched.is_empty() {
                entries.push(Candidate {
                    repo: issue.repo.clone(),
                    issue_id: issue.issue_id,
                    matched_keywords: matched.into_iter().map(str::to_string).collect(),
                    matched_class: class,
                });
            }
        }
    }
    CandidateSet { entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::testutil::{commit, issue};

    fn with_message(msg: &str) -> IssueRecord {
        let mut c = commit(1, 1, "src/A.java");
        c.message = msg.into();
        issue(1, &["bug"], vec![c])
    }

    #[test]
    fn deadlock_is_concurrency() {
        let set = keyword_scan(
            &[with_message("fix deadlock in pool shutdown")],
            &KeywordConfig::default(),
        );
        assert_eq!(set.len(), 1);
        assert_eq!(set.entries[0].matched_class, KeywordClass::Concurrency);
        assert_eq!(set.entries[0].matched_keywords, vec!["deadlock"]);
    }

    #[test]
    fn docs_commit_has_no_match() {
        assert!(keyword_scan(&[with_message("improve docs")], &KeywordConfig::default()).is_empty());
    }

    #[test]
    fn both_classes_match_independently() {
        let set = keyword_scan(
            &[with_message("Fix LEAK caused by race in cache")],
            &KeywordConfig::default(),
        );
        let classes: Vec<_> = set.entries.iter().map(|e| e.matched_class).collect();
        assert_eq!(classes, vec![KeywordClass::Memory, KeywordClass::Concurrency]);
    }

    #[test]
    fn report_text_not_scanned() {
        let mut i = with_message("improve docs");
        i.title = "deadlock and memory leak".into();
        i.body = "race race race".into();
        assert!(keyword_scan(&[i], &KeywordConfig::default()).is_empty());
    }

    #[test]
    fn csv_output() {
        let set = keyword_scan(&[with_message("fix npe and leak")], &KeywordConfig::default());
        let mut buf = Vec::new();
        set.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "repo,issue_id,class,keywords\nacme/widgets,1,memory,leak;npe\n"
        );
    }

    #[test]
    fn empty_list_rejected() {
        let cfg = KeywordConfig {
            memory: vec![],
            concurrency: vec!["race".into()],
        };
        assert!(cfg.validate().is_err());
    }
}
