use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::types::{IssueRecord, LabeledReport};
use super::CorpusError;

/// A line that could not be loaded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedLine {
    /// 1-based physical line number.
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Loaded<T> {
    pub records: Vec<T>,
    pub skipped: Vec<SkippedLine>,
}

/// Reads a dump of one JSON issue per line. Unparseable or invalid lines
/// are skipped with a warning; duplicate `(repo, issue_id)` pairs keep the
/// first occurrence.
pub fn load_dump(path: &Path) -> Result<Loaded<IssueRecord>, CorpusError> {
    let mut seen = HashSet::new();
    read_jsonl(path, |issue: &IssueRecord| {
        issue.validate()?;
        if !seen.insert((issue.repo.clone(), issue.issue_id)) {
            return Err(format!("duplicate issue {}#{}", issue.repo, issue.issue_id));
        }
        Ok(())
    })
}

pub fn write_dump(records: &[IssueRecord], path: &Path) -> Result<usize, CorpusError> {
    write_jsonl(records, path)
}

/// Training-set files hold one [`LabeledReport`] per line.
pub fn load_labeled(path: &Path) -> Result<Loaded<LabeledReport>, CorpusError> {
    let mut seen = HashSet::new();
    read_jsonl(path, |r: &LabeledReport| {
        r.issue.validate()?;
        if !seen.insert((r.issue.repo.clone(), r.issue.issue_id)) {
            return Err(format!("duplicate issue {}#{}", r.issue.repo, r.issue.issue_id));
        }
        Ok(())
    })
}

pub fn write_labeled(records: &[LabeledReport], path: &Path) -> Result<usize, CorpusError> {
    write_jsonl(records, path)
}

pub(crate) fn read_jsonl<T, F>(path: &Path, mut check: F) -> Result<Loaded<T>, CorpusError>
where
    T: DeserializeOwned,
    F: FnMut(&T) -> Result<(), String>,
{
    let file = File::open(path).map_err(|e| CorpusError::io(path, e))?;
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CorpusError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<T>(&line)
            .map_err(|e| e.to_string())
            .and_then(|rec| check(&rec).map(|_| rec));
        match parsed {
            Ok(rec) => records.push(rec),
            Err(reason) => {
                log::warn!("{}:{}: skipping record: {reason}", path.display(), n + 1);
                skipped.push(SkippedLine { line: n + 1, reason });
            }
        }
    }
    if !skipped.is_empty() {
        log::warn!("{}: skipped {} malformed record(s)", path.display(), skipped.len());
    }
    Ok(Loaded { records, skipped })
}

pub(crate) fn write_jsonl<T: Serialize>(records: &[T], path: &Path) -> Result<usize, CorpusError> {
    let file = File::create(path).map_err(|e| CorpusError::io(path, e))?;
    let mut out = BufWriter::new(file);
    for rec in records {
        serde_json::to_writer(&mut out, rec).map_err(|e| CorpusError::io(path, e.into()))?;
        out.write_all(b"\n").map_err(|e| CorpusError::io(path, e))?;
    }
    out.flush().map_err(|e| CorpusError::io(path, e))?;
    Ok(records.len())
}
