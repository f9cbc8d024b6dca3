use std::collections::{HashMap, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use super::types::{IssueRecord, LabelSource, LabeledReport, RootCause, RootCauseLabel, SubCategory};
use super::CorpusError;

/// One row of a label file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelRow {
    pub repo: String,
    pub issue_id: u64,
    pub label: RootCauseLabel,
    pub source: LabelSource,
}

const HEADER: [&str; 6] = ["repo", "issue_id", "main", "sub", "confidence", "source"];

pub fn load_labels(path: &Path) -> Result<Vec<LabelRow>, CorpusError> {
    let file = std::fs::File::open(path).map_err(|e| CorpusError::io(path, e))?;
    parse_labels(file)
}

/// Parses `repo,issue_id,main,sub,confidence,source` rows. Any invalid row
/// aborts with its 1-based line number (the header is line 1).
pub fn parse_labels<R: Read>(input: R) -> Result<Vec<LabelRow>, CorpusError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = reader
        .headers()
        .map_err(|e| CorpusError::label(1, e.to_string()))?
        .clone();
    if header.iter().map(str::trim).ne(HEADER) {
        return Err(CorpusError::label(1, format!("expected header '{}'", HEADER.join(","))));
    }
    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| CorpusError::label(line, e.to_string()))?;
        let field = |k: usize| rec.get(k).unwrap_or("").trim();
        let issue_id: u64 = field(1)
            .parse()
            .map_err(|_| CorpusError::label(line, format!("invalid issue_id '{}'", field(1))))?;
        let main: RootCause = field(2).parse().map_err(|e| CorpusError::label(line, e))?;
        let sub: SubCategory = field(3).parse().map_err(|e| CorpusError::label(line, e))?;
        let confidence: u8 = field(4)
            .parse()
            .map_err(|_| CorpusError::label(line, format!("invalid confidence '{}'", field(4))))?;
        let source: LabelSource = field(5).parse().map_err(|e| CorpusError::label(line, e))?;
        let label = RootCauseLabel::new(main, sub, confidence).map_err(|e| CorpusError::label(line, e.to_string()))?;
        let repo = field(0).to_string();
        if !seen.insert((repo.clone(), issue_id)) {
            return Err(CorpusError::label(
                line,
                format!("duplicate label for {repo}#{issue_id}"),
            ));
        }
        rows.push(LabelRow {
            repo,
            issue_id,
            label,
            source,
        });
    }
    Ok(rows)
}

pub fn write_labels<W: Write>(rows: &[LabelRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record([
            r.repo.as_str(),
            &r.issue_id.to_string(),
            r.label.main().as_str(),
            r.label.sub().as_str(),
            &r.label.confidence().to_string(),
            r.source.as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Attaches labels to issues by `(repo, issue_id)`. Issues without a label
/// are dropped; labels without an issue are counted in the second value.
pub fn join_labels(issues: &[IssueRecord], rows: &[LabelRow]) -> (Vec<LabeledReport>, usize) {
    let by_key: HashMap<(&str, u64), &IssueRecord> =
        issues.iter().map(|i| ((i.repo.as_str(), i.issue_id), i)).collect();
    let mut out = Vec::new();
    let mut missing = 0;
    for r in rows {
        match by_key.get(&(r.repo.as_str(), r.issue_id)) {
            Some(issue) => out.push(LabeledReport {
                issue: (*issue).clone(),
                label: r.label,
                source: r.source,
            }),
            None => missing += 1,
        }
    }
    (out, missing)
}
