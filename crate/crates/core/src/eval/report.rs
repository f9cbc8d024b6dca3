use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::experiment::ExperimentReport;
use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Csv,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            _ => Err(format!("unknown report format '{s}' (expected csv or markdown)")),
        }
    }
}

pub const REPORT_COLUMNS: [&str; 7] = ["kind", "metric", "mean", "median", "std", "min", "max"];

/// Aggregate table, one row per (kind, metric). CSV keeps full precision;
/// markdown rounds to four decimals.
pub fn render_report(report: &ExperimentReport, format: ReportFormat) -> String {
    let mut out = String::new();
    match format {
        ReportFormat::Csv => {
            out.push_str(&REPORT_COLUMNS.join(","));
            out.push('\n');
        }
        ReportFormat::Markdown => {
            let _ = writeln!(out, "| {} |", REPORT_COLUMNS.join(" | "));
            let _ = writeln!(out, "|{}", "---|".repeat(REPORT_COLUMNS.len()));
        }
    }
    for k in &report.kinds {
        for (metric, a) in k.aggregates.rows() {
            let vals = [a.mean, a.median, a.std, a.min, a.max];
            match format {
                ReportFormat::Csv => {
                    let v: Vec<String> = vals.iter().map(|x| x.to_string()).collect();
                    let _ = writeln!(out, "{},{},{}", k.kind, metric, v.join(","));
                }
                ReportFormat::Markdown => {
                    let v: Vec<String> = vals.iter().map(|x| format!("{x:.4}")).collect();
                    let _ = writeln!(out, "| {} | {} | {} |", k.kind, metric, v.join(" | "));
                }
            }
        }
    }
    out
}

/// Writes `report.json`, `report.csv` and `report.md` into `dir`.
pub fn write_report_files(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>, EvalError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| EvalError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let json = serde_json::to_string_pretty(report).map_err(|e| EvalError::InvalidConfig(e.to_string()))?;
    let files = [
        ("report.json", json + "\n"),
        ("report.csv", render_report(report, ReportFormat::Csv)),
        ("report.md", render_report(report, ReportFormat::Markdown)),
    ];
    let mut written = Vec::new();
    for (name, body) in files {
        let p = dir.join(name);
        std::fs::write(&p, body).map_err(io(&p))?;
        written.push(p);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn empty() -> ExperimentReport {
        ExperimentReport {
            n_runs: 0,
            master_seed: 0,
            test_fraction: 0.2,
            folds: 5,
            class_names: vec![],
            seeds: vec![],
            kinds: vec![],
        }
    }

    #[test]
    fn empty_report_is_header_only() {
        assert_eq!(
            render_report(&empty(), ReportFormat::Csv),
            "kind,metric,mean,median,std,min,max\n"
        );
        let md = render_report(&empty(), ReportFormat::Markdown);
        assert_eq!(md.lines().count(), 2);
        assert!(md.starts_with("| kind | metric |"));
    }

    #[test]
    fn format_names() {
        assert_eq!("md".parse::<ReportFormat>().unwrap(), ReportFormat::Markdown);
        assert!("html".parse::<ReportFormat>().is_err());
    }
}
