//! Command-line entry point.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use crate::corpus::{
    compose_training_set, corpus_stats, filter_corpus, join_labels, keyword_scan, load_dump, load_labeled, load_labels,
    write_dump, write_labeled, write_labels, CompositionConfig, FilterConfig, IssueRecord, KeywordConfig, LabelRow,
    LabeledReport,
};
use crate::eval::{
    apply_combination, run_experiment, write_report_files, Combination, ExperimentConfig, HyperValue, TextCorpus,
};
use crate::githubclient::{ApiConfig, GithubClient, RepoRef, ReqwestTransport, SystemClock};
use crate::models::{load_model, save_model, ClassifierKind, TextClassifier};
use crate::synth::{synthetic_corpus, SynthConfig};
use crate::textprep::{VectorizerConfig, Weighting};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "rootcause",
    version,
    about = "Mine bug-report corpora and classify reports by root cause"
)]
pub struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Download closed bug issues and linked commits into a dump.
    Fetch(FetchArgs),
    /// Apply the bug-fix heuristics to a dump.
    Filter(FilterArgs),
    /// List issues whose fix commits mention class keywords.
    ScanKeywords(ScanArgs),
    /// Build the training set from labeled issues.
    Compose(ComposeArgs),
    /// Fit a vectorizer and classifier and save the model.
    Train(TrainArgs),
    /// Classify one report with a saved model.
    Predict(PredictArgs),
    /// Run the repeated randomized-split experiment.
    Experiment(ExperimentArgs),
    /// Write a synthetic labeled corpus.
    Synth(SynthArgs),
    /// Summarize a dump and optional labels.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
struct FetchArgs {
    /// Repository as owner/name.
    repo: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    cache_dir: PathBuf,
    #[arg(long, default_value = "https://api.github.com")]
    base_url: String,
    #[arg(long, default_value_t = 100)]
    page_size: usize,
    #[arg(long, default_value_t = 5)]
    max_retries: usize,
    /// Label substrings marking bug issues (repeatable).
    #[arg(long = "label")]
    labels: Vec<String>,
}

#[derive(Debug, Args)]
struct FilterArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    report: PathBuf,
    /// JSON file with filter settings.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    max_commits: Option<usize>,
    #[arg(long)]
    max_files: Option<usize>,
    #[arg(long)]
    max_lines: Option<u64>,
}

#[derive(Debug, Args)]
struct ScanArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// JSON keyword lists; built-in lists when omitted.
    #[arg(long)]
    keywords: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ComposeArgs {
    #[arg(long)]
    labels: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 8)]
    min_confidence: u8,
    #[arg(long, default_value_t = 0.05)]
    semantic_keyword_cap: f64,
}

#[derive(Debug, Args)]
struct VectorizerArgs {
    #[arg(long)]
    weighting: Option<Weighting>,
    #[arg(long)]
    min_df: Option<usize>,
    #[arg(long)]
    ngram_min: Option<usize>,
    #[arg(long)]
    ngram_max: Option<usize>,
    #[arg(long)]
    max_features: Option<usize>,
    #[arg(long)]
    stopwords: Option<String>,
}

impl VectorizerArgs {
    fn apply(&self, mut cfg: VectorizerConfig) -> VectorizerConfig {
        if let Some(w) = self.weighting {
            cfg.weighting = w;
        }
        if let Some(v) = self.min_df {
            cfg.min_df = v;
        }
        if let Some(v) = self.ngram_min {
            cfg.ngram_min = v;
        }
        if let Some(v) = self.ngram_max {
            cfg.ngram_max = v;
        }
        if self.max_features.is_some() {
            cfg.max_features = self.max_features;
        }
        if let Some(s) = &self.stopwords {
            cfg.stopword_list_id = s.clone();
        }
        cfg
    }
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Labeled training set, or an issue dump when --labels is given.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long)]
    model_kind: ClassifierKind,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Hyperparameter override as name=value (repeatable).
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, HyperValue)>,
    #[command(flatten)]
    vectorizer: VectorizerArgs,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, conflicts_with = "file")]
    text: Option<String>,
    #[arg(long)]
    file: Option<PathBuf>,
    /// Human-readable output instead of tab-separated.
    #[arg(long)]
    pretty: bool,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's output_dir.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Labeled training set (JSONL).
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    per_class: usize,
    /// Also write the issues as a plain dump.
    #[arg(long)]
    dump: Option<PathBuf>,
    /// Also write the labels as CSV.
    #[arg(long = "labels-out")]
    labels_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    labels: Option<PathBuf>,
}

fn parse_param(s: &str) -> Result<(String, HyperValue), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected name=value, got '{s}'"))?;
    let value = match value {
        "none" | "null" => HyperValue::None,
        v => v
            .parse::<f64>()
            .map(HyperValue::Number)
            .unwrap_or_else(|_| HyperValue::Text(v.to_string())),
    };
    Ok((name.to_string(), value))
}

/// Error carrying the process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub error: anyhow::Error,
}

trait Classify<T> {
    fn data(self) -> Result<T, CliError>;
    fn runtime(self) -> Result<T, CliError>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn data(self) -> Result<T, CliError> {
        self.map_err(|e| CliError {
            code: EXIT_DATA,
            error: e.into(),
        })
    }

    fn runtime(self) -> Result<T, CliError> {
        self.map_err(|e| CliError {
            code: EXIT_RUNTIME,
            error: e.into(),
        })
    }
}

fn usage(e: anyhow::Error) -> CliError {
    CliError {
        code: EXIT_USAGE,
        error: e,
    }
}

fn report_skips<T>(path: &Path, loaded: &crate::corpus::Loaded<T>) {
    if !loaded.skipped.is_empty() {
        eprintln!("{}: skipped {} malformed line(s)", path.display(), loaded.skipped.len());
    }
}

fn write_json<T: serde::Serialize>(value: &T, path: &Path) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn read_json<T: for<'de> serde::Deserialize<'de>>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Labeled reports from either a labeled set alone, or issues (dump or
/// labeled set) joined with a label CSV.
fn load_training_reports(input: &Path, labels: Option<&Path>) -> anyhow::Result<Vec<LabeledReport>> {
    let labeled = load_labeled(input)?;
    let Some(lp) = labels else {
        report_skips(input, &labeled);
        return Ok(labeled.records);
    };
    let issues: Vec<IssueRecord> = if labeled.records.is_empty() {
        let d = load_dump(input)?;
        report_skips(input, &d);
        d.records
    } else {
        labeled.records.into_iter().map(|r| r.issue).collect()
    };
    let rows = load_labels(lp)?;
    let (joined, missing) = join_labels(&issues, &rows);
    if missing > 0 {
        eprintln!("{missing} label row(s) did not match an issue");
    }
    Ok(joined)
}

fn cmd_fetch(a: FetchArgs) -> Result<(), CliError> {
    let repo: RepoRef = a
        .repo
        .parse()
        .map_err(|e: crate::githubclient::GithubError| usage(e.into()))?;
    let mut cfg = ApiConfig::new(a.cache_dir).with_env_token();
    cfg.base_url = a.base_url;
    cfg.page_size = a.page_size;
    cfg.max_retries = a.max_retries;
    let labels = if a.labels.is_empty() {
        FilterConfig::default().bug_label_substrings
    } else {
        a.labels
    };
    let transport = ReqwestTransport::new().runtime()?;
    let mut client = GithubClient::new(cfg, Box::new(transport), Box::new(SystemClock)).map_err(|e| usage(e.into()))?;
    let issues = client.fetch_repository(&repo, &labels).runtime()?;
    let n = write_dump(&issues, &a.out).runtime()?;
    eprintln!(
        "wrote {n} issues to {} ({} network requests)",
        a.out.display(),
        client.network_requests()
    );
    Ok(())
}

fn cmd_filter(a: FilterArgs) -> Result<(), CliError> {
    let mut cfg: FilterConfig = match &a.config {
        Some(p) => read_json(p).data()?,
        None => FilterConfig::default(),
    };
    if let Some(v) = a.max_commits {
        cfg.max_commits_per_issue = v;
    }
    if let Some(v) = a.max_files {
        cfg.max_files_per_commit = v;
    }
    if let Some(v) = a.max_lines {
        cfg.max_lines_per_commit = v;
    }
    cfg.validate().map_err(|e| usage(e.into()))?;
    let loaded = load_dump(&a.input).data()?;
    report_skips(&a.input, &loaded);
    let (accepted, report) = filter_corpus(&loaded.records, &cfg);
    write_dump(&accepted, &a.out).runtime()?;
    write_json(&report, &a.report).runtime()?;
    eprintln!("accepted {} of {} issues", report.accepted, report.total);
    Ok(())
}

fn cmd_scan(a: ScanArgs) -> Result<(), CliError> {
    let kw = match &a.keywords {
        Some(p) => KeywordConfig::load(p).data()?,
        None => KeywordConfig::default(),
    };
    let loaded = load_dump(&a.input).data()?;
    report_skips(&a.input, &loaded);
    let set = keyword_scan(&loaded.records, &kw);
    let f = std::fs::File::create(&a.out)
        .with_context(|| format!("creating {}", a.out.display()))
        .runtime()?;
    set.write_csv(f).runtime()?;
    eprintln!("{} candidate(s)", set.entries.len());
    Ok(())
}

fn cmd_compose(a: ComposeArgs) -> Result<(), CliError> {
    let cfg = CompositionConfig {
        min_confidence: a.min_confidence,
        semantic_keyword_cap: a.semantic_keyword_cap,
    };
    cfg.validate().map_err(|e| usage(e.into()))?;
    let loaded = load_dump(&a.input).data()?;
    report_skips(&a.input, &loaded);
    let rows = load_labels(&a.labels).data()?;
    let (joined, missing) = join_labels(&loaded.records, &rows);
    if missing > 0 {
        eprintln!("{missing} label row(s) did not match an issue");
    }
    let set = compose_training_set(&joined, &cfg, a.seed).data()?;
    let n = write_labeled(&set, &a.out).runtime()?;
    eprintln!("wrote {n} training reports to {}", a.out.display());
    Ok(())
}

fn cmd_train(a: TrainArgs) -> Result<(), CliError> {
    let reports = load_training_reports(&a.input, a.labels.as_deref()).data()?;
    if reports.is_empty() {
        return Err(CliError {
            code: EXIT_DATA,
            error: anyhow!("{}: no labeled reports", a.input.display()),
        });
    }
    let corpus = TextCorpus::from_reports(&reports);
    let combo: Combination = a.params.into_iter().collect();
    let base = a.vectorizer.apply(VectorizerConfig::default());
    let (vec_cfg, spec) = apply_combination(a.model_kind, &combo, &base).map_err(|e| usage(e.into()))?;
    let clf = TextClassifier::fit(
        &corpus.docs,
        &corpus.y,
        &corpus.class_names,
        &vec_cfg,
        &spec.with_seed(a.seed),
    )
    .data()?;
    save_model(&clf.model, &clf.vectorizer, &a.out).runtime()?;
    eprintln!(
        "trained {} on {} reports ({} features) -> {}",
        a.model_kind,
        corpus.len(),
        clf.vectorizer.dim(),
        a.out.display()
    );
    Ok(())
}

fn cmd_predict(a: PredictArgs) -> Result<(), CliError> {
    let clf = load_model(&a.model).data()?;
    let text = match (a.text, a.file) {
        (Some(t), _) => t,
        (None, Some(p)) => std::fs::read_to_string(&p)
            .with_context(|| format!("reading {}", p.display()))
            .data()?,
        (None, None) => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .context("reading stdin")
                .data()?;
            s
        }
    };
    let pred = clf.predict_text(&text).runtime()?;
    let names = &clf.model.class_names;
    let mut out = std::io::stdout().lock();
    let res = if a.pretty {
        let label = if clf.model.kind.emits_probabilities() {
            "probability"
        } else {
            "margin"
        };
        let mut s = format!("predicted: {}\n", names[pred.class]);
        for (n, v) in names.iter().zip(&pred.scores) {
            s.push_str(&format!("  {n:<12} {label} {v:.4}\n"));
        }
        out.write_all(s.as_bytes())
    } else {
        let scores: Vec<String> = pred.scores.iter().map(f64::to_string).collect();
        writeln!(out, "{}\t{}", names[pred.class], scores.join("\t"))
    };
    res.runtime()
}

fn cmd_experiment(a: ExperimentArgs) -> Result<(), CliError> {
    let cfg = ExperimentConfig::load(&a.config).data()?;
    let out = a.out.or(cfg.output_dir.clone()).ok_or_else(|| {
        usage(anyhow!(
            "no output directory: pass --out or set output_dir in the config"
        ))
    })?;
    let reports = load_training_reports(&cfg.dataset, cfg.labels.as_deref()).data()?;
    let corpus = TextCorpus::from_reports(&reports);
    let report = run_experiment(&corpus, &cfg.settings).runtime()?;
    let files = write_report_files(&report, &out).runtime()?;
    for f in files {
        eprintln!("wrote {}", f.display());
    }
    Ok(())
}

fn cmd_synth(a: SynthArgs) -> Result<(), CliError> {
    if a.per_class == 0 {
        return Err(usage(anyhow!("--per-class must be at least 1")));
    }
    let reports = synthetic_corpus(&SynthConfig {
        docs_per_class: a.per_class,
        seed: a.seed,
        ..Default::default()
    });
    write_labeled(&reports, &a.out).runtime()?;
    if let Some(p) = &a.dump {
        let issues: Vec<IssueRecord> = reports.iter().map(|r| r.issue.clone()).collect();
        write_dump(&issues, p).runtime()?;
    }
    if let Some(p) = &a.labels_out {
        let rows: Vec<LabelRow> = reports
            .iter()
            .map(|r| LabelRow {
                repo: r.issue.repo.clone(),
                issue_id: r.issue.issue_id,
                label: r.label,
                source: r.source,
            })
            .collect();
        let f = std::fs::File::create(p)
            .with_context(|| format!("creating {}", p.display()))
            .runtime()?;
        write_labels(&rows, f).runtime()?;
    }
    eprintln!("wrote {} synthetic reports to {}", reports.len(), a.out.display());
    Ok(())
}

fn cmd_stats(a: StatsArgs) -> Result<(), CliError> {
    let loaded = load_dump(&a.input).data()?;
    report_skips(&a.input, &loaded);
    let rows = match &a.labels {
        Some(p) => load_labels(p).data()?,
        None => Vec::new(),
    };
    let stats = corpus_stats(&loaded.records, &rows);
    let text = serde_json::to_string_pretty(&stats).runtime()?;
    println!("{text}");
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Fetch(a) => cmd_fetch(a),
        Command::Filter(a) => cmd_filter(a),
        Command::ScanKeywords(a) => cmd_scan(a),
        Command::Compose(a) => cmd_compose(a),
        Command::Train(a) => cmd_train(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Stats(a) => cmd_stats(a),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {:#}", e.error);
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn param_values() {
        assert_eq!(
            parse_param("alpha=0.5").unwrap(),
            ("alpha".into(), HyperValue::Number(0.5))
        );
        assert_eq!(parse_param("max_depth=none").unwrap().1, HyperValue::None);
        assert_eq!(
            parse_param("schedule=inv_t").unwrap().1,
            HyperValue::Text("inv_t".into())
        );
        assert!(parse_param("alpha").is_err());
    }
}
