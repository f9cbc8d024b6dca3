#![allow(dead_code)]

use std::collections::BTreeMap;

use chrono::{Duration, TimeZone, Utc};
use serde_json::json;

use rootcause::corpus::{
    CommitRecord, FileChange, FilterReport, IssueRecord, IssueState, LabelSource, LabeledReport, RootCause,
    RootCauseLabel, SubCategory,
};
use rootcause::githubclient::fixture::{FakeClock, FixtureServer};
use rootcause::githubclient::{ApiConfig, Response};

pub const REPO: &str = "acme/widgets";
pub const BASE_URL: &str = "http://fixture.test";

pub fn sha(n: u64) -> String {
    format!("{n:040x}")
}

pub fn file(path: &str, ins: u64, del: u64) -> FileChange {
    FileChange {
        path: path.to_string(),
        insertions: ins,
        deletions: del,
    }
}

pub fn commit(n: u64, issue: u64, files: Vec<FileChange>) -> CommitRecord {
    CommitRecord {
        sha: sha(n),
        message: format!("Fixes #{issue}"),
        files,
        linked_issue_ids: vec![issue],
        available: true,
    }
}

pub fn issue(id: u64, labels: &[&str], commits: Vec<CommitRecord>) -> IssueRecord {
    let created = Utc.with_ymd_and_hms(2019, 3, 1, 9, 0, 0).unwrap() + Duration::hours(id as i64);
    IssueRecord {
        repo: REPO.to_string(),
        issue_id: id,
        title: format!("problem {id}"),
        body: format!("details for {id}"),
        labels: labels.iter().map(|s| s.to_string()).collect(),
        state: IssueState::Closed,
        created_at: created,
        closed_at: Some(created + Duration::days(2)),
        reporter: "bob".to_string(),
        commits,
    }
}

fn prod(i: u64) -> FileChange {
    file(&format!("src/main/java/org/acme/C{i}.java"), 3, 1)
}

/// Twenty issues exercising every rule and each boundary.
pub struct FilterFixture {
    pub issues: Vec<IssueRecord>,
    pub accepted: Vec<u64>,
    pub report: FilterReport,
}

pub fn filter_fixture() -> FilterFixture {
    let bug = &["bug"][..];
    let mut n = 0u64;
    let mut next = || {
        n += 1;
        n
    };
    let mut many = |issue_id: u64, count: usize| -> Vec<CommitRecord> {
        (0..count)
            .map(|_| commit(next(), issue_id, vec![prod(issue_id)]))
            .collect()
    };
    let mut issues = vec![
        issue(1, bug, many(1, 1)),
        issue(2, bug, many(2, 9)),
        issue(3, bug, many(3, 10)),
    ];
    let files = |k: usize| (0..k as u64).map(prod).collect::<Vec<_>>();
    issues.push(issue(4, bug, vec![commit(1001, 4, files(19))]));
    issues.push(issue(5, bug, vec![commit(1002, 5, files(20))]));
    issues.push(issue(6, bug, vec![commit(1003, 6, vec![file("src/A.java", 200, 49)])]));
    issues.push(issue(7, bug, vec![commit(1004, 7, vec![file("src/A.java", 125, 125)])]));
    issues.push(issue(8, bug, vec![]));
    let mut gone = commit(1005, 9, vec![prod(9)]);
    gone.available = false;
    issues.push(issue(9, bug, vec![gone]));
    let mut shared = commit(1006, 10, vec![prod(10)]);
    shared.message = "Fixes #10 and #11".into();
    shared.linked_issue_ids = vec![10, 11];
    issues.push(issue(10, bug, vec![shared]));
    issues.push(issue(
        11,
        bug,
        vec![commit(1007, 11, vec![file("src/test/java/org/acme/CTest.java", 5, 0)])],
    ));
    issues.push(issue(
        12,
        bug,
        vec![commit(1008, 12, vec![file("README.md", 2, 2), file("build.xml", 1, 0)])],
    ));
    issues.push(issue(13, &["enhancement"], many(13, 1)));
    issues.push(issue(14, &["Type: Defect"], many(14, 1)));
    let mut open = issue(15, bug, many(15, 1));
    open.state = IssueState::Open;
    open.closed_at = None;
    issues.push(open);
    issues.push(issue(
        16,
        bug,
        vec![commit(
            1009,
            16,
            vec![file("src/test/java/FooTest.java", 9, 0), prod(16)],
        )],
    ));
    issues.push(issue(
        17,
        bug,
        vec![commit(1010, 17, vec![file("test/org/Foo.java", 4, 4)])],
    ));
    issues.push(issue(
        18,
        bug,
        vec![
            commit(1011, 18, vec![prod(18)]),
            commit(1012, 18, vec![file("src/B.java", 150, 150)]),
        ],
    ));
    let mut mixed = many(19, 10);
    mixed[4].linked_issue_ids = vec![19, 20];
    issues.push(issue(19, bug, mixed));
    issues.push(issue(20, &["regression"], many(20, 2)));

    FilterFixture {
        issues,
        accepted: vec![1, 2, 4, 6, 14, 16, 20],
        report: FilterReport {
            total: 20,
            accepted: 7,
            not_bug: 2,
            no_commits: 2,
            multi_issue_commit: 2,
            too_many_commits: 1,
            too_many_files: 1,
            too_many_lines: 2,
            no_production_code: 3,
        },
    }
}

pub fn labeled(id: u64, main: RootCause, source: LabelSource, confidence: u8) -> LabeledReport {
    let sub = match main {
        RootCause::Semantic => SubCategory::Processing,
        RootCause::Memory => SubCategory::MemoryLeak,
        RootCause::Concurrency => SubCategory::RaceCondition,
    };
    LabeledReport {
        issue: issue(id, &["bug"], vec![]),
        label: RootCauseLabel::new(main, sub, confidence).unwrap(),
        source,
    }
}

/// 119 random-sample and 150 keyword-search semantic reports, 60 memory and
/// 60 concurrency reports, plus 12 low-confidence reports.
pub fn composition_fixture() -> Vec<LabeledReport> {
    let mut out = Vec::new();
    let mut id = 0u64;
    let mut push = |main, source, conf, count| {
        for _ in 0..count {
            id += 1;
            out.push(labeled(id, main, source, conf));
        }
    };
    push(RootCause::Semantic, LabelSource::RandomSample, 9, 119);
    push(RootCause::Semantic, LabelSource::KeywordSearch, 8, 150);
    push(RootCause::Memory, LabelSource::RandomSample, 10, 20);
    push(RootCause::Memory, LabelSource::KeywordSearch, 8, 40);
    push(RootCause::Concurrency, LabelSource::RandomSample, 8, 25);
    push(RootCause::Concurrency, LabelSource::KeywordSearch, 9, 35);
    push(RootCause::Semantic, LabelSource::RandomSample, 7, 4);
    push(RootCause::Memory, LabelSource::KeywordSearch, 3, 4);
    push(RootCause::Concurrency, LabelSource::RandomSample, 1, 4);
    out
}

/// A fixture tracker for one repository.
pub struct TrackerFixture {
    pub server: FixtureServer,
    /// Ground truth: issue numbers served (pull requests excluded).
    pub issue_ids: Vec<u64>,
    /// Issue numbers carrying a bug label.
    pub bug_ids: Vec<u64>,
    /// Expected linked shas per bug issue.
    pub links: BTreeMap<u64, Vec<String>>,
    /// The sha whose detail endpoint answers 404.
    pub missing_sha: String,
}

pub fn api_config(cache_dir: &std::path::Path) -> ApiConfig {
    let mut c = ApiConfig::new(cache_dir);
    c.base_url = BASE_URL.to_string();
    c
}

pub fn url(path: &str) -> String {
    format!("{BASE_URL}/repos/{REPO}{path}")
}

/// `n_issues` closed issues in pages of 100; every third is labeled `bug`.
/// Even bug issues link a commit through the timeline, odd ones through a
/// "Fixes #n" commit message. `pr_every` > 0 interleaves pull requests.
pub fn tracker_fixture(n_issues: u64, pr_every: u64, clock: FakeClock) -> TrackerFixture {
    let server = FixtureServer::new(clock);
    let mut items = Vec::new();
    let mut issue_ids = Vec::new();
    let mut bug_ids = Vec::new();
    let mut number = 0u64;
    while issue_ids.len() < n_issues as usize {
        number += 1;
        if pr_every > 0 && number.is_multiple_of(pr_every) {
            items.push(json!({
                "number": number, "title": format!("PR {number}"), "body": null,
                "labels": [{"name": "bug"}], "state": "closed",
                "created_at": "2020-01-01T00:00:00Z", "closed_at": "2020-01-02T00:00:00Z",
                "user": {"login": "carol"}, "pull_request": {"url": "x"}
            }));
            continue;
        }
        let is_bug = number.is_multiple_of(3);
        let labels = if is_bug {
            json!([{"name": "Type: Bug"}, {"name": "core"}])
        } else {
            json!([{"name": "question"}])
        };
        items.push(json!({
            "number": number, "title": format!("Issue {number}"), "body": format!("line one\nline two of {number}"),
            "labels": labels, "state": "closed",
            "created_at": "2020-01-01T00:00:00Z", "closed_at": "2020-01-03T12:30:00Z",
            "user": {"login": "dave"}
        }));
        issue_ids.push(number);
        if is_bug {
            bug_ids.push(number);
        }
    }
    for (p, chunk) in items.chunks(100).enumerate() {
        server.route_json(
            url(&format!("/issues?state=closed&per_page=100&page={}", p + 1)),
            &json!(chunk),
        );
    }
    if items.len() % 100 == 0 {
        server.route_json(
            url(&format!(
                "/issues?state=closed&per_page=100&page={}",
                items.len() / 100 + 1
            )),
            &json!([]),
        );
    }

    let mut links = BTreeMap::new();
    let mut commit_list = Vec::new();
    let mut missing_sha = String::new();
    for (k, &id) in bug_ids.iter().enumerate() {
        let s = sha(10_000 + id);
        let mut timeline = vec![json!({"event": "labeled"})];
        if id % 2 == 0 {
            timeline.push(json!({"event": "referenced", "commit_id": s}));
            commit_list.push(json!({"sha": s, "commit": {"message": "tidy"}}));
        } else {
            commit_list.push(json!({"sha": s, "commit": {"message": format!("Fixes #{id}")}}));
        }
        server.route_json(
            url(&format!("/issues/{id}/timeline?per_page=100&page=1")),
            &json!(timeline),
        );
        let message = if id % 2 == 0 {
            "tidy".to_string()
        } else {
            format!("Fixes #{id}")
        };
        if k == 1 {
            missing_sha = s.clone();
        } else {
            server.route_json(
                url(&format!("/commits/{s}")),
                &json!({"sha": s, "commit": {"message": message},
                        "files": [{"filename": format!("src/main/java/F{id}.java"), "additions": 10, "deletions": 2},
                                  {"filename": "lib/blob.jar", "additions": 0, "deletions": 0}]}),
            );
        }
        links.insert(id, vec![s]);
    }
    for i in 0..30u64 {
        commit_list.push(json!({"sha": sha(90_000 + i), "commit": {"message": "refactor imports"}}));
    }
    for (p, chunk) in commit_list.chunks(100).enumerate() {
        server.route_json(url(&format!("/commits?per_page=100&page={}", p + 1)), &json!(chunk));
    }
    if commit_list.len() % 100 == 0 {
        server.route_json(
            url(&format!("/commits?per_page=100&page={}", commit_list.len() / 100 + 1)),
            &json!([]),
        );
    }

    TrackerFixture {
        server,
        issue_ids,
        bug_ids,
        links,
        missing_sha,
    }
}

pub fn ok(body: &str) -> Response {
    Response::new(200, body)
}

pub fn text_corpus(docs_per_class: usize, seed: u64, class_word_share: f64) -> rootcause::eval::TextCorpus {
    let reports = rootcause::synth::synthetic_corpus(&rootcause::synth::SynthConfig {
        docs_per_class,
        seed,
        class_word_share,
        ..Default::default()
    });
    rootcause::eval::TextCorpus::from_reports(&reports)
}

/// Weighted precision, recall, F1 and accuracy computed straight from label
/// vectors, without a confusion matrix.
pub fn label_metrics(y_true: &[usize], y_pred: &[usize], n_classes: usize) -> (f64, f64, f64, f64) {
    let n = y_true.len() as f64;
    let (mut wp, mut wr, mut wf) = (0.0, 0.0, 0.0);
    for c in 0..n_classes {
        let tp = y_true.iter().zip(y_pred).filter(|(t, p)| **t == c && **p == c).count() as f64;
        let actual = y_true.iter().filter(|t| **t == c).count() as f64;
        let predicted = y_pred.iter().filter(|p| **p == c).count() as f64;
        let p = if predicted > 0.0 { tp / predicted } else { 0.0 };
        let r = if actual > 0.0 { tp / actual } else { 0.0 };
        let f = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
        wp += actual / n * p;
        wr += actual / n * r;
        wf += actual / n * f;
    }
    let acc = y_true.iter().zip(y_pred).filter(|(t, p)| t == p).count() as f64 / n;
    (wp, wr, wf, acc)
}

pub fn random_labels(rng: &mut impl rand::Rng, n_classes: usize, n: usize) -> (Vec<usize>, Vec<usize>) {
    let y_true = (0..n).map(|_| rng.gen_range(0..n_classes)).collect();
    let y_pred = (0..n).map(|_| rng.gen_range(0..n_classes)).collect();
    (y_true, y_pred)
}

/// Re-scores every grid cell by training on k-1 folds and counting hits on
/// the held-out fold, then picks the first cell with the maximal mean.
pub fn brute_force_grid(
    grid: &rootcause::eval::Grid,
    corpus: &rootcause::eval::TextCorpus,
    folds: &[Vec<usize>],
    vectorizer: &rootcause::textprep::VectorizerConfig,
    seed: u64,
) -> (usize, Vec<f64>) {
    let mut means = Vec::new();
    for combo in grid.combinations() {
        let (vec_cfg, spec) = rootcause::eval::apply_combination(grid.kind, &combo, vectorizer).unwrap();
        let spec = spec.with_seed(seed);
        let mut total = 0.0;
        for held in folds {
            let train: Vec<usize> = (0..corpus.len()).filter(|i| !held.contains(i)).collect();
            let docs: Vec<&str> = train.iter().map(|&i| corpus.docs[i].as_str()).collect();
            let y: Vec<usize> = train.iter().map(|&i| corpus.y[i]).collect();
            let clf = rootcause::models::TextClassifier::fit(&docs, &y, &corpus.class_names, &vec_cfg, &spec).unwrap();
            let hits = held
                .iter()
                .filter(|&&i| clf.predict_text(&corpus.docs[i]).unwrap().class == corpus.y[i])
                .count();
            total += hits as f64 / held.len() as f64;
        }
        means.push(total / folds.len() as f64);
    }
    let mut best = 0;
    for (i, m) in means.iter().enumerate() {
        if *m > means[best] {
            best = i;
        }
    }
    (best, means)
}

pub fn random_dataset(
    rng: &mut rand_chacha::ChaCha8Rng,
    n: usize,
    dim: usize,
    classes: usize,
) -> rootcause::models::Dataset {
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % classes;
        let mut pairs = Vec::new();
        for j in 0..dim {
            if rand::Rng::gen_bool(rng, 0.4) {
                let v = rand::Rng::gen_range(rng, 0..4) as f64 + if j % classes == c { 2.0 } else { 0.0 };
                pairs.push((j, v));
            }
        }
        x.push(rootcause::textprep::SparseVector::from_pairs(dim, pairs));
        y.push(c);
    }
    let names = (0..classes).map(|c| format!("c{c}")).collect();
    rootcause::models::Dataset::new(x, y, names).unwrap()
}

/// Softmax cross-entropy with an L2 penalty on the weights only, computed
/// densely from the flat parameter layout (weights row-major, then biases).
pub fn oracle_loss(flat: &[f64], x: &[Vec<f64>], y: &[usize], classes: usize, lambda: f64) -> f64 {
    let dim = x[0].len();
    let (w, b) = flat.split_at(classes * dim);
    let mut total = 0.0;
    for (xi, &yi) in x.iter().zip(y) {
        let z: Vec<f64> = (0..classes)
            .map(|k| b[k] + (0..dim).map(|j| w[k * dim + j] * xi[j]).sum::<f64>())
            .collect();
        let m = z.iter().cloned().fold(f64::MIN, f64::max);
        let lse = m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        total += lse - z[yi];
    }
    total / x.len() as f64 + 0.5 * lambda * w.iter().map(|v| v * v).sum::<f64>()
}
