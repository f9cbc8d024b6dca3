use std::collections::{BTreeMap, HashMap, HashSet};

use chrono::{DateTime, Duration, TimeZone, Utc};
use serde::Deserialize;

use crate::corpus::{CommitRecord, FileChange, IssueRecord, IssueState};

use super::cache::{Cached, ResponseCache};
use super::links::{issue_refs, references_issue};
use super::transport::{Clock, Request, Response, Transport};
use super::{ApiConfig, GithubError, RepoRef};

/// Rate-limit window as last reported by the server.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RateLimitState {
    pub remaining: u64,
    pub reset_at: DateTime<Utc>,
}

const MAX_RATE_LIMIT_WAITS: usize = 10;

#[derive(Deserialize)]
struct RawLabel {
    name: String,
}

#[derive(Deserialize)]
struct RawUser {
    login: String,
}

#[derive(Deserialize)]
struct RawIssue {
    number: u64,
    title: String,
    #[serde(default)]
    body: Option<String>,
    #[serde(default)]
    labels: Vec<RawLabel>,
    state: String,
    created_at: DateTime<Utc>,
    #[serde(default)]
    closed_at: Option<DateTime<Utc>>,
    #[serde(default)]
    user: Option<RawUser>,
    #[serde(default)]
    pull_request: Option<serde_json::Value>,
}

#[derive(Deserialize)]
struct RawTimelineEvent {
    #[serde(default)]
    commit_id: Option<String>,
}

#[derive(Deserialize)]
struct RawCommitInner {
    message: String,
}

#[derive(Deserialize)]
struct RawCommitSummary {
    sha: String,
    commit: RawCommitInner,
}

#[derive(Deserialize)]
struct RawFile {
    filename: String,
    #[serde(default)]
    additions: u64,
    #[serde(default)]
    deletions: u64,
}

#[derive(Deserialize)]
struct RawCommitDetail {
    sha: String,
    commit: RawCommitInner,
    #[serde(default)]
    files: Vec<RawFile>,
}

/// Detail of one commit as needed for the dump.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitDetail {
    pub sha: String,
    pub message: String,
    pub files: Vec<FileChange>,
}

/// Serial REST client with an on-disk response cache. Requests are never
/// sent while the last known rate-limit window is exhausted.
pub struct GithubClient {
    cfg: ApiConfig,
    transport: Box<dyn Transport>,
    clock: Box<dyn Clock>,
    cache: ResponseCache,
    rate: Option<RateLimitState>,
    network_requests: usize,
    repo_commits: HashMap<String, Vec<(String, String)>>,
}

fn parse<T: for<'de> Deserialize<'de>>(url: &str, body: &str) -> Result<T, GithubError> {
    serde_json::from_str(body).map_err(|e| GithubError::Parse {
        url: url.to_string(),
        message: e.to_string(),
    })
}

fn is_rate_limited(resp: &Response) -> bool {
    resp.status == 429
        || (resp.status == 403
            && (resp.header("x-ratelimit-remaining") == Some("0")
                || resp.header("retry-after").is_some()
                || resp.body.to_ascii_lowercase().contains("rate limit")))
}

impl GithubClient {
    pub fn new(cfg: ApiConfig, transport: Box<dyn Transport>, clock: Box<dyn Clock>) -> Result<Self, GithubError> {
        cfg.validate()?;
        Ok(Self {
            cache: ResponseCache::new(cfg.cache_dir.clone()),
            cfg,
            transport,
            clock,
            rate: None,
            network_requests: 0,
            repo_commits: HashMap::new(),
        })
    }

    pub fn config(&self) -> &ApiConfig {
        &self.cfg
    }

    pub fn rate_limit(&self) -> Option<RateLimitState> {
        self.rate
    }

    /// Requests that went to the transport (cache hits excluded).
    pub fn network_requests(&self) -> usize {
        self.network_requests
    }

    fn url(&self, path: &str) -> String {
        format!("{}{}", self.cfg.base_url.trim_end_matches('/'), path)
    }

    fn request(&self, url: &str) -> Request {
        let mut headers = vec![
            ("accept".to_string(), "application/vnd.github+json".to_string()),
            (
                "user-agent".to_string(),
                concat!("rootcause/", env!("CARGO_PKG_VERSION")).to_string(),
            ),
        ];
        if let Some(token) = &self.cfg.auth_token {
            headers.push(("authorization".to_string(), format!("Bearer {token}")));
        }
        Request {
            url: url.to_string(),
            headers,
        }
    }

    fn record_rate_limit(&mut self, resp: &Response) {
        let remaining = resp
            .header("x-ratelimit-remaining")
            .and_then(|v| v.trim().parse::<u64>().ok());
        let reset = resp
            .header("x-ratelimit-reset")
            .and_then(|v| v.trim().parse::<i64>().ok())
            .and_then(|s| Utc.timestamp_opt(s, 0).single());
        if let (Some(remaining), Some(reset_at)) = (remaining, reset) {
            self.rate = Some(RateLimitState { remaining, reset_at });
        }
    }

    fn wait_for_window(&mut self) {
        if let Some(state) = self.rate {
            if state.remaining == 0 && self.clock.now() < state.reset_at {
                log::info!("rate limit exhausted; waiting until {}", state.reset_at.to_rfc3339());
                self.clock.sleep_until(state.reset_at);
            }
            if self.clock.now() >= state.reset_at {
                self.rate = None;
            }
        }
    }

    /// GET with caching. `Ok(None)` means 404.
    pub fn get(&mut self, url: &str) -> Result<Option<String>, GithubError> {
        match self.cache.get(url)? {
            Some(Cached::Body(b)) => return Ok(Some(b)),
            Some(Cached::NotFound) => return Ok(None),
            None => {}
        }
        let req = self.request(url);
        let mut failures = 0usize;
        let mut waits = 0usize;
        loop {
            self.wait_for_window();
            self.network_requests += 1;
            let outcome = self.transport.send(&req);
            let resp = match outcome {
                Ok(r) => r,
                Err(e) => {
                    failures += 1;
                    self.backoff(url, failures, &e.to_string())?;
                    continue;
                }
            };
            self.record_rate_limit(&resp);
            match resp.status {
                200..=299 => {
                    self.cache.put(url, &Cached::Body(resp.body.clone()))?;
                    return Ok(Some(resp.body));
                }
                404 => {
                    self.cache.put(url, &Cached::NotFound)?;
                    return Ok(None);
                }
                401 => {
                    return Err(GithubError::Auth {
                        status: 401,
                        url: url.to_string(),
                        message: "credentials rejected; check the token in ISSUE_API_TOKEN".into(),
                    })
                }
                403 | 429 if is_rate_limited(&resp) => {
                    waits += 1;
                    if waits > MAX_RATE_LIMIT_WAITS {
                        return Err(GithubError::RetriesExhausted {
                            url: url.to_string(),
                            attempts: waits,
                            last: "still rate limited".into(),
                        });
                    }
                    let now = self.clock.now();
                    let retry_after = resp
                        .header("retry-after")
                        .and_then(|v| v.trim().parse::<i64>().ok())
                        .map(|s| now + Duration::seconds(s));
                    let reset_at = match (retry_after, self.rate) {
                        (Some(t), _) => t,
                        (None, Some(s)) if s.reset_at > now => s.reset_at,
                        _ => now + Duration::seconds(60),
                    };
                    self.rate = Some(RateLimitState { remaining: 0, reset_at });
                }
                403 => {
                    return Err(GithubError::Auth {
                        status: 403,
                        url: url.to_string(),
                        message: format!(
                        "access forbidden; the token in ISSUE_API_TOKEN may lack permission for this repository ({})",
                        resp.body.chars().take(200).collect::<String>()
                    ),
                    })
                }
                s if s >= 500 => {
                    failures += 1;
                    self.backoff(url, failures, &format!("HTTP {s}"))?;
                }
                s => {
                    return Err(GithubError::Http {
                        status: s,
                        url: url.to_string(),
                    })
                }
            }
        }
    }

    fn backoff(&mut self, url: &str, failures: usize, last: &str) -> Result<(), GithubError> {
        if failures > self.cfg.max_retries {
            return Err(GithubError::RetriesExhausted {
                url: url.to_string(),
                attempts: failures,
                last: last.to_string(),
            });
        }
        let delay = Duration::seconds(1i64 << failures.min(6));
        log::warn!(
            "{url}: {last}; retry {failures} of {} in {}s",
            self.cfg.max_retries,
            delay.num_seconds()
        );
        let until = self.clock.now() + delay;
        self.clock.sleep_until(until);
        Ok(())
    }

    fn paginate<T: for<'de> Deserialize<'de>>(&mut self, path_and_query: &str) -> Result<Vec<T>, GithubError> {
        let sep = if path_and_query.contains('?') { '&' } else { '?' };
        let per_page = self.cfg.page_size;
        let mut out = Vec::new();
        for page in 1.. {
            let url = self.url(&format!("{path_and_query}{sep}per_page={per_page}&page={page}"));
            let Some(body) = self.get(&url)? else {
                if page == 1 {
                    return Err(GithubError::Http { status: 404, url });
                }
                break;
            };
            let items: Vec<T> = parse(&url, &body)?;
            let n = items.len();
            out.extend(items);
            if n < per_page {
                break;
            }
        }
        Ok(out)
    }

    /// All closed issues of the repository, pull requests excluded.
    pub fn fetch_closed_issues(&mut self, repo: &RepoRef) -> Result<Vec<IssueRecord>, GithubError> {
        let raw: Vec<RawIssue> = self.paginate(&format!("/repos/{repo}/issues?state=closed"))?;
        Ok(raw
            .into_iter()
            .filter(|i| i.pull_request.is_none())
            .map(|i| IssueRecord {
                repo: repo.to_string(),
                issue_id: i.number,
                title: i.title,
                body: i.body.unwrap_or_default(),
                labels: i.labels.into_iter().map(|l| l.name).collect(),
                state: if i.state == "open" {
                    IssueState::Open
                } else {
                    IssueState::Closed
                },
                created_at: i.created_at,
                closed_at: i.closed_at,
                reporter: i.user.map(|u| u.login).unwrap_or_default(),
                commits: Vec::new(),
            })
            .collect())
    }

    /// Closed issues carrying a label that contains one of the substrings
    /// (case-insensitive).
    pub fn fetch_closed_bug_issues(
        &mut self,
        repo: &RepoRef,
        label_substrings: &[String],
    ) -> Result<Vec<IssueRecord>, GithubError> {
        let subs: Vec<String> = label_substrings.iter().map(|s| s.to_lowercase()).collect();
        Ok(self
            .fetch_closed_issues(repo)?
            .into_iter()
            .filter(|i| {
                i.labels
                    .iter()
                    .any(|l| subs.iter().any(|s| l.to_lowercase().contains(s.as_str())))
            })
            .collect())
    }

    fn repository_commits(&mut self, repo: &RepoRef) -> Result<Vec<(String, String)>, GithubError> {
        let key = repo.to_string();
        if let Some(c) = self.repo_commits.get(&key) {
            return Ok(c.clone());
        }
        let raw: Vec<RawCommitSummary> = self.paginate(&format!("/repos/{repo}/commits"))?;
        let list: Vec<(String, String)> = raw.into_iter().map(|c| (c.sha, c.commit.message)).collect();
        self.repo_commits.insert(key, list.clone());
        Ok(list)
    }

    /// `None` when the commit is no longer reachable.
    pub fn fetch_commit_stats(&mut self, repo: &RepoRef, sha: &str) -> Result<Option<CommitDetail>, GithubError> {
        let url = self.url(&format!("/repos/{repo}/commits/{sha}"));
        let Some(body) = self.get(&url)? else {
            return Ok(None);
        };
        let raw: RawCommitDetail = parse(&url, &body)?;
        Ok(Some(CommitDetail {
            sha: raw.sha,
            message: raw.commit.message,
            files: raw
                .files
                .into_iter()
                .map(|f| FileChange {
                    path: f.filename,
                    insertions: f.additions,
                    deletions: f.deletions,
                })
                .collect(),
        }))
    }

    /// Union of timeline-linked commits and default-branch commits whose
    /// message references the issue, deduplicated by sha in first-seen order.
    pub fn fetch_linked_commits(&mut self, repo: &RepoRef, issue_id: u64) -> Result<Vec<CommitRecord>, GithubError> {
        let events: Vec<RawTimelineEvent> = self.paginate(&format!("/repos/{repo}/issues/{issue_id}/timeline"))?;
        let mut shas: Vec<String> = events.into_iter().filter_map(|e| e.commit_id).collect();
        let mut known: BTreeMap<String, String> = BTreeMap::new();
        for (sha, message) in self.repository_commits(repo)? {
            if references_issue(&message, issue_id) {
                shas.push(sha.clone());
            }
            known.insert(sha, message);
        }
        let mut seen = HashSet::new();
        shas.retain(|s| seen.insert(s.clone()));

        let mut out = Vec::with_capacity(shas.len());
        for sha in shas {
            let record = match self.fetch_commit_stats(repo, &sha)? {
                Some(d) => CommitRecord {
                    linked_issue_ids: issue_refs(&d.message),
                    sha: d.sha,
                    message: d.message,
                    files: d.files,
                    available: true,
                },
                None => {
                    let message = known.get(&sha).cloned().unwrap_or_default();
                    CommitRecord {
                        linked_issue_ids: issue_refs(&message),
                        sha,
                        message,
                        files: Vec::new(),
                        available: false,
                    }
                }
            };
            out.push(record);
        }
        Ok(out)
    }

    /// Closed bug issues with their linked commits filled in.
    pub fn fetch_repository(
        &mut self,
        repo: &RepoRef,
        label_substrings: &[String],
    ) -> Result<Vec<IssueRecord>, GithubError> {
        let mut issues = self.fetch_closed_bug_issues(repo, label_substrings)?;
        let total = issues.len();
        for (i, issue) in issues.iter_mut().enumerate() {
            issue.commits = self.fetch_linked_commits(repo, issue.issue_id)?;
            log::debug!(
                "{repo}#{}: {} commits ({}/{total})",
                issue.issue_id,
                issue.commits.len(),
                i + 1
            );
        }
        Ok(issues)
    }
}
