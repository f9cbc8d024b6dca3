//! Crawling closed bug issues and their linked commits from a GitHub-style
//! REST API, with rate limiting and an on-disk response cache.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

mod cache;
mod client;
pub mod fixture;
mod links;
mod transport;

pub use crate::corpus::write_dump;
pub use cache::{Cached, ResponseCache};
pub use client::{CommitDetail, GithubClient, RateLimitState};
pub use links::{closing_pattern, issue_refs, references_issue};
pub use transport::{Clock, Request, ReqwestTransport, Response, SystemClock, Transport, TransportError};

/// Environment variable holding the API token.
pub const TOKEN_ENV: &str = "ISSUE_API_TOKEN";

#[derive(Debug, Error)]
pub enum GithubError {
    #[error("invalid repository '{0}': expected owner/name")]
    InvalidRepo(String),
    #[error("invalid API config: {0}")]
    InvalidConfig(String),
    #[error("HTTP {status} from {url}: {message}")]
    Auth { status: u16, url: String, message: String },
    #[error("HTTP {status} from {url}")]
    Http { status: u16, url: String },
    #[error("{url}: giving up after {attempts} attempts ({last})")]
    RetriesExhausted { url: String, attempts: usize, last: String },
    #[error("{url}: unexpected response body: {message}")]
    Parse { url: String, message: String },
    #[error("cache {path}: {source}")]
    Cache { path: PathBuf, source: std::io::Error },
    #[error("transport setup failed: {0}")]
    Transport(#[from] TransportError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RepoRef {
    owner: String,
    name: String,
}

impl RepoRef {
    pub fn new(owner: &str, name: &str) -> Result<Self, GithubError> {
        let ok = |s: &str| !s.is_empty() && !s.contains('/') && !s.chars().any(char::is_whitespace);
        if !ok(owner) || !ok(name) {
            return Err(GithubError::InvalidRepo(format!("{owner}/{name}")));
        }
        Ok(Self {
            owner: owner.to_string(),
            name: name.to_string(),
        })
    }

    pub fn owner(&self) -> &str {
        &self.owner
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl FromStr for RepoRef {
    type Err = GithubError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (owner, name) = s
            .split_once('/')
            .ok_or_else(|| GithubError::InvalidRepo(s.to_string()))?;
        Self::new(owner, name)
    }
}

impl fmt::Display for RepoRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.owner, self.name)
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct ApiConfig {
    pub base_url: String,
    pub auth_token: Option<String>,
    pub page_size: usize,
    pub max_retries: usize,
    pub cache_dir: PathBuf,
}

impl fmt::Debug for ApiConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ApiConfig")
            .field("base_url", &self.base_url)
            .field("auth_token", &self.auth_token.as_ref().map(|_| "<redacted>"))
            .field("page_size", &self.page_size)
            .field("max_retries", &self.max_retries)
            .field("cache_dir", &self.cache_dir)
            .finish()
    }
}

impl ApiConfig {
    pub fn new(cache_dir: impl Into<PathBuf>) -> Self {
        Self {
            base_url: "https://api.github.com".to_string(),
            auth_token: None,
            page_size: 100,
            max_retries: 5,
            cache_dir: cache_dir.into(),
        }
    }

    /// Reads the token from [`TOKEN_ENV`] when set and non-empty.
    pub fn with_env_token(mut self) -> Self {
        self.auth_token = std::env::var(TOKEN_ENV).ok().filter(|t| !t.trim().is_empty());
        self
    }

    pub fn validate(&self) -> Result<(), GithubError> {
        if !(1..=100).contains(&self.page_size) {
            return Err(GithubError::InvalidConfig(format!(
                "page_size must lie in 1..=100, got {}",
                self.page_size
            )));
        }
        if !(self.base_url.starts_with("http://") || self.base_url.starts_with("https://")) {
            return Err(GithubError::InvalidConfig(format!(
                "base_url '{}' is not an http(s) URL",
                self.base_url
            )));
        }
        Ok(())
    }
}
