use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::GithubError;

/// A cached outcome for one URL.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cached {
    Body(String),
    NotFound,
}

/// One file per URL, named by the SHA-256 of the URL. Successful bodies are
/// stored verbatim; 404s as an empty `<hash>.404` marker.
#[derive(Debug, Clone)]
pub struct ResponseCache {
    dir: PathBuf,
}

impl ResponseCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(url: &str) -> String {
        hex::encode(Sha256::digest(url.as_bytes()))
    }

    fn body_path(&self, url: &str) -> PathBuf {
        self.dir.join(Self::key(url))
    }

    fn missing_path(&self, url: &str) -> PathBuf {
        self.dir.join(format!("{}.404", Self::key(url)))
    }

    pub fn get(&self, url: &str) -> Result<Option<Cached>, GithubError> {
        let body = self.body_path(url);
        match std::fs::read_to_string(&body) {
            Ok(s) => return Ok(Some(Cached::Body(s))),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(source) => return Err(GithubError::Cache { path: body, source }),
        }
        Ok(self.missing_path(url).exists().then_some(Cached::NotFound))
    }

    pub fn put(&self, url: &str, entry: &Cached) -> Result<(), GithubError> {
        std::fs::create_dir_all(&self.dir).map_err(|source| GithubError::Cache {
            path: self.dir.clone(),
            source,
        })?;
        let (path, content) = match entry {
            Cached::Body(b) => (self.body_path(url), b.as_str()),
            Cached::NotFound => (self.missing_path(url), ""),
        };
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, content)
            .and_then(|_| std::fs::rename(&tmp, &path))
            .map_err(|source| GithubError::Cache { path, source })
    }
}
