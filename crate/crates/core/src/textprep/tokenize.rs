use std::collections::HashSet;
use std::path::Path;

use super::porter;
use super::TextprepError;

const STOPWORDS_V1: &str = include_str!("../../data/stopwords-v1.txt");

/// Identifier of the stop list shipped with the crate.
pub const DEFAULT_STOPLIST_ID: &str = "stopwords-v1";

/// Identifier of the empty stop list.
pub const NO_STOPLIST_ID: &str = "none";

/// A named set of words removed before stemming.
#[derive(Debug, Clone)]
pub struct Stoplist {
    id: String,
    words: HashSet<String>,
}

impl Stoplist {
    /// Resolves one of the built-in lists by id.
    pub fn builtin(id: &str) -> Result<Self, TextprepError> {
        match id {
            DEFAULT_STOPLIST_ID => Ok(Self::parse(id, STOPWORDS_V1)),
            NO_STOPLIST_ID => Ok(Self {
                id: id.to_string(),
                words: HashSet::new(),
            }),
            other => Err(TextprepError::UnknownStoplist(other.to_string())),
        }
    }

    /// Reads a list from a UTF-8 file with one word per line. Blank lines and
    /// lines starting with `#` are skipped.
    pub fn from_file(id: &str, path: &Path) -> Result<Self, TextprepError> {
        let text = std::fs::read_to_string(path).map_err(|source| TextprepError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Self::parse(id, &text))
    }

    fn parse(id: &str, text: &str) -> Self {
        let words = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        Self {
            id: id.to_string(),
            words,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }
}

/// Ordered lowercase tokens of one document.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenStream {
    tokens: Vec<String>,
}

impl TokenStream {
    pub fn new(tokens: Vec<String>) -> Self {
        debug_assert!(tokens
            .iter()
            .all(|t| !t.is_empty() && !t.chars().any(char::is_whitespace)));
        Self { tokens }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Case-folds, splits on non-alphanumeric characters, drops one-character
/// and all-digit tokens, removes stop words and stems what remains.
pub fn preprocess(text: &str, stoplist: &Stoplist) -> TokenStream {
    let folded = text.to_lowercase();
    let tokens = folded
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().nth(1).is_some())
        .filter(|t| !t.chars().all(|c| c.is_ascii_digit()))
        .filter(|t| !stoplist.contains(t))
        .map(porter::stem)
        .collect();
    TokenStream::new(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v1() -> Stoplist {
        Stoplist::builtin(DEFAULT_STOPLIST_ID).unwrap()
    }

    #[test]
    fn null_pointer_sentence() {
        let ts = preprocess("Null pointer when closing stream", &v1());
        assert_eq!(ts.tokens(), &["null", "pointer", "close", "stream"]);
    }

    #[test]
    fn empty_text() {
        assert!(preprocess("", &v1()).is_empty());
    }

    #[test]
    fn porter_plurals() {
        let ts = preprocess("ponies caresses relational", &v1());
        assert_eq!(ts.tokens(), &["poni", "caress", "relat"]);
    }

    #[test]
    fn drops_short_and_numeric_tokens() {
        let ts = preprocess("a NPE at line 42 in x.y.Foo", &v1());
        assert_eq!(ts.tokens(), &["npe", "line", "foo"]);
    }

    #[test]
    fn splits_stack_trace_punctuation() {
        let ts = preprocess("java.lang.NullPointerException: at org.Foo(Foo.java:12)", &v1());
        assert_eq!(
            ts.tokens(),
            &["java", "lang", "nullpointerexcept", "org", "foo", "foo", "java"]
        );
    }

    #[test]
    fn builtin_list_size_and_members() {
        let s = v1();
        assert!(s.len() >= 170 && s.len() <= 180, "{}", s.len());
        assert!(s.contains("when"));
        assert!(!s.contains("thread"));
        assert_eq!(s.id(), "stopwords-v1");
    }

    #[test]
    fn unknown_list_rejected() {
        assert!(matches!(
            Stoplist::builtin("stopwords-v9"),
            Err(TextprepError::UnknownStoplist(_))
        ));
    }
}
