//! Text preprocessing: tokenization, stop-word removal, Porter stemming and
//! unigram/bigram vectorization.

use std::path::PathBuf;

use thiserror::Error;

pub mod porter;
mod sparse;
mod tokenize;
mod vectorizer;

pub use sparse::SparseVector;
pub use tokenize::{preprocess, Stoplist, TokenStream, DEFAULT_STOPLIST_ID, NO_STOPLIST_ID};
pub use vectorizer::{
    extract_ngrams, fit_vectorizer, fit_vectorizer_with, transform, FittedVectorizer, VectorizerConfig,
    VectorizerState, Vocabulary, Weighting,
};

#[derive(Debug, Error)]
pub enum TextprepError {
    #[error("cannot fit a vectorizer on zero documents")]
    EmptyCorpus,
    #[error("vocabulary is empty: no term reaches min_df={min_df} across {n_docs} documents; lower min_df")]
    EmptyVocabulary { min_df: usize, n_docs: usize },
    #[error("invalid vectorizer configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown stop-word list '{0}'")]
    UnknownStoplist(String),
    #[error("failed to read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}
