use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::sparse::SparseVector;
use super::tokenize::{preprocess, Stoplist, TokenStream, DEFAULT_STOPLIST_ID};
use super::TextprepError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    Count,
    Tfidf,
}

impl std::str::FromStr for Weighting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "count" => Ok(Self::Count),
            "tfidf" => Ok(Self::Tfidf),
            other => Err(format!("unknown weighting '{other}' (expected count or tfidf)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VectorizerConfig {
    pub ngram_min: usize,
    pub ngram_max: usize,
    pub min_df: usize,
    pub max_features: Option<usize>,
    pub weighting: Weighting,
    /// `None` selects the weighting's default: on for tf-idf, off for counts.
    pub l2_normalize: Option<bool>,
    pub stopword_list_id: String,
}

impl Default for VectorizerConfig {
    fn default() -> Self {
        Self {
            ngram_min: 1,
            ngram_max: 2,
            min_df: 2,
            max_features: None,
            weighting: Weighting::Count,
            l2_normalize: None,
            stopword_list_id: DEFAULT_STOPLIST_ID.to_string(),
        }
    }
}

impl VectorizerConfig {
    pub fn normalize(&self) -> bool {
        self.l2_normalize.unwrap_or(self.weighting == Weighting::Tfidf)
    }

    pub fn validate(&self) -> Result<(), TextprepError> {
        if !(1 <= self.ngram_min && self.ngram_min <= self.ngram_max && self.ngram_max <= 2) {
            return Err(TextprepError::InvalidConfig(format!(
                "n-gram range must satisfy 1 <= min <= max <= 2, got {}..{}",
                self.ngram_min, self.ngram_max
            )));
        }
        if self.min_df == 0 {
            return Err(TextprepError::InvalidConfig("min_df must be at least 1".into()));
        }
        if self.max_features == Some(0) {
            return Err(TextprepError::InvalidConfig(
                "max_features must be positive when set".into(),
            ));
        }
        Ok(())
    }
}

/// Unigrams in order followed by adjacent bigrams joined with `_`, limited
/// to the configured n-gram range.
pub fn extract_ngrams(ts: &TokenStream, cfg: &VectorizerConfig) -> Vec<String> {
    let tokens = ts.tokens();
    let mut out = Vec::new();
    if cfg.ngram_min <= 1 {
        out.extend(tokens.iter().cloned());
    }
    if cfg.ngram_max >= 2 {
        out.extend(tokens.windows(2).map(|w| format!("{}_{}", w[0], w[1])));
    }
    out
}

/// Fitted term list. Index `i` belongs to `terms[i]`, terms are in
/// lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    terms: Vec<String>,
    df: Vec<usize>,
    n_docs: usize,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn new(terms: Vec<String>, df: Vec<usize>, n_docs: usize) -> Result<Self, TextprepError> {
        if terms.len() != df.len() {
            return Err(TextprepError::InvalidConfig(format!(
                "vocabulary has {} terms but {} document frequencies",
                terms.len(),
                df.len()
            )));
        }
        if terms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(TextprepError::InvalidConfig(
                "vocabulary terms must be unique and sorted".into(),
            ));
        }
        let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Ok(Self {
            terms,
            df,
            n_docs,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn df(&self) -> &[usize] {
        &self.df
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn idf(&self, index: usize) -> f64 {
        ((1.0 + self.n_docs as f64) / (1.0 + self.df[index] as f64)).ln() + 1.0
    }
}

/// Vocabulary plus the configuration it was fitted with.
#[derive(Debug, Clone)]
pub struct FittedVectorizer {
    config: VectorizerConfig,
    vocabulary: Vocabulary,
    stoplist: Stoplist,
}

/// Serialized form used inside model files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorizerState {
    pub config: VectorizerConfig,
    pub vocabulary: Vec<String>,
    pub df: Vec<usize>,
    pub n_docs: usize,
    pub stopword_list_id: String,
}

impl FittedVectorizer {
    pub fn config(&self) -> &VectorizerConfig {
        &self.config
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn dim(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn stoplist(&self) -> &Stoplist {
        &self.stoplist
    }

    pub fn terms_of(&self, doc: &str) -> Vec<String> {
        extract_ngrams(&preprocess(doc, &self.stoplist), &self.config)
    }

    pub fn transform(&self, doc: &str) -> SparseVector {
        transform(doc, self)
    }

    pub fn state(&self) -> VectorizerState {
        VectorizerState {
            config: self.config.clone(),
            vocabulary: self.vocabulary.terms.clone(),
            df: self.vocabulary.df.clone(),
            n_docs: self.vocabulary.n_docs,
            stopword_list_id: self.stoplist.id().to_string(),
        }
    }

    pub fn from_state(state: VectorizerState) -> Result<Self, TextprepError> {
        state.config.validate()?;
        let stoplist = Stoplist::builtin(&state.stopword_list_id)?;
        let vocabulary = Vocabulary::new(state.vocabulary, state.df, state.n_docs)?;
        Ok(Self {
            config: state.config,
            vocabulary,
            stoplist,
        })
    }
}

/// Fits a vocabulary using the built-in stop list named by the config.
pub fn fit_vectorizer<S: AsRef<str>>(docs: &[S], cfg: &VectorizerConfig) -> Result<FittedVectorizer, TextprepError> {
    let stoplist = Stoplist::builtin(&cfg.stopword_list_id)?;
    fit_vectorizer_with(docs, cfg, stoplist)
}

pub fn fit_vectorizer_with<S: AsRef<str>>(
    docs: &[S],
    cfg: &VectorizerConfig,
    stoplist: Stoplist,
) -> Result<FittedVectorizer, TextprepError> {
    cfg.validate()?;
    if docs.is_empty() {
        return Err(TextprepError::EmptyCorpus);
    }
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for doc in docs {
        let unique: HashSet<String> = extract_ngrams(&preprocess(doc.as_ref(), &stoplist), cfg)
            .into_iter()
            .collect();
        for term in unique {
            *df.entry(term).or_insert(0) += 1;
        }
    }
    let mut kept: Vec<(String, usize)> = df.into_iter().filter(|(_, d)| *d >= cfg.min_df).collect();
    if let Some(max) = cfg.max_features {
        if kept.len() > max {
            kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            kept.truncate(max);
            kept.sort_by(|a, b| a.0.cmp(&b.0));
        }
    }
    if kept.is_empty() {
        return Err(TextprepError::EmptyVocabulary {
            min_df: cfg.min_df,
            n_docs: docs.len(),
        });
    }
    let (terms, dfs) = kept.into_iter().unzip();
    Ok(FittedVectorizer {
        config: cfg.clone(),
        vocabulary: Vocabulary::new(terms, dfs, docs.len())?,
        stoplist,
    })
}

pub fn transform(doc: &str, fv: &FittedVectorizer) -> SparseVector {
    let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
    for term in fv.terms_of(doc) {
        if let Some(i) = fv.vocabulary.index_of(&term) {
            *counts.entry(i).or_insert(0.0) += 1.0;
        }
    }
    if fv.config.weighting == Weighting::Tfidf {
        for (i, v) in counts.iter_mut() {
            *v *= fv.vocabulary.idf(*i);
        }
    }
    let mut vec = SparseVector::from_pairs(fv.dim(), counts);
    if fv.config.normalize() {
        let norm = vec.norm();
        if norm > 0.0 {
            vec.scale(1.0 / norm);
        }
    }
    vec
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> VectorizerConfig {
        VectorizerConfig::default()
    }

    fn ts(tokens: &[&str]) -> TokenStream {
        TokenStream::new(tokens.iter().map(|s| s.to_string()).collect())
    }

    #[test]
    fn ngrams_definition() {
        assert_eq!(
            extract_ngrams(&ts(&["null", "pointer"]), &cfg()),
            vec!["null", "pointer", "null_pointer"]
        );
        assert_eq!(extract_ngrams(&ts(&["a"]), &cfg()), vec!["a"]);
        assert_eq!(
            extract_ngrams(&ts(&["null", "pointer", "close", "stream"]), &cfg()).len(),
            7
        );
    }

    #[test]
    fn unigram_only_and_bigram_only() {
        let mut c = cfg();
        c.ngram_max = 1;
        assert_eq!(extract_ngrams(&ts(&["x1", "y2"]), &c), vec!["x1", "y2"]);
        c.ngram_min = 2;
        c.ngram_max = 2;
        assert_eq!(extract_ngrams(&ts(&["x1", "y2"]), &c), vec!["x1_y2"]);
    }

    #[test]
    fn min_df_prunes_bigram() {
        let fv = fit_vectorizer(&["race race", "race"], &cfg()).unwrap();
        assert_eq!(fv.vocabulary().terms(), &["race"]);
        assert_eq!(fv.vocabulary().df(), &[2]);
        assert_eq!(fv.vocabulary().n_docs(), 2);
    }

    #[test]
    fn single_doc_min_df_one() {
        let mut c = cfg();
        c.min_df = 1;
        let fv = fit_vectorizer(&["thread lock thread"], &c).unwrap();
        assert_eq!(
            fv.vocabulary().terms(),
            &["lock", "lock_thread", "thread", "thread_lock"]
        );
    }

    #[test]
    fn unreachable_min_df_is_an_error() {
        let mut c = cfg();
        c.min_df = 3;
        let err = fit_vectorizer(&["race", "race"], &c).unwrap_err();
        assert!(matches!(err, TextprepError::EmptyVocabulary { min_df: 3, .. }));
        assert!(err.to_string().contains("min_df"));
    }

    #[test]
    fn empty_corpus_rejected() {
        let docs: [&str; 0] = [];
        assert!(matches!(fit_vectorizer(&docs, &cfg()), Err(TextprepError::EmptyCorpus)));
    }

    #[test]
    fn max_features_keeps_highest_df_then_lexicographic() {
        let mut c = cfg();
        c.min_df = 1;
        c.ngram_max = 1;
        c.max_features = Some(2);
        let fv = fit_vectorizer(&["zeta alpha beta", "zeta beta", "zeta gamma"], &c).unwrap();
        assert_eq!(fv.vocabulary().terms(), &["beta", "zeta"]);
    }

    #[test]
    fn count_transform() {
        let fv = fit_vectorizer(&["race race", "race"], &cfg()).unwrap();
        let v = fv.transform("race race");
        assert_eq!(v.indices(), &[0]);
        assert_eq!(v.values(), &[2.0]);
        assert_eq!(fv.transform("unrelated words").nnz(), 0);
    }

    #[test]
    fn tfidf_values_and_normalization() {
        let mut c = cfg();
        c.min_df = 1;
        c.ngram_max = 1;
        c.weighting = Weighting::Tfidf;
        c.l2_normalize = Some(false);
        let fv = fit_vectorizer(&["lock thread", "lock"], &c).unwrap();
        let v = fv.transform("lock thread thread");
        let idf_lock = (3.0f64 / 3.0).ln() + 1.0;
        let idf_thread = (3.0f64 / 2.0).ln() + 1.0;
        assert_eq!(v.to_dense(), vec![idf_lock, 2.0 * idf_thread]);

        c.l2_normalize = None;
        let fv = fit_vectorizer(&["lock thread", "lock"], &c).unwrap();
        assert!((fv.transform("lock thread thread").norm() - 1.0).abs() < 1e-12);
        assert_eq!(fv.transform("nothing").nnz(), 0);
    }

    #[test]
    fn invalid_ranges_rejected() {
        let mut c = cfg();
        c.ngram_max = 3;
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.ngram_min = 2;
        c.ngram_max = 1;
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.min_df = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn state_round_trip() {
        let fv = fit_vectorizer(&["deadlock in pool", "pool deadlock again"], &cfg()).unwrap();
        let back = FittedVectorizer::from_state(fv.state()).unwrap();
        assert_eq!(back.vocabulary(), fv.vocabulary());
        assert_eq!(back.transform("pool deadlock"), fv.transform("pool deadlock"));
    }
}
