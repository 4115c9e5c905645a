use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::TopicError;
use crate::data::STOPWORDS_TXT;
use crate::sparse::SparseVector;

/// Lowercase stopword set.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    /// One term per line; blank lines and `#` comments ignored.
    pub fn parse(raw: &str) -> Self {
        Stopwords(
            raw.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn bundled() -> Self {
        Self::parse(STOPWORDS_TXT)
    }

    pub fn contains(&self, term: &str) -> bool {
        self.0.contains(term)
    }
}

impl<S: AsRef<str>> FromIterator<S> for Stopwords {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Stopwords(iter.into_iter().map(|s| s.as_ref().to_lowercase()).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedDoc {
    pub id: String,
    pub tokens: Vec<String>,
}

/// Lowercases, splits on non-alphanumeric characters and drops tokens that
/// are shorter than two characters, purely numeric, or stopwords.
pub fn preprocess(text: &str, stopwords: &Stopwords) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .filter(|t| t.chars().count() >= 2)
        .filter(|t| !t.chars().all(|c| c.is_numeric()))
        .filter(|t| !stopwords.contains(t))
        .collect()
}

/// L2-normalized TF-IDF rows over an alphabetically ordered vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct TfIdfMatrix {
    pub vocabulary: BTreeMap<String, usize>,
    pub idf: Vec<f64>,
    pub rows: Vec<SparseVector>,
}

impl TfIdfMatrix {
    pub fn n_docs(&self) -> usize {
        self.rows.len()
    }

    pub fn n_terms(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn weight(&self, doc: usize, term: &str) -> f64 {
        self.vocabulary.get(term).map_or(0.0, |&col| self.rows[doc].get(col))
    }
}

/// Raw-count tf times smoothed idf `ln((1+N)/(1+df)) + 1`, rows L2-normalized.
/// Terms found in fewer than `min(min_df, N)` documents are dropped.
pub fn tfidf(docs: &[TokenizedDoc], min_df: usize) -> Result<TfIdfMatrix, TopicError> {
    if docs.is_empty() {
        return Err(TopicError::TooFewDocs { needed: 1, found: 0 });
    }
    let n = docs.len();
    let min_df = min_df.clamp(1, n);
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in docs {
        let distinct: BTreeSet<&str> = doc.tokens.iter().map(String::as_str).collect();
        for t in distinct {
            *df.entry(t).or_default() += 1;
        }
    }
    let kept: Vec<(&str, usize)> = df.into_iter().filter(|&(_, d)| d >= min_df).collect();
    if kept.is_empty() {
        return Err(TopicError::EmptyVocabulary);
    }
    let vocabulary: BTreeMap<String, usize> = kept.iter().enumerate().map(|(i, (t, _))| (t.to_string(), i)).collect();
    let idf: Vec<f64> = kept.iter().map(|&(_, d)| ((1.0 + n as f64) / (1.0 + d as f64)).ln() + 1.0).collect();
    let rows = docs
        .iter()
        .map(|doc| {
            let pairs = doc.tokens.iter().filter_map(|t| vocabulary.get(t.as_str())).map(|&col| (col, idf[col]));
            SparseVector::from_pairs(pairs).normalized()
        })
        .collect();
    Ok(TfIdfMatrix { vocabulary, idf, rows })
}
