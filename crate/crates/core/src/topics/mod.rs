//! Hierarchical topic modeling.
//!
//! Pipeline: [`preprocess`] → [`tfidf`] → [`ward_cluster`] → [`cut`] →
//! [`topic_terms`], scored with [`npmi_coherence`] and [`topic_diversity`],
//! plus per-day topic frequencies from [`temporal_topics`].

mod metrics;
mod text;
mod ward;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use metrics::{npmi_coherence, topic_diversity, topic_terms, RankedTerms};
pub use text::{preprocess, tfidf, Stopwords, TfIdfMatrix, TokenizedDoc};
pub use ward::{cut, ward_cluster, ward_from_points, ward_linkage, Dendrogram, Merge};

use crate::corpus::{Article, Corpus, TimeWindow};
use crate::time::{BinSize, BucketAxis};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum TopicError {
    #[error("need at least {needed} documents, found {found}")]
    TooFewDocs { needed: usize, found: usize },
    #[error("every term was filtered out of the vocabulary")]
    EmptyVocabulary,
    #[error("k = {k} is out of range for {docs} documents")]
    KOutOfRange { k: usize, docs: usize },
    #[error("only {usable} topic terms occur in the corpus; coherence needs two")]
    DegenerateTerm { usable: usize },
    #[error("embedding provider failed: {0}")]
    Embedding(String),
}

/// Supplies dense document vectors in place of TF-IDF rows.
pub trait DocumentEmbedder {
    fn embed(&self, docs: &[TokenizedDoc]) -> Result<Vec<Vec<f64>>, TopicError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopicConfig {
    pub k: usize,
    pub m: usize,
    pub min_df: usize,
    pub epsilon: f64,
}

impl Default for TopicConfig {
    fn default() -> Self {
        TopicConfig { k: 10, m: 10, min_df: 2, epsilon: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topic {
    pub id: usize,
    pub size: usize,
    pub members: Vec<String>,
    pub terms: RankedTerms,
    /// `None` when fewer than two of the topic's terms are usable.
    pub coherence: Option<f64>,
}

/// Per-topic counts per time bucket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalTopicSeries {
    pub bin: BinSize,
    pub bins: Vec<String>,
    /// `counts[topic][bucket]`.
    pub counts: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicModel {
    pub config: TopicConfig,
    pub topics: Vec<Topic>,
    pub mean_coherence: Option<f64>,
    pub diversity: f64,
    pub dendrogram: Dendrogram,
    /// Topic id per modeled article, in corpus order.
    pub assignment: Vec<usize>,
}

/// Text fed to the topic pipeline: title followed by body.
pub fn article_text(article: &Article) -> String {
    format!("{}\n{}", article.title, article.body)
}

pub fn tokenize_corpus(corpus: &Corpus, stopwords: &Stopwords) -> Vec<TokenizedDoc> {
    corpus
        .articles()
        .iter()
        .map(|a| TokenizedDoc { id: a.id.clone(), tokens: preprocess(&article_text(a), stopwords) })
        .collect()
}

/// Runs the full pipeline with TF-IDF document vectors.
pub fn fit_topics(corpus: &Corpus, stopwords: &Stopwords, config: &TopicConfig) -> Result<TopicModel, TopicError> {
    fit_topics_with(corpus, stopwords, config, None)
}

/// Runs the full pipeline; `embedder` replaces TF-IDF vectors when given.
pub fn fit_topics_with(
    corpus: &Corpus,
    stopwords: &Stopwords,
    config: &TopicConfig,
    embedder: Option<&dyn DocumentEmbedder>,
) -> Result<TopicModel, TopicError> {
    let docs = tokenize_corpus(corpus, stopwords);
    let n = docs.len();
    if n == 0 {
        return Err(TopicError::TooFewDocs { needed: 1, found: 0 });
    }
    if config.k == 0 || config.k > n {
        return Err(TopicError::KOutOfRange { k: config.k, docs: n });
    }
    let dendrogram = if n == 1 {
        Dendrogram { leaves: 1, merges: Vec::new() }
    } else {
        match embedder {
            Some(e) => ward_from_points(&e.embed(&docs)?)?,
            None => ward_cluster(&tfidf(&docs, config.min_df)?)?,
        }
    };
    let assignment = if n == 1 { vec![0] } else { cut(&dendrogram, config.k)? };
    let ranked = topic_terms(&assignment, &docs, config.m);

    let mut topics: Vec<Topic> = ranked
        .into_iter()
        .enumerate()
        .map(|(id, terms)| {
            let words: Vec<String> = terms.iter().map(|(w, _)| w.clone()).collect();
            Topic {
                id,
                size: 0,
                members: Vec::new(),
                coherence: npmi_coherence(&words, &docs, config.epsilon).ok(),
                terms,
            }
        })
        .collect();
    for (doc, &t) in docs.iter().zip(&assignment) {
        topics[t].members.push(doc.id.clone());
        topics[t].size += 1;
    }
    let scored: Vec<f64> = topics.iter().filter_map(|t| t.coherence).collect();
    let mean_coherence = (!scored.is_empty()).then(|| scored.iter().sum::<f64>() / scored.len() as f64);
    let term_lists: Vec<RankedTerms> = topics.iter().map(|t| t.terms.clone()).collect();
    let diversity = topic_diversity(&term_lists, config.m);

    Ok(TopicModel { config: *config, topics, mean_coherence, diversity, dendrogram, assignment })
}

/// Counts of each topic's articles per bucket of `window`. Articles outside
/// the window are ignored.
pub fn temporal_topics(
    assignment: &[usize],
    articles: &[Article],
    window: &TimeWindow,
    bin: BinSize,
) -> TemporalTopicSeries {
    let axis = BucketAxis::covering(window.start(), window.end(), bin);
    let k = assignment.iter().copied().max().map_or(0, |c| c + 1);
    let mut counts = vec![vec![0u64; axis.len]; k];
    for (article, &topic) in articles.iter().zip(assignment) {
        if !window.contains(article.published_at) {
            continue;
        }
        if let Some(idx) = axis.index_of(article.published_at) {
            counts[topic][idx] += 1;
        }
    }
    TemporalTopicSeries { bin, bins: axis.labels(), counts }
}
