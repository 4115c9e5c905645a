//! Feed-forward article similarity graphs and their communities.
//!
//! Every edge points from an earlier article to a later one (ordered by
//! `(published_at, id)`), so a built graph is always a DAG. Communities are
//! found with Girvan–Newman on the undirected projection.

mod community;

use std::collections::BTreeMap;

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use community::{
    edge_betweenness, girvan_newman, girvan_newman_run, modularity, CommunityError, CommunityPartition,
    GirvanNewmanRun, StopRule, UndirectedGraph,
};

use crate::barriers::{assign_barrier, BarrierKind, BarriersDb};
use crate::corpus::Corpus;
use crate::sparse::SparseVector;
use crate::topics::{tfidf, tokenize_corpus, Stopwords, TopicError};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum PropagationError {
    #[error("{nodes} articles exceed the node cap of {max}")]
    TooManyNodes { nodes: usize, max: usize },
    #[error("similarity threshold {0} is outside [0, 1]")]
    InvalidTau(f64),
    #[error(transparent)]
    Community(#[from] CommunityError),
}

/// How article vectors are built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorMode {
    /// Annotated concept weights.
    ConceptWeights,
    /// TF-IDF over title and body.
    TfIdf,
}

impl VectorMode {
    pub fn default_tau(self) -> f64 {
        match self {
            VectorMode::ConceptWeights => 0.6,
            VectorMode::TfIdf => 0.5,
        }
    }

    /// Concept weights when every article carries concepts, TF-IDF otherwise.
    pub fn auto(corpus: &Corpus) -> Self {
        if !corpus.is_empty() && corpus.articles().iter().all(|a| !a.concepts.is_empty()) {
            VectorMode::ConceptWeights
        } else {
            VectorMode::TfIdf
        }
    }
}

impl std::str::FromStr for VectorMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "concepts" | "concept_weights" | "conceptweights" => Ok(VectorMode::ConceptWeights),
            "tfidf" | "tf_idf" | "text" => Ok(VectorMode::TfIdf),
            other => Err(format!("unknown vector mode `{other}` (expected concepts or tfidf)")),
        }
    }
}

/// A document vector with the mode that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct DocVector {
    pub mode: VectorMode,
    pub weights: SparseVector,
}

/// `dot(u, v) / (‖u‖‖v‖)`, or 0 when either vector is zero. Clamped to
/// `[0, 1]`; identical vectors give exactly 1.
pub fn cosine(u: &SparseVector, v: &SparseVector) -> f64 {
    let (nu, nv) = (u.squared_norm(), v.squared_norm());
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    (u.dot(v) / (nu * nv).sqrt()).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationConfig {
    pub tau: f64,
    /// Longest gap between linked articles; `None` links across any gap.
    #[serde(with = "lag_serde")]
    pub max_lag: Option<Duration>,
    pub mode: VectorMode,
    pub max_nodes: usize,
}

mod lag_serde {
    use super::*;
    use crate::time::{format_duration, parse_duration};
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(lag: &Option<Duration>, s: S) -> Result<S::Ok, S::Error> {
        match lag {
            Some(d) => s.serialize_str(&format_duration(*d)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Duration>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|raw| parse_duration(&raw).ok_or_else(|| serde::de::Error::custom(format!("bad duration `{raw}`"))))
            .transpose()
    }
}

pub const DEFAULT_MAX_NODES: usize = 5_000;

impl PropagationConfig {
    /// Defaults for a mode: its threshold, a 7-day lag cap.
    pub fn for_mode(mode: VectorMode) -> Self {
        PropagationConfig {
            tau: mode.default_tau(),
            max_lag: Some(Duration::days(7)),
            mode,
            max_nodes: DEFAULT_MAX_NODES,
        }
    }

    pub fn validate(&self) -> Result<(), PropagationError> {
        if !(0.0..=1.0).contains(&self.tau) || self.tau.is_nan() {
            return Err(PropagationError::InvalidTau(self.tau));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: String,
    pub title: String,
    pub source_name: String,
    pub published_at: DateTime<Utc>,
    pub label: String,
}

/// Directed edge between node indices, earlier → later.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub src: usize,
    pub dst: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationGraph {
    pub kind: BarrierKind,
    pub config: PropagationConfig,
    /// In `(published_at, id)` order.
    pub nodes: Vec<GraphNode>,
    /// Sorted by `(src, dst)`.
    pub edges: Vec<GraphEdge>,
}

impl PropagationGraph {
    pub fn undirected(&self) -> UndirectedGraph {
        UndirectedGraph::new(self.nodes.len(), self.edges.iter().map(|e| (e.src, e.dst)))
            .expect("edges reference nodes")
    }

    /// Girvan–Newman over the undirected projection, ties broken by the
    /// endpoints' article ids.
    pub fn communities(&self, stop: StopRule) -> Result<CommunityPartition, PropagationError> {
        let g = self.undirected();
        let keys: Vec<(&str, &str)> = g
            .edges()
            .iter()
            .map(|&(u, v)| {
                let (a, b) = (self.nodes[u].id.as_str(), self.nodes[v].id.as_str());
                (a.min(b), a.max(b))
            })
            .collect();
        Ok(girvan_newman_run(&g, stop, &keys)?.partition)
    }
}

/// Document vectors for every article in corpus order.
pub fn doc_vectors(corpus: &Corpus, mode: VectorMode, stopwords: &Stopwords) -> Vec<DocVector> {
    let weights: Vec<SparseVector> = match mode {
        VectorMode::ConceptWeights => {
            let mut vocab: BTreeMap<String, usize> = BTreeMap::new();
            for a in corpus.articles() {
                for (c, _) in &a.concepts {
                    let next = vocab.len();
                    vocab.entry(c.to_lowercase()).or_insert(next);
                }
            }
            corpus
                .articles()
                .iter()
                .map(|a| SparseVector::from_pairs(a.concepts.iter().map(|(c, w)| (vocab[&c.to_lowercase()], *w))))
                .collect()
        }
        VectorMode::TfIdf => {
            let docs = tokenize_corpus(corpus, stopwords);
            match tfidf(&docs, 1) {
                Ok(m) => m.rows,
                Err(TopicError::EmptyVocabulary | TopicError::TooFewDocs { .. }) => {
                    vec![SparseVector::default(); docs.len()]
                }
                Err(other) => unreachable!("tfidf only fails on empty input: {other}"),
            }
        }
    };
    weights.into_iter().map(|weights| DocVector { mode, weights }).collect()
}

/// Links every earlier article to every later one within `max_lag` whose
/// cosine similarity reaches `tau`. Candidate pairs come from an inverted
/// index over vector entries; with `tau == 0` every pair in range is linked.
pub fn build_graph(
    corpus: &Corpus,
    db: &BarriersDb,
    kind: BarrierKind,
    config: &PropagationConfig,
    stopwords: &Stopwords,
) -> Result<PropagationGraph, PropagationError> {
    config.validate()?;
    let n = corpus.len();
    if n > config.max_nodes {
        return Err(PropagationError::TooManyNodes { nodes: n, max: config.max_nodes });
    }
    let articles = corpus.articles();
    let nodes: Vec<GraphNode> = articles
        .iter()
        .map(|a| GraphNode {
            id: a.id.clone(),
            title: a.title.clone(),
            source_name: a.source_name.clone(),
            published_at: a.published_at,
            label: assign_barrier(a, kind, db).bucket().to_string(),
        })
        .collect();
    let vectors = doc_vectors(corpus, config.mode, stopwords);
    let within_lag = |i: usize, j: usize| {
        config.max_lag.is_none_or(|lag| articles[j].published_at - articles[i].published_at <= lag)
    };

    let mut edges = Vec::new();
    if config.tau <= 0.0 {
        for i in 0..n {
            for j in (i + 1)..n {
                if !within_lag(i, j) {
                    break;
                }
                edges.push(GraphEdge { src: i, dst: j, weight: cosine(&vectors[i].weights, &vectors[j].weights) });
            }
        }
    } else {
        let mut postings: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (doc, v) in vectors.iter().enumerate() {
            for &(term, _) in v.weights.entries() {
                postings.entry(term).or_default().push(doc);
            }
        }
        let mut candidates = Vec::new();
        for i in 0..n {
            candidates.clear();
            for &(term, _) in vectors[i].weights.entries() {
                let list = &postings[&term];
                let start = list.partition_point(|&d| d <= i);
                for &j in &list[start..] {
                    if !within_lag(i, j) {
                        break;
                    }
                    candidates.push(j);
                }
            }
            candidates.sort_unstable();
            candidates.dedup();
            for &j in &candidates {
                let w = cosine(&vectors[i].weights, &vectors[j].weights);
                if w >= config.tau {
                    edges.push(GraphEdge { src: i, dst: j, weight: w });
                }
            }
        }
    }
    Ok(PropagationGraph { kind, config: *config, nodes, edges })
}
