use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Defaults, ServiceConfig, ServiceError};
use crate::barriers::{assign_barrier, BarrierKind, BarriersDb};
use crate::corpus::{read_corpus, slice_window, Corpus, LoadReport, TimeWindow};
use crate::data::{
    ECONOMIC_CLUSTERS_CSV, INTENSIFIERS_TXT, MICRO_LEXICON_TSV, NEGATIONS_TXT, STOPWORDS_TXT, SYNTHETIC_CORPUS_JSONL,
    SYNTHETIC_EVENT, SYNTHETIC_PUBLISHERS_CSV,
};
use crate::document::{export_heatmap, export_propagation, export_topics, export_trends, AnalysisDocument};
use crate::propagation::{build_graph, CommunityPartition, PropagationConfig, PropagationError, StopRule, VectorMode};
use crate::sentiment::{sentiment_heatmap, Lexicon, SentimentRules};
use crate::time::{format_duration, format_timestamp, parse_duration, parse_timestamp, BinSize};
use crate::topics::{fit_topics, temporal_topics, Stopwords, TopicConfig, TopicError};
use crate::trends::compute_trends;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnalysisKind {
    Propagation,
    Trends,
    Sentiment,
    Topics,
}

impl AnalysisKind {
    pub const ALL: [AnalysisKind; 4] =
        [AnalysisKind::Propagation, AnalysisKind::Trends, AnalysisKind::Sentiment, AnalysisKind::Topics];

    pub fn as_str(self) -> &'static str {
        match self {
            AnalysisKind::Propagation => "propagation",
            AnalysisKind::Trends => "trends",
            AnalysisKind::Sentiment => "sentiment",
            AnalysisKind::Topics => "topics",
        }
    }

    fn params(self) -> &'static [&'static str] {
        match self {
            AnalysisKind::Propagation => &["tau", "max_lag", "mode"],
            AnalysisKind::Trends => &["bin", "cumulative"],
            AnalysisKind::Sentiment => &[],
            AnalysisKind::Topics => &["label", "k", "m"],
        }
    }
}

impl fmt::Display for AnalysisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AnalysisKind {
    type Err = ServiceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AnalysisKind::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| ServiceError::UnknownAnalysis(s.to_string()))
    }
}

const COMMON_PARAMS: [&str; 4] = ["event", "barrier", "from", "to"];

/// An analysis with raw string parameters, as they arrive from a query
/// string, a JSON body or CLI flags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalysisRequest {
    pub analysis: AnalysisKind,
    pub params: BTreeMap<String, String>,
}

impl AnalysisRequest {
    pub fn new(analysis: AnalysisKind) -> Self {
        AnalysisRequest { analysis, params: BTreeMap::new() }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    /// From `key=value` pairs; a repeated key is rejected.
    pub fn from_pairs(
        analysis: AnalysisKind,
        pairs: impl IntoIterator<Item = (String, String)>,
    ) -> Result<Self, ServiceError> {
        let mut params = BTreeMap::new();
        for (k, v) in pairs {
            if params.insert(k.clone(), v).is_some() {
                return Err(ServiceError::validation(&k, "given more than once"));
            }
        }
        Ok(AnalysisRequest { analysis, params })
    }

    /// From a JSON object of scalars. Numbers and booleans are accepted in
    /// place of their string forms; `null` counts as absent.
    pub fn from_json(analysis: AnalysisKind, body: &serde_json::Value) -> Result<Self, ServiceError> {
        let obj = body.as_object().ok_or_else(|| ServiceError::validation("body", "expected a JSON object"))?;
        let mut params = BTreeMap::new();
        for (k, v) in obj {
            let value = match v {
                serde_json::Value::Null => continue,
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Number(n) => n.to_string(),
                serde_json::Value::Bool(b) => b.to_string(),
                _ => return Err(ServiceError::validation(k, "expected a string, number or boolean")),
            };
            params.insert(k.clone(), value);
        }
        Ok(AnalysisRequest { analysis, params })
    }
}

/// Analysis-specific parameters after defaults are applied.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase", tag = "analysis")]
pub enum ResolvedParams {
    Propagation { tau: f64, max_lag: Option<String>, mode: VectorMode },
    Trends { bin: BinSize, cumulative: bool },
    Sentiment,
    Topics { label: Option<String>, k: usize, m: usize, min_df: usize },
}

/// A fully specified request. Its canonical JSON keys the cache.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedRequest {
    pub event: String,
    pub barrier: BarrierKind,
    pub from: String,
    pub to: String,
    pub params: ResolvedParams,
    #[serde(skip)]
    window: Option<TimeWindow>,
}

impl ResolvedRequest {
    pub fn window(&self) -> TimeWindow {
        self.window.expect("set on resolve")
    }

    pub fn analysis(&self) -> AnalysisKind {
        match self.params {
            ResolvedParams::Propagation { .. } => AnalysisKind::Propagation,
            ResolvedParams::Trends { .. } => AnalysisKind::Trends,
            ResolvedParams::Sentiment => AnalysisKind::Sentiment,
            ResolvedParams::Topics { .. } => AnalysisKind::Topics,
        }
    }
}

/// Hex SHA-256 of the snapshot id and the canonical request.
pub fn cache_key(snapshot_id: &str, request: &ResolvedRequest) -> String {
    let mut h = Sha256::new();
    h.update(snapshot_id.as_bytes());
    h.update(b"\n");
    h.update(serde_json::to_vec(request).expect("requests serialize"));
    hex::encode(h.finalize())
}

/// Raw inputs of a snapshot. Everything that can change a result is here,
/// and the snapshot id hashes all of it.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSources {
    /// `(event_tag, jsonl)`.
    pub corpora: Vec<(String, String)>,
    pub publishers_csv: String,
    pub clusters_csv: String,
    pub lexicon_tsv: String,
    pub intensifiers: String,
    pub negations: String,
    pub rules: SentimentRules,
    pub stopwords: String,
    pub defaults: Defaults,
}

fn read(path: &Path) -> Result<String, ServiceError> {
    fs::read_to_string(path).map_err(|e| ServiceError::Data(format!("{}: {e}", path.display())))
}

fn read_or(path: Option<&Path>, bundled: &str) -> Result<String, ServiceError> {
    path.map_or_else(|| Ok(bundled.to_string()), read)
}

impl SnapshotSources {
    /// Bundled data only, publishers and the synthetic corpus included.
    pub fn bundled() -> Self {
        SnapshotSources {
            corpora: vec![(SYNTHETIC_EVENT.to_string(), SYNTHETIC_CORPUS_JSONL.to_string())],
            publishers_csv: SYNTHETIC_PUBLISHERS_CSV.to_string(),
            clusters_csv: ECONOMIC_CLUSTERS_CSV.to_string(),
            lexicon_tsv: MICRO_LEXICON_TSV.to_string(),
            intensifiers: INTENSIFIERS_TXT.to_string(),
            negations: NEGATIONS_TXT.to_string(),
            rules: SentimentRules::default(),
            stopwords: STOPWORDS_TXT.to_string(),
            defaults: Defaults::default(),
        }
    }

    pub fn from_config(config: &ServiceConfig) -> Result<Self, ServiceError> {
        let corpora = config
            .corpora
            .iter()
            .map(|(tag, path)| Ok((tag.clone(), read(path)?)))
            .collect::<Result<Vec<_>, ServiceError>>()?;
        Ok(SnapshotSources {
            corpora,
            publishers_csv: read(&config.barriers.publishers)?,
            clusters_csv: read_or(config.barriers.clusters.as_deref(), ECONOMIC_CLUSTERS_CSV)?,
            lexicon_tsv: read_or(config.sentiment.lexicon.as_deref(), MICRO_LEXICON_TSV)?,
            intensifiers: read_or(config.sentiment.intensifiers.as_deref(), INTENSIFIERS_TXT)?,
            negations: read_or(config.sentiment.negations.as_deref(), NEGATIONS_TXT)?,
            rules: config.sentiment.rules,
            stopwords: read_or(config.topics.stopwords.as_deref(), STOPWORDS_TXT)?,
            defaults: config.defaults.clone(),
        })
    }

    fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        let mut part = |name: &str, body: &[u8]| {
            h.update(name.as_bytes());
            h.update((body.len() as u64).to_le_bytes());
            h.update(body);
        };
        for (tag, jsonl) in &self.corpora {
            part(&format!("corpus:{tag}"), jsonl.as_bytes());
        }
        part("publishers", self.publishers_csv.as_bytes());
        part("clusters", self.clusters_csv.as_bytes());
        part("lexicon", self.lexicon_tsv.as_bytes());
        part("intensifiers", self.intensifiers.as_bytes());
        part("negations", self.negations.as_bytes());
        part("rules", &serde_json::to_vec(&self.rules).expect("serializes"));
        part("stopwords", self.stopwords.as_bytes());
        part("defaults", &serde_json::to_vec(&self.defaults).expect("serializes"));
        hex::encode(&h.finalize()[..12])
    }
}

/// Immutable loaded state every request reads from.
#[derive(Debug)]
pub struct Snapshot {
    id: String,
    corpora: BTreeMap<String, Corpus>,
    reports: BTreeMap<String, LoadReport>,
    db: BarriersDb,
    lexicon: Lexicon,
    rules: SentimentRules,
    stopwords: Stopwords,
    defaults: Defaults,
}

impl Snapshot {
    pub fn build(sources: &SnapshotSources) -> Result<Self, ServiceError> {
        let mut corpora = BTreeMap::new();
        let mut reports = BTreeMap::new();
        for (tag, jsonl) in &sources.corpora {
            let (corpus, report) = read_corpus(jsonl.as_bytes(), tag, tag)
                .map_err(|e| ServiceError::Data(format!("corpus `{tag}`: {e}")))?;
            corpora.insert(tag.clone(), corpus);
            reports.insert(tag.clone(), report);
        }
        let db = BarriersDb::from_csv_strs(&sources.publishers_csv, &sources.clusters_csv)
            .map_err(|e| ServiceError::Data(format!("barriers: {e}")))?;
        let lexicon = Lexicon::parse(
            &sources.lexicon_tsv,
            &sources.intensifiers,
            &sources.negations,
            sources.rules.intensifier_increment,
        )
        .map_err(|e| ServiceError::Data(format!("lexicon: {e}")))?;
        sources.rules.validate().map_err(ServiceError::Config)?;
        Ok(Snapshot {
            id: sources.fingerprint(),
            corpora,
            reports,
            db,
            lexicon,
            rules: sources.rules,
            stopwords: Stopwords::parse(&sources.stopwords),
            defaults: sources.defaults.clone(),
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn events(&self) -> Vec<&str> {
        self.corpora.keys().map(String::as_str).collect()
    }

    pub fn corpus(&self, event: &str) -> Result<&Corpus, ServiceError> {
        self.corpora.get(event).ok_or_else(|| ServiceError::UnknownEvent(event.to_string()))
    }

    pub fn load_report(&self, event: &str) -> Option<&LoadReport> {
        self.reports.get(event)
    }

    pub fn barriers(&self) -> &BarriersDb {
        &self.db
    }

    /// Article count per label of `kind` over the whole event corpus.
    pub fn label_counts(&self, event: &str, kind: BarrierKind) -> Result<BTreeMap<String, usize>, ServiceError> {
        let mut out = BTreeMap::new();
        for a in self.corpus(event)?.articles() {
            *out.entry(assign_barrier(a, kind, &self.db).bucket().to_string()).or_default() += 1;
        }
        Ok(out)
    }

    /// Checks parameters and fills in defaults.
    pub fn resolve(&self, request: &AnalysisRequest) -> Result<ResolvedRequest, ServiceError> {
        let analysis = request.analysis;
        if let Some(unknown) = request
            .params
            .keys()
            .find(|k| !COMMON_PARAMS.contains(&k.as_str()) && !analysis.params().contains(&k.as_str()))
        {
            return Err(ServiceError::validation(unknown, format!("not a parameter of {analysis}")));
        }
        let get = |k: &str| request.params.get(k).map(|v| v.trim()).filter(|v| !v.is_empty());

        let event = get("event").ok_or_else(|| ServiceError::validation("event", "required"))?;
        let corpus = self.corpus(event)?;
        let barrier = match get("barrier") {
            Some(b) => b.parse().map_err(|e: String| ServiceError::validation("barrier", e))?,
            None => self.defaults.barrier,
        };
        let window = self.resolve_window(corpus, get("from"), get("to"))?;

        let params = match analysis {
            AnalysisKind::Propagation => {
                let in_window = slice_window(corpus, &window);
                let mode = match get("mode").unwrap_or(&self.defaults.mode) {
                    "auto" => VectorMode::auto(&in_window),
                    other => other.parse().map_err(|e: String| ServiceError::validation("mode", e))?,
                };
                let tau = match get("tau") {
                    Some(raw) => parse_unit(raw)
                        .ok_or_else(|| ServiceError::validation("tau", format!("`{raw}` is not a number in [0, 1]")))?,
                    None => self.defaults.tau.unwrap_or(mode.default_tau()),
                };
                let max_lag = match get("max_lag").unwrap_or(&self.defaults.max_lag) {
                    "none" | "off" | "unlimited" => None,
                    raw => Some(format_duration(parse_duration(raw).ok_or_else(|| {
                        ServiceError::validation("max_lag", format!("`{raw}` is not a duration like 7d or 36h"))
                    })?)),
                };
                ResolvedParams::Propagation { tau, max_lag, mode }
            }
            AnalysisKind::Trends => ResolvedParams::Trends {
                bin: match get("bin") {
                    Some(b) => b.parse().map_err(|e: String| ServiceError::validation("bin", e))?,
                    None => self.defaults.bin,
                },
                cumulative: match get("cumulative") {
                    Some(raw) => parse_bool(raw)
                        .ok_or_else(|| ServiceError::validation("cumulative", format!("`{raw}` is not a boolean")))?,
                    None => false,
                },
            },
            AnalysisKind::Sentiment => ResolvedParams::Sentiment,
            AnalysisKind::Topics => {
                let count =
                    |key: &str, default: usize| -> Result<usize, ServiceError> {
                        match get(key) {
                            None => Ok(default),
                            Some(raw) => raw.parse::<usize>().ok().filter(|&v| v >= 1).ok_or_else(|| {
                                ServiceError::validation(key, format!("`{raw}` is not a positive integer"))
                            }),
                        }
                    };
                let label = get("label").map(str::to_string);
                let (k, m) = (count("k", self.defaults.k)?, count("m", self.defaults.m)?);
                let docs = self.topic_corpus(corpus, &window, barrier, label.as_deref()).len();
                if k > docs {
                    return Err(ServiceError::validation("k", TopicError::KOutOfRange { k, docs }.to_string()));
                }
                ResolvedParams::Topics { label, k, m, min_df: self.defaults.min_df }
            }
        };
        Ok(ResolvedRequest {
            event: event.to_string(),
            barrier,
            from: format_timestamp(&window.start()),
            to: format_timestamp(&window.end()),
            params,
            window: Some(window),
        })
    }

    fn resolve_window(
        &self,
        corpus: &Corpus,
        from: Option<&str>,
        to: Option<&str>,
    ) -> Result<TimeWindow, ServiceError> {
        let covering = TimeWindow::covering(corpus);
        let bound = |field: &str, raw: Option<&str>, fallback: Option<chrono::DateTime<chrono::Utc>>| match raw {
            Some(raw) => parse_timestamp(raw)
                .ok_or_else(|| ServiceError::validation(field, format!("`{raw}` is not a date or timestamp"))),
            None => fallback.ok_or_else(|| ServiceError::validation(field, "required for an event without articles")),
        };
        let start = bound("from", from, covering.map(|w| w.start()))?;
        let end = bound("to", to, covering.map(|w| w.end()))?;
        TimeWindow::new(start, end).map_err(|_| ServiceError::validation("to", "must be later than `from`"))
    }

    fn topic_corpus(&self, corpus: &Corpus, window: &TimeWindow, kind: BarrierKind, label: Option<&str>) -> Corpus {
        let sliced = slice_window(corpus, window);
        match label {
            Some(label) => sliced.filter(|a| assign_barrier(a, kind, &self.db).bucket().eq_ignore_ascii_case(label)),
            None => sliced,
        }
    }

    /// Runs a resolved request.
    pub fn execute(&self, request: &ResolvedRequest) -> Result<AnalysisDocument, ServiceError> {
        let corpus = self.corpus(&request.event)?;
        let window = request.window();
        let event = request.event.as_str();
        let kind = request.barrier;
        let doc = match &request.params {
            ResolvedParams::Propagation { tau, max_lag, mode } => {
                let failed =
                    |e: PropagationError| ServiceError::Analysis { analysis: "propagation", message: e.to_string() };
                let config = PropagationConfig {
                    tau: *tau,
                    max_lag: max_lag.as_deref().map(|l| parse_duration(l).expect("normalized on resolve")),
                    mode: *mode,
                    max_nodes: crate::propagation::DEFAULT_MAX_NODES,
                };
                let sliced = slice_window(corpus, &window);
                let graph = build_graph(&sliced, &self.db, kind, &config, &self.stopwords).map_err(failed)?;
                let stop = StopRule::MaxModularity;
                let partition = if graph.nodes.is_empty() {
                    CommunityPartition { communities: Vec::new(), modularity: 0.0 }
                } else {
                    graph.communities(stop).map_err(failed)?
                };
                AnalysisDocument::Propagation(export_propagation(event, &window, &graph, &partition, stop))
            }
            ResolvedParams::Trends { bin, cumulative } => {
                let trends = compute_trends(corpus, &self.db, kind, &window, *bin, *cumulative);
                AnalysisDocument::Trends(export_trends(event, &window, &trends))
            }
            ResolvedParams::Sentiment => {
                let heatmap = sentiment_heatmap(corpus, &self.db, kind, &window, &self.lexicon, &self.rules);
                AnalysisDocument::Sentiment(export_heatmap(event, &window, &self.rules, heatmap))
            }
            ResolvedParams::Topics { label, k, m, min_df } => {
                let sub = self.topic_corpus(corpus, &window, kind, label.as_deref());
                let config = TopicConfig { k: *k, m: *m, min_df: *min_df, ..TopicConfig::default() };
                let model = fit_topics(&sub, &self.stopwords, &config).map_err(|e| match e {
                    TopicError::KOutOfRange { .. } | TopicError::TooFewDocs { .. } => {
                        ServiceError::validation("k", e.to_string())
                    }
                    other => ServiceError::Analysis { analysis: "topics", message: other.to_string() },
                })?;
                let temporal = temporal_topics(&model.assignment, sub.articles(), &window, BinSize::Day);
                AnalysisDocument::Topics(export_topics(event, kind, label.as_deref(), &window, &model, temporal))
            }
        };
        Ok(doc)
    }

    /// Resolve then execute.
    pub fn run(&self, request: &AnalysisRequest) -> Result<AnalysisDocument, ServiceError> {
        self.execute(&self.resolve(request)?)
    }
}

fn parse_unit(raw: &str) -> Option<f64> {
    raw.parse::<f64>().ok().filter(|t| (0.0..=1.0).contains(t))
}

fn parse_bool(raw: &str) -> Option<bool> {
    match raw.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Some(true),
        "false" | "0" | "no" | "off" => Some(false),
        _ => None,
    }
}
