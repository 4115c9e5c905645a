//! Article data model, line-delimited corpus files and time windows.
//!
//! A corpus file holds one JSON object per line:
//!
//! ```text
//! {"id":"a1","title":"...","body":"...","source_name":"bbc.co.uk",
//!  "published_at":"2023-11-01T08:30:00Z","concepts":[["Gaza Strip",87]],
//!  "categories":["Israel-Hamas War"]}
//! ```
//!
//! `concepts` and `categories` may be omitted. Timestamps without an offset
//! are read as UTC.

pub mod remote;

use std::collections::HashSet;
use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::time::{format_timestamp, parse_timestamp};

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("missing field `{0}`")]
    MissingField(String),
    #[error("malformed timestamp `{0}`")]
    MalformedTimestamp(String),
    #[error("malformed record: {0}")]
    MalformedRecord(String),
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("all {count} records in {path} are malformed (first error: {first})")]
    AllRecordsMalformed { path: String, count: usize, first: ParseError },
    #[error("invalid time window: start {start} is not before end {end}")]
    InvalidWindow { start: String, end: String },
}

/// One news item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Article {
    pub id: String,
    pub title: String,
    pub body: String,
    pub source_name: String,
    #[serde(with = "wire_timestamp")]
    pub published_at: DateTime<Utc>,
    /// Weighted concept annotations, serialized as `[label, weight]` pairs.
    #[serde(default)]
    pub concepts: Vec<(String, f64)>,
    #[serde(default)]
    pub categories: Vec<String>,
}

mod wire_timestamp {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(ts: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_timestamp(ts))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let raw = String::deserialize(d)?;
        parse_timestamp(&raw).ok_or_else(|| serde::de::Error::custom(format!("malformed timestamp `{raw}`")))
    }
}

impl Article {
    /// Total order used everywhere articles are sequenced.
    pub fn order_key(&self) -> (DateTime<Utc>, &str) {
        (self.published_at, self.id.as_str())
    }

    pub fn has_category(&self, category: &str) -> bool {
        self.categories.iter().any(|c| c.eq_ignore_ascii_case(category))
    }

    pub fn has_concept(&self, concept: &str) -> bool {
        self.concepts.iter().any(|(c, _)| c.eq_ignore_ascii_case(concept))
    }

    /// Serializes to a single corpus line (no trailing newline).
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("article serialization cannot fail")
    }
}

fn required_str(obj: &Map<String, Value>, field: &str) -> Result<String, ParseError> {
    match obj.get(field) {
        None | Some(Value::Null) => Err(ParseError::MissingField(field.to_string())),
        Some(Value::String(s)) => Ok(s.clone()),
        Some(Value::Number(n)) if field == "id" => Ok(n.to_string()),
        Some(other) => Err(ParseError::MalformedRecord(format!("field `{field}` must be a string, got {other}"))),
    }
}

fn parse_concepts(value: Option<&Value>) -> Result<Vec<(String, f64)>, ParseError> {
    let items = match value {
        None | Some(Value::Null) => return Ok(Vec::new()),
        Some(Value::Array(items)) => items,
        Some(_) => return Err(ParseError::MalformedRecord("`concepts` must be an array".into())),
    };
    items
        .iter()
        .map(|item| {
            let (label, weight) = match item {
                Value::Array(pair) if pair.len() == 2 => (&pair[0], &pair[1]),
                Value::Object(o) => (o.get("label").unwrap_or(&Value::Null), o.get("weight").unwrap_or(&Value::Null)),
                _ => return Err(ParseError::MalformedRecord(format!("bad concept entry {item}"))),
            };
            let label = label
                .as_str()
                .ok_or_else(|| ParseError::MalformedRecord(format!("concept label must be a string: {item}")))?;
            let weight = match weight {
                Value::Number(n) => n.as_f64(),
                Value::String(s) => s.trim().parse::<f64>().ok(),
                _ => None,
            }
            .filter(|w| w.is_finite() && *w >= 0.0)
            .ok_or_else(|| {
                ParseError::MalformedRecord(format!("concept weight must be a non-negative real: {item}"))
            })?;
            Ok((label.to_string(), weight))
        })
        .collect()
}

fn parse_categories(value: Option<&Value>) -> Result<Vec<String>, ParseError> {
    match value {
        None | Some(Value::Null) => Ok(Vec::new()),
        Some(Value::Array(items)) => items
            .iter()
            .map(|v| {
                v.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| ParseError::MalformedRecord("categories must be strings".into()))
            })
            .collect(),
        Some(_) => Err(ParseError::MalformedRecord("`categories` must be an array".into())),
    }
}

/// Parses a JSON object into an [`Article`].
pub fn parse_article_value(value: &Value) -> Result<Article, ParseError> {
    let obj = value.as_object().ok_or_else(|| ParseError::MalformedRecord("record is not a JSON object".into()))?;
    let id = required_str(obj, "id")?;
    if id.is_empty() {
        return Err(ParseError::MalformedRecord("empty id".into()));
    }
    let title = required_str(obj, "title")?;
    let body = required_str(obj, "body")?;
    let source_name = required_str(obj, "source_name")?;
    let raw_ts = required_str(obj, "published_at")?;
    let published_at = parse_timestamp(&raw_ts).ok_or(ParseError::MalformedTimestamp(raw_ts))?;
    Ok(Article {
        id,
        title,
        body,
        source_name,
        published_at,
        concepts: parse_concepts(obj.get("concepts"))?,
        categories: parse_categories(obj.get("categories"))?,
    })
}

/// Parses one corpus line.
pub fn parse_article(record: &str) -> Result<Article, ParseError> {
    let value: Value = serde_json::from_str(record).map_err(|e| ParseError::MalformedRecord(e.to_string()))?;
    parse_article_value(&value)
}

/// Counts gathered while loading a corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    /// Non-blank lines seen.
    pub raw_records: usize,
    pub malformed: usize,
    pub duplicates: usize,
    pub retained: usize,
    /// Line number and reason for the first few malformed lines.
    pub errors: Vec<(usize, String)>,
}

/// An immutable, ordered set of articles about one tracked event.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    event_tag: String,
    articles: Vec<Article>,
}

impl Corpus {
    /// Builds a corpus, sorting by `(published_at, id)` and keeping the first
    /// occurrence of every id. Returns the number of dropped duplicates too.
    pub fn from_articles(event_tag: impl Into<String>, articles: impl IntoIterator<Item = Article>) -> (Self, usize) {
        let mut seen = HashSet::new();
        let mut kept = Vec::new();
        let mut duplicates = 0;
        for article in articles {
            if seen.insert(article.id.clone()) {
                kept.push(article);
            } else {
                duplicates += 1;
            }
        }
        kept.sort_by(|a, b| a.order_key().cmp(&b.order_key()));
        (Corpus { event_tag: event_tag.into(), articles: kept }, duplicates)
    }

    pub fn new(event_tag: impl Into<String>, articles: impl IntoIterator<Item = Article>) -> Self {
        Self::from_articles(event_tag, articles).0
    }

    pub fn event_tag(&self) -> &str {
        &self.event_tag
    }

    pub fn articles(&self) -> &[Article] {
        &self.articles
    }

    pub fn len(&self) -> usize {
        self.articles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.articles.is_empty()
    }

    /// Earliest and latest publication instants.
    pub fn span(&self) -> Option<(DateTime<Utc>, DateTime<Utc>)> {
        Some((self.articles.first()?.published_at, self.articles.last()?.published_at))
    }

    /// Keeps the articles matching `keep`, preserving order.
    pub fn filter(&self, keep: impl Fn(&Article) -> bool) -> Corpus {
        Corpus {
            event_tag: self.event_tag.clone(),
            articles: self.articles.iter().filter(|a| keep(a)).cloned().collect(),
        }
    }

    pub fn write_jsonl(&self, mut out: impl Write) -> io::Result<()> {
        for article in &self.articles {
            writeln!(out, "{}", article.to_line())?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CorpusError> {
        let path = path.as_ref();
        let io_err = |source| CorpusError::Io { path: path.display().to_string(), source };
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).map_err(io_err)?;
        fs::write(path, buf).map_err(io_err)
    }
}

const MAX_REPORTED_ERRORS: usize = 20;

/// Loads a corpus from line-delimited records read from `reader`.
pub fn read_corpus(reader: impl BufRead, event_tag: &str, origin: &str) -> Result<(Corpus, LoadReport), CorpusError> {
    let mut report = LoadReport::default();
    let mut parsed = Vec::new();
    let mut first_error = None;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| CorpusError::Io { path: origin.to_string(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        report.raw_records += 1;
        match parse_article(&line) {
            Ok(article) => parsed.push(article),
            Err(err) => {
                report.malformed += 1;
                tracing::warn!(line = lineno + 1, %err, "skipping malformed record");
                if report.errors.len() < MAX_REPORTED_ERRORS {
                    report.errors.push((lineno + 1, err.to_string()));
                }
                first_error.get_or_insert(err);
            }
        }
    }
    if report.raw_records > 0 && parsed.is_empty() {
        return Err(CorpusError::AllRecordsMalformed {
            path: origin.to_string(),
            count: report.raw_records,
            first: first_error.expect("malformed count is non-zero"),
        });
    }
    let (corpus, duplicates) = Corpus::from_articles(event_tag, parsed);
    report.duplicates = duplicates;
    report.retained = corpus.len();
    Ok((corpus, report))
}

/// Loads a corpus file. Malformed lines are skipped and counted.
pub fn load_corpus(path: impl AsRef<Path>, event_tag: &str) -> Result<(Corpus, LoadReport), CorpusError> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|source| CorpusError::Io { path: path.display().to_string(), source })?;
    read_corpus(BufReader::new(file), event_tag, &path.display().to_string())
}

/// Half-open interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TimeWindow {
    start: DateTime<Utc>,
    end: DateTime<Utc>,
}

impl TimeWindow {
    pub fn new(start: DateTime<Utc>, end: DateTime<Utc>) -> Result<Self, CorpusError> {
        if start < end {
            Ok(TimeWindow { start, end })
        } else {
            Err(CorpusError::InvalidWindow { start: format_timestamp(&start), end: format_timestamp(&end) })
        }
    }

    /// Whole UTC days from the first article's day to the day after the last.
    pub fn covering(corpus: &Corpus) -> Option<Self> {
        let (first, last) = corpus.span()?;
        let start = first.date_naive().and_hms_opt(0, 0, 0)?.and_utc();
        let end = last.date_naive().succ_opt()?.and_hms_opt(0, 0, 0)?.and_utc();
        Some(TimeWindow { start, end })
    }

    pub fn start(&self) -> DateTime<Utc> {
        self.start
    }

    pub fn end(&self) -> DateTime<Utc> {
        self.end
    }

    pub fn contains(&self, ts: DateTime<Utc>) -> bool {
        self.start <= ts && ts < self.end
    }
}

/// Articles with `start <= published_at < end`, order preserved.
pub fn slice_window(corpus: &Corpus, window: &TimeWindow) -> Corpus {
    // Sorted by time, so the slice is contiguous.
    let lo = corpus.articles.partition_point(|a| a.published_at < window.start);
    let hi = corpus.articles.partition_point(|a| a.published_at < window.end);
    Corpus { event_tag: corpus.event_tag.clone(), articles: corpus.articles[lo..hi.max(lo)].to_vec() }
}
