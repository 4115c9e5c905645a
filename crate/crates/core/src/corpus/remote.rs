//! Paginated article fetching from a remote news API.
//!
//! The wire contract is a plain HTTPS GET:
//!
//! ```text
//! GET {endpoint}?categories=A,B&concepts=C&from=..&to=..&page=N&page_size=M&api_key=K
//! -> {"articles": [<corpus record>...], "page": N, "pages": P}
//! ```
//!
//! `pages` is optional; without it paging stops at the first short page.

use std::collections::VecDeque;
use std::fs;
use std::path::Path;
use std::sync::Mutex;
use std::time::Duration;

use serde::Deserialize;
use serde_json::Value;
use thiserror::Error;

use super::{parse_article_value, Article, TimeWindow};
use crate::time::format_timestamp;

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ClientConfig {
    pub endpoint: String,
    pub api_key: String,
    #[serde(default = "default_page_size")]
    pub page_size: u32,
    #[serde(default = "default_attempts")]
    pub max_attempts: u32,
    /// Delay before the second attempt; doubles for every further attempt.
    #[serde(default = "default_backoff_ms")]
    pub backoff_ms: u64,
}

fn default_page_size() -> u32 {
    100
}
fn default_attempts() -> u32 {
    3
}
fn default_backoff_ms() -> u64 {
    500
}

impl ClientConfig {
    pub fn new(endpoint: impl Into<String>, api_key: impl Into<String>, page_size: u32) -> Self {
        ClientConfig {
            endpoint: endpoint.into(),
            api_key: api_key.into(),
            page_size,
            max_attempts: default_attempts(),
            backoff_ms: default_backoff_ms(),
        }
    }

    pub fn from_toml_str(raw: &str) -> Result<Self, FetchError> {
        let cfg: ClientConfig = toml::from_str(raw).map_err(|e| FetchError::Config(e.to_string()))?;
        if cfg.page_size == 0 || cfg.max_attempts == 0 {
            return Err(FetchError::Config("page_size and max_attempts must be positive".into()));
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, FetchError> {
        let path = path.as_ref();
        let raw = fs::read_to_string(path).map_err(|e| FetchError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&raw)
    }

    fn backoff(&self, attempt: u32) -> Duration {
        Duration::from_millis(self.backoff_ms.saturating_mul(1u64 << (attempt - 1).min(16)))
    }
}

/// Concept/category filter plus publication window.
#[derive(Debug, Clone, PartialEq)]
pub struct RemoteQuery {
    pub categories: Vec<String>,
    pub concepts: Vec<String>,
    pub window: TimeWindow,
}

impl RemoteQuery {
    pub fn matches(&self, article: &Article) -> bool {
        if !self.window.contains(article.published_at) {
            return false;
        }
        if self.categories.is_empty() && self.concepts.is_empty() {
            return true;
        }
        self.categories.iter().any(|c| article.has_category(c)) || self.concepts.iter().any(|c| article.has_concept(c))
    }

    fn query_pairs(&self) -> Vec<(&'static str, String)> {
        let mut pairs = Vec::new();
        if !self.categories.is_empty() {
            pairs.push(("categories", self.categories.join(",")));
        }
        if !self.concepts.is_empty() {
            pairs.push(("concepts", self.concepts.join(",")));
        }
        pairs.push(("from", format_timestamp(&self.window.start())));
        pairs.push(("to", format_timestamp(&self.window.end())));
        pairs
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransportError {
    #[error("http status {code}: {body}")]
    Status { code: u16, body: String },
    #[error("network failure: {0}")]
    Network(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum FetchError {
    #[error("authentication rejected: {0}")]
    Auth(String),
    #[error("rate limited after {attempts} attempts")]
    RateLimited { attempts: u32 },
    #[error("network error after {attempts} attempts: {message}")]
    Network { attempts: u32, message: String },
    #[error("unexpected response: {0}")]
    Protocol(String),
    #[error("client config: {0}")]
    Config(String),
}

/// One page of raw records.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct Page {
    #[serde(default)]
    pub articles: Vec<Value>,
    #[serde(default)]
    pub pages: Option<u32>,
}

/// Anything that can serve numbered pages for a query.
pub trait PageSource {
    fn fetch_page(&self, query: &RemoteQuery, page: u32, page_size: u32) -> Result<Page, TransportError>;
}

/// Real HTTP page source.
pub struct HttpPageSource {
    agent: ureq::Agent,
    endpoint: String,
    api_key: String,
}

impl HttpPageSource {
    pub fn new(config: &ClientConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(60)))
            .build()
            .into();
        HttpPageSource { agent, endpoint: config.endpoint.clone(), api_key: config.api_key.clone() }
    }
}

impl PageSource for HttpPageSource {
    fn fetch_page(&self, query: &RemoteQuery, page: u32, page_size: u32) -> Result<Page, TransportError> {
        let mut request = self.agent.get(&self.endpoint);
        for (k, v) in query.query_pairs() {
            request = request.query(k, v);
        }
        let mut response = request
            .query("page", page.to_string())
            .query("page_size", page_size.to_string())
            .query("api_key", &self.api_key)
            .call()
            .map_err(|e| TransportError::Network(e.to_string()))?;
        let code = response.status().as_u16();
        let body = response.body_mut().read_to_string().map_err(|e| TransportError::Network(e.to_string()))?;
        if !(200..300).contains(&code) {
            return Err(TransportError::Status { code, body });
        }
        serde_json::from_str(&body).map_err(|e| TransportError::Status { code, body: format!("undecodable page: {e}") })
    }
}

/// In-memory page source for tests and offline runs. Serves `articles`
/// filtered by the query, and fails with each queued status code first.
#[derive(Default)]
pub struct FixturePageSource {
    articles: Vec<Article>,
    failures: Mutex<VecDeque<u16>>,
    requests: Mutex<Vec<u32>>,
    report_page_count: bool,
}

impl FixturePageSource {
    pub fn new(articles: Vec<Article>) -> Self {
        FixturePageSource { articles, report_page_count: true, ..Default::default() }
    }

    /// Omits `pages` from responses so the client has to detect the last page.
    pub fn without_page_count(mut self) -> Self {
        self.report_page_count = false;
        self
    }

    pub fn fail_with(self, statuses: impl IntoIterator<Item = u16>) -> Self {
        self.failures.lock().unwrap().extend(statuses);
        self
    }

    /// Page numbers requested so far, including failed attempts.
    pub fn requests(&self) -> Vec<u32> {
        self.requests.lock().unwrap().clone()
    }
}

impl PageSource for FixturePageSource {
    fn fetch_page(&self, query: &RemoteQuery, page: u32, page_size: u32) -> Result<Page, TransportError> {
        self.requests.lock().unwrap().push(page);
        if let Some(code) = self.failures.lock().unwrap().pop_front() {
            return Err(TransportError::Status { code, body: "injected failure".into() });
        }
        let matching: Vec<_> = self.articles.iter().filter(|a| query.matches(a)).collect();
        let size = page_size as usize;
        let pages = matching.len().div_ceil(size) as u32;
        let start = (page.saturating_sub(1) as usize) * size;
        let articles = matching
            .iter()
            .skip(start)
            .take(size)
            .map(|a| serde_json::to_value(a).expect("article serializes"))
            .collect();
        Ok(Page { articles, pages: self.report_page_count.then_some(pages) })
    }
}

/// Pull-based stream over every matching article, page by page.
pub struct FetchStream<'a, S: PageSource> {
    source: &'a S,
    query: RemoteQuery,
    config: ClientConfig,
    next_page: u32,
    buffer: VecDeque<Article>,
    finished: bool,
    sleep: fn(Duration),
    /// Records skipped because they failed to parse or did not match.
    pub skipped: usize,
}

impl<'a, S: PageSource> FetchStream<'a, S> {
    /// Replaces the sleep used between retries (tests pass a no-op).
    pub fn with_sleep(mut self, sleep: fn(Duration)) -> Self {
        self.sleep = sleep;
        self
    }

    fn fetch_with_retry(&self, page: u32) -> Result<Page, FetchError> {
        let mut attempt = 1;
        loop {
            let err = match self.source.fetch_page(&self.query, page, self.config.page_size) {
                Ok(page) => return Ok(page),
                Err(err) => err,
            };
            let retryable = match &err {
                TransportError::Status { code: 401 | 403, body } => return Err(FetchError::Auth(body.clone())),
                TransportError::Status { code, .. } => *code == 429 || *code >= 500,
                TransportError::Network(_) => true,
            };
            if !retryable {
                return Err(FetchError::Protocol(err.to_string()));
            }
            if attempt >= self.config.max_attempts {
                return Err(match err {
                    TransportError::Status { code: 429, .. } => FetchError::RateLimited { attempts: attempt },
                    other => FetchError::Network { attempts: attempt, message: other.to_string() },
                });
            }
            tracing::debug!(page, attempt, %err, "retrying page fetch");
            (self.sleep)(self.config.backoff(attempt));
            attempt += 1;
        }
    }
}

impl<S: PageSource> Iterator for FetchStream<'_, S> {
    type Item = Result<Article, FetchError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if let Some(article) = self.buffer.pop_front() {
                return Some(Ok(article));
            }
            if self.finished {
                return None;
            }
            let page_no = self.next_page;
            let page = match self.fetch_with_retry(page_no) {
                Ok(page) => page,
                Err(err) => {
                    self.finished = true;
                    return Some(Err(err));
                }
            };
            let received = page.articles.len();
            for record in &page.articles {
                match parse_article_value(record) {
                    Ok(article) if self.query.matches(&article) => self.buffer.push_back(article),
                    Ok(_) => self.skipped += 1,
                    Err(err) => {
                        tracing::warn!(page = page_no, %err, "skipping malformed remote record");
                        self.skipped += 1;
                    }
                }
            }
            self.next_page += 1;
            self.finished = received == 0
                || page.pages.is_some_and(|total| page_no >= total)
                || (page.pages.is_none() && received < self.config.page_size as usize);
        }
    }
}

/// Streams every article matching `query`, retrying transient failures
/// (429, 5xx, network) with exponential backoff up to `max_attempts`.
pub fn fetch_remote<'a, S: PageSource>(source: &'a S, query: RemoteQuery, config: &ClientConfig) -> FetchStream<'a, S> {
    FetchStream {
        source,
        query,
        config: config.clone(),
        next_page: 1,
        buffer: VecDeque::new(),
        finished: false,
        sleep: std::thread::sleep,
        skipped: 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::parse_timestamp;

    fn article(i: usize, category: &str) -> Article {
        Article {
            id: format!("a{i:02}"),
            title: format!("title {i}"),
            body: "body".into(),
            source_name: "src".into(),
            published_at: parse_timestamp("2023-11-01T00:00:00Z").unwrap() + chrono::Duration::hours(i as i64),
            concepts: vec![],
            categories: vec![category.into()],
        }
    }

    fn query(categories: &[&str]) -> RemoteQuery {
        RemoteQuery {
            categories: categories.iter().map(|s| s.to_string()).collect(),
            concepts: vec![],
            window: TimeWindow::new(parse_timestamp("2023-10-01").unwrap(), parse_timestamp("2024-01-01").unwrap())
                .unwrap(),
        }
    }

    fn config(page_size: u32) -> ClientConfig {
        ClientConfig { backoff_ms: 0, ..ClientConfig::new("http://unused", "key", page_size) }
    }

    fn no_sleep(_: Duration) {}

    #[test]
    fn two_pages_of_five() {
        let source = FixturePageSource::new((0..10).map(|i| article(i, "Israel-Hamas War")).collect());
        let got: Vec<_> =
            fetch_remote(&source, query(&[]), &config(5)).with_sleep(no_sleep).collect::<Result<_, _>>().unwrap();
        assert_eq!(got.len(), 10);
        assert_eq!(source.requests(), [1, 2]);
    }

    #[test]
    fn short_last_page_ends_stream_without_page_count() {
        let source = FixturePageSource::new((0..7).map(|i| article(i, "x")).collect()).without_page_count();
        let got: Vec<_> = fetch_remote(&source, query(&[]), &config(5)).collect::<Result<_, _>>().unwrap();
        assert_eq!(got.len(), 7);
        assert_eq!(source.requests(), [1, 2]);
    }

    #[test]
    fn rate_limited_after_budget() {
        let source = FixturePageSource::new(vec![article(0, "x")]).fail_with([429, 429, 429]);
        let got: Vec<_> = fetch_remote(&source, query(&[]), &config(5)).with_sleep(no_sleep).collect();
        assert_eq!(got, vec![Err(FetchError::RateLimited { attempts: 3 })]);
        assert_eq!(source.requests().len(), 3);
    }

    #[test]
    fn transient_failures_recovered() {
        let source = FixturePageSource::new(vec![article(0, "x")]).fail_with([503, 429]);
        let got: Vec<_> =
            fetch_remote(&source, query(&[]), &config(5)).with_sleep(no_sleep).collect::<Result<_, _>>().unwrap();
        assert_eq!(got.len(), 1);
    }

    #[test]
    fn auth_failure_is_not_retried() {
        let source = FixturePageSource::new(vec![article(0, "x")]).fail_with([401]);
        let got: Vec<_> = fetch_remote(&source, query(&[]), &config(5)).collect();
        assert!(matches!(got.as_slice(), [Err(FetchError::Auth(_))]));
        assert_eq!(source.requests().len(), 1);
    }

    #[test]
    fn category_filter() {
        let mut articles: Vec<_> = (0..4).map(|i| article(i, "Israel-Hamas War")).collect();
        articles.extend((4..9).map(|i| article(i, "Russo-Ukrainian War")));
        let source = FixturePageSource::new(articles);
        let got: Vec<_> =
            fetch_remote(&source, query(&["Israel-Hamas War"]), &config(3)).collect::<Result<Vec<_>, _>>().unwrap();
        assert_eq!(got.len(), 4);
        assert!(got.iter().all(|a| a.has_category("Israel-Hamas War")));
    }

    #[test]
    fn backoff_doubles() {
        let cfg = ClientConfig { backoff_ms: 100, ..config(5) };
        assert_eq!(cfg.backoff(1), Duration::from_millis(100));
        assert_eq!(cfg.backoff(2), Duration::from_millis(200));
    }

    #[test]
    fn config_from_toml() {
        let cfg =
            ClientConfig::from_toml_str("endpoint = \"https://news.example/api\"\napi_key = \"k\"\npage_size = 50\n")
                .unwrap();
        assert_eq!(cfg.page_size, 50);
        assert_eq!(cfg.max_attempts, 3);
        assert!(ClientConfig::from_toml_str("endpoint = \"x\"").is_err());
    }
}
