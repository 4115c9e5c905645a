use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ServiceError;
use crate::barriers::BarrierKind;
use crate::sentiment::SentimentRules;
use crate::time::BinSize;

/// Service configuration, read from TOML. Relative paths resolve against
/// the config file's directory.
///
/// ```toml
/// bind = "127.0.0.1:8080"
/// cache_dir = "cache"
/// static_dir = "webui/dist"
///
/// [corpora]
/// israel-hamas-war = "data/israel_hamas.jsonl"
///
/// [barriers]
/// publishers = "data/publishers.csv"
///
/// [defaults]
/// barrier = "economic"
/// k = 8
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    #[serde(default = "default_bind")]
    pub bind: String,
    #[serde(default = "default_cache_dir")]
    pub cache_dir: PathBuf,
    #[serde(default = "default_capacity")]
    pub cache_capacity: usize,
    #[serde(default)]
    pub static_dir: Option<PathBuf>,
    #[serde(default)]
    pub corpora: BTreeMap<String, PathBuf>,
    pub barriers: BarrierPaths,
    #[serde(default)]
    pub sentiment: SentimentPaths,
    #[serde(default)]
    pub topics: TopicPaths,
    #[serde(default)]
    pub defaults: Defaults,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierPaths {
    pub publishers: PathBuf,
    /// Defaults to the bundled country table.
    #[serde(default)]
    pub clusters: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SentimentPaths {
    pub lexicon: Option<PathBuf>,
    pub intensifiers: Option<PathBuf>,
    pub negations: Option<PathBuf>,
    #[serde(default)]
    pub rules: SentimentRules,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopicPaths {
    pub stopwords: Option<PathBuf>,
}

/// Parameter values used when a request omits them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Defaults {
    pub barrier: BarrierKind,
    /// `None` uses the vector mode's own threshold.
    pub tau: Option<f64>,
    pub max_lag: String,
    /// `auto`, `concepts` or `tfidf`.
    pub mode: String,
    pub bin: BinSize,
    pub k: usize,
    pub m: usize,
    pub min_df: usize,
}

impl Default for Defaults {
    fn default() -> Self {
        Defaults {
            barrier: BarrierKind::Geographic,
            tau: None,
            max_lag: "7d".into(),
            mode: "auto".into(),
            bin: BinSize::Day,
            k: 10,
            m: 10,
            min_df: 2,
        }
    }
}

fn default_bind() -> String {
    "127.0.0.1:8080".into()
}

fn default_cache_dir() -> PathBuf {
    PathBuf::from(".barrierlens-cache")
}

fn default_capacity() -> usize {
    512
}

impl ServiceConfig {
    /// Parses TOML and resolves relative paths against `base_dir`.
    pub fn from_toml_str(raw: &str, base_dir: &Path) -> Result<Self, ServiceError> {
        let mut config: ServiceConfig = toml::from_str(raw).map_err(|e| ServiceError::Config(e.to_string()))?;
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base_dir.join(&*p);
            }
        };
        resolve(&mut config.cache_dir);
        config.static_dir.as_mut().map(resolve);
        config.corpora.values_mut().for_each(resolve);
        resolve(&mut config.barriers.publishers);
        config.barriers.clusters.as_mut().map(resolve);
        for p in [&mut config.sentiment.lexicon, &mut config.sentiment.intensifiers, &mut config.sentiment.negations] {
            p.as_mut().map(resolve);
        }
        config.topics.stopwords.as_mut().map(resolve);
        if config.cache_capacity == 0 {
            return Err(ServiceError::Config("cache_capacity must be at least 1".into()));
        }
        config.sentiment.rules.validate().map_err(ServiceError::Config)?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ServiceError> {
        let path = path.as_ref();
        let raw = fs::read_to_string(path).map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&raw, path.parent().unwrap_or(Path::new(".")))
    }
}
