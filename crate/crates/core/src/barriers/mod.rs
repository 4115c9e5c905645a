//! Barriers database: publisher metadata, economic classes and the mapping
//! from an article to its geographic, economic or political label.
//!
//! File formats (UTF-8 CSV with a header row):
//!
//! * `publishers.csv`: `source_name,hq_country,political_alignment`
//! * `clusters.csv`: `country,class` where class is `C<n>` or `<n>`
//! * `prosperity.csv`: `country,d1,...,d12`

mod country;
mod kmeans;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use country::{is_unknown, normalize, CountryNames};
pub use kmeans::{
    euclidean_distance, kmeans, kmeans_with, load_prosperity, parse_prosperity, KmeansOptions, KmeansRun,
    ProsperityVector, PROSPERITY_DIMS,
};

use crate::corpus::Article;
use crate::data::ECONOMIC_CLUSTERS_CSV;

/// Label used for any article whose barrier cannot be resolved.
pub const UNKNOWN: &str = "Unknown";

#[derive(Debug, Error, PartialEq)]
pub enum BarrierError {
    #[error("expected {expected} dimensions, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite prosperity value for {0}")]
    NonFinite(String),
    #[error("k = {k} is out of range for {points} points")]
    KTooLarge { k: usize, points: usize },
    #[error("no vectors to cluster")]
    EmptyInput,
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
    #[error("header mismatch: expected `{expected}`, found `{found}`")]
    HeaderMismatch { expected: String, found: String },
    #[error("bad value: {0}")]
    BadValue(String),
}

impl BarrierError {
    fn io(path: &Path, err: std::io::Error) -> Self {
        BarrierError::Io { path: path.display().to_string(), message: err.to_string() }
    }
}

impl From<csv::Error> for BarrierError {
    fn from(err: csv::Error) -> Self {
        BarrierError::BadValue(err.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BarrierKind {
    Geographic,
    Economic,
    Political,
}

impl BarrierKind {
    pub const ALL: [BarrierKind; 3] = [BarrierKind::Geographic, BarrierKind::Economic, BarrierKind::Political];

    pub fn as_str(self) -> &'static str {
        match self {
            BarrierKind::Geographic => "geographic",
            BarrierKind::Economic => "economic",
            BarrierKind::Political => "political",
        }
    }
}

impl fmt::Display for BarrierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BarrierKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "geographic" | "geographical" | "geo" => Ok(BarrierKind::Geographic),
            "economic" | "econ" => Ok(BarrierKind::Economic),
            "political" | "pol" => Ok(BarrierKind::Political),
            other => Err(format!("unknown barrier kind `{other}` (expected geographic, economic or political)")),
        }
    }
}

/// A resolved barrier label; `None` means unknown.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BarrierLabel {
    pub kind: BarrierKind,
    pub label: Option<String>,
}

impl BarrierLabel {
    pub fn is_known(&self) -> bool {
        self.label.is_some()
    }

    /// Bucket name used by the analyses; unknown labels share [`UNKNOWN`].
    pub fn bucket(&self) -> &str {
        self.label.as_deref().unwrap_or(UNKNOWN)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PublisherProfile {
    pub source_name: String,
    pub hq_country: Option<String>,
    pub political_alignment: Option<String>,
}

/// Country → economic class (`C1..Ck`).
#[derive(Debug, Clone, PartialEq)]
pub struct EconomicClusterMap {
    pub k: usize,
    /// Normalized country key → 1-based class id.
    pub classes: BTreeMap<String, usize>,
    /// Normalized country key → display name.
    pub names: BTreeMap<String, String>,
    /// Empty when the map was loaded from a file.
    pub centroids: Vec<Vec<f64>>,
    pub seed: Option<u64>,
    pub inertia: f64,
}

pub fn class_label(class: usize) -> String {
    format!("C{class}")
}

fn parse_class(raw: &str) -> Option<usize> {
    let raw = raw.trim();
    let digits = raw.strip_prefix('C').or_else(|| raw.strip_prefix('c')).unwrap_or(raw);
    digits.parse().ok().filter(|&c| c >= 1)
}

impl EconomicClusterMap {
    /// Parses `country,class` rows. A country listed under two classes keeps
    /// the first; the conflict is returned as a warning.
    pub fn from_csv_str(raw: &str, names: &CountryNames) -> Result<(Self, Vec<String>), BarrierError> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(raw.as_bytes());
        let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        if header != ["country", "class"] {
            return Err(BarrierError::HeaderMismatch { expected: "country,class".into(), found: header.join(",") });
        }
        let mut classes = BTreeMap::new();
        let mut display = BTreeMap::new();
        let mut warnings = Vec::new();
        for rec in reader.records() {
            let rec = rec?;
            let country = rec[0].to_string();
            let class = parse_class(&rec[1]).ok_or_else(|| BarrierError::BadValue(format!("class `{}`", &rec[1])))?;
            let key = names.key(&country);
            if let Some(&existing) = classes.get(&key) {
                if existing != class {
                    let msg = format!(
                        "{country} listed under {} and {}; keeping {}",
                        class_label(existing),
                        class_label(class),
                        class_label(existing)
                    );
                    tracing::warn!("{msg}");
                    warnings.push(msg);
                }
                continue;
            }
            classes.insert(key.clone(), class);
            display.insert(key, country);
        }
        let k = classes.values().copied().max().unwrap_or(0);
        Ok((
            EconomicClusterMap { k, classes, names: display, centroids: Vec::new(), seed: None, inertia: 0.0 },
            warnings,
        ))
    }

    /// The bundled country classification fixture.
    pub fn bundled() -> Self {
        Self::from_csv_str(ECONOMIC_CLUSTERS_CSV, &CountryNames::default()).expect("bundled fixture parses").0
    }

    pub fn class_of_key(&self, key: &str) -> Option<usize> {
        self.classes.get(key).copied()
    }

    /// Class label for a country name, alias or ISO code.
    pub fn lookup(&self, country: &str, names: &CountryNames) -> Option<String> {
        self.class_of_key(&names.key(country)).map(class_label)
    }

    /// Distinct class ids with at least one member, ascending.
    pub fn present_classes(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.classes.values().copied().collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Members of one class, display names sorted.
    pub fn members(&self, class: usize) -> Vec<&str> {
        let mut v: Vec<&str> =
            self.classes.iter().filter(|(_, &c)| c == class).map(|(k, _)| self.names[k].as_str()).collect();
        v.sort_unstable();
        v
    }

    /// Serializes as `country,class`, sorted by class then country.
    pub fn to_csv(&self) -> String {
        let mut rows: Vec<(usize, &str)> = self.classes.iter().map(|(k, &c)| (c, self.names[k].as_str())).collect();
        rows.sort();
        let mut out = String::from("country,class\n");
        for (c, name) in rows {
            out.push_str(&format!("{name},{}\n", class_label(c)));
        }
        out
    }
}

/// Immutable lookup structures joining articles to barrier labels.
#[derive(Debug, Clone)]
pub struct BarriersDb {
    publishers: HashMap<String, PublisherProfile>,
    clusters: EconomicClusterMap,
    countries: CountryNames,
    warnings: Vec<String>,
}

fn source_key(source: &str) -> String {
    source.trim().to_lowercase()
}

fn optional(raw: &str) -> Option<String> {
    let t = raw.trim();
    (!is_unknown(t)).then(|| t.to_string())
}

impl BarriersDb {
    pub fn new(publishers: impl IntoIterator<Item = PublisherProfile>, clusters: EconomicClusterMap) -> Self {
        let mut db = BarriersDb {
            publishers: HashMap::new(),
            clusters,
            countries: CountryNames::default(),
            warnings: Vec::new(),
        };
        for p in publishers {
            db.insert_publisher(p);
        }
        db
    }

    fn insert_publisher(&mut self, profile: PublisherProfile) {
        if let Some(old) = self.publishers.insert(source_key(&profile.source_name), profile) {
            let msg = format!("duplicate publisher `{}`; last row wins", old.source_name);
            tracing::warn!("{msg}");
            self.warnings.push(msg);
        }
    }

    /// Parses `source_name,hq_country,political_alignment` rows. Later rows
    /// replace earlier rows for the same source.
    pub fn from_csv_strs(publishers_csv: &str, clusters_csv: &str) -> Result<Self, BarrierError> {
        let countries = CountryNames::default();
        let (clusters, cluster_warnings) = EconomicClusterMap::from_csv_str(clusters_csv, &countries)?;
        let mut db = BarriersDb::new([], clusters);
        db.warnings.extend(cluster_warnings);

        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(publishers_csv.as_bytes());
        let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        if header != ["source_name", "hq_country", "political_alignment"] {
            return Err(BarrierError::HeaderMismatch {
                expected: "source_name,hq_country,political_alignment".into(),
                found: header.join(","),
            });
        }
        for rec in reader.records() {
            let rec = rec?;
            let source_name = rec[0].to_string();
            if source_name.is_empty() {
                return Err(BarrierError::BadValue("empty source_name".into()));
            }
            db.insert_publisher(PublisherProfile {
                source_name,
                hq_country: optional(&rec[1]),
                political_alignment: optional(&rec[2]),
            });
        }
        Ok(db)
    }

    pub fn publishers(&self) -> impl Iterator<Item = &PublisherProfile> {
        self.publishers.values()
    }

    pub fn publisher(&self, source_name: &str) -> Option<&PublisherProfile> {
        self.publishers.get(&source_key(source_name))
    }

    pub fn clusters(&self) -> &EconomicClusterMap {
        &self.clusters
    }

    pub fn countries(&self) -> &CountryNames {
        &self.countries
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn economic_class(&self, country: &str) -> Option<String> {
        self.clusters.lookup(country, &self.countries)
    }
}

/// Reads both CSV files; see [`BarriersDb::from_csv_strs`].
pub fn load_barriers_db(
    publishers_path: impl AsRef<Path>,
    clusters_path: impl AsRef<Path>,
) -> Result<BarriersDb, BarrierError> {
    let p = publishers_path.as_ref();
    let c = clusters_path.as_ref();
    let publishers = fs::read_to_string(p).map_err(|e| BarrierError::io(p, e))?;
    let clusters = fs::read_to_string(c).map_err(|e| BarrierError::io(c, e))?;
    BarriersDb::from_csv_strs(&publishers, &clusters)
}

/// Resolves an article's label for one barrier kind via its publisher.
/// Missing links give an unknown label, never an error.
pub fn assign_barrier(article: &Article, kind: BarrierKind, db: &BarriersDb) -> BarrierLabel {
    let profile = db.publisher(&article.source_name);
    let label = match kind {
        BarrierKind::Geographic => profile.and_then(|p| p.hq_country.clone()),
        BarrierKind::Political => profile.and_then(|p| p.political_alignment.clone()),
        BarrierKind::Economic => profile.and_then(|p| p.hq_country.as_deref()).and_then(|c| db.economic_class(c)),
    };
    BarrierLabel { kind, label }
}

/// Known/unknown label counts for one barrier kind.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct KindCoverage {
    pub known: usize,
    pub unknown: usize,
    pub labels: BTreeMap<String, usize>,
}

/// Label coverage of `articles` for every barrier kind.
pub fn coverage<'a>(
    articles: impl IntoIterator<Item = &'a Article>,
    db: &BarriersDb,
) -> BTreeMap<BarrierKind, KindCoverage> {
    let mut out: BTreeMap<BarrierKind, KindCoverage> =
        BarrierKind::ALL.iter().map(|&k| (k, KindCoverage::default())).collect();
    for article in articles {
        for kind in BarrierKind::ALL {
            let label = assign_barrier(article, kind, db);
            let entry = out.get_mut(&kind).unwrap();
            if label.is_known() {
                entry.known += 1;
            } else {
                entry.unknown += 1;
            }
            *entry.labels.entry(label.bucket().to_string()).or_default() += 1;
        }
    }
    out
}
