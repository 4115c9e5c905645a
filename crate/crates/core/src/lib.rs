//! News barrier analytics.
//!
//! Articles are enriched with geographic, economic and political barrier
//! labels taken from their publisher, then fed to four analyses:
//!
//! * [`propagation`]: a feed-forward similarity graph over articles with
//!   Girvan–Newman communities,
//! * [`trends`]: per-label article counts over time,
//! * [`sentiment`]: lexicon scoring of article openings and daily heatmaps,
//! * [`topics`]: TF-IDF + Ward hierarchical topics with NPMI coherence and
//!   topic diversity.
//!
//! Every analysis produces an [`AnalysisDocument`], the JSON shape shared by
//! the CLI and the HTTP service in [`service`].

pub mod barriers;
pub mod cli;
pub mod corpus;
pub mod data;
pub mod document;
pub mod propagation;
pub mod sentiment;
pub mod service;
pub mod sparse;
pub mod synthetic;
pub mod time;
pub mod topics;
pub mod trends;

pub use barriers::{BarrierKind, BarrierLabel, BarriersDb, EconomicClusterMap};
pub use corpus::{Article, Corpus, TimeWindow};
pub use document::AnalysisDocument;
