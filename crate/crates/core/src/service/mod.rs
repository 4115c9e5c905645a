//! HTTP JSON API over loaded corpora.
//!
//! Corpora, the barriers tables, the lexicon and stopwords are loaded once
//! into an immutable [`Snapshot`]. Requests are resolved against it into a
//! [`ResolvedRequest`] (all defaults filled in), which keys the on-disk
//! cache together with the snapshot id. The CLI runs the same resolution
//! and execution path, so both emit identical documents.

mod cache;
mod config;
mod engine;
mod http;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

pub use cache::DiskCache;
pub use config::{Defaults, ServiceConfig};
pub use engine::{
    cache_key, AnalysisKind, AnalysisRequest, ResolvedParams, ResolvedRequest, Snapshot, SnapshotSources,
};
pub use http::{router, serve, serve_listener, shutdown_signal, AppState};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ServiceError {
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
    #[error("unknown analysis `{0}`")]
    UnknownAnalysis(String),
    #[error("invalid `{field}`: {message}")]
    Validation { field: String, message: String },
    #[error("{analysis} analysis failed: {message}")]
    Analysis { analysis: &'static str, message: String },
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("cannot bind {addr}: {message}")]
    Bind { addr: String, message: String },
    #[error("{0}")]
    Unavailable(String),
    #[error("internal error: {0}")]
    Internal(String),
}

/// Error body returned by every failing endpoint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorEnvelope {
    pub error: &'static str,
    pub message: String,
    pub details: Value,
}

impl ServiceError {
    pub fn validation(field: &str, message: impl Into<String>) -> Self {
        ServiceError::Validation { field: field.to_string(), message: message.into() }
    }

    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::UnknownEvent(_) => "unknown_event",
            ServiceError::UnknownAnalysis(_) => "unknown_analysis",
            ServiceError::Validation { .. } => "validation_error",
            ServiceError::Analysis { .. } => "analysis_error",
            ServiceError::Config(_) => "config_error",
            ServiceError::Data(_) => "data_error",
            ServiceError::Bind { .. } => "bind_error",
            ServiceError::Unavailable(_) => "unavailable",
            ServiceError::Internal(_) => "internal_error",
        }
    }

    pub fn status(&self) -> u16 {
        match self {
            ServiceError::UnknownEvent(_) | ServiceError::UnknownAnalysis(_) => 404,
            ServiceError::Validation { .. } => 400,
            ServiceError::Unavailable(_) => 409,
            ServiceError::Analysis { .. } => 422,
            _ => 500,
        }
    }

    pub fn envelope(&self) -> ErrorEnvelope {
        let details = match self {
            ServiceError::UnknownEvent(e) => json!({ "event": e }),
            ServiceError::UnknownAnalysis(a) => json!({ "analysis": a }),
            ServiceError::Validation { field, .. } => json!({ "field": field }),
            ServiceError::Analysis { analysis, .. } => json!({ "analysis": analysis }),
            ServiceError::Bind { addr, .. } => json!({ "addr": addr }),
            _ => json!({}),
        };
        ErrorEnvelope { error: self.code(), message: self.to_string(), details }
    }
}
