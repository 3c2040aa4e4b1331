//! Text generation and embedding backends: a fixture-driven mock, a hashed
//! local embedder, and an HTTP client for remote services.

mod mock;
mod remote;

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::embeddings::{hash_embed, EmbeddingVector, DEFAULT_DIM, MIN_DIM};

pub use mock::{FixtureRecord, MockGenerator};
pub use remote::RemoteClient;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    Mock,
    Remote,
}

impl ProviderKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProviderKind::Mock => "mock",
            ProviderKind::Remote => "remote",
        }
    }
}

#[derive(Debug, Error)]
pub enum ProviderError {
    #[error("{kind} provider has no fixture for request {fingerprint}")]
    FixtureMiss { kind: &'static str, fingerprint: String },
    #[error("{kind} provider transport failure for request {fingerprint}: {message}")]
    Transport {
        kind: &'static str,
        fingerprint: String,
        message: String,
    },
    #[error("{kind} provider rejected credentials for request {fingerprint} (HTTP {status})")]
    Auth {
        kind: &'static str,
        fingerprint: String,
        status: u16,
    },
    #[error("{kind} provider timed out on request {fingerprint}")]
    Timeout { kind: &'static str, fingerprint: String },
    #[error("embedding has {found} components, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid provider configuration: {0}")]
    InvalidConfig(String),
    #[error("fixture file {path}:{line}: {message}")]
    Fixture {
        path: String,
        line: usize,
        message: String,
    },
    #[error("cannot embed empty text")]
    EmptyText,
}

/// Settings for one backend. Secrets are never stored here; `token_env`
/// names the environment variable holding the bearer token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    pub endpoint: String,
    pub model: String,
    pub token_env: Option<String>,
    pub timeout_secs: f64,
    pub max_retries: u32,
    pub backoff_ms: u64,
    pub temperature: f64,
    pub max_in_flight: usize,
    /// JSONL fixture files for the mock generator.
    pub fixtures: Vec<PathBuf>,
    /// When set, prompts missing from the fixtures are appended here.
    pub record_misses: Option<PathBuf>,
    pub dim: usize,
    /// JSON pointer to the generated text in a remote reply.
    pub text_pointer: String,
    /// JSON pointer to the embedding array in a remote reply.
    pub embedding_pointer: String,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig {
            kind: ProviderKind::Mock,
            endpoint: String::new(),
            model: String::new(),
            token_env: None,
            timeout_secs: 60.0,
            max_retries: 3,
            backoff_ms: 500,
            temperature: 0.0,
            max_in_flight: 4,
            fixtures: Vec::new(),
            record_misses: None,
            dim: DEFAULT_DIM,
            text_pointer: "/text".into(),
            embedding_pointer: "/embedding".into(),
        }
    }
}

impl ProviderConfig {
    pub fn mock() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<(), ProviderError> {
        if self.kind == ProviderKind::Remote && self.endpoint.trim().is_empty() {
            return Err(ProviderError::InvalidConfig(
                "remote provider requires a non-empty endpoint".into(),
            ));
        }
        if !(self.timeout_secs > 0.0 && self.timeout_secs.is_finite()) {
            return Err(ProviderError::InvalidConfig("timeout_secs must be positive".into()));
        }
        if self.max_in_flight == 0 {
            return Err(ProviderError::InvalidConfig("max_in_flight must be at least 1".into()));
        }
        if self.dim < MIN_DIM {
            return Err(ProviderError::InvalidConfig(format!("dim must be at least {MIN_DIM}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct GenRequest {
    pub prompt: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stop: Vec<String>,
}

impl GenRequest {
    pub fn new(prompt: impl Into<String>) -> Self {
        GenRequest {
            prompt: prompt.into(),
            ..Default::default()
        }
    }

    /// Content hash identifying this request in fixture tables.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.system.as_deref().unwrap_or("").as_bytes());
        h.update([0u8]);
        h.update(self.prompt.as_bytes());
        hex::encode(h.finalize())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenResponse {
    pub text: String,
    pub finish_reason: String,
    pub prompt_tokens: usize,
    pub completion_tokens: usize,
}

pub trait TextGenerator: Send + Sync {
    fn generate(&self, req: &GenRequest) -> Result<GenResponse, ProviderError>;
    fn kind(&self) -> &'static str;
}

pub trait TextEmbedder: Send + Sync {
    fn embed(&self, text: &str) -> Result<EmbeddingVector, ProviderError>;
    fn dim(&self) -> usize;
    /// Identifies the embedding function so indexes built with one
    /// embedder are never queried with another.
    fn fingerprint(&self) -> String;
}

/// Local deterministic embedder backed by [`hash_embed`].
#[derive(Debug, Clone, Copy)]
pub struct HashEmbedder {
    dim: usize,
}

impl HashEmbedder {
    pub fn new(dim: usize) -> Result<Self, ProviderError> {
        if dim < MIN_DIM {
            return Err(ProviderError::InvalidConfig(format!("dim must be at least {MIN_DIM}")));
        }
        Ok(HashEmbedder { dim })
    }
}

impl TextEmbedder for HashEmbedder {
    fn embed(&self, text: &str) -> Result<EmbeddingVector, ProviderError> {
        if text.is_empty() {
            return Err(ProviderError::EmptyText);
        }
        Ok(hash_embed(text, self.dim))
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn fingerprint(&self) -> String {
        format!("hash-char3-fnv1a64-signed-l2/d{}", self.dim)
    }
}

/// Builds the generator described by `cfg`.
pub fn generator_from_config(cfg: &ProviderConfig) -> Result<Arc<dyn TextGenerator>, ProviderError> {
    cfg.validate()?;
    Ok(match cfg.kind {
        ProviderKind::Mock => {
            let mut g = MockGenerator::from_files(&cfg.fixtures)?;
            if let Some(path) = &cfg.record_misses {
                g = g.recording_misses_to(path.clone());
            }
            Arc::new(g)
        }
        ProviderKind::Remote => Arc::new(RemoteClient::new(cfg.clone())?),
    })
}

/// Builds the embedder described by `cfg`; the mock kind is [`HashEmbedder`].
pub fn embedder_from_config(cfg: &ProviderConfig) -> Result<Arc<dyn TextEmbedder>, ProviderError> {
    cfg.validate()?;
    Ok(match cfg.kind {
        ProviderKind::Mock => Arc::new(HashEmbedder::new(cfg.dim)?),
        ProviderKind::Remote => Arc::new(RemoteClient::new(cfg.clone())?),
    })
}

pub(crate) fn count_tokens(text: &str) -> usize {
    text.split_whitespace().count()
}
