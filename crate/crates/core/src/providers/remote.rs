use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::Duration;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use ureq::Agent;

use super::{
    count_tokens, GenRequest, GenResponse, ProviderConfig, ProviderError, ProviderKind,
    TextEmbedder, TextGenerator,
};
use crate::embeddings::EmbeddingVector;

const KIND: &str = "remote";

struct Slots {
    free: Mutex<usize>,
    cv: Condvar,
}

struct SlotGuard<'a>(&'a Slots);

impl Slots {
    fn acquire(&self) -> SlotGuard<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.cv.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        SlotGuard(self)
    }
}

impl Drop for SlotGuard<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.cv.notify_one();
    }
}

/// JSON-over-HTTP client. Generation posts `{model, prompt, system?,
/// params}`; embedding posts `{model, input}`. Reply fields are located by
/// the configured JSON pointers.
pub struct RemoteClient {
    cfg: ProviderConfig,
    agent: Agent,
    slots: Slots,
}

enum Failure {
    Retryable(ProviderError),
    Fatal(ProviderError),
}

impl RemoteClient {
    pub fn new(cfg: ProviderConfig) -> Result<Self, ProviderError> {
        if cfg.kind != ProviderKind::Remote {
            return Err(ProviderError::InvalidConfig("expected a remote provider config".into()));
        }
        cfg.validate()?;
        let agent: Agent = Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(cfg.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        let slots = Slots {
            free: Mutex::new(cfg.max_in_flight),
            cv: Condvar::new(),
        };
        Ok(RemoteClient { cfg, agent, slots })
    }

    fn token(&self) -> Result<Option<String>, ProviderError> {
        match &self.cfg.token_env {
            None => Ok(None),
            Some(var) => std::env::var(var).map(Some).map_err(|_| {
                ProviderError::InvalidConfig(format!("environment variable {var} is not set"))
            }),
        }
    }

    fn attempt(&self, body: &Value, fingerprint: &str) -> Result<Value, Failure> {
        let transport = |message: String| ProviderError::Transport {
            kind: KIND,
            fingerprint: fingerprint.to_string(),
            message,
        };
        let mut req = self.agent.post(&self.cfg.endpoint);
        if let Some(t) = self.token().map_err(Failure::Fatal)? {
            req = req.header("Authorization", &format!("Bearer {t}"));
        }
        let mut resp = match req.send_json(body) {
            Ok(r) => r,
            Err(ureq::Error::Timeout(_)) => {
                return Err(Failure::Retryable(ProviderError::Timeout {
                    kind: KIND,
                    fingerprint: fingerprint.to_string(),
                }))
            }
            Err(ureq::Error::Io(e))
                if matches!(e.kind(), std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock) =>
            {
                return Err(Failure::Retryable(ProviderError::Timeout {
                    kind: KIND,
                    fingerprint: fingerprint.to_string(),
                }))
            }
            Err(e) => return Err(Failure::Retryable(transport(e.to_string()))),
        };
        let status = resp.status().as_u16();
        match status {
            200..=299 => resp
                .body_mut()
                .read_json::<Value>()
                .map_err(|e| Failure::Fatal(transport(format!("invalid JSON reply: {e}")))),
            401 | 403 => Err(Failure::Fatal(ProviderError::Auth {
                kind: KIND,
                fingerprint: fingerprint.to_string(),
                status,
            })),
            500..=599 | 429 => Err(Failure::Retryable(transport(format!("HTTP {status}")))),
            _ => Err(Failure::Fatal(transport(format!("HTTP {status}")))),
        }
    }

    /// Posts `body`, retrying transient failures with exponential backoff.
    pub fn post(&self, body: &Value, fingerprint: &str) -> Result<Value, ProviderError> {
        let _slot = self.slots.acquire();
        let mut attempt = 0;
        loop {
            match self.attempt(body, fingerprint) {
                Ok(v) => return Ok(v),
                Err(Failure::Fatal(e)) => return Err(e),
                Err(Failure::Retryable(e)) => {
                    if attempt >= self.cfg.max_retries {
                        return Err(e);
                    }
                    log::warn!("retrying request {fingerprint} after: {e}");
                    let delay = self.cfg.backoff_ms.saturating_mul(1 << attempt.min(16));
                    thread::sleep(Duration::from_millis(delay));
                    attempt += 1;
                }
            }
        }
    }
}

impl TextGenerator for RemoteClient {
    fn generate(&self, req: &GenRequest) -> Result<GenResponse, ProviderError> {
        let fingerprint = req.fingerprint();
        let mut body = json!({
            "model": self.cfg.model,
            "prompt": req.prompt,
            "params": {"temperature": self.cfg.temperature, "stop": req.stop},
        });
        if let Some(s) = &req.system {
            body["system"] = json!(s);
        }
        let reply = self.post(&body, &fingerprint)?;
        let text = reply
            .pointer(&self.cfg.text_pointer)
            .and_then(Value::as_str)
            .ok_or_else(|| ProviderError::Transport {
                kind: KIND,
                fingerprint: fingerprint.clone(),
                message: format!("reply has no string at {}", self.cfg.text_pointer),
            })?
            .to_string();
        let finish_reason = reply
            .get("finish_reason")
            .and_then(Value::as_str)
            .unwrap_or("stop")
            .to_string();
        Ok(GenResponse {
            completion_tokens: count_tokens(&text),
            prompt_tokens: count_tokens(&req.prompt),
            text,
            finish_reason,
        })
    }

    fn kind(&self) -> &'static str {
        KIND
    }
}

impl TextEmbedder for RemoteClient {
    fn embed(&self, text: &str) -> Result<EmbeddingVector, ProviderError> {
        if text.is_empty() {
            return Err(ProviderError::EmptyText);
        }
        let fingerprint = hex::encode(Sha256::digest(text.as_bytes()));
        let reply = self.post(&json!({"model": self.cfg.model, "input": text}), &fingerprint)?;
        let values: Vec<f64> = reply
            .pointer(&self.cfg.embedding_pointer)
            .and_then(Value::as_array)
            .and_then(|a| a.iter().map(Value::as_f64).collect())
            .ok_or_else(|| ProviderError::Transport {
                kind: KIND,
                fingerprint: fingerprint.clone(),
                message: format!("reply has no numeric array at {}", self.cfg.embedding_pointer),
            })?;
        if values.len() != self.cfg.dim {
            return Err(ProviderError::DimensionMismatch {
                expected: self.cfg.dim,
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(ProviderError::Transport {
                kind: KIND,
                fingerprint,
                message: "non-finite embedding component".into(),
            });
        }
        Ok(EmbeddingVector::new(values))
    }

    fn dim(&self) -> usize {
        self.cfg.dim
    }

    fn fingerprint(&self) -> String {
        format!("remote:{}:{}/d{}", self.cfg.endpoint, self.cfg.model, self.cfg.dim)
    }
}
