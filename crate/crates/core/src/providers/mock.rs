use std::collections::HashMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{count_tokens, GenRequest, GenResponse, ProviderError, TextGenerator};

/// One line of a fixture file. `prompt` is informational; lookups use the
/// fingerprint only.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureRecord {
    pub fingerprint: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt: Option<String>,
    pub response: String,
}

impl FixtureRecord {
    pub fn for_request(req: &GenRequest, response: impl Into<String>) -> Self {
        FixtureRecord {
            fingerprint: req.fingerprint(),
            prompt: Some(req.prompt.clone()),
            response: response.into(),
        }
    }
}

/// Replays recorded responses keyed by request fingerprint.
#[derive(Debug, Default)]
pub struct MockGenerator {
    table: HashMap<String, String>,
    record_misses: Option<Mutex<PathBuf>>,
}

impl MockGenerator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_records(records: impl IntoIterator<Item = FixtureRecord>) -> Self {
        MockGenerator {
            table: records
                .into_iter()
                .map(|r| (r.fingerprint, r.response))
                .collect(),
            record_misses: None,
        }
    }

    /// Loads JSONL fixture files; later files override earlier ones.
    pub fn from_files(paths: &[PathBuf]) -> Result<Self, ProviderError> {
        let mut g = MockGenerator::new();
        for p in paths {
            g.load_file(p)?;
        }
        Ok(g)
    }

    pub fn load_file(&mut self, path: &Path) -> Result<(), ProviderError> {
        let text = fs::read_to_string(path).map_err(|e| ProviderError::Fixture {
            path: path.display().to_string(),
            line: 0,
            message: e.to_string(),
        })?;
        self.load_jsonl(&text, &path.display().to_string())
    }

    pub fn load_jsonl(&mut self, text: &str, origin: &str) -> Result<(), ProviderError> {
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let rec: FixtureRecord =
                serde_json::from_str(line).map_err(|e| ProviderError::Fixture {
                    path: origin.to_string(),
                    line: i + 1,
                    message: e.to_string(),
                })?;
            self.table.insert(rec.fingerprint, rec.response);
        }
        Ok(())
    }

    pub fn insert(&mut self, req: &GenRequest, response: impl Into<String>) {
        self.table.insert(req.fingerprint(), response.into());
    }

    /// Appends every missed request to `path` as a fixture line with an
    /// empty response, ready to be filled in.
    pub fn recording_misses_to(mut self, path: PathBuf) -> Self {
        self.record_misses = Some(Mutex::new(path));
        self
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    fn record_miss(&self, req: &GenRequest) {
        let Some(lock) = &self.record_misses else {
            return;
        };
        let path = lock.lock().unwrap_or_else(|e| e.into_inner());
        let line = serde_json::to_string(&FixtureRecord::for_request(req, ""))
            .expect("fixture record serializes");
        let written = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&*path)
            .and_then(|mut f| writeln!(f, "{line}"));
        if let Err(e) = written {
            log::warn!("could not record fixture miss to {}: {e}", path.display());
        }
    }
}

impl TextGenerator for MockGenerator {
    fn generate(&self, req: &GenRequest) -> Result<GenResponse, ProviderError> {
        let fingerprint = req.fingerprint();
        match self.table.get(&fingerprint) {
            Some(text) => Ok(GenResponse {
                text: text.clone(),
                finish_reason: "stop".into(),
                prompt_tokens: count_tokens(&req.prompt),
                completion_tokens: count_tokens(text),
            }),
            None => {
                self.record_miss(req);
                Err(ProviderError::FixtureMiss {
                    kind: "mock",
                    fingerprint,
                })
            }
        }
    }

    fn kind(&self) -> &'static str {
        "mock"
    }
}
