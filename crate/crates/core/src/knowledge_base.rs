//! The retrieval corpus of (artifact, description, logic) entries with
//! precomputed embeddings, exact top-k cosine search, and JSONL storage.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embeddings::{cosine, EmbeddingVector};
use crate::hdl::{language_for_path, parse_hdl, whole_module_block, HdlLanguage};
use crate::providers::{ProviderError, TextEmbedder};
use crate::symlogic::{extract_from_rtl, Phi};

pub const KB_FORMAT: &str = "symdirec-kb";
pub const KB_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum KbError {
    #[error("duplicate entry id `{0}`")]
    DuplicateId(String),
    #[error("entry `{0}` has an empty artifact")]
    EmptyArtifact(String),
    #[error("embedding entry `{id}` failed: {source}")]
    EmbedFailure {
        id: String,
        #[source]
        source: ProviderError,
    },
    #[error("zero vector: {0}")]
    ZeroVector(String),
    #[error("dimension mismatch: index has {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("k must be at least 1")]
    InvalidK,
    #[error("knowledge base format error at line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("index was built with embedder `{index}` but queries use `{query}`")]
    FingerprintMismatch { index: String, query: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryLanguage {
    Verilog,
    Vhdl,
    Nl,
}

impl From<HdlLanguage> for EntryLanguage {
    fn from(l: HdlLanguage) -> Self {
        match l {
            HdlLanguage::Verilog => EntryLanguage::Verilog,
            HdlLanguage::Vhdl => EntryLanguage::Vhdl,
        }
    }
}

/// An entry before its embedding is computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryDraft {
    pub id: String,
    pub y: String,
    pub language: EntryLanguage,
    #[serde(default)]
    pub d: String,
    pub phi: Phi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KbEntry {
    pub id: String,
    pub y: String,
    pub language: EntryLanguage,
    pub d: String,
    pub phi: Phi,
    pub e_y: EmbeddingVector,
}

/// Text embedded for an entry: the artifact followed by its description.
pub fn entry_text(y: &str, d: &str) -> String {
    format!("{y}\n{d}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalResult {
    pub id: String,
    pub score: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KbIndex {
    entries: Vec<KbEntry>,
    dim: usize,
    embedder: String,
    by_id: BTreeMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    dim: usize,
    embedder: String,
}

impl KbIndex {
    /// Assembles an index from already-embedded entries.
    pub fn from_entries(
        entries: Vec<KbEntry>,
        dim: usize,
        embedder: impl Into<String>,
    ) -> Result<Self, KbError> {
        let mut by_id = BTreeMap::new();
        for (i, e) in entries.iter().enumerate() {
            if e.y.is_empty() {
                return Err(KbError::EmptyArtifact(e.id.clone()));
            }
            if e.e_y.dim() != dim {
                return Err(KbError::DimensionMismatch {
                    expected: dim,
                    found: e.e_y.dim(),
                });
            }
            if e.e_y.is_zero() {
                return Err(KbError::ZeroVector(format!("embedding of entry `{}`", e.id)));
            }
            if by_id.insert(e.id.clone(), i).is_some() {
                return Err(KbError::DuplicateId(e.id.clone()));
            }
        }
        Ok(KbIndex {
            entries,
            dim,
            embedder: embedder.into(),
            by_id,
        })
    }

    pub fn empty(dim: usize, embedder: impl Into<String>) -> Self {
        KbIndex {
            entries: Vec::new(),
            dim,
            embedder: embedder.into(),
            by_id: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn embedder_fingerprint(&self) -> &str {
        &self.embedder
    }

    pub fn entries(&self) -> &[KbEntry] {
        &self.entries
    }

    pub fn get(&self, id: &str) -> Option<&KbEntry> {
        self.by_id.get(id).map(|&i| &self.entries[i])
    }

    /// Fails unless `embedder` is the one the index was built with.
    pub fn ensure_embedder(&self, embedder: &dyn TextEmbedder) -> Result<(), KbError> {
        let query = embedder.fingerprint();
        if query != self.embedder {
            return Err(KbError::FingerprintMismatch {
                index: self.embedder.clone(),
                query,
            });
        }
        Ok(())
    }

    /// The `min(k, S)` entries most similar to `q`, by cosine descending
    /// and then id ascending.
    pub fn top_k(&self, q: &EmbeddingVector, k: usize) -> Result<Vec<RetrievalResult>, KbError> {
        if k == 0 {
            return Err(KbError::InvalidK);
        }
        if q.dim() != self.dim {
            return Err(KbError::DimensionMismatch {
                expected: self.dim,
                found: q.dim(),
            });
        }
        if q.is_zero() {
            return Err(KbError::ZeroVector("query".into()));
        }
        // dimensions and non-zero norms are validated on both sides
        let mut scored: Vec<(f64, &str)> = self
            .entries
            .par_iter()
            .map(|e| (cosine(q, &e.e_y).expect("validated vectors"), e.id.as_str()))
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
        Ok(scored
            .into_iter()
            .take(k)
            .enumerate()
            .map(|(i, (score, id))| RetrievalResult {
                id: id.to_string(),
                score,
                rank: i + 1,
            })
            .collect())
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let header = Header {
            format: KB_FORMAT.into(),
            version: KB_VERSION,
            dim: self.dim,
            embedder: self.embedder.clone(),
        };
        out.push_str(&serde_json::to_string(&header).expect("header serializes"));
        out.push('\n');
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("entry serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, KbError> {
        let mut lines = text.lines().enumerate();
        let (_, first) = lines.next().ok_or_else(|| KbError::Format {
            line: 1,
            message: "missing header".into(),
        })?;
        let header: Header = serde_json::from_str(first).map_err(|e| KbError::Format {
            line: 1,
            message: format!("invalid header: {e}"),
        })?;
        if header.format != KB_FORMAT || header.version != KB_VERSION {
            return Err(KbError::Format {
                line: 1,
                message: format!(
                    "unsupported format {} version {}",
                    header.format, header.version
                ),
            });
        }
        let mut entries = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let entry: KbEntry = serde_json::from_str(line).map_err(|e| KbError::Format {
                line: i + 1,
                message: e.to_string(),
            })?;
            if entry.e_y.dim() != header.dim {
                return Err(KbError::Format {
                    line: i + 1,
                    message: format!(
                        "embedding has {} components, header says {}",
                        entry.e_y.dim(),
                        header.dim
                    ),
                });
            }
            entries.push(entry);
        }
        Self::from_entries(entries, header.dim, header.embedder)
    }
}

/// Embeds every draft as `y + "\n" + d` and assembles the index.
pub fn build_index(drafts: Vec<EntryDraft>, embedder: &dyn TextEmbedder) -> Result<KbIndex, KbError> {
    let mut seen = BTreeSet::new();
    for d in &drafts {
        if !seen.insert(d.id.as_str()) {
            return Err(KbError::DuplicateId(d.id.clone()));
        }
        if d.y.is_empty() {
            return Err(KbError::EmptyArtifact(d.id.clone()));
        }
    }
    let entries = drafts
        .into_par_iter()
        .map(|d| {
            let e_y = embedder
                .embed(&entry_text(&d.y, &d.d))
                .map_err(|source| KbError::EmbedFailure {
                    id: d.id.clone(),
                    source,
                })?;
            Ok(KbEntry {
                id: d.id,
                y: d.y,
                language: d.language,
                d: d.d,
                phi: d.phi,
                e_y,
            })
        })
        .collect::<Result<Vec<_>, KbError>>()?;
    KbIndex::from_entries(entries, embedder.dim(), embedder.fingerprint())
}

pub fn save_kb(index: &KbIndex, path: &Path) -> Result<(), KbError> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    w.write_all(index.to_jsonl().as_bytes())?;
    w.flush()?;
    Ok(())
}

pub fn load_kb(path: &Path) -> Result<KbIndex, KbError> {
    KbIndex::from_jsonl(&fs::read_to_string(path)?)
}

/// Loads an index and checks it was built with `embedder`.
pub fn load_kb_for(path: &Path, embedder: &dyn TextEmbedder) -> Result<KbIndex, KbError> {
    let index = load_kb(path)?;
    index.ensure_embedder(embedder)?;
    Ok(index)
}

/// Leading comment lines of an HDL file, joined, as its description.
fn leading_comment(source: &str, language: HdlLanguage) -> String {
    let marker = match language {
        HdlLanguage::Verilog => "//",
        HdlLanguage::Vhdl => "--",
    };
    source
        .lines()
        .map(str::trim)
        .take_while(|l| l.starts_with(marker) || l.is_empty())
        .filter_map(|l| l.strip_prefix(marker))
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

/// One draft per HDL source: the file text is the artifact, its leading
/// comment the description, and the logic is extracted from the top module
/// when it is purely continuous assignments (otherwise the description
/// doubles as a sketch).
pub fn draft_from_source(id: &str, source: &str, language: HdlLanguage) -> EntryDraft {
    let d = leading_comment(source, language);
    let phi = parse_hdl(source, language)
        .ok()
        .and_then(|design| {
            let top = design.top()?;
            extract_from_rtl(&whole_module_block(top)).ok()
        })
        .filter(|b| !b.is_empty())
        .map(Phi::Formal)
        .unwrap_or_else(|| Phi::Sketch(d.clone()));
    EntryDraft {
        id: id.to_string(),
        y: source.to_string(),
        language: language.into(),
        d,
        phi,
    }
}

/// Drafts for a corpus directory: every `.v`/`.sv`/`.vhd`/`.vhdl` file
/// (recursively, id = relative path) plus every entry of any `.jsonl` file
/// of drafts. Output is sorted by id.
pub fn drafts_from_dir(dir: &Path) -> Result<Vec<EntryDraft>, KbError> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d)? {
            let path = entry?.path();
            if path.is_dir() {
                stack.push(path);
                continue;
            }
            let rel = path
                .strip_prefix(dir)
                .unwrap_or(&path)
                .to_string_lossy()
                .replace('\\', "/");
            if let Some(lang) = language_for_path(&path) {
                let text = fs::read_to_string(&path)?;
                out.push(draft_from_source(&rel, &text, lang));
            } else if path.extension().is_some_and(|e| e == "jsonl") {
                let text = fs::read_to_string(&path)?;
                for (i, line) in text.lines().enumerate() {
                    if line.trim().is_empty() {
                        continue;
                    }
                    out.push(serde_json::from_str(line).map_err(|e| KbError::Format {
                        line: i + 1,
                        message: format!("{rel}: {e}"),
                    })?);
                }
            }
        }
    }
    out.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::providers::HashEmbedder;

    fn draft(id: &str, y: &str) -> EntryDraft {
        EntryDraft {
            id: id.into(),
            y: y.into(),
            language: EntryLanguage::Nl,
            d: String::new(),
            phi: Phi::Sketch(String::new()),
        }
    }

    #[test]
    fn builds_and_rejects_duplicates() {
        let emb = HashEmbedder::new(32).unwrap();
        let ix = build_index(
            vec![draft("a", "half adder"), draft("b", "full adder"), draft("c", "mux")],
            &emb,
        )
        .unwrap();
        assert_eq!(ix.len(), 3);
        assert!(ix.entries().iter().all(|e| e.e_y.dim() == 32));
        assert!(matches!(
            build_index(vec![draft("a", "x"), draft("a", "y")], &emb),
            Err(KbError::DuplicateId(id)) if id == "a"
        ));
        assert!(build_index(vec![], &emb).unwrap().is_empty());
    }

    #[test]
    fn k_larger_than_s() {
        let emb = HashEmbedder::new(32).unwrap();
        let ix = build_index(vec![draft("a", "half adder"), draft("b", "mux")], &emb).unwrap();
        let q = emb.embed("adder").unwrap();
        let res = ix.top_k(&q, 10).unwrap();
        assert_eq!(res.len(), 2);
        assert_eq!(res.iter().map(|r| r.rank).collect::<Vec<_>>(), vec![1, 2]);
        assert!(matches!(ix.top_k(&q, 0), Err(KbError::InvalidK)));
        assert!(matches!(
            ix.top_k(&EmbeddingVector::zeros(32), 1),
            Err(KbError::ZeroVector(_))
        ));
    }

    #[test]
    fn truncated_line_reports_its_number() {
        let emb = HashEmbedder::new(16).unwrap();
        let ix = build_index(vec![draft("a", "x y z"), draft("b", "p q r")], &emb).unwrap();
        let text = ix.to_jsonl();
        let mut lines: Vec<&str> = text.lines().collect();
        let cut = &lines[1][..lines[1].len() / 2];
        lines[1] = cut;
        match KbIndex::from_jsonl(&lines.join("\n")) {
            Err(KbError::Format { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn corpus_drafts_extract_logic() {
        let src = "// one-bit half adder\nmodule half_adder(input a, b, output sum, carry);\n  assign sum = a ^ b;\n  assign carry = a & b;\nendmodule\n";
        let d = draft_from_source("ha.v", src, HdlLanguage::Verilog);
        assert_eq!(d.d, "one-bit half adder");
        assert_eq!(
            d.phi.formal().unwrap().render_lines(),
            vec!["sum = a ^ b", "carry = a & b"]
        );
    }
}
