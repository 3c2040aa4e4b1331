//! Divide, retrieve, verify and conquer for synthesis (text to RTL) and
//! summarization (RTL to text).

mod assemble;
mod divide;
mod templates;
mod verify;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::embeddings::{joint_query, EmbeddingError, ProjectionMatrix};
use crate::hdl::{HdlError, HdlLanguage};
use crate::knowledge_base::{EntryLanguage, KbError, KbIndex, RetrievalResult};
use crate::providers::{ProviderError, TextEmbedder, TextGenerator};
use crate::symlogic::Phi;

pub use assemble::{assemble, extract_code, AssembleTrace};
pub use divide::{detect_language, divide, parse_decomposition, DivideTrace};
pub use templates::{fill, Templates};
pub use verify::{parse_score, select, symbolic_match, verify_score, Verification};

pub const DEFAULT_N: usize = 4;
pub const DEFAULT_K: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Synthesis,
    Summarization,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetLanguage {
    Verilog,
    Vhdl,
    Nl,
}

impl TargetLanguage {
    pub fn hdl(self) -> Option<HdlLanguage> {
        match self {
            TargetLanguage::Verilog => Some(HdlLanguage::Verilog),
            TargetLanguage::Vhdl => Some(HdlLanguage::Vhdl),
            TargetLanguage::Nl => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            TargetLanguage::Verilog => "Verilog",
            TargetLanguage::Vhdl => "VHDL",
            TargetLanguage::Nl => "natural language",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskInput {
    pub direction: Direction,
    /// Natural-language specification or RTL source.
    pub x: String,
    pub target: TargetLanguage,
    pub n_hint: usize,
    pub k: usize,
}

impl TaskInput {
    pub fn synthesis(spec: impl Into<String>, target: TargetLanguage) -> Self {
        TaskInput {
            direction: Direction::Synthesis,
            x: spec.into(),
            target,
            n_hint: DEFAULT_N,
            k: DEFAULT_K,
        }
    }

    pub fn summarization(source: impl Into<String>) -> Self {
        TaskInput {
            direction: Direction::Summarization,
            x: source.into(),
            target: TargetLanguage::Nl,
            n_hint: DEFAULT_N,
            k: DEFAULT_K,
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.n_hint == 0 || self.k == 0 {
            return Err(PipelineError::InvalidInput("N and k must be at least 1".into()));
        }
        if self.x.trim().is_empty() {
            return Err(PipelineError::InvalidInput("task text is empty".into()));
        }
        match (self.direction, self.target) {
            (Direction::Synthesis, TargetLanguage::Nl) => Err(PipelineError::InvalidInput(
                "synthesis needs an HDL target language".into(),
            )),
            (Direction::Summarization, t) if t != TargetLanguage::Nl => Err(
                PipelineError::InvalidInput("summarization targets natural language".into()),
            ),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Llm,
    Ast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubComponent {
    /// 1-based, contiguous.
    pub index: usize,
    pub x: String,
    pub phi: Phi,
    pub origin: Origin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerifyMethod {
    SymbolicExact,
    Llm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifiedCandidate {
    pub sub_index: usize,
    pub entry_id: String,
    pub retrieval_score: f64,
    pub alpha: f64,
    pub method: VerifyMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Divide,
    Retrieve,
    Verify,
    Select,
    Assemble,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Divide => "divide",
            Stage::Retrieve => "retrieve",
            Stage::Verify => "verify",
            Stage::Select => "select",
            Stage::Assemble => "assemble",
        })
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid task input: {0}")]
    InvalidInput(String),
    #[error("{stage}: {source}")]
    Provider {
        stage: Stage,
        #[source]
        source: ProviderError,
    },
    #[error("divide: no parseable sub-components in reply")]
    EmptyDecomposition { raw: String },
    #[error("divide: source does not parse: {0}")]
    Source(HdlError),
    #[error("retrieve: {0}")]
    Retrieval(#[from] KbError),
    #[error("retrieve: {0}")]
    Embedding(#[from] EmbeddingError),
    #[error("select: no candidates")]
    NoCandidates,
    #[error("template: {0}")]
    Template(String),
    #[error("trace: {0}")]
    Io(#[from] std::io::Error),
}

impl PipelineError {
    pub fn stage(&self) -> Option<Stage> {
        match self {
            PipelineError::Provider { stage, .. } => Some(*stage),
            PipelineError::EmptyDecomposition { .. } | PipelineError::Source(_) => Some(Stage::Divide),
            PipelineError::Retrieval(_) | PipelineError::Embedding(_) => Some(Stage::Retrieve),
            PipelineError::NoCandidates => Some(Stage::Select),
            _ => None,
        }
    }
}

/// Score of one retrieved candidate for one sub-component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub entry_id: String,
    pub retrieval_score: f64,
    pub alpha: f64,
    pub method: VerifyMethod,
    /// The entry is written in the task's language.
    #[serde(default)]
    pub same_language: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reply: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubTrace {
    pub sub: SubComponent,
    pub retrieved: Vec<RetrievalResult>,
    pub scores: Vec<CandidateScore>,
    pub selected: Option<VerifiedCandidate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub kb_entries: usize,
    pub embedder: String,
    pub projection_dim: usize,
    pub projection_bias: bool,
    pub templates: std::collections::BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub input: TaskInput,
    pub config: RunConfig,
    pub divide: DivideTrace,
    pub subcomponents: Vec<SubTrace>,
    pub assemble: AssembleTrace,
    /// Some sub-component has no candidate or only zero-scored ones.
    pub low_confidence: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineOutput {
    pub y_hat: String,
    /// Synthesis: the design parses. Summarization: always true.
    pub valid: bool,
    pub trace: Trace,
}

impl PipelineOutput {
    pub fn trace_json(&self) -> String {
        serde_json::to_string_pretty(&self.trace).expect("trace serializes") + "\n"
    }

    /// `run-` followed by the first 12 hex digits of the trace's SHA-256.
    pub fn default_run_name(&self) -> String {
        let h = hex::encode(Sha256::digest(self.trace_json().as_bytes()));
        format!("run-{}", &h[..12])
    }

    fn output_file(&self) -> &'static str {
        match self.trace.input.target {
            TargetLanguage::Verilog => "output.v",
            TargetLanguage::Vhdl => "output.vhd",
            TargetLanguage::Nl => "output.txt",
        }
    }

    /// Writes `trace.json` and the output text under `run_dir/<name>`.
    pub fn persist(&self, run_dir: &Path, name: Option<&str>) -> std::io::Result<PathBuf> {
        let dir = run_dir.join(name.map_or_else(|| self.default_run_name(), String::from));
        fs::create_dir_all(&dir)?;
        fs::write(dir.join("trace.json"), self.trace_json())?;
        fs::write(dir.join(self.output_file()), &self.y_hat)?;
        Ok(dir)
    }
}

/// Everything a run needs besides its input.
#[derive(Clone, Copy)]
pub struct Deps<'a> {
    pub generator: &'a dyn TextGenerator,
    pub embedder: &'a dyn TextEmbedder,
    pub index: &'a KbIndex,
    pub projection: &'a ProjectionMatrix,
    pub templates: &'a Templates,
}

/// Top-k entries per sub-component for the joint query of its description
/// and rendered logic.
pub fn retrieve_all(
    subs: &[SubComponent],
    index: &KbIndex,
    projection: &ProjectionMatrix,
    embedder: &dyn TextEmbedder,
    k: usize,
) -> Result<Vec<Vec<RetrievalResult>>, PipelineError> {
    index.ensure_embedder(embedder)?;
    let results: Vec<Result<Vec<RetrievalResult>, PipelineError>> = subs
        .par_iter()
        .map(|s| retrieve_one(s, index, projection, embedder, k))
        .collect();
    results.into_iter().collect()
}

fn retrieve_one(
    sub: &SubComponent,
    index: &KbIndex,
    projection: &ProjectionMatrix,
    embedder: &dyn TextEmbedder,
    k: usize,
) -> Result<Vec<RetrievalResult>, PipelineError> {
    if index.is_empty() {
        return Ok(Vec::new());
    }
    let embed = |t: &str| {
        embedder.embed(t).map_err(|source| PipelineError::Provider {
            stage: Stage::Retrieve,
            source,
        })
    };
    let q = joint_query(&embed(&sub.x)?, &embed(&sub.phi.to_string())?, projection)?;
    Ok(index.top_k(&q, k)?)
}

fn score_sub(
    sub: &SubComponent,
    retrieved: Vec<RetrievalResult>,
    language: EntryLanguage,
    deps: &Deps,
) -> Result<SubTrace, PipelineError> {
    let mut scores = Vec::with_capacity(retrieved.len());
    for r in &retrieved {
        let entry = deps.index.get(&r.id).expect("retrieved ids exist in the index");
        let v = verify_score(entry, sub, deps.generator, deps.templates)?;
        scores.push(CandidateScore {
            entry_id: r.id.clone(),
            retrieval_score: r.score,
            alpha: v.alpha,
            method: v.method,
            same_language: entry.language == language,
            prompt: v.prompt,
            reply: v.reply,
            warning: v.warning,
        });
    }
    let selected = match select(sub.index, &scores) {
        Ok(c) => Some(c),
        Err(PipelineError::NoCandidates) => None,
        Err(e) => return Err(e),
    };
    Ok(SubTrace {
        sub: sub.clone(),
        retrieved,
        scores,
        selected,
    })
}

/// Divide, retrieve, verify and select per sub-component, then assemble.
pub fn run(input: &TaskInput, deps: &Deps) -> Result<PipelineOutput, PipelineError> {
    input.validate()?;
    deps.templates.validate()?;
    let (subs, divide_trace) = divide(input, deps.generator, deps.templates)?;
    let language = match input.target.hdl() {
        Some(l) => l.into(),
        None => detect_language(&input.x).into(),
    };
    let retrieved = retrieve_all(&subs, deps.index, deps.projection, deps.embedder, input.k)?;
    let traces: Vec<Result<SubTrace, PipelineError>> = subs
        .par_iter()
        .zip(retrieved.into_par_iter())
        .map(|(s, r)| score_sub(s, r, language, deps))
        .collect();
    let subtraces = traces.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut warnings = Vec::new();
    for t in &subtraces {
        match &t.selected {
            None => warnings.push(format!("sub-component {} has no candidates", t.sub.index)),
            Some(c) if c.alpha == 0.0 => warnings.push(format!(
                "sub-component {}: best candidate `{}` scored 0",
                t.sub.index, c.entry_id
            )),
            _ => {}
        }
        warnings.extend(t.scores.iter().filter_map(|s| {
            s.warning
                .as_ref()
                .map(|w| format!("sub-component {} / {}: {w}", t.sub.index, s.entry_id))
        }));
    }
    let low_confidence = subtraces
        .iter()
        .any(|t| t.selected.as_ref().is_none_or(|c| c.alpha == 0.0));

    let (y_hat, valid, assemble_trace) = assemble(input, &subtraces, deps)?;
    let config = RunConfig {
        kb_entries: deps.index.len(),
        embedder: deps.embedder.fingerprint(),
        projection_dim: deps.projection.dim(),
        projection_bias: deps.projection.bias().is_some(),
        templates: deps.templates.digests(),
    };
    Ok(PipelineOutput {
        y_hat,
        valid,
        trace: Trace {
            input: input.clone(),
            config,
            divide: divide_trace,
            subcomponents: subtraces,
            assemble: assemble_trace,
            low_confidence,
            warnings,
        },
    })
}
