use std::fs;
use std::path::Path;

use anyhow::Context;
use symdirec::metrics::{check_vectors, parse_vectors, pass_at_1_batch, SimCase, SimConfig, SimStatus, VectorSet};
use symdirec::pipeline::{self, Deps, PipelineOutput, TargetLanguage, TaskInput, VerifyMethod};

/// One synthesis task directory: `spec.txt`, and optionally `testbench.v`
/// (self-checking) and `vectors.tv` (for the built-in checker).
#[derive(Debug, Clone)]
pub struct SynthTask {
    pub name: String,
    pub spec: String,
    pub testbench: Option<String>,
    pub vectors: Option<VectorSet>,
}

pub fn load_suite(dir: &Path) -> anyhow::Result<Vec<SynthTask>> {
    let mut tasks = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("reading task suite {}", dir.display()))? {
        let path = entry?.path();
        let spec_path = path.join("spec.txt");
        if !spec_path.is_file() {
            continue;
        }
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let spec = fs::read_to_string(&spec_path)?.trim().to_string();
        let tb = path.join("testbench.v");
        let testbench = tb.is_file().then(|| fs::read_to_string(&tb)).transpose()?;
        let tv = path.join("vectors.tv");
        let vectors = if tv.is_file() {
            let text = fs::read_to_string(&tv)?;
            Some(parse_vectors(&text).with_context(|| tv.display().to_string())?)
        } else {
            None
        };
        tasks.push(SynthTask {
            name,
            spec,
            testbench,
            vectors,
        });
    }
    tasks.sort_by(|a, b| a.name.cmp(&b.name));
    anyhow::ensure!(!tasks.is_empty(), "no task directories with spec.txt under {}", dir.display());
    Ok(tasks)
}

#[derive(Debug, Clone)]
pub struct TaskOutcome {
    pub name: String,
    pub output: Option<PipelineOutput>,
    pub error: Option<String>,
    /// Built-in vector check; `None` without vectors or a valid design.
    pub vectors: Option<Result<bool, String>>,
    pub sim: Option<SimStatus>,
}

impl TaskOutcome {
    pub fn valid(&self) -> bool {
        self.output.as_ref().is_some_and(|o| o.valid)
    }

    pub fn subcomponents(&self) -> usize {
        self.output.as_ref().map_or(0, |o| o.trace.subcomponents.len())
    }

    pub fn candidates(&self) -> usize {
        self.output.as_ref().map_or(0, |o| {
            o.trace.subcomponents.iter().map(|s| s.retrieved.len()).sum()
        })
    }

    pub fn symbolic_exact(&self) -> usize {
        self.output.as_ref().map_or(0, |o| {
            o.trace
                .subcomponents
                .iter()
                .filter(|s| s.selected.as_ref().is_some_and(|c| c.method == VerifyMethod::SymbolicExact))
                .count()
        })
    }
}

/// Runs the pipeline on every task, then the built-in vector checks, then
/// the simulator with at most `jobs` processes.
pub fn run_suite(
    tasks: &[SynthTask],
    deps: &Deps,
    target: TargetLanguage,
    n: usize,
    k: usize,
    sim: &SimConfig,
    jobs: usize,
) -> anyhow::Result<Vec<TaskOutcome>> {
    let mut outcomes: Vec<TaskOutcome> = tasks
        .iter()
        .map(|t| {
            let input = TaskInput {
                n_hint: n,
                k,
                ..TaskInput::synthesis(t.spec.clone(), target)
            };
            let (output, error) = match pipeline::run(&input, deps) {
                Ok(o) => (Some(o), None),
                Err(e) => {
                    log::warn!("task {}: {e}", t.name);
                    (None, Some(e.to_string()))
                }
            };
            let vectors = match (&output, &t.vectors, target.hdl()) {
                (Some(o), Some(v), Some(lang)) if o.valid => Some(
                    check_vectors(&o.y_hat, lang, v)
                        .map(|r| r.passed())
                        .map_err(|e| e.to_string()),
                ),
                _ => None,
            };
            TaskOutcome {
                name: t.name.clone(),
                output,
                error,
                vectors,
                sim: None,
            }
        })
        .collect();

    let mut cases = Vec::new();
    let mut slots = Vec::new();
    for (i, (t, o)) in tasks.iter().zip(outcomes.iter_mut()).enumerate() {
        let Some(tb) = &t.testbench else { continue };
        match &o.output {
            Some(out) if out.valid => {
                cases.push(SimCase {
                    task: t.name.clone(),
                    design: out.y_hat.clone(),
                    testbench: tb.clone(),
                });
                slots.push(i);
            }
            _ => o.sim = Some(SimStatus::Failed),
        }
    }
    let results = pass_at_1_batch(&cases, sim, jobs)?;
    for (i, r) in slots.into_iter().zip(results) {
        outcomes[i].sim = Some(r.status);
    }
    Ok(outcomes)
}
