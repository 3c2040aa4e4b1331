mod config;
mod suite;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use symdirec::embeddings::{
    cosine, joint_query, train_projection, ProjectionMatrix, TrainingConfig, Triple,
};
use symdirec::forge::{
    check_equiv, forge_corpus, make_pc_pairs, type2_rename, type3_transform, type4_translate, write_jsonl,
    CorpusStats,
};
use symdirec::hdl::{language_for_path, HdlLanguage};
use symdirec::knowledge_base::{build_index, drafts_from_dir, load_kb_for, save_kb, KbIndex};
use symdirec::metrics::{
    aggregate, check_vectors, load_qrels, ndcg_at_k, parse_vectors, rouge_l, MetricValue, Report, SimStatus,
    TaskRecord,
};
use symdirec::pipeline::{self, detect_language, Deps, TargetLanguage, TaskInput, Templates};
use symdirec::providers::{embedder_from_config, generator_from_config, ProviderKind, TextEmbedder, TextGenerator};

use config::{config_error, Config, ConfigError};
use suite::{load_suite, run_suite, TaskOutcome};

const AFTER_HELP: &str = "\
Exit status: 0 on success, 1 when a task fails, 2 on usage or configuration errors.

Configuration is read from --config, or from ./symdirec.toml when present.
Relative paths inside it resolve against the file's directory.";

/// Divide-retrieve-conquer RTL synthesis and summarization.
#[derive(Debug, Parser)]
#[command(name = "symdirec", version, after_help = AFTER_HELP)]
struct Cli {
    /// Configuration file (TOML).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Seed for forging, training and other seeded choices.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads and simulator processes [default: logical cores].
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    /// Overrides the kind of both the generation and embedding providers.
    #[arg(long, global = true, value_enum)]
    provider: Option<ProviderArg>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProviderArg {
    Mock,
    Remote,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LangArg {
    Verilog,
    Vhdl,
}

impl LangArg {
    fn target(self) -> TargetLanguage {
        match self {
            LangArg::Verilog => TargetLanguage::Verilog,
            LangArg::Vhdl => TargetLanguage::Vhdl,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Knowledge-base management.
    #[command(subcommand)]
    Kb(KbCommand),
    /// Train the joint-query projection on (x, phi, y) text triples.
    TrainWq(TrainArgs),
    /// Run the pipeline on one task.
    #[command(subcommand)]
    Run(RunCommand),
    /// Evaluate on a benchmark and write report.json and report.txt.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Build training pairs from HDL sources.
    #[command(subcommand)]
    Forge(ForgeCommand),
    /// Sweep N or k over a synthesis task suite and print a CSV table.
    Ablate(AblateArgs),
    /// Check a combinational design against a vector file with the built-in evaluator.
    Simulate(SimulateArgs),
}

#[derive(Debug, Subcommand)]
enum KbCommand {
    /// Index every HDL file (and draft JSONL file) under a corpus directory.
    Build {
        /// Corpus directory.
        corpus: PathBuf,
        /// Output index file.
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// JSONL file of {"x", "phi", "y"} text triples.
    triples: PathBuf,
    /// Output projection file.
    #[arg(short, long)]
    output: PathBuf,
    /// Training epochs.
    #[arg(long, default_value_t = 100)]
    epochs: usize,
    /// Mini-batch size.
    #[arg(long, default_value_t = 16)]
    batch: usize,
    /// Learning rate.
    #[arg(long, default_value_t = 0.1)]
    lr: f64,
    /// Softmax temperature.
    #[arg(long, default_value_t = 0.05)]
    tau: f64,
    /// Learn a bias vector as well.
    #[arg(long)]
    bias: bool,
}

#[derive(Debug, Args)]
struct TaskOpts {
    /// Number of sub-components to ask for [default: config `n`].
    #[arg(short = 'n', long = "n")]
    n: Option<usize>,
    /// Candidates retrieved per sub-component [default: config `k`].
    #[arg(short, long)]
    k: Option<usize>,
    /// Run name under the run directory [default: run-<trace digest>].
    #[arg(long)]
    name: Option<String>,
}

#[derive(Debug, Subcommand)]
enum RunCommand {
    /// Natural-language specification to RTL; prints the design.
    Synth {
        /// Specification text.
        spec: String,
        /// Target language.
        #[arg(long, value_enum, default_value = "verilog")]
        lang: LangArg,
        #[command(flatten)]
        opts: TaskOpts,
    },
    /// RTL source file to a natural-language summary; prints the summary.
    Summ {
        /// Verilog or VHDL source file.
        source: PathBuf,
        #[command(flatten)]
        opts: TaskOpts,
    },
}

#[derive(Debug, Subcommand)]
enum EvalCommand {
    /// Pass@1 and built-in vector checks over task directories.
    Synth {
        /// Directory of tasks, each with spec.txt and optional testbench.v and vectors.tv.
        tasks: PathBuf,
        /// Target language.
        #[arg(long, value_enum, default_value = "verilog")]
        lang: LangArg,
        /// Report directory [default: <run_dir>/eval-synth].
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// ROUGE-L over {"id", "path" or "source", "reference"} pairs.
    Summ {
        /// JSONL pair file; paths resolve against its directory.
        pairs: PathBuf,
        /// Report directory [default: <run_dir>/eval-summ].
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// NDCG@1 and NDCG@10 of knowledge-base retrieval.
    Retrieval {
        /// JSONL file of {"id", "x", "phi"} queries.
        queries: PathBuf,
        /// JSONL file of {"query", "entry", "relevance"} judgments.
        qrels: PathBuf,
        /// Report directory [default: <run_dir>/eval-retrieval].
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum ForgeCommand {
    /// Consistent identifier renaming; prints the renamed source.
    Type2 {
        /// HDL source file.
        input: PathBuf,
        /// Write the rename map as JSON here.
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// Dependency-safe reordering plus inert code; prints the result.
    Type3 {
        /// HDL source file.
        input: PathBuf,
    },
    /// Back-translation through the configured external tool.
    Type4 {
        /// HDL source file.
        input: PathBuf,
    },
    /// Partial-to-complete pairs as JSONL.
    Pc {
        /// HDL source file.
        input: PathBuf,
    },
    /// Forge pairs for a corpus and print the pair counts.
    Stats {
        /// Corpus directory of HDL files.
        corpus: PathBuf,
        /// Write all pairs as JSONL here.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also request text-to-code and code-to-summary pairs from the provider.
        #[arg(long)]
        with_provider: bool,
    },
}

#[derive(Debug, Args)]
struct AblateArgs {
    /// Parameter range, `N=a..b` or `k=a..b` (inclusive).
    #[arg(long)]
    sweep: String,
    /// Task suite directory [default: config `tasks`].
    #[arg(long)]
    tasks: Option<PathBuf>,
    /// Also write the CSV here.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Design file.
    design: PathBuf,
    /// Vector file.
    vectors: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

struct Env {
    cfg: Config,
    seed: u64,
    jobs: usize,
}

fn dispatch(cli: Cli) -> anyhow::Result<ExitCode> {
    let mut cfg = Config::load(cli.config.as_deref())?;
    if let Some(p) = cli.provider {
        let kind = match p {
            ProviderArg::Mock => ProviderKind::Mock,
            ProviderArg::Remote => ProviderKind::Remote,
        };
        cfg.generation.kind = kind;
        cfg.embedding.kind = kind;
    }
    cfg.validate()?;
    let jobs = match cli.jobs {
        Some(0) => return Err(config_error("--jobs must be at least 1")),
        Some(j) => j,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global()
        .context("configuring worker threads")?;
    let env = Env {
        cfg,
        seed: cli.seed,
        jobs,
    };
    match cli.command {
        Command::Kb(KbCommand::Build { corpus, output }) => kb_build(&env, &corpus, &output),
        Command::TrainWq(args) => train_wq(&env, &args),
        Command::Run(cmd) => run_task(&env, cmd),
        Command::Eval(EvalCommand::Synth { tasks, lang, out }) => eval_synth(&env, &tasks, lang, out),
        Command::Eval(EvalCommand::Summ { pairs, out }) => eval_summ(&env, &pairs, out),
        Command::Eval(EvalCommand::Retrieval { queries, qrels, out }) => eval_retrieval(&env, &queries, &qrels, out),
        Command::Forge(cmd) => forge(&env, cmd),
        Command::Ablate(args) => ablate(&env, &args),
        Command::Simulate(args) => simulate(&args),
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))
}

fn source_language(path: &Path) -> anyhow::Result<HdlLanguage> {
    language_for_path(path).ok_or_else(|| {
        config_error(format!(
            "{}: expected a .v, .sv, .vhd or .vhdl file",
            path.display()
        ))
    })
}

fn embedder(env: &Env) -> anyhow::Result<Arc<dyn TextEmbedder>> {
    embedder_from_config(&env.cfg.embedding).map_err(|e| config_error(format!("config field `embedding`: {e}")))
}

fn generator(env: &Env) -> anyhow::Result<Arc<dyn TextGenerator>> {
    generator_from_config(&env.cfg.generation).map_err(|e| config_error(format!("config field `generation`: {e}")))
}

/// Generator, embedder, index, projection and templates for pipeline runs.
struct Runtime {
    generator: Arc<dyn TextGenerator>,
    embedder: Arc<dyn TextEmbedder>,
    index: KbIndex,
    projection: ProjectionMatrix,
    templates: Templates,
}

impl Runtime {
    fn load(env: &Env) -> anyhow::Result<Self> {
        let kb = env.cfg.require_kb()?;
        let embedder = embedder(env)?;
        let generator = generator(env)?;
        let index = if kb.is_dir() {
            build_index(drafts_from_dir(kb)?, embedder.as_ref())?
        } else {
            load_kb_for(kb, embedder.as_ref()).with_context(|| format!("loading {}", kb.display()))?
        };
        let projection = match &env.cfg.projection {
            Some(p) => ProjectionMatrix::load(p).with_context(|| format!("loading {}", p.display()))?,
            None => ProjectionMatrix::half_identity(embedder.dim()),
        };
        if projection.dim() != embedder.dim() {
            return Err(config_error(format!(
                "config field `projection`: dimension {} does not match the embedder's {}",
                projection.dim(),
                embedder.dim()
            )));
        }
        let templates = match &env.cfg.templates {
            Some(dir) => Templates::load_dir(dir).map_err(|e| config_error(format!("config field `templates`: {e}")))?,
            None => Templates::default(),
        };
        Ok(Runtime {
            generator,
            embedder,
            index,
            projection,
            templates,
        })
    }

    fn deps(&self) -> Deps<'_> {
        Deps {
            generator: self.generator.as_ref(),
            embedder: self.embedder.as_ref(),
            index: &self.index,
            projection: &self.projection,
            templates: &self.templates,
        }
    }
}

fn kb_build(env: &Env, corpus: &Path, output: &Path) -> anyhow::Result<ExitCode> {
    if !corpus.is_dir() {
        return Err(config_error(format!("{}: not a directory", corpus.display())));
    }
    let embedder = embedder(env)?;
    let index = build_index(drafts_from_dir(corpus)?, embedder.as_ref())?;
    save_kb(&index, output)?;
    println!("indexed {} entries into {}", index.len(), output.display());
    Ok(ExitCode::SUCCESS)
}

#[derive(Deserialize)]
struct TextTriple {
    x: String,
    phi: String,
    y: String,
}

fn train_wq(env: &Env, args: &TrainArgs) -> anyhow::Result<ExitCode> {
    let text = read(&args.triples)?;
    let embedder = embedder(env)?;
    let mut triples = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let t: TextTriple = serde_json::from_str(line)
            .map_err(|e| config_error(format!("{}:{}: {e}", args.triples.display(), i + 1)))?;
        triples.push(Triple {
            x: embedder.embed(&t.x)?,
            phi: embedder.embed(&t.phi)?,
            y: embedder.embed(&t.y)?,
        });
    }
    let cfg = TrainingConfig {
        batch_size: args.batch,
        epochs: args.epochs,
        learning_rate: args.lr,
        tau: args.tau,
        seed: env.seed,
        bias: args.bias,
    };
    cfg.validate().map_err(|e| config_error(e.to_string()))?;
    let outcome = train_projection(&triples, &cfg)?;
    outcome.projection.save(&args.output)?;
    let first = outcome.loss_trace.first().copied().unwrap_or(f64::NAN);
    let last = outcome.loss_trace.last().copied().unwrap_or(f64::NAN);
    println!("triples: {}", triples.len());
    println!("loss: {first:.6} -> {last:.6}");
    println!("train top-1: {:.4}", top1_accuracy(&triples, &outcome.projection)?);
    println!("wrote {}", args.output.display());
    Ok(ExitCode::SUCCESS)
}

/// Share of triples whose own target is the most similar of all targets.
fn top1_accuracy(triples: &[Triple], w: &ProjectionMatrix) -> anyhow::Result<f64> {
    let mut hits = 0;
    for (i, t) in triples.iter().enumerate() {
        let q = joint_query(&t.x, &t.phi, w)?;
        let scores = triples
            .iter()
            .map(|o| cosine(&q, &o.y))
            .collect::<Result<Vec<f64>, _>>()?;
        let best = scores
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(j, _)| j);
        hits += usize::from(best == Some(i));
    }
    Ok(hits as f64 / triples.len() as f64)
}

fn run_task(env: &Env, cmd: RunCommand) -> anyhow::Result<ExitCode> {
    let (mut input, opts) = match cmd {
        RunCommand::Synth { spec, lang, opts } => (TaskInput::synthesis(spec, lang.target()), opts),
        RunCommand::Summ { source, opts } => {
            source_language(&source)?;
            (TaskInput::summarization(read(&source)?), opts)
        }
    };
    input.n_hint = opts.n.unwrap_or(env.cfg.n);
    input.k = opts.k.unwrap_or(env.cfg.k);
    input.validate().map_err(|e| config_error(e.to_string()))?;
    let rt = Runtime::load(env)?;
    let out = pipeline::run(&input, &rt.deps())?;
    let dir = out.persist(&env.cfg.run_dir, opts.name.as_deref())?;
    print!("{}", out.y_hat);
    eprintln!("trace: {}", dir.join("trace.json").display());
    for w in &out.trace.warnings {
        eprintln!("warning: {w}");
    }
    if out.valid {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("error: the final design does not parse");
        Ok(ExitCode::FAILURE)
    }
}

fn finish_report(mut report: Report, extra: Vec<(String, String)>, dir: &Path) -> anyhow::Result<()> {
    report.metadata.extend(extra);
    report.write(dir)?;
    print!("{}", report.to_text());
    eprintln!("report: {}", dir.display());
    Ok(())
}

fn status_label(s: Option<SimStatus>) -> &'static str {
    match s {
        None => "none",
        Some(SimStatus::Passed) => "passed",
        Some(SimStatus::Failed) => "failed",
        Some(SimStatus::Timeout) => "timeout",
        Some(SimStatus::SimulatorUnavailable) => "skipped",
    }
}

fn vector_label(v: &Option<Result<bool, String>>) -> String {
    match v {
        None => "none".into(),
        Some(Ok(true)) => "passed".into(),
        Some(Ok(false)) => "failed".into(),
        Some(Err(e)) => format!("error ({e})"),
    }
}

#[derive(Serialize)]
struct TaskDetail<'a> {
    task: &'a str,
    valid: bool,
    error: Option<&'a str>,
    subcomponents: usize,
    candidates: usize,
    symbolic_exact: usize,
    vectors: String,
    simulation: &'static str,
}

fn eval_synth(env: &Env, tasks_dir: &Path, lang: LangArg, out: Option<PathBuf>) -> anyhow::Result<ExitCode> {
    let tasks = load_suite(tasks_dir).map_err(|e| config_error(format!("{e:#}")))?;
    let rt = Runtime::load(env)?;
    let outcomes = run_suite(&tasks, &rt.deps(), lang.target(), env.cfg.n, env.cfg.k, &env.cfg.simulator, env.jobs)?;
    let dir = out.unwrap_or_else(|| env.cfg.run_dir.join("eval-synth"));
    for o in &outcomes {
        if let Some(output) = &o.output {
            output.persist(&dir, Some(&o.name))?;
        }
    }
    let details: Vec<TaskDetail> = outcomes.iter().map(detail).collect();
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("tasks.json"), serde_json::to_string_pretty(&details)? + "\n")?;
    for d in &details {
        eprintln!(
            "{}: valid={} subcomponents={} symbolic_exact={} vectors={} simulation={}",
            d.task, d.valid, d.subcomponents, d.symbolic_exact, d.vectors, d.simulation
        );
    }
    let records = outcomes
        .iter()
        .filter_map(|o| {
            o.sim.map(|status| TaskRecord {
                task: o.name.clone(),
                value: MetricValue::Pass { status },
            })
        })
        .collect();
    let checked = outcomes.iter().filter(|o| o.vectors.is_some()).count();
    let passed = outcomes.iter().filter(|o| matches!(o.vectors, Some(Ok(true)))).count();
    let extra = vec![
        ("simulator".into(), env.cfg.simulator.name.clone()),
        ("vectors.passed".into(), format!("{passed}/{checked}")),
        ("tasks.valid".into(), format!("{}/{}", outcomes.iter().filter(|o| o.valid()).count(), outcomes.len())),
    ];
    finish_report(aggregate(records), extra, &dir)?;
    Ok(if outcomes.iter().any(|o| o.error.is_some()) {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    })
}

fn detail(o: &TaskOutcome) -> TaskDetail<'_> {
    TaskDetail {
        task: &o.name,
        valid: o.valid(),
        error: o.error.as_deref(),
        subcomponents: o.subcomponents(),
        candidates: o.candidates(),
        symbolic_exact: o.symbolic_exact(),
        vectors: vector_label(&o.vectors),
        simulation: status_label(o.sim),
    }
}

#[derive(Deserialize)]
struct SummPair {
    id: String,
    #[serde(default)]
    path: Option<PathBuf>,
    #[serde(default)]
    source: Option<String>,
    reference: String,
}

fn eval_summ(env: &Env, pairs: &Path, out: Option<PathBuf>) -> anyhow::Result<ExitCode> {
    let text = read(pairs)?;
    let base = pairs.parent().unwrap_or(Path::new(""));
    let mut items = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let p: SummPair = serde_json::from_str(line)
            .map_err(|e| config_error(format!("{}:{}: {e}", pairs.display(), i + 1)))?;
        let source = match (&p.source, &p.path) {
            (Some(s), _) => s.clone(),
            (None, Some(path)) => read(&base.join(path))?,
            (None, None) => {
                return Err(config_error(format!("{}:{}: pair needs `path` or `source`", pairs.display(), i + 1)))
            }
        };
        items.push((p.id, source, p.reference));
    }
    let rt = Runtime::load(env)?;
    let dir = out.unwrap_or_else(|| env.cfg.run_dir.join("eval-summ"));
    let mut records = Vec::new();
    let mut failed = 0;
    for (id, source, reference) in items {
        let input = TaskInput {
            n_hint: env.cfg.n,
            k: env.cfg.k,
            ..TaskInput::summarization(source)
        };
        match pipeline::run(&input, &rt.deps()) {
            Ok(o) => {
                o.persist(&dir, Some(&id))?;
                records.push(TaskRecord {
                    task: id,
                    value: MetricValue::RougeL {
                        score: rouge_l(&o.y_hat, &reference),
                    },
                });
            }
            Err(e) => {
                eprintln!("{id}: {e}");
                failed += 1;
            }
        }
    }
    if records.is_empty() {
        bail!("no summary was produced");
    }
    finish_report(aggregate(records), vec![("tasks.failed".into(), failed.to_string())], &dir)?;
    Ok(if failed > 0 { ExitCode::FAILURE } else { ExitCode::SUCCESS })
}

#[derive(Deserialize)]
struct Query {
    id: String,
    x: String,
    phi: String,
}

fn eval_retrieval(env: &Env, queries: &Path, qrels: &Path, out: Option<PathBuf>) -> anyhow::Result<ExitCode> {
    let text = read(queries)?;
    let judgments = load_qrels(qrels).map_err(config_error)?;
    let rt = Runtime::load(env)?;
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let q: Query = serde_json::from_str(line)
            .map_err(|e| config_error(format!("{}:{}: {e}", queries.display(), i + 1)))?;
        let query = joint_query(&rt.embedder.embed(&q.x)?, &rt.embedder.embed(&q.phi)?, &rt.projection)?;
        let ranked: Vec<String> = rt.index.top_k(&query, 10)?.into_iter().map(|r| r.id).collect();
        let j = judgments.get(&q.id).cloned().unwrap_or_default();
        records.push(TaskRecord {
            task: q.id,
            value: MetricValue::Ndcg {
                at_1: ndcg_at_k(&ranked, &j, 1),
                at_10: ndcg_at_k(&ranked, &j, 10),
            },
        });
    }
    if records.is_empty() {
        return Err(config_error(format!("{}: no queries", queries.display())));
    }
    let dir = out.unwrap_or_else(|| env.cfg.run_dir.join("eval-retrieval"));
    let extra = vec![
        ("embedder".into(), rt.embedder.fingerprint()),
        ("kb_entries".into(), rt.index.len().to_string()),
    ];
    finish_report(aggregate(records), extra, &dir)?;
    Ok(ExitCode::SUCCESS)
}

fn forge(env: &Env, cmd: ForgeCommand) -> anyhow::Result<ExitCode> {
    match cmd {
        ForgeCommand::Type2 { input, map } => {
            let lang = source_language(&input)?;
            let (text, renames) = type2_rename(&read(&input)?, lang, env.seed)?;
            if let Some(path) = map {
                fs::write(&path, serde_json::to_string_pretty(&renames)? + "\n")?;
            }
            print!("{text}");
        }
        ForgeCommand::Type3 { input } => {
            let lang = source_language(&input)?;
            let source = read(&input)?;
            let text = type3_transform(&source, lang, env.seed)?;
            match check_equiv(&source, &text, lang) {
                Ok(true) => {}
                Ok(false) => bail!("transformed design is not equivalent to the input"),
                Err(e) => eprintln!("equivalence not checked: {e}"),
            }
            print!("{text}");
        }
        ForgeCommand::Type4 { input } => {
            let lang = source_language(&input)?;
            print!("{}", type4_translate(&read(&input)?, lang, &env.cfg.type4)?);
        }
        ForgeCommand::Pc { input } => {
            let lang = source_language(&input)?;
            print!("{}", write_jsonl(&make_pc_pairs(&read(&input)?, lang, env.seed)?));
        }
        ForgeCommand::Stats {
            corpus,
            output,
            with_provider,
        } => {
            let sources = read_corpus(&corpus)?;
            let generator = if with_provider { Some(generator(env)?) } else { None };
            let run = forge_corpus(&sources, env.seed, generator.as_deref());
            for (name, why) in &run.skipped {
                eprintln!("skipped {name}: {why}");
            }
            if let Some(path) = output {
                fs::write(&path, write_jsonl(&run.records))?;
            }
            println!("sources: {}", sources.len());
            print!("{}", CorpusStats::from_records(&run.records).to_table());
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// HDL files directly under `dir`, sorted by name.
fn read_corpus(dir: &Path) -> anyhow::Result<Vec<(String, String, HdlLanguage)>> {
    let entries = fs::read_dir(dir).map_err(|e| config_error(format!("{}: {e}", dir.display())))?;
    let mut out = Vec::new();
    for entry in entries {
        let path = entry?.path();
        if let Some(lang) = language_for_path(&path) {
            let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            out.push((name, fs::read_to_string(&path)?, lang));
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SweepParam {
    N,
    K,
}

fn parse_sweep(spec: &str) -> anyhow::Result<(SweepParam, Vec<usize>)> {
    let bad = || config_error(format!("--sweep `{spec}`: expected N=a..b or k=a..b with 1 <= a <= b"));
    let (name, range) = spec.split_once('=').ok_or_else(bad)?;
    let param = match name.trim() {
        "N" | "n" => SweepParam::N,
        "k" | "K" => SweepParam::K,
        _ => return Err(bad()),
    };
    let (a, b) = range.split_once("..").ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
    if a == 0 || a > b {
        return Err(bad());
    }
    Ok((param, (a..=b).collect()))
}

pub const ABLATE_HEADER: &str = "param,value,tasks,errors,valid,mean_subcomponents,mean_candidates,symbolic_exact_rate,vector_pass_rate,pass_at_1";

fn ratio(num: usize, den: usize) -> String {
    if den == 0 {
        "NA".into()
    } else {
        format!("{:.4}", num as f64 / den as f64)
    }
}

fn ablate(env: &Env, args: &AblateArgs) -> anyhow::Result<ExitCode> {
    let (param, values) = parse_sweep(&args.sweep)?;
    let dir = args
        .tasks
        .clone()
        .or_else(|| env.cfg.tasks.clone())
        .ok_or_else(|| config_error("config field `tasks` (or --tasks) is required for ablate"))?;
    let tasks = load_suite(&dir).map_err(|e| config_error(format!("{e:#}")))?;
    let rt = Runtime::load(env)?;
    let mut csv = format!("{ABLATE_HEADER}\n");
    for v in values {
        let (n, k, label) = match param {
            SweepParam::N => (v, env.cfg.k, "N"),
            SweepParam::K => (env.cfg.n, v, "k"),
        };
        let outcomes = run_suite(&tasks, &rt.deps(), TargetLanguage::Verilog, n, k, &env.cfg.simulator, env.jobs)?;
        let subs: usize = outcomes.iter().map(TaskOutcome::subcomponents).sum();
        let cands: usize = outcomes.iter().map(TaskOutcome::candidates).sum();
        let exact: usize = outcomes.iter().map(TaskOutcome::symbolic_exact).sum();
        let checked = outcomes.iter().filter(|o| o.vectors.is_some()).count();
        let vec_pass = outcomes.iter().filter(|o| matches!(o.vectors, Some(Ok(true)))).count();
        let attempted = outcomes
            .iter()
            .filter(|o| matches!(o.sim, Some(SimStatus::Passed | SimStatus::Failed | SimStatus::Timeout)))
            .count();
        let sim_pass = outcomes.iter().filter(|o| o.sim == Some(SimStatus::Passed)).count();
        let pass = if attempted == 0 {
            "skipped".to_string()
        } else {
            ratio(sim_pass, attempted)
        };
        let mut row = String::new();
        write!(
            row,
            "{label},{v},{},{},{},{},{},{},{},{pass}",
            outcomes.len(),
            outcomes.iter().filter(|o| o.error.is_some()).count(),
            outcomes.iter().filter(|o| o.valid()).count(),
            ratio(subs, outcomes.len()),
            ratio(cands, subs),
            ratio(exact, subs),
            ratio(vec_pass, checked),
        )?;
        csv.push_str(&row);
        csv.push('\n');
    }
    if let Some(path) = &args.output {
        fs::write(path, &csv)?;
    }
    print!("{csv}");
    Ok(ExitCode::SUCCESS)
}

fn simulate(args: &SimulateArgs) -> anyhow::Result<ExitCode> {
    let design = read(&args.design)?;
    let lang = language_for_path(&args.design).unwrap_or_else(|| detect_language(&design));
    let vectors = parse_vectors(&read(&args.vectors)?).map_err(|e| config_error(e.to_string()))?;
    let report = check_vectors(&design, lang, &vectors)?;
    for f in &report.failures {
        println!("FAIL {f}");
    }
    if report.passed() {
        println!("ALL TESTS PASSED ({} vectors)", report.total);
        Ok(ExitCode::SUCCESS)
    } else {
        println!("{} of {} vectors failed", report.failures.len(), report.total);
        Ok(ExitCode::FAILURE)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    fn undocumented(cmd: &clap::Command, path: &str, out: &mut Vec<String>) {
        for arg in cmd.get_arguments() {
            if arg.get_help().is_none() && !matches!(arg.get_id().as_str(), "help" | "version") {
                out.push(format!("{path} {}", arg.get_id()));
            }
        }
        for sub in cmd.get_subcommands() {
            undocumented(sub, &format!("{path} {}", sub.get_name()), out);
        }
    }

    #[test]
    fn every_flag_is_documented() {
        Cli::command().debug_assert();
        let mut missing = Vec::new();
        undocumented(&Cli::command(), "symdirec", &mut missing);
        assert!(missing.is_empty(), "{missing:?}");
    }

    #[test]
    fn sweep_ranges() {
        assert_eq!(parse_sweep("k=1..3").unwrap(), (SweepParam::K, vec![1, 2, 3]));
        assert_eq!(parse_sweep("N=2..8").unwrap().1.len(), 7);
        assert_eq!(parse_sweep("N=2..=3").unwrap().1, vec![2, 3]);
        for bad in ["k=0..3", "k=3..1", "x=1..2", "k=1", "k"] {
            assert!(parse_sweep(bad).is_err(), "{bad}");
        }
    }
}
