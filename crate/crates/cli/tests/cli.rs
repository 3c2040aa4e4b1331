use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").canonicalize().unwrap()
}

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_symdirec"));
    c.env_remove("RUST_LOG");
    c
}

/// A config over the bundled data with its own run directory.
fn config(dir: &Path, extra: &str) -> PathBuf {
    let d = data();
    let text = format!(
        "kb = \"{kb}\"\ntasks = \"{tasks}\"\nrun_dir = \"{runs}\"\n{extra}\n\
         [generation]\nkind = \"mock\"\nfixtures = [\"{fix}\"]\n\
         [embedding]\nkind = \"mock\"\ndim = 256\n",
        kb = d.join("kb").display(),
        tasks = d.join("toy").display(),
        runs = dir.join("runs").display(),
        fix = d.join("fixtures/mock.jsonl").display(),
    );
    let path = dir.join("symdirec.toml");
    fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str], cfg: &Path) -> Output {
    bin().args(args).arg("--config").arg(cfg).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const HELP_PATHS: &[&[&str]] = &[
    &[],
    &["kb"],
    &["kb", "build"],
    &["train-wq"],
    &["run"],
    &["run", "synth"],
    &["run", "summ"],
    &["eval"],
    &["eval", "synth"],
    &["eval", "summ"],
    &["eval", "retrieval"],
    &["forge"],
    &["forge", "type2"],
    &["forge", "type3"],
    &["forge", "type4"],
    &["forge", "pc"],
    &["forge", "stats"],
    &["ablate"],
    &["simulate"],
];

#[test]
fn help_matches_snapshot() {
    let mut all = String::new();
    for path in HELP_PATHS {
        let out = bin().args(*path).arg("--help").output().unwrap();
        assert!(out.status.success(), "{path:?}");
        let words: Vec<&str> = std::iter::once("symdirec").chain(path.iter().copied()).collect();
        all.push_str(&format!("$ {} --help\n", words.join(" ")));
        all.push_str(&stdout(&out));
        all.push('\n');
    }
    let snap = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/snapshots/help.txt");
    if std::env::var_os("UPDATE_SNAPSHOTS").is_some() {
        fs::write(&snap, &all).unwrap();
    }
    let expected = fs::read_to_string(&snap).expect("snapshot exists; set UPDATE_SNAPSHOTS=1 to create it");
    assert_eq!(all, expected);
}

#[test]
fn golden_synthesis_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "");
    let spec = "8-bit ripple-carry adder";
    let a = run(&["run", "synth", spec, "--provider", "mock", "--seed", "7", "--name", "a"], &cfg);
    let b = run(&["run", "synth", spec, "--provider", "mock", "--seed", "7", "--name", "b"], &cfg);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("module ripple_carry_adder_8("));
    let runs = dir.path().join("runs");
    for f in ["trace.json", "output.v"] {
        assert_eq!(fs::read(runs.join("a").join(f)).unwrap(), fs::read(runs.join("b").join(f)).unwrap());
    }
}

#[test]
fn missing_kb_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "run_dir = \"runs\"\n").unwrap();
    let out = run(&["run", "synth", "half-adder"], &cfg);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`kb`"));

    fs::write(&cfg, format!("kb = \"{}\"\n", dir.path().join("absent.jsonl").display())).unwrap();
    let out = run(&["run", "synth", "half-adder"], &cfg);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`kb`"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(bin().arg("frobnicate").output().unwrap().status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "");
    let out = run(&["ablate", "--sweep", "k=3..1"], &cfg);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn ablate_k_sweep_emits_one_row_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "");
    let out = run(&["ablate", "--sweep", "k=1..3"], &cfg);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    let width = lines[0].split(',').count();
    for (i, row) in lines[1..].iter().enumerate() {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols.len(), width);
        assert_eq!(cols[0], "k");
        assert_eq!(cols[1], (i + 1).to_string());
    }
}

#[test]
fn unknown_prompt_fails_the_task() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "");
    let out = run(&["run", "synth", "a spec nobody recorded"], &cfg);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn simulate_reports_pass_and_fail() {
    let d = data().join("toy/half_adder");
    let ok = bin()
        .args(["simulate"])
        .arg(d.join("reference.v"))
        .arg(d.join("vectors.tv"))
        .output()
        .unwrap();
    assert!(ok.status.success());
    assert!(stdout(&ok).contains("ALL TESTS PASSED"));

    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("ha.v");
    let src = fs::read_to_string(d.join("reference.v")).unwrap();
    fs::write(&broken, src.replace("a & b", "a | b")).unwrap();
    let bad = bin().arg("simulate").arg(&broken).arg(d.join("vectors.tv")).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn forge_commands_are_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "");
    let src = data().join("corpus/full_adder.v");
    let src = src.to_str().unwrap();
    let a = run(&["forge", "type2", src, "--seed", "5"], &cfg);
    let b = run(&["forge", "type2", src, "--seed", "5"], &cfg);
    let c = run(&["forge", "type2", src, "--seed", "6"], &cfg);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    let t3 = run(&["forge", "type3", src, "--seed", "5"], &cfg);
    assert!(t3.status.success());
    let pc = run(&["forge", "pc", src, "--seed", "5"], &cfg);
    assert!(stdout(&pc).contains("\"type\":\"PC\""));
    let stats = run(&["forge", "stats", data().join("corpus").to_str().unwrap()], &cfg);
    assert!(stdout(&stats).contains("# FEC Pairs"));
    let t4 = run(&["forge", "type4", src], &cfg);
    assert_eq!(t4.status.code(), Some(1));
}

#[test]
fn kb_build_then_retrieval_eval() {
    let dir = tempfile::tempdir().unwrap();
    let index = dir.path().join("kb.jsonl");
    let cfg = config(dir.path(), "");
    let out = run(&["kb", "build", data().join("kb").to_str().unwrap(), "-o", index.to_str().unwrap()], &cfg);
    assert!(out.status.success());
    let cfg2 = dir.path().join("c2.toml");
    let text = fs::read_to_string(&cfg).unwrap().replacen(
        &format!("kb = \"{}\"", data().join("kb").display()),
        &format!("kb = \"{}\"", index.display()),
        1,
    );
    fs::write(&cfg2, text).unwrap();
    let r = data().join("retrieval");
    let out = run(
        &[
            "eval",
            "retrieval",
            r.join("queries.jsonl").to_str().unwrap(),
            r.join("qrels.jsonl").to_str().unwrap(),
        ],
        &cfg2,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("NDCG@1"));
    assert!(dir.path().join("runs/eval-retrieval/report.json").is_file());
}

#[test]
fn train_wq_writes_a_projection() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "");
    let w = dir.path().join("wq.bin");
    let out = run(
        &[
            "train-wq",
            data().join("train/triples.jsonl").to_str().unwrap(),
            "-o",
            w.to_str().unwrap(),
            "--epochs",
            "5",
        ],
        &cfg,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(w.is_file());
    let cfg2 = config(dir.path(), &format!("projection = \"{}\"", w.display()));
    let synth = run(&["run", "synth", "2:1 mux"], &cfg2);
    assert!(matches!(synth.status.code(), Some(0) | Some(1)));
}
