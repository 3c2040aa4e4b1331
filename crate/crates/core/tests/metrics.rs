use std::collections::HashMap;
use std::time::Instant;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symdirec::metrics::*;

// Memoized recursive LCS, independent of the library's two-row table.
fn lcs_oracle(a: &[String], b: &[String]) -> usize {
    fn go(a: &[String], b: &[String], i: usize, j: usize, memo: &mut HashMap<(usize, usize), usize>) -> usize {
        if i == a.len() || j == b.len() {
            return 0;
        }
        if let Some(v) = memo.get(&(i, j)) {
            return *v;
        }
        let v = if a[i] == b[j] {
            1 + go(a, b, i + 1, j + 1, memo)
        } else {
            go(a, b, i + 1, j, memo).max(go(a, b, i, j + 1, memo))
        };
        memo.insert((i, j), v);
        v
    }
    go(a, b, 0, 0, &mut HashMap::new())
}

fn f_oracle(c: &[String], r: &[String]) -> f64 {
    if c.is_empty() && r.is_empty() {
        return 1.0;
    }
    if c.is_empty() || r.is_empty() {
        return 0.0;
    }
    let l = lcs_oracle(c, r) as f64;
    let (p, rr) = (l / c.len() as f64, l / r.len() as f64);
    if p + rr == 0.0 {
        0.0
    } else {
        2.0 * p * rr / (p + rr)
    }
}

fn ndcg_oracle(ranked: &[String], j: &Judgments, k: usize) -> f64 {
    let mut dcg = 0.0;
    for (i, id) in ranked.iter().enumerate().take(k) {
        let rel = *j.get(id).unwrap_or(&0) as f64;
        dcg += (2f64.powf(rel) - 1.0) / ((i + 2) as f64).log2();
    }
    let mut rels: Vec<f64> = j.values().map(|v| *v as f64).collect();
    rels.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut idcg = 0.0;
    for (i, rel) in rels.iter().enumerate().take(k) {
        idcg += (2f64.powf(*rel) - 1.0) / ((i + 2) as f64).log2();
    }
    if idcg == 0.0 {
        0.0
    } else {
        dcg / idcg
    }
}

fn random_tokens(rng: &mut ChaCha8Rng) -> Vec<String> {
    let n = rng.random_range(0..=50);
    (0..n).map(|_| format!("w{}", rng.random_range(0..8))).collect()
}

#[test]
fn rouge_matches_oracle_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    for _ in 0..1000 {
        let c = random_tokens(&mut rng);
        let r = random_tokens(&mut rng);
        let got = rouge_l(&c.join(" "), &r.join(" "));
        assert_eq!(got.f, f_oracle(&c, &r));
    }
    assert!(start.elapsed().as_secs_f64() < 10.0);
}

#[test]
fn ndcg_matches_hand_formula_on_random_permutations() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let n = rng.random_range(1..30);
        let mut ids: Vec<String> = (0..n).map(|i| format!("d{i}")).collect();
        let j: Judgments = ids.iter().map(|id| (id.clone(), rng.random_range(0..4))).collect();
        ids.shuffle(&mut rng);
        let k = rng.random_range(1..15);
        assert!((ndcg_at_k(&ids, &j, k) - ndcg_oracle(&ids, &j, k)).abs() < 1e-9);
    }
}

#[test]
fn common_cutoffs() {
    let j: Judgments = [("gt".to_string(), 1)].into();
    let ranked: Vec<String> = ["x", "gt", "y"].iter().map(|s| s.to_string()).collect();
    assert_eq!(ndcg_at_k(&ranked, &j, 1), 0.0);
    assert!((ndcg_at_k(&ranked, &j, 10) - 1.0 / 3f64.log2()).abs() < 1e-12);
}

fn sh_sim(success: &str) -> SimConfig {
    SimConfig {
        name: "sh".into(),
        command: "sh {testbench} {design} {out}".into(),
        success_pattern: success.into(),
        timeout_secs: 10.0,
        extension: "v".into(),
    }
}

#[test]
fn runner_requires_exit_zero_and_pattern() {
    let cfg = sh_sim("ALL TESTS PASSED");
    let design = "module m(input a, output y); assign y = a; endmodule\n";
    let good = "grep -q 'assign y = a' \"$1\" && echo 'ALL TESTS PASSED'";
    let r = pass_at_1(design, good, &cfg).unwrap();
    assert_eq!(r.status, SimStatus::Passed, "{}", r.log);

    let wrong_exit = "echo 'ALL TESTS PASSED'; exit 1";
    assert_eq!(pass_at_1(design, wrong_exit, &cfg).unwrap().status, SimStatus::Failed);

    let no_pattern = "echo done";
    assert_eq!(pass_at_1(design, no_pattern, &cfg).unwrap().status, SimStatus::Failed);

    let mutant = design.replace("assign y = a", "assign y = ~a");
    assert_eq!(pass_at_1(&mutant, good, &cfg).unwrap().status, SimStatus::Failed);
}

#[test]
fn runner_times_out() {
    let cfg = SimConfig {
        timeout_secs: 2.0,
        ..sh_sim("ALL TESTS PASSED")
    };
    let start = Instant::now();
    let r = pass_at_1("", "while true; do sleep 1; done", &cfg).unwrap();
    assert_eq!(r.status, SimStatus::Timeout);
    assert!(!r.passed);
    assert!(start.elapsed().as_secs_f64() < 8.0);
}

#[test]
fn batch_preserves_order() {
    let cfg = sh_sim("OK");
    let cases: Vec<SimCase> = (0..6)
        .map(|i| SimCase {
            task: format!("t{i}"),
            design: String::new(),
            testbench: if i % 2 == 0 { "echo OK".into() } else { "exit 3".into() },
        })
        .collect();
    let results = pass_at_1_batch(&cases, &cfg, 3).unwrap();
    let passed: Vec<bool> = results.iter().map(|r| r.passed).collect();
    assert_eq!(passed, vec![true, false, true, false, true, false]);
}

#[test]
fn report_files_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let report = aggregate(vec![
        TaskRecord {
            task: "ha".into(),
            value: MetricValue::Pass { status: SimStatus::Passed },
        },
        TaskRecord {
            task: "fa".into(),
            value: MetricValue::Pass { status: SimStatus::SimulatorUnavailable },
        },
    ]);
    report.write(dir.path()).unwrap();
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json["pass"]["skipped"], 1);
    assert_eq!(json["pass"]["pass_at_1"], 1.0);
    let text = std::fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert!(text.contains("skipped 1"));
}

fn tokens() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec("[a-d]", 0..30)
}

proptest! {
    #[test]
    fn f_is_symmetric_for_equal_lengths(a in tokens(), seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b: Vec<String> = a.iter().map(|_| ["a", "b", "c", "d"][rng.random_range(0..4)].to_string()).collect();
        let x = rouge_l(&a.join(" "), &b.join(" "));
        let y = rouge_l(&b.join(" "), &a.join(" "));
        prop_assert_eq!(x.f, y.f);
        prop_assert_eq!(x.precision, y.recall);
    }

    #[test]
    fn ndcg_ignores_equal_relevance_permutations_below_k(n in 3usize..20, k in 1usize..10, seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ids: Vec<String> = (0..n).map(|i| format!("d{i}")).collect();
        let j: Judgments = ids.iter().map(|id| (id.clone(), rng.random_range(0..2))).collect();
        let base = ndcg_at_k(&ids, &j, k);
        let mut tail = ids[k.min(n)..].to_vec();
        tail.shuffle(&mut rng);
        let permuted: Vec<String> = ids[..k.min(n)].iter().cloned().chain(tail).collect();
        prop_assert!((ndcg_at_k(&permuted, &j, k) - base).abs() < 1e-12);
    }

    #[test]
    fn ideal_order_scores_one(rels in prop::collection::vec(0u32..5, 1..20), k in 1usize..25) {
        prop_assume!(rels.iter().any(|r| *r > 0));
        let j: Judgments = rels.iter().enumerate().map(|(i, r)| (format!("d{i}"), *r)).collect();
        let mut ranked: Vec<(String, u32)> = j.iter().map(|(k, v)| (k.clone(), *v)).collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1));
        let ranked: Vec<String> = ranked.into_iter().map(|x| x.0).collect();
        prop_assert!((ndcg_at_k(&ranked, &j, k) - 1.0).abs() < 1e-12);
    }
}
