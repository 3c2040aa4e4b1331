use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

/// Graded relevance of entries for one query.
pub type Judgments = BTreeMap<String, u32>;

/// Query id to its judgments.
pub type RelevanceJudgments = BTreeMap<String, Judgments>;

fn gain(rel: u32) -> f64 {
    2f64.powi(rel as i32) - 1.0
}

fn discount(rank: usize) -> f64 {
    ((rank + 1) as f64).log2()
}

/// `sum_{r=1..min(k,n)} (2^rel_r - 1) / log2(r + 1)`; unjudged ids count 0.
pub fn dcg_at_k(ranked: &[String], judgments: &Judgments, k: usize) -> f64 {
    ranked
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, id)| gain(judgments.get(id).copied().unwrap_or(0)) / discount(i + 1))
        .sum()
}

/// DCG normalized by the DCG of the ideal ordering of `judgments`; 0 when
/// nothing is relevant or `k` is 0.
pub fn ndcg_at_k(ranked: &[String], judgments: &Judgments, k: usize) -> f64 {
    let mut ideal: Vec<u32> = judgments.values().copied().collect();
    ideal.sort_unstable_by(|a, b| b.cmp(a));
    let idcg: f64 = ideal
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, rel)| gain(*rel) / discount(i + 1))
        .sum();
    if idcg == 0.0 {
        return 0.0;
    }
    dcg_at_k(ranked, judgments, k) / idcg
}

#[derive(Deserialize)]
struct QrelLine {
    query: String,
    entry: String,
    relevance: u32,
}

/// Reads `{"query", "entry", "relevance"}` lines.
pub fn load_qrels(path: &Path) -> Result<RelevanceJudgments, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut out = RelevanceJudgments::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let q: QrelLine = serde_json::from_str(line)
            .map_err(|e| format!("{}:{}: {e}", path.display(), i + 1))?;
        out.entry(q.query).or_default().insert(q.entry, q.relevance);
    }
    Ok(out)
}
