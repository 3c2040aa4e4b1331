use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{RougeScore, SimStatus};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "metric", rename_all = "snake_case")]
pub enum MetricValue {
    Pass { status: SimStatus },
    RougeL { score: RougeScore },
    Ndcg { at_1: f64, at_10: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub task: String,
    #[serde(flatten)]
    pub value: MetricValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassSummary {
    pub passed: usize,
    pub failed: usize,
    pub timeouts: usize,
    pub skipped: usize,
    /// Passed over attempted cases; `None` when every case was skipped.
    pub pass_at_1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RougeSummary {
    pub count: usize,
    pub mean_precision: f64,
    pub mean_recall: f64,
    pub mean_f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NdcgSummary {
    pub count: usize,
    pub mean_at_1: f64,
    pub mean_at_10: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub pass: Option<PassSummary>,
    pub rouge_l: Option<RougeSummary>,
    pub ndcg: Option<NdcgSummary>,
    pub tasks: Vec<TaskRecord>,
    pub metadata: Vec<(String, String)>,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (n, sum) = values.fold((0usize, 0.0), |(n, s), v| (n + 1, s + v));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Means per metric family; unavailable simulators are counted as skipped
/// and kept out of the Pass@1 denominator, timeouts count as failures.
pub fn aggregate(records: Vec<TaskRecord>) -> Report {
    let statuses: Vec<SimStatus> = records
        .iter()
        .filter_map(|r| match r.value {
            MetricValue::Pass { status } => Some(status),
            _ => None,
        })
        .collect();
    let pass = (!statuses.is_empty()).then(|| {
        let count = |s: SimStatus| statuses.iter().filter(|x| **x == s).count();
        let (passed, failed, timeouts, skipped) = (
            count(SimStatus::Passed),
            count(SimStatus::Failed),
            count(SimStatus::Timeout),
            count(SimStatus::SimulatorUnavailable),
        );
        let attempted = passed + failed + timeouts;
        PassSummary {
            passed,
            failed,
            timeouts,
            skipped,
            pass_at_1: (attempted > 0).then(|| passed as f64 / attempted as f64),
        }
    });

    let rouge: Vec<RougeScore> = records
        .iter()
        .filter_map(|r| match r.value {
            MetricValue::RougeL { score } => Some(score),
            _ => None,
        })
        .collect();
    let rouge_l = (!rouge.is_empty()).then(|| RougeSummary {
        count: rouge.len(),
        mean_precision: mean(rouge.iter().map(|s| s.precision)),
        mean_recall: mean(rouge.iter().map(|s| s.recall)),
        mean_f: mean(rouge.iter().map(|s| s.f)),
    });

    let ndcg: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| match r.value {
            MetricValue::Ndcg { at_1, at_10 } => Some((at_1, at_10)),
            _ => None,
        })
        .collect();
    let ndcg = (!ndcg.is_empty()).then(|| NdcgSummary {
        count: ndcg.len(),
        mean_at_1: mean(ndcg.iter().map(|v| v.0)),
        mean_at_10: mean(ndcg.iter().map(|v| v.1)),
    });

    Report {
        pass,
        rouge_l,
        ndcg,
        tasks: records,
        metadata: vec![
            ("rouge_l.tokenization".into(), "lowercase, whitespace split".into()),
            ("rouge_l.lcs".into(), "summary-level".into()),
            ("ndcg.gain".into(), "2^rel - 1".into()),
            ("ndcg.discount".into(), "log2(rank + 1)".into()),
            ("pass_at_1.denominator".into(), "excludes skipped cases".into()),
        ],
    }
}

impl Report {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(p) = &self.pass {
            let rate = p
                .pass_at_1
                .map_or_else(|| "n/a".to_string(), |r| format!("{r:.4}"));
            let _ = writeln!(
                out,
                "Pass@1      {rate}  (passed {}, failed {}, timeouts {}, skipped {})",
                p.passed, p.failed, p.timeouts, p.skipped
            );
        }
        if let Some(r) = &self.rouge_l {
            let _ = writeln!(
                out,
                "ROUGE-L F   {:.4}  (P {:.4}, R {:.4}, n = {})",
                r.mean_f, r.mean_precision, r.mean_recall, r.count
            );
        }
        if let Some(n) = &self.ndcg {
            let _ = writeln!(
                out,
                "NDCG@1      {:.4}\nNDCG@10     {:.4}  (n = {})",
                n.mean_at_1, n.mean_at_10, n.count
            );
        }
        if !self.tasks.is_empty() {
            let width = self.tasks.iter().map(|t| t.task.len()).max().unwrap_or(4).max(4);
            let _ = writeln!(out, "\n{:width$}  result", "task");
            for t in &self.tasks {
                let v = match &t.value {
                    MetricValue::Pass { status } => format!("{status:?}").to_lowercase(),
                    MetricValue::RougeL { score } => format!("rouge-l f {:.4}", score.f),
                    MetricValue::Ndcg { at_1, at_10 } => {
                        format!("ndcg@1 {at_1:.4}  ndcg@10 {at_10:.4}")
                    }
                };
                let _ = writeln!(out, "{:width$}  {v}", t.task);
            }
        }
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k}: {v}");
        }
        out
    }

    /// Writes `report.json` and `report.txt` into `dir`.
    pub fn write(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        let json = serde_json::to_string_pretty(self).map_err(io::Error::other)?;
        fs::write(dir.join("report.json"), json + "\n")?;
        fs::write(dir.join("report.txt"), self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pass(task: &str, status: SimStatus) -> TaskRecord {
        TaskRecord {
            task: task.into(),
            value: MetricValue::Pass { status },
        }
    }

    #[test]
    fn pass_rate_excludes_skips() {
        let r = aggregate(vec![
            pass("a", SimStatus::Passed),
            pass("b", SimStatus::Passed),
            pass("c", SimStatus::Failed),
            pass("d", SimStatus::Timeout),
            pass("e", SimStatus::SimulatorUnavailable),
        ]);
        let p = r.pass.unwrap();
        assert_eq!(p.pass_at_1, Some(0.5));
        assert_eq!(p.skipped, 1);
    }

    #[test]
    fn single_rouge_mean() {
        let score = RougeScore {
            precision: 0.5,
            recall: 0.25,
            f: 1.0 / 3.0,
        };
        let r = aggregate(vec![TaskRecord {
            task: "x".into(),
            value: MetricValue::RougeL { score },
        }]);
        assert_eq!(r.rouge_l.unwrap().mean_f, 1.0 / 3.0);
    }

    #[test]
    fn all_skipped_has_no_rate() {
        let r = aggregate(vec![pass("a", SimStatus::SimulatorUnavailable)]);
        assert_eq!(r.pass.as_ref().unwrap().pass_at_1, None);
        assert!(r.to_text().contains("n/a"));
    }
}
