//! Evaluation metrics: ROUGE-L for summaries, NDCG@k for retrieval, Pass@1
//! through an external simulator, a built-in vector checker, and report
//! aggregation.

mod ndcg;
mod report;
mod rouge;
mod sim;
pub mod vectors;

pub use ndcg::{dcg_at_k, load_qrels, ndcg_at_k, Judgments, RelevanceJudgments};
pub use report::{aggregate, MetricValue, NdcgSummary, PassSummary, Report, RougeSummary, TaskRecord};
pub use rouge::{lcs_len, rouge_l, tokenize, RougeScore};
pub use sim::{pass_at_1, pass_at_1_batch, SimCase, SimConfig, SimError, SimResult, SimStatus};
pub use vectors::{check_vectors, parse_vectors, VectorError, VectorReport, VectorSet};
