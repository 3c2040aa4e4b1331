use std::cmp::Ordering;
use std::sync::LazyLock;

use regex::Regex;

use super::templates::fill;
use super::{CandidateScore, PipelineError, Stage, SubComponent, Templates, VerifiedCandidate, VerifyMethod};
use crate::knowledge_base::KbEntry;
use crate::providers::{GenRequest, TextGenerator};
use crate::symlogic::{equivalent, SymBundle, SymExpr, VarRef};

#[derive(Debug, Clone, PartialEq)]
pub struct Verification {
    pub alpha: f64,
    pub method: VerifyMethod,
    pub prompt: Option<String>,
    pub reply: Option<String>,
    pub warning: Option<String>,
}

/// Renames the variables of `e` to `v0, v1, ...` by first appearance.
fn canonical(e: &SymExpr) -> (SymExpr, usize) {
    let order = e.vars_in_order();
    let n = order.len();
    let renamed = e.rename_vars(&|v: &VarRef| {
        order
            .iter()
            .position(|o| o == v)
            .map(|i| VarRef::new(&format!("v{i}")))
    });
    (renamed, n)
}

/// Output-by-output equivalence after positional variable canonicalization.
/// `None` when the bundles define different numbers of outputs.
pub fn symbolic_match(a: &SymBundle, b: &SymBundle) -> Option<bool> {
    if a.len() != b.len() || a.is_empty() {
        return None;
    }
    Some(a.defs.iter().zip(&b.defs).all(|(da, db)| {
        let (ca, na) = canonical(da.body());
        let (cb, nb) = canonical(db.body());
        na == nb && equivalent(&ca, &cb).unwrap_or(false)
    }))
}

static NUMBER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?").unwrap());

/// First number in a reply, clamped to [0, 1], with a warning for clamped
/// values and for replies without a number (scored 0).
pub fn parse_score(reply: &str) -> (f64, Option<String>) {
    let Some(m) = NUMBER.find(reply) else {
        return (0.0, Some(format!("unparseable score reply {:?}; scored 0", reply.trim())));
    };
    match m.as_str().parse::<f64>() {
        Ok(v) if (0.0..=1.0).contains(&v) => (v, None),
        Ok(v) if v.is_finite() => (
            v.clamp(0.0, 1.0),
            Some(format!("score {v} outside [0, 1]; clamped")),
        ),
        _ => (0.0, Some(format!("unparseable score reply {:?}; scored 0", reply.trim()))),
    }
}

/// Symbolic fast path when both sides carry formal logic of equal arity and
/// match exactly; the provider's 0..1 rating otherwise.
pub fn verify_score(
    entry: &KbEntry,
    sub: &SubComponent,
    generator: &dyn TextGenerator,
    templates: &Templates,
) -> Result<Verification, PipelineError> {
    if let (Some(a), Some(b)) = (sub.phi.formal(), entry.phi.formal()) {
        if symbolic_match(a, b) == Some(true) {
            return Ok(Verification {
                alpha: 1.0,
                method: VerifyMethod::SymbolicExact,
                prompt: None,
                reply: None,
                warning: None,
            });
        }
    }
    let phi = sub.phi.to_string();
    let prompt = fill(
        &templates.verify,
        &[("x_i", &sub.x), ("phi_i", &phi), ("snippet", entry.y.trim_end())],
    );
    let reply = generator
        .generate(&GenRequest::new(prompt.clone()))
        .map_err(|source| PipelineError::Provider {
            stage: Stage::Verify,
            source,
        })?
        .text;
    let (alpha, warning) = parse_score(&reply);
    Ok(Verification {
        alpha,
        method: VerifyMethod::Llm,
        prompt: Some(prompt),
        reply: Some(reply),
        warning,
    })
}

/// Highest verify score; ties go to entries in the task's language, then
/// the higher retrieval score, then the smaller entry id.
pub fn select(sub_index: usize, scores: &[CandidateScore]) -> Result<VerifiedCandidate, PipelineError> {
    let best = scores
        .iter()
        .min_by(|a, b| {
            b.alpha
                .partial_cmp(&a.alpha)
                .unwrap_or(Ordering::Equal)
                .then(b.same_language.cmp(&a.same_language))
                .then(b.retrieval_score.partial_cmp(&a.retrieval_score).unwrap_or(Ordering::Equal))
                .then_with(|| a.entry_id.cmp(&b.entry_id))
        })
        .ok_or(PipelineError::NoCandidates)?;
    Ok(VerifiedCandidate {
        sub_index,
        entry_id: best.entry_id.clone(),
        retrieval_score: best.retrieval_score,
        alpha: best.alpha,
        method: best.method,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symlogic::parse_bundle;

    fn cand(id: &str, alpha: f64, score: f64) -> CandidateScore {
        CandidateScore {
            entry_id: id.into(),
            retrieval_score: score,
            alpha,
            method: VerifyMethod::Llm,
            same_language: false,
            prompt: None,
            reply: None,
            warning: None,
        }
    }

    #[test]
    fn select_tie_breaks() {
        let c = [cand("a", 0.3, 0.8), cand("b", 0.9, 0.5), cand("c", 0.9, 0.7)];
        assert_eq!(select(1, &c).unwrap().entry_id, "c");
        let same = [cand("z", 0.5, 0.5), cand("y", 0.5, 0.5)];
        assert_eq!(select(1, &same).unwrap().entry_id, "y");
        assert!(matches!(select(1, &[]), Err(PipelineError::NoCandidates)));
        let mut native = cand("w", 0.9, 0.1);
        native.same_language = true;
        assert_eq!(select(1, &[c[2].clone(), native]).unwrap().entry_id, "w");
    }

    #[test]
    fn scores_from_replies() {
        assert_eq!(parse_score("0.2"), (0.2, None));
        assert_eq!(parse_score("Score: 0.85\n").0, 0.85);
        let (v, w) = parse_score("high");
        assert_eq!(v, 0.0);
        assert!(w.is_some());
        assert_eq!(parse_score("7").0, 1.0);
    }

    #[test]
    fn positional_canonicalization() {
        let sub = parse_bundle("s0 = a0 ^ b0; c1 = a0 & b0").unwrap();
        let entry = parse_bundle("sum = a ^ b; carry = a & b").unwrap();
        assert_eq!(symbolic_match(&sub, &entry), Some(true));
        let swapped = parse_bundle("carry = a & b; sum = a ^ b").unwrap();
        assert_eq!(symbolic_match(&sub, &swapped), Some(false));
        let or = parse_bundle("y = a | b").unwrap();
        let and = parse_bundle("y = a & b").unwrap();
        assert_eq!(symbolic_match(&or, &and), Some(false));
        assert_eq!(symbolic_match(&sub, &or), None);
    }
}
