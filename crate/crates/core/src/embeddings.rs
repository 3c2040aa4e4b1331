//! Hashed n-gram embeddings, the joint query projection, cosine scoring,
//! and projection training with the multiple-negatives ranking loss.

use std::fs;
use std::hash::Hasher;
use std::io;
use std::path::Path;

use fnv::FnvHasher;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_DIM: usize = 256;
pub const MIN_DIM: usize = 8;
const NGRAM: usize = 3;
const MAGIC: &[u8; 4] = b"SYMW";
const FORMAT_VERSION: u32 = 1;
const INIT_NOISE_SIGMA: f64 = 0.01;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("zero vector passed as `{0}`")]
    ZeroVector(&'static str),
    #[error("need at least {need} examples, have {have}")]
    InsufficientData { have: usize, need: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("malformed projection file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmbeddingVector {
    pub values: Vec<f64>,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Self {
        EmbeddingVector { values }
    }

    pub fn zeros(dim: usize) -> Self {
        EmbeddingVector {
            values: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> f64 {
        dot(&self.values, &self.values).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, a: f64) -> Self {
        EmbeddingVector {
            values: self.values.iter().map(|v| v * a).collect(),
        }
    }
}

impl From<Vec<f64>> for EmbeddingVector {
    fn from(values: Vec<f64>) -> Self {
        EmbeddingVector { values }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Signed feature hashing of lowercased character 3-grams into `dim`
/// buckets, L2-normalized. Texts shorter than three characters hash as a
/// single gram; empty text yields the zero vector.
pub fn hash_embed(text: &str, dim: usize) -> EmbeddingVector {
    assert!(dim >= MIN_DIM, "embedding dimension must be at least {MIN_DIM}");
    let chars: Vec<char> = text.to_lowercase().chars().collect();
    let mut values = vec![0.0; dim];
    let mut add = |gram: &[char]| {
        let s: String = gram.iter().collect();
        let mut h = FnvHasher::default();
        h.write(s.as_bytes());
        let h = h.finish();
        let bucket = (h % dim as u64) as usize;
        let sign = if h >> 63 == 1 { -1.0 } else { 1.0 };
        values[bucket] += sign;
    };
    if chars.len() < NGRAM {
        if !chars.is_empty() {
            add(&chars);
        }
    } else {
        chars.windows(NGRAM).for_each(&mut add);
    }
    let norm = dot(&values, &values).sqrt();
    if norm > 0.0 {
        values.iter_mut().for_each(|v| *v /= norm);
    }
    EmbeddingVector { values }
}

/// Cosine similarity, clamped to [-1, 1].
pub fn cosine(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, EmbeddingError> {
    if a.dim() != b.dim() {
        return Err(EmbeddingError::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 {
        return Err(EmbeddingError::ZeroVector("a"));
    }
    if nb == 0.0 {
        return Err(EmbeddingError::ZeroVector("b"));
    }
    Ok((dot(&a.values, &b.values) / (na * nb)).clamp(-1.0, 1.0))
}

/// The learned map from concatenated (text, logic) embeddings to query
/// space: a `dim x 2*dim` matrix stored row-major, plus an optional bias.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionMatrix {
    dim: usize,
    weights: Vec<f64>,
    bias: Option<Vec<f64>>,
}

impl ProjectionMatrix {
    pub fn new(dim: usize, weights: Vec<f64>, bias: Option<Vec<f64>>) -> Result<Self, EmbeddingError> {
        if weights.len() != dim * 2 * dim {
            return Err(EmbeddingError::DimensionMismatch {
                expected: dim * 2 * dim,
                found: weights.len(),
            });
        }
        if let Some(b) = &bias {
            if b.len() != dim {
                return Err(EmbeddingError::DimensionMismatch {
                    expected: dim,
                    found: b.len(),
                });
            }
        }
        let m = ProjectionMatrix { dim, weights, bias };
        if !m.is_finite() {
            return Err(EmbeddingError::InvalidConfig("non-finite projection entry".into()));
        }
        Ok(m)
    }

    fn from_blocks(dim: usize, left: f64, right: f64) -> Self {
        let mut weights = vec![0.0; dim * 2 * dim];
        for r in 0..dim {
            weights[r * 2 * dim + r] = left;
            weights[r * 2 * dim + dim + r] = right;
        }
        ProjectionMatrix {
            dim,
            weights,
            bias: None,
        }
    }

    /// `[I | I] / 2`: the average of the two embeddings.
    pub fn half_identity(dim: usize) -> Self {
        Self::from_blocks(dim, 0.5, 0.5)
    }

    /// `[I | 0]`
    pub fn text_only(dim: usize) -> Self {
        Self::from_blocks(dim, 1.0, 0.0)
    }

    /// `[0 | I]`
    pub fn logic_only(dim: usize) -> Self {
        Self::from_blocks(dim, 0.0, 1.0)
    }

    /// `[I | I] / 2` plus Gaussian noise (sigma 0.01) drawn from `seed`.
    pub fn seeded_init(dim: usize, seed: u64, with_bias: bool) -> Self {
        let mut m = Self::half_identity(dim);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, INIT_NOISE_SIGMA).expect("valid sigma");
        for w in &mut m.weights {
            *w += noise.sample(&mut rng);
        }
        if with_bias {
            m.bias = Some(vec![0.0; dim]);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> Option<&[f64]> {
        self.bias.as_deref()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.weights[row * 2 * self.dim + col]
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(|v| v.is_finite())
            && self.bias.iter().flatten().all(|v| v.is_finite())
    }

    /// `W z (+ b)` for a concatenated input of length `2 * dim`.
    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        let cols = 2 * self.dim;
        (0..self.dim)
            .map(|r| {
                let row = &self.weights[r * cols..(r + 1) * cols];
                dot(row, z) + self.bias.as_ref().map_or(0.0, |b| b[r])
            })
            .collect()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(13 + 8 * (self.weights.len() + self.dim));
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        out.push(u8::from(self.bias.is_some()));
        for v in self.weights.iter().chain(self.bias.iter().flatten()) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, EmbeddingError> {
        if bytes.len() < 13 || &bytes[..4] != MAGIC {
            return Err(EmbeddingError::Format("missing SYMW header".into()));
        }
        let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
        let version = u32_at(4);
        if version != FORMAT_VERSION {
            return Err(EmbeddingError::Format(format!("unsupported version {version}")));
        }
        let dim = u32_at(8) as usize;
        let has_bias = match bytes[12] {
            0 => false,
            1 => true,
            other => return Err(EmbeddingError::Format(format!("bad bias flag {other}"))),
        };
        let count = dim * 2 * dim + if has_bias { dim } else { 0 };
        let body = &bytes[13..];
        if body.len() != count * 8 {
            return Err(EmbeddingError::Format(format!(
                "expected {} payload bytes, found {}",
                count * 8,
                body.len()
            )));
        }
        let mut values: Vec<f64> = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        let bias = has_bias.then(|| values.split_off(dim * 2 * dim));
        Self::new(dim, values, bias)
    }

    pub fn save(&self, path: &Path) -> Result<(), EmbeddingError> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, EmbeddingError> {
        Self::from_bytes(&fs::read(path)?)
    }
}

fn concat(ex: &EmbeddingVector, ephi: &EmbeddingVector) -> Vec<f64> {
    let mut z = Vec::with_capacity(ex.dim() + ephi.dim());
    z.extend_from_slice(&ex.values);
    z.extend_from_slice(&ephi.values);
    z
}

/// `q = W [ex ; ephi] (+ b)`.
pub fn joint_query(
    ex: &EmbeddingVector,
    ephi: &EmbeddingVector,
    w: &ProjectionMatrix,
) -> Result<EmbeddingVector, EmbeddingError> {
    for v in [ex, ephi] {
        if v.dim() != w.dim() {
            return Err(EmbeddingError::DimensionMismatch {
                expected: w.dim(),
                found: v.dim(),
            });
        }
    }
    Ok(EmbeddingVector::new(w.apply(&concat(ex, ephi))))
}

/// Loss value and its gradient with respect to each query.
#[derive(Debug, Clone)]
pub struct MnrOutput {
    pub loss: f64,
    pub query_grads: Vec<Vec<f64>>,
}

/// Multiple-negatives ranking loss over a batch where query `p` is paired
/// with `positives[p]` and every other positive acts as a negative:
///
/// `L = -(1/B) sum_p log softmax_q(cos(q_p, e_q) / tau)[p]`
pub fn mnr_loss(
    queries: &[EmbeddingVector],
    positives: &[EmbeddingVector],
    tau: f64,
) -> Result<MnrOutput, EmbeddingError> {
    let b = queries.len();
    if positives.len() != b {
        return Err(EmbeddingError::DimensionMismatch {
            expected: b,
            found: positives.len(),
        });
    }
    if b < 2 {
        return Err(EmbeddingError::InsufficientData { have: b, need: 2 });
    }
    if tau <= 0.0 || !tau.is_finite() {
        return Err(EmbeddingError::InvalidConfig(format!("tau must be positive, got {tau}")));
    }
    let dim = queries[0].dim();
    let mut pos_unit = Vec::with_capacity(b);
    for e in positives {
        if e.dim() != dim {
            return Err(EmbeddingError::DimensionMismatch {
                expected: dim,
                found: e.dim(),
            });
        }
        let n = e.norm();
        if n == 0.0 {
            return Err(EmbeddingError::ZeroVector("positive"));
        }
        pos_unit.push(e.values.iter().map(|v| v / n).collect::<Vec<_>>());
    }

    let mut loss = 0.0;
    let mut query_grads = Vec::with_capacity(b);
    for (p, q) in queries.iter().enumerate() {
        if q.dim() != dim {
            return Err(EmbeddingError::DimensionMismatch {
                expected: dim,
                found: q.dim(),
            });
        }
        let qn = q.norm();
        if qn == 0.0 {
            return Err(EmbeddingError::ZeroVector("query"));
        }
        let cos: Vec<f64> = pos_unit.iter().map(|e| dot(&q.values, e) / qn).collect();
        let logits: Vec<f64> = cos.iter().map(|c| c / tau).collect();
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
        let z: f64 = exps.iter().sum();
        loss += z.ln() + max - logits[p];

        // d cos(q, e) / dq = e_hat / |q| - cos * q / |q|^2
        let mut g = vec![0.0; dim];
        for (j, e) in pos_unit.iter().enumerate() {
            let coeff = (exps[j] / z - if j == p { 1.0 } else { 0.0 }) / (tau * b as f64);
            if coeff == 0.0 {
                continue;
            }
            for d in 0..dim {
                g[d] += coeff * (e[d] / qn - cos[j] * q.values[d] / (qn * qn));
            }
        }
        query_grads.push(g);
    }
    Ok(MnrOutput {
        loss: loss / b as f64,
        query_grads,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub tau: f64,
    pub seed: u64,
    pub bias: bool,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            batch_size: 16,
            epochs: 100,
            learning_rate: 0.1,
            tau: 0.05,
            seed: 0,
            bias: false,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<(), EmbeddingError> {
        if self.batch_size < 2 {
            return Err(EmbeddingError::InvalidConfig("batch size must be at least 2".into()));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(EmbeddingError::InvalidConfig("tau must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(EmbeddingError::InvalidConfig("learning rate must be positive".into()));
        }
        Ok(())
    }
}

/// One training example: text embedding, logic embedding, and the
/// embedding of the artifact that should be retrieved for them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Triple {
    pub x: EmbeddingVector,
    pub phi: EmbeddingVector,
    pub y: EmbeddingVector,
}

#[derive(Debug, Clone)]
pub struct TrainingOutcome {
    pub projection: ProjectionMatrix,
    /// Mean batch loss before training (entry 0) and after each epoch.
    pub loss_trace: Vec<f64>,
}

// Chunks of `size`; a trailing singleton joins the previous chunk so every
// batch has an in-batch negative.
fn partition(order: &[usize], size: usize) -> Vec<Vec<usize>> {
    let mut batches: Vec<Vec<usize>> = order.chunks(size).map(|c| c.to_vec()).collect();
    if batches.len() > 1 && batches.last().map(Vec::len) == Some(1) {
        let tail = batches.pop().expect("non-empty");
        batches.last_mut().expect("non-empty").extend(tail);
    }
    batches
}

fn batch_loss(
    w: &ProjectionMatrix,
    triples: &[Triple],
    inputs: &[Vec<f64>],
    batch: &[usize],
    tau: f64,
) -> Result<(MnrOutput, Vec<usize>), EmbeddingError> {
    let queries: Vec<EmbeddingVector> = batch
        .iter()
        .map(|&i| EmbeddingVector::new(w.apply(&inputs[i])))
        .collect();
    let positives: Vec<EmbeddingVector> = batch.iter().map(|&i| triples[i].y.clone()).collect();
    Ok((mnr_loss(&queries, &positives, tau)?, batch.to_vec()))
}

/// Mean MNR loss over the fixed, unshuffled batch partition of `triples`.
pub fn dataset_loss(
    w: &ProjectionMatrix,
    triples: &[Triple],
    batch_size: usize,
    tau: f64,
) -> Result<f64, EmbeddingError> {
    let inputs: Vec<Vec<f64>> = triples.iter().map(|t| concat(&t.x, &t.phi)).collect();
    let order: Vec<usize> = (0..triples.len()).collect();
    let batches = partition(&order, batch_size);
    let mut total = 0.0;
    for batch in &batches {
        total += batch_loss(w, triples, &inputs, batch, tau)?.0.loss;
    }
    Ok(total / batches.len() as f64)
}

/// Trains only the projection over frozen embeddings with seeded shuffled
/// mini-batch gradient descent.
pub fn train_projection(
    triples: &[Triple],
    cfg: &TrainingConfig,
) -> Result<TrainingOutcome, EmbeddingError> {
    cfg.validate()?;
    if triples.len() < cfg.batch_size {
        return Err(EmbeddingError::InsufficientData {
            have: triples.len(),
            need: cfg.batch_size,
        });
    }
    let dim = triples[0].x.dim();
    for t in triples {
        for v in [&t.x, &t.phi, &t.y] {
            if v.dim() != dim {
                return Err(EmbeddingError::DimensionMismatch {
                    expected: dim,
                    found: v.dim(),
                });
            }
        }
    }
    let mut w = ProjectionMatrix::seeded_init(dim, cfg.seed, cfg.bias);
    let inputs: Vec<Vec<f64>> = triples.iter().map(|t| concat(&t.x, &t.phi)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let mut order: Vec<usize> = (0..triples.len()).collect();
    let mut loss_trace = vec![dataset_loss(&w, triples, cfg.batch_size, cfg.tau)?];
    let cols = 2 * dim;

    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for batch in partition(&order, cfg.batch_size) {
            let (out, members) = batch_loss(&w, triples, &inputs, &batch, cfg.tau)?;
            for (g, &i) in out.query_grads.iter().zip(&members) {
                let z = &inputs[i];
                for (r, gr) in g.iter().enumerate() {
                    if *gr == 0.0 {
                        continue;
                    }
                    let step = cfg.learning_rate * gr;
                    let row = &mut w.weights[r * cols..(r + 1) * cols];
                    for (wv, zv) in row.iter_mut().zip(z) {
                        *wv -= step * zv;
                    }
                }
                if let Some(bias) = &mut w.bias {
                    for (bv, gr) in bias.iter_mut().zip(g) {
                        *bv -= cfg.learning_rate * gr;
                    }
                }
            }
        }
        loss_trace.push(dataset_loss(&w, triples, cfg.batch_size, cfg.tau)?);
    }
    Ok(TrainingOutcome {
        projection: w,
        loss_trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_vec(rng: &mut ChaCha8Rng, dim: usize) -> EmbeddingVector {
        EmbeddingVector::new((0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
    }

    #[test]
    fn hash_embed_is_deterministic_and_normalized() {
        let a = hash_embed("ripple carry adder", 256);
        assert_eq!(a, hash_embed("ripple carry adder", 256));
        assert!((a.norm() - 1.0).abs() < 1e-9);
        assert!(hash_embed("", 64).is_zero());
        assert!((hash_embed("ab", 64).norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn related_texts_score_higher() {
        let fa = hash_embed("full adder", DEFAULT_DIM);
        let near = cosine(&fa, &hash_embed("full adder sum carry", DEFAULT_DIM)).unwrap();
        let far = cosine(&fa, &hash_embed("fifo queue", DEFAULT_DIM)).unwrap();
        assert!(near > far, "{near} <= {far}");
    }

    #[test]
    fn cosine_basics() {
        let v = EmbeddingVector::new(vec![0.3, -1.2, 2.0]);
        assert!((cosine(&v, &v).unwrap() - 1.0).abs() < 1e-12);
        assert!((cosine(&v, &v.scaled(2.0)).unwrap() - 1.0).abs() < 1e-12);
        let e0 = EmbeddingVector::new(vec![1.0, 0.0]);
        let e1 = EmbeddingVector::new(vec![0.0, 1.0]);
        assert!(cosine(&e0, &e1).unwrap().abs() < 1e-12);
        assert!(matches!(
            cosine(&EmbeddingVector::zeros(2), &e1),
            Err(EmbeddingError::ZeroVector("a"))
        ));
        assert!(matches!(
            cosine(&e1, &EmbeddingVector::zeros(2)),
            Err(EmbeddingError::ZeroVector("b"))
        ));
    }

    #[test]
    fn block_identity_projections() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ex = random_vec(&mut rng, 8);
        let ephi = random_vec(&mut rng, 8);
        assert_eq!(joint_query(&ex, &ephi, &ProjectionMatrix::text_only(8)).unwrap(), ex);
        assert_eq!(joint_query(&ex, &ephi, &ProjectionMatrix::logic_only(8)).unwrap(), ephi);
        assert!(matches!(
            joint_query(&ex, &EmbeddingVector::zeros(4), &ProjectionMatrix::text_only(8)),
            Err(EmbeddingError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn two_item_loss_matches_softmax_formula() {
        let e1 = EmbeddingVector::new(vec![1.0, 0.0]);
        let e2 = EmbeddingVector::new(vec![0.0, 1.0]);
        let out = mnr_loss(&[e1.clone(), e2.clone()], &[e1, e2], 1.0).unwrap();
        let e = std::f64::consts::E;
        assert!((out.loss - (-(e / (e + 1.0)).ln())).abs() < 1e-12);
    }

    #[test]
    fn equal_cosines_give_log_b() {
        let q = EmbeddingVector::new(vec![1.0, 0.0, 0.0]);
        let pos = vec![
            EmbeddingVector::new(vec![0.0, 1.0, 0.0]),
            EmbeddingVector::new(vec![0.0, 0.0, 1.0]),
            EmbeddingVector::new(vec![0.0, -1.0, 0.0]),
        ];
        let out = mnr_loss(&[q.clone(), q.clone(), q], &pos, 0.05).unwrap();
        assert!((out.loss - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn zero_epochs_returns_initial_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let triples: Vec<Triple> = (0..4)
            .map(|_| Triple {
                x: random_vec(&mut rng, 8),
                phi: random_vec(&mut rng, 8),
                y: random_vec(&mut rng, 8),
            })
            .collect();
        let cfg = TrainingConfig {
            batch_size: 2,
            epochs: 0,
            seed: 5,
            ..TrainingConfig::default()
        };
        let out = train_projection(&triples, &cfg).unwrap();
        assert_eq!(out.projection, ProjectionMatrix::seeded_init(8, 5, false));
        assert_eq!(out.loss_trace.len(), 1);
        assert!(matches!(
            train_projection(&triples[..1], &cfg),
            Err(EmbeddingError::InsufficientData { have: 1, need: 2 })
        ));
    }

    #[test]
    fn binary_round_trip() {
        let mut m = ProjectionMatrix::seeded_init(8, 1, true);
        m.bias.as_mut().unwrap()[3] = -0.25;
        let back = ProjectionMatrix::from_bytes(&m.to_bytes()).unwrap();
        assert_eq!(back, m);
        let bytes = ProjectionMatrix::half_identity(8).to_bytes();
        assert_eq!(&bytes[..4], b"SYMW");
        assert_eq!(bytes.len(), 13 + 8 * 8 * 16);
        assert!(ProjectionMatrix::from_bytes(&bytes[..20]).is_err());
    }

    #[test]
    fn partition_never_leaves_singletons() {
        let order: Vec<usize> = (0..9).collect();
        let sizes: Vec<usize> = partition(&order, 4).iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![4, 5]);
        let sizes: Vec<usize> = partition(&order, 3).iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![3, 3, 3]);
    }
}
