use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use symdirec::embeddings::*;

fn gaussian_unit(rng: &mut ChaCha8Rng, dim: usize) -> EmbeddingVector {
    let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    EmbeddingVector::new(v.into_iter().map(|x| x / n).collect())
}

fn separable_set(n: usize, dim: usize, seed: u64) -> Vec<Triple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let x = gaussian_unit(&mut rng, dim);
            let phi = gaussian_unit(&mut rng, dim);
            Triple { y: x.clone(), x, phi }
        })
        .collect()
}

// Loss recomputed from scratch with scalar arithmetic.
fn oracle_loss(qs: &[Vec<f64>], ps: &[Vec<f64>], tau: f64) -> f64 {
    let cos = |a: &[f64], b: &[f64]| {
        let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        d / (na * nb)
    };
    let b = qs.len() as f64;
    let mut total = 0.0;
    for (p, q) in qs.iter().enumerate() {
        let num = (cos(q, &ps[p]) / tau).exp();
        let den: f64 = ps.iter().map(|e| (cos(q, e) / tau).exp()).sum();
        total -= (num / den).ln();
    }
    total / b
}

fn top1_accuracy(w: &ProjectionMatrix, triples: &[Triple]) -> f64 {
    let mut hits = 0;
    for (i, t) in triples.iter().enumerate() {
        let q = joint_query(&t.x, &t.phi, w).unwrap();
        let best = triples
            .iter()
            .enumerate()
            .map(|(j, u)| (j, cosine(&q, &u.y).unwrap()))
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
            .unwrap()
            .0;
        hits += usize::from(best == i);
    }
    hits as f64 / triples.len() as f64
}

#[test]
fn analytic_gradient_matches_central_differences() {
    let h = 1e-5;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = rng.random_range(2..6);
        let dim = 6;
        let qs: Vec<Vec<f64>> = (0..b)
            .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let ps: Vec<Vec<f64>> = (0..b)
            .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let tau = 0.5;
        let out = mnr_loss(
            &qs.iter().cloned().map(EmbeddingVector::new).collect::<Vec<_>>(),
            &ps.iter().cloned().map(EmbeddingVector::new).collect::<Vec<_>>(),
            tau,
        )
        .unwrap();
        assert!((out.loss - oracle_loss(&qs, &ps, tau)).abs() < 1e-12);
        for p in 0..b {
            for d in 0..dim {
                let mut plus = qs.clone();
                plus[p][d] += h;
                let mut minus = qs.clone();
                minus[p][d] -= h;
                let fd = (oracle_loss(&plus, &ps, tau) - oracle_loss(&minus, &ps, tau)) / (2.0 * h);
                let an = out.query_grads[p][d];
                let rel = (an - fd).abs() / an.abs().max(fd.abs()).max(1e-8);
                assert!(rel < 1e-4, "seed {seed} p {p} d {d}: {an} vs {fd}");
            }
        }
    }
}

#[test]
fn training_separates_synthetic_set() {
    let triples = separable_set(64, 64, 11);
    let out = train_projection(&triples, &TrainingConfig::default()).unwrap();
    let first = out.loss_trace[0];
    let last = *out.loss_trace.last().unwrap();
    assert_eq!(out.loss_trace.len(), 101);
    assert!(last <= 0.5 * first, "loss {first} -> {last}");
    assert_eq!(top1_accuracy(&out.projection, &triples), 1.0);
}

#[test]
fn training_is_deterministic() {
    let triples = separable_set(8, 16, 2);
    let cfg = TrainingConfig {
        batch_size: 4,
        epochs: 5,
        seed: 42,
        ..TrainingConfig::default()
    };
    let a = train_projection(&triples, &cfg).unwrap();
    let b = train_projection(&triples, &cfg).unwrap();
    assert_eq!(a.projection, b.projection);
    assert_eq!(a.loss_trace, b.loss_trace);
}

#[test]
fn joint_query_matches_naive_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let dim = 12;
    let weights: Vec<f64> = (0..dim * 2 * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let w = ProjectionMatrix::new(dim, weights.clone(), None).unwrap();
    let ex: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let ephi: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let q = joint_query(&ex.clone().into(), &ephi.clone().into(), &w).unwrap();
    for r in 0..dim {
        let mut acc = 0.0;
        for c in 0..2 * dim {
            let z = if c < dim { ex[c] } else { ephi[c - dim] };
            acc += weights[r * 2 * dim + c] * z;
        }
        assert!((q.values[r] - acc).abs() < 1e-12);
    }
}

#[test]
fn save_and_load_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("wq.bin");
    let w = ProjectionMatrix::seeded_init(16, 3, false);
    w.save(&path).unwrap();
    assert_eq!(ProjectionMatrix::load(&path).unwrap(), w);
}

fn vec_strategy(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, dim)
}

proptest! {
    #[test]
    fn joint_query_is_linear(ex in vec_strategy(8), ephi in vec_strategy(8), a in -5.0f64..5.0, seed in 0u64..1000) {
        let w = ProjectionMatrix::seeded_init(8, seed, false);
        let base = joint_query(&ex.clone().into(), &ephi.clone().into(), &w).unwrap();
        let scaled = joint_query(
            &EmbeddingVector::new(ex).scaled(a),
            &EmbeddingVector::new(ephi).scaled(a),
            &w,
        ).unwrap();
        for (s, b) in scaled.values.iter().zip(&base.values) {
            prop_assert!((s - a * b).abs() <= 1e-10 * (1.0 + b.abs() * a.abs()));
        }
    }

    #[test]
    fn argmax_is_scale_invariant(q in vec_strategy(8), entries in prop::collection::vec(vec_strategy(8), 1..20), a in 0.01f64..100.0) {
        prop_assume!(q.iter().any(|v| *v != 0.0));
        prop_assume!(entries.iter().all(|e| e.iter().any(|v| *v != 0.0)));
        let q = EmbeddingVector::new(q);
        let best = |q: &EmbeddingVector| {
            entries.iter().enumerate()
                .map(|(i, e)| (i, cosine(q, &EmbeddingVector::new(e.clone())).unwrap()))
                .max_by(|x, y| x.1.total_cmp(&y.1).then(y.0.cmp(&x.0)))
                .unwrap().0
        };
        prop_assert_eq!(best(&q), best(&q.scaled(a)));
    }

    #[test]
    fn loss_is_non_negative(qs in prop::collection::vec(vec_strategy(4), 2..6), seed in 0u64..1000, tau in 0.01f64..2.0) {
        prop_assume!(qs.iter().all(|q| q.iter().any(|v| *v != 0.0)));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ps: Vec<EmbeddingVector> = qs.iter().map(|_| gaussian_unit(&mut rng, 4)).collect();
        let qs: Vec<EmbeddingVector> = qs.into_iter().map(EmbeddingVector::new).collect();
        let out = mnr_loss(&qs, &ps, tau).unwrap();
        prop_assert!(out.loss >= 0.0);
    }

    #[test]
    fn equal_cosines_iff_log_b(b in 2usize..8) {
        let q = EmbeddingVector::new(vec![1.0, 0.0, 0.0, 0.0]);
        let ps: Vec<EmbeddingVector> = (0..b).map(|_| EmbeddingVector::new(vec![0.6, 0.8, 0.0, 0.0])).collect();
        let out = mnr_loss(&vec![q; b], &ps, 0.05).unwrap();
        prop_assert!((out.loss - (b as f64).ln()).abs() < 1e-9);
    }

    #[test]
    fn hash_embed_unit_norm(text in "\\PC{1,60}") {
        let v = hash_embed(&text, DEFAULT_DIM);
        prop_assert!((v.norm() - 1.0).abs() < 1e-9);
    }
}
