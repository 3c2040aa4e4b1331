use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symdirec::embeddings::{EmbeddingVector, ProjectionMatrix};
use symdirec::knowledge_base::*;
use symdirec::providers::{HashEmbedder, TextEmbedder};
use symdirec::symlogic::Phi;

fn entry(id: &str, values: Vec<f64>) -> KbEntry {
    KbEntry {
        id: id.into(),
        y: format!("artifact {id}"),
        language: EntryLanguage::Nl,
        d: String::new(),
        phi: Phi::Sketch(String::new()),
        e_y: EmbeddingVector::new(values),
    }
}

// Scores every entry with its own dot-product arithmetic and sorts.
fn oracle(entries: &[KbEntry], q: &[f64], k: usize) -> Vec<String> {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut scored: Vec<(f64, String)> = entries
        .iter()
        .map(|e| {
            let d: f64 = e.e_y.values.iter().zip(q).map(|(a, b)| a * b).sum();
            ((d / (norm(q) * norm(&e.e_y.values))).clamp(-1.0, 1.0), e.id.clone())
        })
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    scored.into_iter().take(k).map(|s| s.1).collect()
}

fn random_index(rng: &mut ChaCha8Rng, s: usize, dim: usize) -> KbIndex {
    let entries = (0..s)
        .map(|i| {
            // coarse values make exact ties likely, exercising the id tie-break
            let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-2i32..=2) as f64).collect();
            let v = if v.iter().all(|x| *x == 0.0) {
                let mut v = v;
                v[0] = 1.0;
                v
            } else {
                v
            };
            entry(&format!("e{i:04}"), v)
        })
        .collect();
    KbIndex::from_entries(entries, dim, "test").unwrap()
}

#[test]
fn exact_match_ranks_first() {
    let mut entries = Vec::new();
    for i in 0..4 {
        let mut v = vec![0.0; 4];
        v[i] = 1.0;
        entries.push(entry(&format!("basis{i}"), v));
    }
    let ix = KbIndex::from_entries(entries, 4, "test").unwrap();
    let res = ix.top_k(&EmbeddingVector::new(vec![0.0, 0.0, 1.0, 0.0]), 5).unwrap();
    assert_eq!(res.len(), 4);
    assert_eq!(res[0].id, "basis2");
    assert!((res[0].score - 1.0).abs() < 1e-9);
}

#[test]
fn top_k_matches_full_scan_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100 {
        let s = rng.random_range(0..=1000);
        let dim = rng.random_range(2..10);
        let ix = random_index(&mut rng, s, dim);
        let mut q: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        q[0] += 1e-3;
        let k = rng.random_range(1..20);
        let got: Vec<String> = ix
            .top_k(&EmbeddingVector::new(q.clone()), k)
            .unwrap()
            .into_iter()
            .map(|r| r.id)
            .collect();
        assert_eq!(got, oracle(ix.entries(), &q, k));
    }
}

#[test]
fn round_trip_preserves_embeddings_bitwise() {
    let emb = HashEmbedder::new(64).unwrap();
    let drafts = vec![
        EntryDraft {
            id: "ha".into(),
            y: "module half_adder(input a, b, output sum, carry); assign sum = a ^ b; assign carry = a & b; endmodule".into(),
            language: EntryLanguage::Verilog,
            d: "half adder".into(),
            phi: Phi::from_text("sum = a ^ b; carry = a & b"),
        },
        EntryDraft {
            id: "mux".into(),
            y: "selects one of two inputs".into(),
            language: EntryLanguage::Nl,
            d: "2:1 multiplexer".into(),
            phi: Phi::from_text("y = s ? b : a"),
        },
        EntryDraft {
            id: "cnt".into(),
            y: "counter".into(),
            language: EntryLanguage::Nl,
            d: "counts clock edges".into(),
            phi: Phi::Sketch("state increments every cycle".into()),
        },
    ];
    let ix = build_index(drafts, &emb).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("kb.jsonl");
    save_kb(&ix, &path).unwrap();
    let back = load_kb(&path).unwrap();
    assert_eq!(back, ix);
    for (a, b) in back.entries().iter().zip(ix.entries()) {
        let bits = |v: &EmbeddingVector| v.values.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a.e_y), bits(&b.e_y));
    }
    let header = std::fs::read_to_string(&path).unwrap();
    let header: serde_json::Value = serde_json::from_str(header.lines().next().unwrap()).unwrap();
    assert_eq!(header["format"], "symdirec-kb");
    assert_eq!(header["version"], 1);
    assert_eq!(header["dim"], 64);
}

#[test]
fn mismatched_embedder_is_rejected() {
    let a = HashEmbedder::new(64).unwrap();
    let b = HashEmbedder::new(32).unwrap();
    let ix = build_index(
        vec![EntryDraft {
            id: "x".into(),
            y: "xor gate".into(),
            language: EntryLanguage::Nl,
            d: String::new(),
            phi: Phi::from_text("y = a ^ b"),
        }],
        &a,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("kb.jsonl");
    save_kb(&ix, &path).unwrap();
    assert!(load_kb_for(&path, &a).is_ok());
    assert!(matches!(
        load_kb_for(&path, &b),
        Err(KbError::FingerprintMismatch { .. })
    ));
}

#[test]
fn entries_embed_artifact_and_description() {
    let emb = HashEmbedder::new(64).unwrap();
    let ix = build_index(
        vec![EntryDraft {
            id: "x".into(),
            y: "assign y = a ^ b;".into(),
            language: EntryLanguage::Verilog,
            d: "xor gate".into(),
            phi: Phi::from_text("y = a ^ b"),
        }],
        &emb,
    )
    .unwrap();
    assert_eq!(
        ix.entries()[0].e_y,
        emb.embed("assign y = a ^ b;\nxor gate").unwrap()
    );
}

#[test]
fn empty_index_returns_nothing() {
    let ix = KbIndex::empty(8, "test");
    let q = EmbeddingVector::new(vec![1.0; 8]);
    assert!(ix.top_k(&q, 5).unwrap().is_empty());
}

#[test]
fn query_built_from_entry_text_retrieves_it() {
    let emb = HashEmbedder::new(256).unwrap();
    let drafts: Vec<EntryDraft> = (0..50)
        .map(|i| EntryDraft {
            id: format!("s{i:02}"),
            y: format!("block {i} computes out{i} = in{} xor in{}", i * 7 % 13, i * 3 % 11),
            language: EntryLanguage::Nl,
            d: format!("variant {}", i * 31 % 50),
            phi: Phi::Sketch(String::new()),
        })
        .collect();
    let ix = build_index(drafts.clone(), &emb).unwrap();
    let w = ProjectionMatrix::half_identity(256);
    for d in &drafts {
        let ex = emb.embed("combinational block").unwrap();
        let ephi = emb.embed(&entry_text(&d.y, &d.d)).unwrap();
        let q = symdirec::embeddings::joint_query(&ex, &ephi, &w).unwrap();
        assert_eq!(ix.top_k(&q, 1).unwrap()[0].id, d.id);
    }
}

proptest! {
    #[test]
    fn top_k_is_monotone_in_k(seed in 0u64..10_000, k in 1usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ix = random_index(&mut rng, 40, 4);
        let q = EmbeddingVector::new(vec![1.0, -0.5, 0.25, 0.1]);
        let small: Vec<String> = ix.top_k(&q, k).unwrap().into_iter().map(|r| r.id).collect();
        let large: Vec<String> = ix.top_k(&q, k + 1).unwrap().into_iter().map(|r| r.id).collect();
        prop_assert!(small.iter().all(|id| large.contains(id)));
        prop_assert_eq!(&large[..small.len()], &small[..]);
    }

    #[test]
    fn top_k_is_deterministic(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ix = random_index(&mut rng, 60, 3);
        let q = EmbeddingVector::new(vec![0.3, 0.3, -1.0]);
        prop_assert_eq!(ix.top_k(&q, 7).unwrap(), ix.top_k(&q, 7).unwrap());
    }
}
