use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use schemaforge_core::embed::{
    evaluate_mean_rank, export_emb, import_emb, margin_loss, margin_loss_gradient, score, train, EmbeddingModel,
    Hyperparams, LossInput, TripleIndex,
};

fn vecs(n: usize, dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    proptest::collection::vec(proptest::collection::vec(-1.0f64..1.0, dim), n)
}

const STEP: f64 = 1e-5;

fn finite_difference(slots: &[Vec<f64>; 6], margin: f64, slot: usize, k: usize) -> f64 {
    let eval = |delta: f64| {
        let mut s = slots.clone();
        s[slot][k] += delta;
        margin_loss(&LossInput {
            pos: [&s[0], &s[1], &s[2]],
            neg: [&s[3], &s[4], &s[5]],
            margin,
        })
    };
    (eval(STEP) - eval(-STEP)) / (2.0 * STEP)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gradient_matches_central_differences(
        dim in 1usize..6,
        margin in 0.5f64..3.0,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let slots: [Vec<f64>; 6] = std::array::from_fn(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect());
        let input = LossInput { pos: [&slots[0], &slots[1], &slots[2]], neg: [&slots[3], &slots[4], &slots[5]], margin };
        let loss = margin_loss(&input);
        // stay away from the hinge, where the loss is not differentiable
        prop_assume!(loss.abs() > 1e-3);
        let g = margin_loss_gradient(&input);
        for slot in 0..6 {
            let analytic = if slot < 3 { &g.pos[slot] } else { &g.neg[slot - 3] };
            prop_assert_eq!(analytic.len(), dim);
            for (k, &a) in analytic.iter().enumerate() {
                let numeric = finite_difference(&slots, margin, slot, k);
                let scale = a.abs().max(numeric.abs()).max(1e-6);
                prop_assert!((a - numeric).abs() / scale <= 1e-4,
                    "slot {} coord {}: analytic {} numeric {}", slot, k, a, numeric);
            }
        }
    }

    #[test]
    fn loss_is_non_negative(v in vecs(6, 3), margin in 0.01f64..5.0) {
        let x = LossInput { pos: [&v[0], &v[1], &v[2]], neg: [&v[3], &v[4], &v[5]], margin };
        prop_assert!(margin_loss(&x) >= 0.0);
    }

    #[test]
    fn score_matches_direct_norm(ents in vecs(3, 4), rel in vecs(1, 4)) {
        let m = model(ents.clone(), rel.clone());
        for h in 0..3 {
            for t in 0..3 {
                let direct: f64 = (0..4).map(|k| (ents[h][k] + rel[0][k] - ents[t][k]).powi(2)).sum::<f64>().sqrt();
                let s = score(&m, &m.entities[h], "r0", &m.entities[t]).unwrap();
                prop_assert!((s + direct).abs() <= 1e-12);
                prop_assert!(s <= 0.0);
            }
        }
    }

    #[test]
    fn score_survives_reindexing(ents in vecs(4, 3), rel in vecs(1, 3)) {
        let m = model(ents.clone(), rel.clone());
        // entity i of `m` is stored as e{3-i} at position 3-i in `r`
        let mut reversed = ents;
        reversed.reverse();
        let r = model(reversed, rel);
        let relabel = |i: usize| format!("e{}", 3 - i);
        for h in 0..4 {
            for t in 0..4 {
                prop_assert_eq!(
                    score(&m, &m.entities[h], "r0", &m.entities[t]).unwrap(),
                    score(&r, &relabel(h), "r0", &relabel(t)).unwrap()
                );
            }
        }
    }

    #[test]
    fn training_invariants(seed in any::<u64>(), dim in 1usize..6, n in 2usize..7) {
        let triples: Vec<(String, String, String)> = (0..n)
            .map(|i| (format!("e{i}"), "r".to_string(), format!("e{}", (i + 1) % n)))
            .collect();
        let index = TripleIndex::from_iri_triples(triples);
        let hp = Hyperparams { seed, dim, epochs: 5, ..Default::default() };
        let m = train(&index, &hp).unwrap();
        prop_assert_eq!(m.training_log.len(), 5);
        for v in m.entity_vectors.iter().chain(&m.relation_vectors) {
            prop_assert!(v.iter().all(|x| x.is_finite()));
        }
        for v in &m.entity_vectors {
            prop_assert!(v.iter().map(|x| x * x).sum::<f64>().sqrt() <= 1.0 + 1e-6);
        }
        let s = evaluate_mean_rank(&m, &index.triples);
        prop_assert!(s.mean_rank >= 1.0 && s.mean_rank <= index.entities.len() as f64);
        prop_assert!((0.0..=1.0).contains(&s.hits_at_3));
        let back = import_emb(&export_emb(&m)).unwrap();
        prop_assert_eq!(back.entity_vectors, m.entity_vectors);
    }
}

fn model(entities: Vec<Vec<f64>>, relations: Vec<Vec<f64>>) -> EmbeddingModel {
    EmbeddingModel {
        entities: (0..entities.len()).map(|i| format!("e{i}")).collect(),
        relations: (0..relations.len()).map(|i| format!("r{i}")).collect(),
        hyperparams: Hyperparams {
            dim: entities[0].len(),
            ..Default::default()
        },
        entity_vectors: entities,
        relation_vectors: relations,
        training_log: Vec::new(),
    }
}

#[test]
fn random_vectors_rank_near_the_middle() {
    let n = 40;
    let index = TripleIndex::from_iri_triples((0..n).map(|i| (format!("e{i:02}"), "r".to_string(), format!("e{:02}", (i * 7 + 3) % n))));
    let mut total = 0.0;
    let seeds = 200;
    for seed in 0..seeds {
        let m = EmbeddingModel::initialise(&index, &Hyperparams { seed, dim: 16, ..Default::default() }).unwrap();
        total += evaluate_mean_rank(&m, &index.triples).mean_rank;
    }
    let mean = total / seeds as f64;
    let expected = (n as f64 + 1.0) / 2.0;
    assert!((mean - expected).abs() <= 0.15 * expected, "mean rank {mean}, expected about {expected}");
}
