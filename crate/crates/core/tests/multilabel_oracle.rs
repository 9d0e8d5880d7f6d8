//! Multi-label and boosting models checked against brute-force recomputation.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sentev::boost::{reweight, BoostModel, BoostRound};
use sentev::corpus::{relax_to_single_label, Corpus, RelaxPolicy};
use sentev::featurize::{extract_features, fit_vectorizer, vectorize, FeatureGroup, LexiconSet, PruneMode};
use sentev::linear::{predict_binary, train_binary, uniform_weights, LinearHyper, LinearModel};
use sentev::multiclass::{train_ovr, OvRModel};
use sentev::multilabel::{train_br, train_cc, train_ecc, ChainModel, ChainOrderPolicy, EccParams};
use sentev::sparse::SparseVector;
use sentev::syngen::{generate_corpus, CorrelationRule, SynSpec};

fn vectorized(corpus: &Corpus, lexicons: &LexiconSet) -> Vec<SparseVector> {
    let groups = FeatureGroup::all();
    let raw: Vec<_> = corpus.sentences().iter().map(|s| extract_features(s, lexicons, &groups)).collect();
    let classes: Vec<&str> = corpus.sentences().iter().map(|s| s.class_name()).collect();
    let vectorizer = fit_vectorizer(&raw, &classes, PruneMode::ZeroVariance).unwrap();
    raw.iter().map(|r| vectorize(r, &vectorizer)).collect()
}

fn random_inputs(dimension: usize, count: usize, seed: u64) -> Vec<SparseVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let dense: Vec<f64> = (0..dimension)
                .map(|_| if rng.gen_bool(0.3) { rng.gen_range(1..=3) as f64 } else { 0.0 })
                .collect();
            SparseVector::from_dense(&dense)
        })
        .collect()
}

struct Data {
    xs: Vec<SparseVector>,
    sets: Vec<Vec<String>>,
    vocab: Vec<String>,
}

fn three_labels(n: usize, noise: f64, seed: u64) -> Data {
    let mut spec = SynSpec::with_labels(n, &[("A", 0.3), ("B", 0.2), ("C", 0.2)], noise);
    spec.correlation_rules.push(CorrelationRule {
        if_label: "A".into(),
        then_label: "B".into(),
        probability: 0.7,
    });
    let corpus = generate_corpus(&spec, seed).unwrap();
    Data {
        xs: vectorized(&corpus, &spec.lexicons()),
        sets: corpus.sentences().iter().map(|s| s.labels.clone()).collect(),
        vocab: corpus.label_vocabulary().to_vec(),
    }
}

#[test]
fn br_equals_separately_trained_binaries() {
    let data = three_labels(150, 0.1, 1);
    let hyper = LinearHyper::default().with_seed(5);
    let br = train_br(&data.xs, &data.sets, &data.vocab, &hyper).unwrap();
    for label in &data.vocab {
        let ys: Vec<i8> = data.sets.iter().map(|s| if s.contains(label) { 1 } else { -1 }).collect();
        let alone = train_binary(&data.xs, &ys, &uniform_weights(data.xs.len()), &hyper).unwrap();
        assert_eq!(br.model_for(label).unwrap(), &alone, "{label}");
    }
}

#[test]
fn br_prediction_matches_per_label_binaries() {
    let data = three_labels(150, 0.2, 2);
    let br = train_br(&data.xs, &data.sets, &data.vocab, &LinearHyper::default()).unwrap();
    for x in random_inputs(data.xs[0].dimension(), 100, 3) {
        let want: Vec<String> = data
            .vocab
            .iter()
            .filter(|l| predict_binary(br.model_for(l).unwrap(), &x).unwrap() == 1)
            .cloned()
            .collect();
        assert_eq!(br.predict(&x).unwrap(), want);
    }
}

#[test]
fn chain_link_copies_an_identical_label() {
    // B = A on every instance; A is decided by feature 0, feature 1 is noise
    let xs: Vec<SparseVector> = (0..40)
        .map(|i| SparseVector::from_dense(&[if i % 2 == 0 { 1.0 } else { 0.0 }, (i % 5) as f64]))
        .collect();
    let sets: Vec<Vec<String>> = (0..40)
        .map(|i| if i % 2 == 0 { vec!["A".to_string(), "B".to_string()] } else { vec![] })
        .collect();
    let vocab = vec!["A".to_string(), "B".to_string()];
    let cc = train_cc(&xs, &sets, &vocab, &vocab, &LinearHyper::default()).unwrap();
    let link_b = &cc.links()[1];
    assert_eq!(link_b.dimension(), 3);
    let slot = link_b.weights()[2];
    assert!(slot > 0.0, "augmentation weight {slot}");
    for (x, set) in xs.iter().zip(&sets) {
        assert_eq!(&cc.predict(x).unwrap(), set);
    }
}

#[test]
fn chain_propagates_errors() {
    let h = LinearHyper::default();
    // A fires when feature 0 exceeds 0.5; B copies A
    let link_a = LinearModel::from_parts(vec![1.0], -0.5, h).unwrap();
    let link_b = LinearModel::from_parts(vec![0.0, 1.0], -0.5, h).unwrap();
    let vocab = vec!["A".to_string(), "B".to_string()];
    let cc = ChainModel::from_parts(vocab.clone(), vocab.clone(), vec![link_a, link_b]).unwrap();
    let clean = SparseVector::from_dense(&[1.0]);
    assert_eq!(cc.predict(&clean).unwrap(), vocab);
    // perturbing the input flips A to a wrong negative; B follows
    let perturbed = SparseVector::from_dense(&[0.2]);
    assert!(cc.predict(&perturbed).unwrap().is_empty());
    assert_eq!(cc.predict(&perturbed).unwrap(), cc.predict(&perturbed).unwrap());
}

#[test]
fn ecc_is_deterministic_and_explores_orders() {
    let data = three_labels(120, 0.1, 4);
    let params = EccParams {
        m: 10,
        seed: 21,
        ..EccParams::default()
    };
    let hyper = LinearHyper { epochs: 10, ..LinearHyper::default() };
    let a = train_ecc(&data.xs, &data.sets, &data.vocab, &params, &hyper).unwrap();
    let b = train_ecc(&data.xs, &data.sets, &data.vocab, &params, &hyper).unwrap();
    assert_eq!(a, b);
    let orders: BTreeSet<Vec<String>> = a.chains().iter().map(|c| c.order().to_vec()).collect();
    assert!(orders.len() >= 2, "{orders:?}");
}

#[test]
fn ecc_single_canonical_chain_equals_cc() {
    let data = three_labels(80, 0.1, 5);
    let hyper = LinearHyper { epochs: 10, ..LinearHyper::default() };
    let params = EccParams {
        m: 1,
        sample_fraction: 1.0,
        order_policy: ChainOrderPolicy::Canonical,
        ..EccParams::default()
    };
    let ecc = train_ecc(&data.xs, &data.sets, &data.vocab, &params, &hyper).unwrap();
    let cc = train_cc(&data.xs, &data.sets, &data.vocab, &data.vocab, &hyper).unwrap();
    assert_eq!(&ecc.chains()[0], &cc);
    for x in random_inputs(data.xs[0].dimension(), 100, 6) {
        assert_eq!(ecc.predict(&x).unwrap(), cc.predict(&x).unwrap());
    }
}

#[test]
fn ecc_votes_match_a_recount() {
    let data = three_labels(120, 0.3, 7);
    let hyper = LinearHyper { epochs: 10, ..LinearHyper::default() };
    let ecc = train_ecc(&data.xs, &data.sets, &data.vocab, &EccParams::default(), &hyper).unwrap();
    let m = ecc.chains().len();
    for x in random_inputs(data.xs[0].dimension(), 100, 8) {
        let outputs: Vec<Vec<String>> = ecc.chains().iter().map(|c| c.predict(&x).unwrap()).collect();
        let tally: Vec<usize> = data
            .vocab
            .iter()
            .map(|l| outputs.iter().filter(|o| o.contains(l)).count())
            .collect();
        assert_eq!(ecc.vote_counts(&x).unwrap(), tally);
        let want: Vec<String> = data
            .vocab
            .iter()
            .zip(&tally)
            .filter(|(_, &t)| t as f64 / m as f64 >= 0.5)
            .map(|(l, _)| l.clone())
            .collect();
        assert_eq!(ecc.predict(&x).unwrap(), want);

        // raising the threshold never adds labels
        let mut previous = ecc.with_vote_threshold(0.1).unwrap().predict(&x).unwrap();
        for t in [0.3, 0.5, 0.7, 1.0] {
            let now = ecc.with_vote_threshold(t).unwrap().predict(&x).unwrap();
            assert!(now.iter().all(|l| previous.contains(l)));
            assert!(now.iter().all(|l| data.vocab.contains(l)));
            previous = now;
        }
    }
}

#[test]
fn ovr_fits_separable_training_data() {
    let spec = SynSpec::with_labels(200, &[("A", 0.2), ("B", 0.2), ("C", 0.2)], 0.0);
    let corpus = relax_to_single_label(&generate_corpus(&spec, 9).unwrap(), RelaxPolicy::DropMultievent);
    let xs = vectorized(&corpus, &spec.lexicons());
    let classes: Vec<&str> = corpus.sentences().iter().map(|s| s.class_name()).collect();
    let model = train_ovr(&xs, &classes, corpus.label_vocabulary(), &LinearHyper::default()).unwrap();
    for (x, c) in xs.iter().zip(&classes) {
        assert_eq!(model.predict(x).unwrap(), *c);
    }
}

/// A single-feature OvR model over classes [N, A, B] that always predicts
/// `winner`.
fn voter(winner: usize) -> OvRModel {
    let h = LinearHyper::default();
    let models = (0..3)
        .map(|i| LinearModel::from_parts(vec![0.0], if i == winner { 1.0 } else { 0.0 }, h).unwrap())
        .collect();
    OvRModel::from_parts(vec!["N".into(), "A".into(), "B".into()], models).unwrap()
}

#[test]
fn boost_vote_matches_a_brute_force_tally() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let x = SparseVector::from_dense(&[1.0]);
    for _ in 0..100 {
        let rounds: Vec<BoostRound> = (0..3)
            .map(|_| BoostRound {
                beta: rng.gen_range(0.01..0.99),
                base: voter(rng.gen_range(0..3)),
            })
            .collect();
        let mut tally = [0.0f64; 3];
        for r in &rounds {
            let winner = r.base.predict_index(&x).unwrap();
            tally[winner] += (1.0 / r.beta).ln();
        }
        let mut best = 0;
        for c in 1..3 {
            if tally[c] > tally[best] {
                best = c;
            }
        }
        let model = BoostModel::from_rounds(rounds, 3).unwrap();
        assert_eq!(model.predict(&x).unwrap(), ["N", "A", "B"][best]);
        assert!(model.rounds().iter().all(|r| r.vote_weight() > 0.0));
    }
}

#[test]
fn reweighting_keeps_a_distribution() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..100 {
        let n = rng.gen_range(2..50);
        let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let d: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let correct: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.7)).collect();
        let next = reweight(&d, &correct, rng.gen_range(0.01..0.99));
        assert!((next.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
