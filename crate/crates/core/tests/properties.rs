mod common;

use hiersvm::data::{stratified_split, synth_generate, SynthSpec};
use hiersvm::moc::{self, CoverageMatrix};
use hiersvm::svm::train_binary;
use hiersvm::tree::{self, ActivityClass};
use hiersvm::{FeatureVector, TrainConfig};
use proptest::prelude::*;

fn weights(max_n: usize) -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(1u64..60, 1..=max_n)
}

fn kraft(depths: &[usize]) -> f64 {
    depths.iter().map(|&d| 0.5f64.powi(d as i32)).sum()
}

fn percents(w: &[u64]) -> Vec<f64> {
    w.iter().map(|&x| x as f64).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn huffman_tree_is_full_and_optimal(w in weights(8)) {
        let t = tree::build_unconstrained(&ActivityClass::from_weights(&percents(&w)).unwrap()).unwrap();
        let depths = t.leaf_depths();
        prop_assert_eq!(kraft(&depths), 1.0);
        let total: u64 = w.iter().sum();
        let cost: u64 = w.iter().zip(&depths).map(|(&x, &d)| x * d as u64).sum();
        prop_assert_eq!(Some(cost), common::min_tree_cost(&w, None));
        let pct = tree::expected_instructions(&t);
        prop_assert!((pct - cost as f64 * 100.0 / total as f64).abs() < 1e-9);
    }

    #[test]
    fn depth_limit_respected_and_optimal(w in weights(7), extra in 0usize..4) {
        let n = w.len();
        let min_l = (n as f64).log2().ceil() as usize;
        let limit = min_l + extra;
        let depths = tree::package_merge_depths(&percents(&w), limit).unwrap();
        prop_assert!(depths.iter().all(|&d| d <= limit));
        prop_assert_eq!(kraft(&depths), 1.0);
        let cost: u64 = w.iter().zip(&depths).map(|(&x, &d)| x * d as u64).sum();
        prop_assert_eq!(Some(cost), common::min_tree_cost(&w, Some(limit)));
    }

    #[test]
    fn topology_round_trips(w in weights(8)) {
        let classes = ActivityClass::from_weights(&percents(&w)).unwrap();
        let t = tree::build_unconstrained(&classes).unwrap();
        let back = tree::ClassifierTree::from_topology(classes, &t.topology()).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn decision_value_is_affine(
        seed in 0u64..1000,
        a in -3.0f64..3.0,
        x in prop::collection::vec(-5.0f64..5.0, 3),
        z in prop::collection::vec(-5.0f64..5.0, 3),
    ) {
        let ds = synth_generate(&SynthSpec { samples_per_class: 15, ..SynthSpec::new(2, 3, seed) }).unwrap();
        let y = common::binary_labels(&ds, 0);
        let m = train_binary(&ds.features, &y, &TrainConfig::default()).unwrap();
        let mix: Vec<f64> = x.iter().zip(&z).map(|(p, q)| a * p + (1.0 - a) * q).collect();
        let f = |v: &[f64]| m.decision_value(v).unwrap();
        let want = a * f(&x) + (1.0 - a) * f(&z);
        prop_assert!((f(&mix) - want).abs() < 1e-8 * (1.0 + want.abs()));
    }

    #[test]
    fn coverage_matches_distances(
        pts in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 2), 2..14),
        eps in 0.0f64..2.0,
    ) {
        let t = tiny_tree(&pts);
        let isvs = moc::collect_initial_svs(&t).unwrap();
        let pool = moc::candidate_pool(&[], &isvs);
        let cov = moc::enumerate_secondary(&isvs, &pool, eps).unwrap();
        for c in &pool {
            for r in &isvs {
                let within = c.vector.distance(&r.vector) <= eps;
                prop_assert_eq!(cov.covers(c.candidate_index, r.isv_index), within);
            }
        }
    }

    #[test]
    fn covers_are_feasible_and_bounded(
        sets in prop::collection::vec(prop::collection::btree_set(0usize..10, 0..6), 1..20),
    ) {
        let n = 10;
        let mut sets: Vec<Vec<usize>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        sets.push((0..n).filter(|j| !sets.iter().any(|s| s.contains(j))).collect());
        let cov = CoverageMatrix::from_sets(n, sets.clone(), 1.0).unwrap();
        let greedy = moc::greedy_moc(&cov).unwrap();
        let exact = moc::exact_moc(&cov, 20).unwrap();
        prop_assert!(greedy.is_feasible(&cov));
        prop_assert!(exact.is_feasible(&cov));
        let best = common::min_cover_size(n, &sets).unwrap();
        prop_assert_eq!(exact.chosen.len(), best);
        prop_assert!(greedy.chosen.len() as f64 <= best as f64 * common::harmonic(cov.max_cover_size()) + 1e-9);
    }

    #[test]
    fn savings_accounting(
        pts in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 2), 2..14),
        eps in 0.0f64..2.0,
    ) {
        let t = tiny_tree(&pts);
        let isvs = moc::collect_initial_svs(&t).unwrap();
        let pool = moc::candidate_pool(&[], &isvs);
        let cov = moc::enumerate_secondary(&isvs, &pool, eps).unwrap();
        let sel = moc::greedy_moc(&cov).unwrap();
        let r = moc::savings(&t, &sel).unwrap();
        prop_assert_eq!(r.initial_stored, isvs.len());
        prop_assert_eq!(r.final_stored, sel.chosen.len());
        prop_assert!(r.final_stored <= r.initial_stored);
        let want = 100.0 * (1.0 - r.final_stored as f64 / r.initial_stored as f64);
        prop_assert!((r.savings_pct - want).abs() < 1e-9);
        prop_assert!(r.overlap_count <= r.final_stored);
    }
}

/// Three-class tree trained on points labeled by quadrant.
fn tiny_tree(pts: &[Vec<f64>]) -> tree::ClassifierTree {
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (k, p) in pts.iter().enumerate() {
        features.push(FeatureVector::new(p.clone()).unwrap());
        labels.push(k % 3);
    }
    let ds = hiersvm::data::LabeledDataset::new(features, labels).unwrap();
    let classes = ActivityClass::with_ids(&ds.class_ids(), &vec![1.0; ds.class_ids().len()]).unwrap();
    let shape = tree::build_unconstrained(&classes).unwrap();
    tree::attach_classifiers(&shape, &ds, &TrainConfig::default()).unwrap()
}

#[test]
fn generation_and_training_are_deterministic() {
    let spec = SynthSpec::new(4, 5, 11);
    let a = synth_generate(&spec).unwrap();
    let b = synth_generate(&spec).unwrap();
    assert_eq!(a.to_csv_string(), b.to_csv_string());
    let (sa, sb) = (stratified_split(&a, 3).unwrap(), stratified_split(&b, 3).unwrap());
    assert_eq!(sa.train.to_csv_string(), sb.train.to_csv_string());
    let classes = ActivityClass::from_weights(&[40.0, 30.0, 20.0, 10.0]).unwrap();
    let shape = tree::build_unconstrained(&classes).unwrap();
    let cfg = TrainConfig::default();
    let ta = tree::attach_classifiers(&shape, &sa.train, &cfg).unwrap();
    let tb = tree::attach_classifiers(&shape, &sb.train, &cfg).unwrap();
    assert_eq!(ta, tb);
}

#[test]
fn two_class_tree_root_separates_blobs() {
    let spec = SynthSpec {
        means: Some(vec![vec![3.0, 0.0], vec![-3.0, 0.0]]),
        ..SynthSpec::new(2, 2, 7)
    };
    let ds = synth_generate(&spec).unwrap();
    let classes = ActivityClass::from_weights(&[50.0, 50.0]).unwrap();
    let shape = tree::build_unconstrained(&classes).unwrap();
    let t = tree::attach_classifiers(&shape, &ds, &TrainConfig::default()).unwrap();
    assert_eq!(tree::tree_stats(&t).node_train_accuracy, vec![1.0]);
}
