//! Independent reference implementations used as test oracles.

#![allow(dead_code)]

use std::collections::HashMap;

use hiersvm::data::LabeledDataset;
use hiersvm::svm::BinaryNodeModel;
use hiersvm::FeatureVector;
use rand::Rng;

/// Minimum of `sum w_i * depth_i` over every full binary tree with the given
/// leaves and (optionally) every leaf at depth `<= limit`. Searches all ways
/// to split each leaf set in two, so it covers every tree shape.
pub fn min_tree_cost(weights: &[u64], limit: Option<usize>) -> Option<u64> {
    assert!(!weights.is_empty() && weights.len() <= 16);
    let full = (1u32 << weights.len()) - 1;
    let limit = limit.unwrap_or(weights.len());
    let mut memo = HashMap::new();
    best(full, limit, weights, &mut memo)
}

fn best(set: u32, budget: usize, w: &[u64], memo: &mut HashMap<(u32, usize), Option<u64>>) -> Option<u64> {
    if set.count_ones() == 1 {
        return Some(0);
    }
    if budget == 0 {
        return None;
    }
    if let Some(&v) = memo.get(&(set, budget)) {
        return v;
    }
    let total: u64 = (0..w.len()).filter(|i| set >> i & 1 == 1).map(|i| w[i]).sum();
    let low = set & set.wrapping_neg();
    let mut out: Option<u64> = None;
    // Left side always holds the lowest leaf so each split is seen once.
    let rest = set & !low;
    let mut sub = rest;
    loop {
        let left = sub | low;
        let right = set & !left;
        if right != 0 {
            if let (Some(a), Some(b)) = (best(left, budget - 1, w, memo), best(right, budget - 1, w, memo)) {
                let c = a + b + total;
                out = Some(out.map_or(c, |o| o.min(c)));
            }
        }
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & rest;
    }
    memo.insert((set, budget), out);
    out
}

/// Random integer percents, each at least 1, summing to 100.
pub fn random_percents(rng: &mut impl Rng, n: usize) -> Vec<u64> {
    loop {
        let mut cuts: Vec<u64> = (0..n - 1).map(|_| rng.gen_range(1..100)).collect();
        cuts.sort_unstable();
        cuts.dedup();
        if cuts.len() != n - 1 {
            continue;
        }
        let mut prev = 0;
        let mut out = Vec::with_capacity(n);
        for c in cuts.into_iter().chain([100]) {
            out.push(c - prev);
            prev = c;
        }
        return out;
    }
}

/// Smallest number of sets whose union is all `n_elements`, by dynamic
/// programming over element subsets. `None` when some element is uncovered.
pub fn min_cover_size(n_elements: usize, sets: &[Vec<usize>]) -> Option<usize> {
    assert!(n_elements <= 20);
    let masks: Vec<u32> = sets
        .iter()
        .map(|s| s.iter().fold(0u32, |m, &e| m | 1 << e))
        .collect();
    let full = (1u32 << n_elements) - 1;
    let mut dp = vec![usize::MAX; 1 << n_elements];
    dp[0] = 0;
    for mask in 1..=full {
        let low = mask.trailing_zeros();
        for &m in &masks {
            if m >> low & 1 == 1 {
                let prev = dp[(mask & !m) as usize];
                if prev != usize::MAX {
                    dp[mask as usize] = dp[mask as usize].min(prev + 1);
                }
            }
        }
    }
    (dp[full as usize] != usize::MAX).then_some(dp[full as usize])
}

pub fn harmonic(k: usize) -> f64 {
    (1..=k).map(|i| 1.0 / i as f64).sum()
}

/// Largest KKT violation of a trained model over its training set.
/// Dual variables are recovered from the stored `alpha * y` coefficients.
pub fn kkt_residual(model: &BinaryNodeModel, samples: &[FeatureVector], labels: &[i8], c: f64) -> f64 {
    let mut alpha = vec![0.0; samples.len()];
    for e in &model.entries {
        alpha[e.source_id.expect("trained entries carry source ids")] = e.coefficient.abs();
    }
    let w: Vec<f64> = (0..samples[0].dim())
        .map(|k| model.entries.iter().map(|e| e.coefficient * e.vector[k]).sum())
        .collect();
    let mut worst = 0.0f64;
    for ((x, &y), &a) in samples.iter().zip(labels).zip(&alpha) {
        let f: f64 = x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + model.bias;
        let m = y as f64 * f;
        let r = if a <= 0.0 {
            (1.0 - m).max(0.0)
        } else if a >= c * (1.0 - 1e-12) {
            (m - 1.0).max(0.0)
        } else {
            (1.0 - m).abs()
        };
        worst = worst.max(r);
    }
    worst
}

/// Whether the two classes are strictly linearly separable, by the
/// perceptron with a bias feature and an iteration cap.
pub fn linearly_separable(samples: &[FeatureVector], labels: &[i8]) -> bool {
    let d = samples[0].dim();
    let mut w = vec![0.0; d + 1];
    for _ in 0..10_000 {
        let mut clean = true;
        for (x, &y) in samples.iter().zip(labels) {
            let f: f64 = x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + w[d];
            if y as f64 * f <= 0.0 {
                clean = false;
                for k in 0..d {
                    w[k] += y as f64 * x[k];
                }
                w[d] += y as f64;
            }
        }
        if clean {
            return true;
        }
    }
    false
}

/// `+1` for class `positive`, `-1` otherwise.
pub fn binary_labels(ds: &LabeledDataset, positive: usize) -> Vec<i8> {
    ds.labels.iter().map(|&l| if l == positive { 1 } else { -1 }).collect()
}
