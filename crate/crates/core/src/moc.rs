//! Support-vector sharing across the nodes of a classifier tree.
//!
//! Every support vector of every node (an ISV) may be replaced by any
//! candidate vector within Euclidean distance `epsilon`. Choosing the fewest
//! candidates that cover all ISVs is a set-cover problem: minimize
//! `sum x_i` subject to `sum_i a_ij x_i >= 1` for every ISV `j`, with
//! `x_i` in `{0, 1}`. Minimizing the stored count is the same as maximizing
//! the overlap between nodes, since the ISV count is fixed.

use std::collections::{BTreeSet, HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::svm::{BinaryNodeModel, FeatureVector, SupportEntry};
use crate::tree::{ClassifierTree, TreeNode};

pub const DEFAULT_EXACT_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct IsvRecord {
    pub vector: FeatureVector,
    pub owner_node: usize,
    pub coefficient: f64,
    pub isv_index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateOrigin {
    TrainingSample,
    Isv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateVector {
    pub vector: FeatureVector,
    pub candidate_index: usize,
    pub origin: CandidateOrigin,
}

/// Sparse `a[i][j]`: candidate `i` lies within `epsilon` of ISV `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageMatrix {
    pub epsilon: f64,
    by_candidate: Vec<Vec<usize>>,
    by_isv: Vec<Vec<usize>>,
}

impl CoverageMatrix {
    /// Builds a matrix from explicit per-candidate ISV lists.
    pub fn from_sets(n_isvs: usize, covers: Vec<Vec<usize>>, epsilon: f64) -> Result<Self> {
        let mut by_isv = vec![Vec::new(); n_isvs];
        let mut by_candidate = Vec::with_capacity(covers.len());
        for (i, mut set) in covers.into_iter().enumerate() {
            set.sort_unstable();
            set.dedup();
            if let Some(&j) = set.iter().find(|&&j| j >= n_isvs) {
                return Err(Error::InvalidConfig(format!(
                    "candidate {i} covers ISV {j}, but only {n_isvs} exist"
                )));
            }
            for &j in &set {
                by_isv[j].push(i);
            }
            by_candidate.push(set);
        }
        Ok(CoverageMatrix {
            epsilon,
            by_candidate,
            by_isv,
        })
    }

    pub fn n_candidates(&self) -> usize {
        self.by_candidate.len()
    }

    pub fn n_isvs(&self) -> usize {
        self.by_isv.len()
    }

    pub fn covers(&self, candidate: usize, isv: usize) -> bool {
        self.by_candidate[candidate].binary_search(&isv).is_ok()
    }

    /// ISVs covered by a candidate, ascending.
    pub fn covered_by(&self, candidate: usize) -> &[usize] {
        &self.by_candidate[candidate]
    }

    /// Candidates covering an ISV, ascending.
    pub fn covering(&self, isv: usize) -> &[usize] {
        &self.by_isv[isv]
    }

    pub fn max_cover_size(&self) -> usize {
        self.by_candidate.iter().map(Vec::len).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FsvSelection {
    /// Chosen candidate indices, ascending.
    pub chosen: Vec<usize>,
    /// `assignment[isv_index]` is the chosen candidate replacing that ISV.
    pub assignment: Vec<usize>,
    pub x: Vec<bool>,
}

impl FsvSelection {
    fn from_assignment(n_candidates: usize, assignment: Vec<usize>) -> Self {
        let chosen: BTreeSet<usize> = assignment.iter().copied().collect();
        let mut x = vec![false; n_candidates];
        for &c in &chosen {
            x[c] = true;
        }
        FsvSelection {
            chosen: chosen.into_iter().collect(),
            assignment,
            x,
        }
    }

    /// Every ISV is assigned to a chosen candidate that covers it.
    pub fn is_feasible(&self, cov: &CoverageMatrix) -> bool {
        self.assignment.len() == cov.n_isvs()
            && self.x.len() == cov.n_candidates()
            && self
                .assignment
                .iter()
                .enumerate()
                .all(|(j, &c)| c < self.x.len() && self.x[c] && cov.covers(c, j))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SavingsReport {
    pub initial_stored: usize,
    pub final_stored: usize,
    pub savings_pct: f64,
    pub overlap_count: usize,
}

/// Support entries of every internal node, in preorder.
pub fn collect_initial_svs(tree: &ClassifierTree) -> Result<Vec<IsvRecord>> {
    let mut out = Vec::new();
    for (at, node) in tree.internal_nodes() {
        let model = node.model.as_ref().ok_or(Error::Untrained(at))?;
        for e in &model.entries {
            out.push(IsvRecord {
                vector: e.vector.clone(),
                owner_node: at,
                coefficient: e.coefficient,
                isv_index: out.len(),
            });
        }
    }
    Ok(out)
}

/// Training vectors followed by ISV vectors, keeping the first copy of each
/// exactly-equal vector.
pub fn candidate_pool(training: &[FeatureVector], isvs: &[IsvRecord]) -> Vec<CandidateVector> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let tagged = training
        .iter()
        .map(|v| (v, CandidateOrigin::TrainingSample))
        .chain(isvs.iter().map(|r| (&r.vector, CandidateOrigin::Isv)));
    for (v, origin) in tagged {
        if seen.insert(v.bit_key()) {
            out.push(CandidateVector {
                vector: v.clone(),
                candidate_index: out.len(),
                origin,
            });
        }
    }
    out
}

pub fn enumerate_secondary(
    isvs: &[IsvRecord],
    candidates: &[CandidateVector],
    epsilon: f64,
) -> Result<CoverageMatrix> {
    if !epsilon.is_finite() || epsilon < 0.0 {
        return Err(Error::BadRadius(epsilon));
    }
    let covers: Vec<Vec<usize>> = candidates
        .par_iter()
        .map(|cand| {
            isvs.iter()
                .enumerate()
                .filter(|(_, isv)| cand.vector.distance(&isv.vector) <= epsilon)
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    CoverageMatrix::from_sets(isvs.len(), covers, epsilon)
}

/// Repeatedly takes the candidate covering the most still-uncovered ISVs
/// (ties to the lowest index) until every ISV is covered.
pub fn greedy_moc(cov: &CoverageMatrix) -> Result<FsvSelection> {
    let n = cov.n_isvs();
    if let Some(j) = (0..n).find(|&j| cov.covering(j).is_empty()) {
        return Err(Error::InfeasibleCover(j));
    }
    let mut assignment = vec![usize::MAX; n];
    let mut remaining = n;
    while remaining > 0 {
        let mut best = (0usize, 0usize);
        for i in 0..cov.n_candidates() {
            let gain = cov
                .covered_by(i)
                .iter()
                .filter(|&&j| assignment[j] == usize::MAX)
                .count();
            if gain > best.1 {
                best = (i, gain);
            }
        }
        let (pick, gain) = best;
        debug_assert!(gain > 0);
        for &j in cov.covered_by(pick) {
            if assignment[j] == usize::MAX {
                assignment[j] = pick;
            }
        }
        remaining -= gain;
    }
    Ok(FsvSelection::from_assignment(cov.n_candidates(), assignment))
}

/// Minimum-cardinality cover by branch and bound.
///
/// Dominated candidates (covering a subset of another candidate's ISVs) are
/// dropped, the greedy cover seeds the incumbent, and each branch fixes the
/// uncovered ISV with the fewest covering candidates. Each ISV is assigned
/// to the lowest-index chosen candidate that covers it.
pub fn exact_moc(cov: &CoverageMatrix, limit: usize) -> Result<FsvSelection> {
    let n = cov.n_isvs();
    if n > limit || n > 128 {
        return Err(Error::TooLarge { isvs: n, limit });
    }
    let greedy = greedy_moc(cov)?;
    if n == 0 {
        return Ok(greedy);
    }

    let masks: Vec<u128> = (0..cov.n_candidates())
        .map(|i| cov.covered_by(i).iter().fold(0u128, |m, &j| m | (1u128 << j)))
        .collect();
    let mut kept: Vec<usize> = Vec::new();
    for i in 0..masks.len() {
        if masks[i] == 0 {
            continue;
        }
        let dominated = (0..masks.len()).any(|k| {
            k != i && masks[i] & !masks[k] == 0 && (masks[i] != masks[k] || k < i)
        });
        if !dominated {
            kept.push(i);
        }
    }

    struct Search<'a> {
        masks: &'a [u128],
        kept: &'a [usize],
        covering: Vec<Vec<usize>>,
        best: Vec<usize>,
    }

    impl Search<'_> {
        fn run(&mut self, uncovered: u128, picked: &mut Vec<usize>) {
            if uncovered == 0 {
                if picked.len() < self.best.len() {
                    self.best = picked.clone();
                }
                return;
            }
            if picked.len() + 1 >= self.best.len() {
                return;
            }
            let widest = self
                .kept
                .iter()
                .map(|&i| (self.masks[i] & uncovered).count_ones())
                .max()
                .unwrap_or(0);
            if widest == 0 {
                return;
            }
            let bound = uncovered.count_ones().div_ceil(widest) as usize;
            if picked.len() + bound >= self.best.len() {
                return;
            }
            let mut pivot = None;
            let mut fewest = usize::MAX;
            let mut bits = uncovered;
            while bits != 0 {
                let j = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let k = self.covering[j].len();
                if k < fewest {
                    fewest = k;
                    pivot = Some(j);
                }
            }
            let Some(j) = pivot else { return };
            let mut options = self.covering[j].clone();
            options.sort_by_key(|&i| {
                (std::cmp::Reverse((self.masks[i] & uncovered).count_ones()), i)
            });
            for i in options {
                picked.push(i);
                self.run(uncovered & !self.masks[i], picked);
                picked.pop();
            }
        }
    }

    let mut covering = vec![Vec::new(); n];
    for &i in &kept {
        let mut bits = masks[i];
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            covering[j].push(i);
        }
    }
    let mut search = Search {
        masks: &masks,
        kept: &kept,
        covering,
        best: greedy.chosen.clone(),
    };
    let full = if n == 128 { u128::MAX } else { (1u128 << n) - 1 };
    search.run(full, &mut Vec::new());

    let mut chosen = search.best;
    chosen.sort_unstable();
    let assignment = (0..n)
        .map(|j| {
            chosen
                .iter()
                .copied()
                .find(|&i| masks[i] >> j & 1 == 1)
                .expect("search returns a cover")
        })
        .collect();
    Ok(FsvSelection::from_assignment(cov.n_candidates(), assignment))
}

/// Bias that maximizes training accuracy for fixed raw scores `f(x) - b`,
/// scanning thresholds at midpoints of the sorted scores. Ties prefer the
/// bias closest to `current`.
pub(crate) fn refit_bias(scores: &[(f64, i8)], current: f64) -> f64 {
    if scores.is_empty() {
        return current;
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let positives = sorted.iter().filter(|s| s.1 > 0).count();

    // A threshold t classifies left iff score >= t; start below everything.
    let mut thresholds = vec![sorted[0].0 - 1.0];
    for w in sorted.windows(2) {
        if w[0].0 < w[1].0 {
            thresholds.push(0.5 * (w[0].0 + w[1].0));
        }
    }
    thresholds.push(sorted[sorted.len() - 1].0 + 1.0);

    let mut best_bias = current;
    let mut best_correct = 0usize;
    let mut best_gap = f64::INFINITY;
    let mut below = 0usize; // samples strictly below the current threshold
    let mut neg_below = 0usize;
    for t in thresholds {
        while below < sorted.len() && sorted[below].0 < t {
            if sorted[below].1 < 0 {
                neg_below += 1;
            }
            below += 1;
        }
        let pos_below = below - neg_below;
        let correct = (positives - pos_below) + neg_below;
        let bias = -t;
        let gap = (bias - current).abs();
        if correct > best_correct || (correct == best_correct && gap < best_gap) {
            best_correct = correct;
            best_gap = gap;
            best_bias = bias;
        }
    }
    best_bias
}

/// Rewrites every node so each ISV is replaced by its assigned candidate.
///
/// Entries of one node that map to the same candidate are merged by summing
/// coefficients, and the bias of every changed node is re-fit on that node's
/// training split. Nodes whose vectors are all unchanged are kept verbatim.
pub fn rebuild_models(
    tree: &ClassifierTree,
    sel: &FsvSelection,
    candidates: &[CandidateVector],
    train: &LabeledDataset,
) -> Result<ClassifierTree> {
    let isvs = collect_initial_svs(tree)?;
    if sel.assignment.len() != isvs.len() {
        return Err(Error::StaleSelection(format!(
            "selection assigns {} ISVs, tree has {}",
            sel.assignment.len(),
            isvs.len()
        )));
    }
    if let Some(&c) = sel.assignment.iter().find(|&&c| c >= candidates.len()) {
        return Err(Error::StaleSelection(format!(
            "candidate {c} outside pool of {}",
            candidates.len()
        )));
    }

    let mut out = tree.clone();
    // Walk nodes and ISVs in the same preorder.
    let mut cursor = 0;
    for at in 0..out.nodes().len() {
        let (model, classes) = match &out.nodes()[at] {
            TreeNode::Internal(n) => (
                n.model.clone().ok_or(Error::Untrained(at))?,
                (n.left_classes.clone(), n.right_classes.clone()),
            ),
            TreeNode::Leaf { .. } => continue,
        };
        let span = cursor..cursor + model.entries.len();
        cursor = span.end;
        let unchanged = span
            .clone()
            .all(|j| candidates[sel.assignment[j]].vector.bitwise_eq(&isvs[j].vector));
        if unchanged {
            continue;
        }

        let mut merged: Vec<SupportEntry> = Vec::new();
        let mut slot: HashMap<usize, usize> = HashMap::new();
        for j in span {
            let c = sel.assignment[j];
            match slot.get(&c) {
                Some(&k) => merged[k].coefficient += isvs[j].coefficient,
                None => {
                    slot.insert(c, merged.len());
                    merged.push(SupportEntry {
                        vector: candidates[c].vector.clone(),
                        coefficient: isvs[j].coefficient,
                        source_id: Some(c),
                    });
                }
            }
        }
        merged.retain(|e| e.coefficient != 0.0);
        let mut rebuilt = BinaryNodeModel {
            entries: merged,
            bias: model.bias,
            trained_dimension: model.trained_dimension,
        };

        let (left, right) = classes;
        let scores: Vec<(f64, i8)> = train
            .features
            .iter()
            .zip(&train.labels)
            .filter_map(|(x, l)| {
                let y = if left.contains(l) {
                    1
                } else if right.contains(l) {
                    -1
                } else {
                    return None;
                };
                Some((rebuilt.raw_decision(x), y))
            })
            .collect();
        rebuilt.bias = refit_bias(&scores, model.bias);
        let correct = scores
            .iter()
            .filter(|(s, y)| (s + rebuilt.bias >= 0.0) == (*y > 0))
            .count();

        if let TreeNode::Internal(n) = &mut out.nodes_mut()[at] {
            n.model = Some(rebuilt);
            if !scores.is_empty() {
                n.train_accuracy = Some(correct as f64 / scores.len() as f64);
            }
        }
    }
    Ok(out)
}

pub fn savings(tree_before: &ClassifierTree, sel: &FsvSelection) -> Result<SavingsReport> {
    let isvs = collect_initial_svs(tree_before)?;
    if sel.assignment.len() != isvs.len() {
        return Err(Error::StaleSelection(format!(
            "selection assigns {} ISVs, tree has {}",
            sel.assignment.len(),
            isvs.len()
        )));
    }
    let initial = isvs.len();
    let final_stored = sel.chosen.len();
    let savings_pct = if initial == 0 {
        0.0
    } else {
        100.0 * (initial as f64 - final_stored as f64) / initial as f64
    };
    let mut owners: HashMap<usize, BTreeSet<usize>> = HashMap::new();
    for (isv, &c) in isvs.iter().zip(&sel.assignment) {
        owners.entry(c).or_default().insert(isv.owner_node);
    }
    let overlap_count = owners.values().filter(|s| s.len() >= 2).count();
    Ok(SavingsReport {
        initial_stored: initial,
        final_stored,
        savings_pct,
        overlap_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(v: &[f64]) -> FeatureVector {
        FeatureVector::new(v.to_vec()).unwrap()
    }

    fn isv(v: &[f64], owner: usize, index: usize) -> IsvRecord {
        IsvRecord {
            vector: fv(v),
            owner_node: owner,
            coefficient: 1.0,
            isv_index: index,
        }
    }

    fn three_isvs() -> (Vec<IsvRecord>, Vec<CandidateVector>) {
        let isvs = vec![
            isv(&[0.0, 0.0], 1, 0),
            isv(&[0.4, 0.0], 2, 1),
            isv(&[5.0, 5.0], 1, 2),
        ];
        let pool = candidate_pool(&[fv(&[0.2, 0.0])], &isvs);
        (isvs, pool)
    }

    #[test]
    fn boundary_is_inclusive() {
        let isvs = vec![isv(&[3.0, 4.0], 0, 0)];
        let cands = vec![CandidateVector {
            vector: fv(&[0.0, 0.0]),
            candidate_index: 0,
            origin: CandidateOrigin::TrainingSample,
        }];
        assert!(enumerate_secondary(&isvs, &cands, 5.0).unwrap().covers(0, 0));
        assert!(!enumerate_secondary(&isvs, &cands, 4.9).unwrap().covers(0, 0));
        let err = enumerate_secondary(&isvs, &cands, -0.1).unwrap_err();
        assert!(err.to_string().contains("bad radius"));
    }

    #[test]
    fn zero_radius_is_equality() {
        let isvs = vec![isv(&[1.0], 0, 0), isv(&[2.0], 0, 1), isv(&[1.0], 1, 2)];
        let pool = candidate_pool(&[], &isvs);
        assert_eq!(pool.len(), 2);
        let cov = enumerate_secondary(&isvs, &pool, 0.0).unwrap();
        assert_eq!(cov.covered_by(0), &[0, 2]);
        assert_eq!(cov.covered_by(1), &[1]);
    }

    #[test]
    fn greedy_three_isv_example() {
        let (isvs, pool) = three_isvs();
        let cov = enumerate_secondary(&isvs, &pool, 0.25).unwrap();
        let sel = greedy_moc(&cov).unwrap();
        // candidate 0 is v = (0.2, 0); s3 = (5, 5) is candidate 3
        assert_eq!(sel.chosen, vec![0, 3]);
        assert_eq!(sel.assignment, vec![0, 0, 3]);
        assert!(sel.is_feasible(&cov));
        let exact = exact_moc(&cov, DEFAULT_EXACT_LIMIT).unwrap();
        assert_eq!(exact.chosen.len(), 2);
    }

    #[test]
    fn identity_coverage() {
        let cov = CoverageMatrix::from_sets(4, (0..4).map(|j| vec![j]).collect(), 0.0).unwrap();
        assert_eq!(greedy_moc(&cov).unwrap().chosen, vec![0, 1, 2, 3]);
        assert_eq!(exact_moc(&cov, 20).unwrap().chosen.len(), 4);
    }

    #[test]
    fn single_candidate_covers_all() {
        let mut sets: Vec<Vec<usize>> = (0..5).map(|j| vec![j]).collect();
        sets.push((0..5).collect());
        let cov = CoverageMatrix::from_sets(5, sets, 1.0).unwrap();
        assert_eq!(greedy_moc(&cov).unwrap().chosen, vec![5]);
        assert_eq!(exact_moc(&cov, 20).unwrap().chosen, vec![5]);
    }

    #[test]
    fn uncoverable_isv() {
        let cov = CoverageMatrix::from_sets(2, vec![vec![0]], 0.0).unwrap();
        assert!(matches!(greedy_moc(&cov), Err(Error::InfeasibleCover(1))));
    }

    #[test]
    fn exact_limit_guard() {
        let cov = CoverageMatrix::from_sets(21, (0..21).map(|j| vec![j]).collect(), 0.0).unwrap();
        let err = exact_moc(&cov, DEFAULT_EXACT_LIMIT).unwrap_err();
        assert!(err.to_string().contains("too large for exact solve"));
    }

    #[test]
    fn exact_beats_greedy_on_classic_trap() {
        // Greedy takes the 4-set first and then needs two more; optimum is 2.
        let sets = vec![vec![0, 1, 2], vec![3, 4, 5], vec![1, 2, 4, 5]];
        let cov = CoverageMatrix::from_sets(6, sets, 1.0).unwrap();
        assert_eq!(exact_moc(&cov, 20).unwrap().chosen, vec![0, 1]);
        assert_eq!(greedy_moc(&cov).unwrap().chosen.len(), 3);
    }

    #[test]
    fn refit_bias_separates() {
        let scores = [(-2.0, -1), (-1.0, -1), (1.0, 1), (3.0, 1)];
        let b = refit_bias(&scores, 5.0);
        assert!(scores.iter().all(|(s, y)| (s + b >= 0.0) == (*y > 0)));
        assert_eq!(b, 0.0);
        // zero-error band keeps the current bias when it is already optimal
        assert_eq!(refit_bias(&[(-1.0, -1), (1.0, 1)], 0.0), 0.0);
    }

    #[test]
    fn merge_sums_coefficients() {
        use crate::tree::{build_unconstrained, ActivityClass};
        let cs = ActivityClass::from_weights(&[50.0, 50.0]).unwrap();
        let mut tree = build_unconstrained(&cs).unwrap();
        if let TreeNode::Internal(n) = &mut tree.nodes_mut()[0] {
            n.model = Some(BinaryNodeModel {
                entries: vec![
                    SupportEntry { vector: fv(&[1.0]), coefficient: 0.5, source_id: None },
                    SupportEntry { vector: fv(&[1.1]), coefficient: 0.25, source_id: None },
                ],
                bias: 0.0,
                trained_dimension: 1,
            });
        }
        let isvs = collect_initial_svs(&tree).unwrap();
        let pool = candidate_pool(&[fv(&[1.05])], &isvs);
        let cov = enumerate_secondary(&isvs, &pool, 0.1).unwrap();
        let sel = greedy_moc(&cov).unwrap();
        assert_eq!(sel.chosen, vec![0]);
        let empty = LabeledDataset::new(vec![], vec![]).unwrap();
        let rebuilt = rebuild_models(&tree, &sel, &pool, &empty).unwrap();
        let TreeNode::Internal(n) = &rebuilt.nodes()[0] else { panic!() };
        let m = n.model.as_ref().unwrap();
        assert_eq!(m.entries.len(), 1);
        assert_eq!(m.entries[0].coefficient, 0.75);
        assert_eq!(m.entries[0].vector, fv(&[1.05]));

        let report = savings(&tree, &sel).unwrap();
        assert_eq!(report.initial_stored, 2);
        assert_eq!(report.final_stored, 1);
        assert_eq!(report.savings_pct, 50.0);
        assert_eq!(report.overlap_count, 0);

        let stale = FsvSelection { chosen: vec![0], assignment: vec![0], x: vec![true] };
        let err = rebuild_models(&tree, &stale, &pool, &empty).unwrap_err();
        assert!(err.to_string().contains("stale selection"));
    }

    #[test]
    fn three_isv_savings_and_overlap() {
        use crate::tree::{build_unconstrained, ActivityClass};
        let cs = ActivityClass::from_weights(&[50.0, 30.0, 20.0]).unwrap();
        let mut tree = build_unconstrained(&cs).unwrap();
        // Node ids in preorder: 0 is the root, 2 the inner classifier.
        let owners: Vec<usize> = tree.internal_nodes().map(|(i, _)| i).collect();
        let entry = |v: &[f64]| SupportEntry { vector: fv(v), coefficient: 1.0, source_id: None };
        let models = [
            vec![entry(&[0.0, 0.0]), entry(&[5.0, 5.0])],
            vec![entry(&[0.4, 0.0])],
        ];
        for (at, entries) in owners.iter().zip(models) {
            if let TreeNode::Internal(n) = &mut tree.nodes_mut()[*at] {
                n.model = Some(BinaryNodeModel { entries, bias: 0.0, trained_dimension: 2 });
            }
        }
        let tree_isvs = collect_initial_svs(&tree).unwrap();
        assert_eq!(tree_isvs.len(), 3);
        let pool2 = candidate_pool(&[fv(&[0.2, 0.0])], &tree_isvs);
        let cov = enumerate_secondary(&tree_isvs, &pool2, 0.25).unwrap();
        let sel = greedy_moc(&cov).unwrap();
        let report = savings(&tree, &sel).unwrap();
        assert_eq!(report.final_stored, 2);
        assert!((report.savings_pct - 100.0 / 3.0).abs() < 1e-12);
        assert_eq!(report.overlap_count, 1);
    }

    #[test]
    fn untrained_tree_has_no_isvs() {
        use crate::tree::{build_unconstrained, ActivityClass};
        let leaf = build_unconstrained(&ActivityClass::from_weights(&[1.0]).unwrap()).unwrap();
        assert!(collect_initial_svs(&leaf).unwrap().is_empty());
        let two = build_unconstrained(&ActivityClass::from_weights(&[1.0, 1.0]).unwrap()).unwrap();
        assert!(matches!(collect_initial_svs(&two), Err(Error::Untrained(0))));
    }
}
