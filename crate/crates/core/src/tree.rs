//! Binary hierarchical classifier trees.
//!
//! Leaves are activity classes and internal nodes are binary SVMs routing a
//! sample to their left or right subtree. The shape is chosen to minimize the
//! expected number of classifier evaluations `E(I) = sum_i p_i * depth_i`
//! (reported in per-hundred probability units), either unconstrained
//! (Huffman merging) or under a maximum depth (package-merge).

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::svm::{self, BinaryNodeModel, FeatureVector, Side, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityClass {
    pub id: usize,
    pub name: String,
    /// Normalized probability in `[0, 1]`.
    pub probability: f64,
    /// The same probability in per-hundred units, computed directly from the
    /// raw weights so that integer percents stay exact.
    pub percent: f64,
}

impl ActivityClass {
    /// Builds classes `0..n` from raw weights (percents or fractions).
    pub fn from_weights(weights: &[f64]) -> Result<Vec<ActivityClass>> {
        let ids: Vec<usize> = (0..weights.len()).collect();
        Self::with_ids(&ids, weights)
    }

    pub fn with_ids(ids: &[usize], weights: &[f64]) -> Result<Vec<ActivityClass>> {
        if weights.is_empty() {
            return Err(Error::Empty("class set"));
        }
        if ids.len() != weights.len() {
            return Err(Error::Arity {
                expected: ids.len(),
                got: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidConfig(
                "class weights must be finite and non-negative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidConfig("class weights sum to zero".into()));
        }
        let mut seen = HashSet::new();
        ids.iter()
            .zip(weights)
            .map(|(&id, &w)| {
                if !seen.insert(id) {
                    return Err(Error::InvalidConfig(format!("duplicate class id {id}")));
                }
                Ok(ActivityClass {
                    id,
                    name: format!("A{id}"),
                    probability: w / total,
                    percent: w * 100.0 / total,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TieBreak {
    /// On equal weights, the most recently created composite node is merged
    /// first, then original leaves in insertion order.
    #[default]
    RecentComposite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TreeBuildConfig {
    /// Maximum number of classifiers on any root-to-leaf path. This is the
    /// timing budget, typically `floor(a * T_min / t_classifier)`.
    pub depth_limit: Option<usize>,
    pub tie_break: TieBreak,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InternalNode {
    pub left: usize,
    pub right: usize,
    pub left_classes: Vec<usize>,
    pub right_classes: Vec<usize>,
    pub model: Option<BinaryNodeModel>,
    pub train_accuracy: Option<f64>,
}

impl InternalNode {
    pub fn classes(&self) -> impl Iterator<Item = usize> + '_ {
        self.left_classes.iter().chain(&self.right_classes).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf { class_id: usize },
    Internal(InternalNode),
}

/// Arena-backed tree stored in preorder; node 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierTree {
    classes: Vec<ActivityClass>,
    nodes: Vec<TreeNode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeStats {
    pub depth: usize,
    pub expected_instructions: f64,
    /// Share of stored support vectors that duplicate another stored vector;
    /// absent for untrained trees.
    pub initial_overlap_pct: Option<f64>,
    /// Support entries per internal node, in preorder; empty when untrained.
    #[serde(default)]
    pub node_support_counts: Vec<usize>,
    #[serde(default)]
    pub node_train_accuracy: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Shape {
    Leaf(usize),
    Node(Box<Shape>, Box<Shape>),
}

impl ClassifierTree {
    pub(crate) fn from_shape(classes: Vec<ActivityClass>, shape: &Shape) -> Result<Self> {
        let mut tree = ClassifierTree {
            classes,
            nodes: Vec::new(),
        };
        tree.push_shape(shape);
        let mut leaves: Vec<usize> = tree
            .nodes
            .iter()
            .filter_map(|n| match n {
                TreeNode::Leaf { class_id } => Some(*class_id),
                TreeNode::Internal(_) => None,
            })
            .collect();
        leaves.sort_unstable();
        let mut ids: Vec<usize> = tree.classes.iter().map(|c| c.id).collect();
        ids.sort_unstable();
        if leaves != ids {
            return Err(Error::InvalidConfig(
                "tree leaves must hold every class exactly once".into(),
            ));
        }
        Ok(tree)
    }

    fn push_shape(&mut self, shape: &Shape) -> (usize, Vec<usize>) {
        let at = self.nodes.len();
        match shape {
            Shape::Leaf(id) => {
                self.nodes.push(TreeNode::Leaf { class_id: *id });
                (at, vec![*id])
            }
            Shape::Node(l, r) => {
                self.nodes.push(TreeNode::Leaf { class_id: usize::MAX });
                let (left, left_classes) = self.push_shape(l);
                let (right, right_classes) = self.push_shape(r);
                let all = left_classes.iter().chain(&right_classes).copied().collect();
                self.nodes[at] = TreeNode::Internal(InternalNode {
                    left,
                    right,
                    left_classes,
                    right_classes,
                    model: None,
                    train_accuracy: None,
                });
                (at, all)
            }
        }
    }

    pub(crate) fn shape(&self) -> Shape {
        fn go(tree: &ClassifierTree, at: usize) -> Shape {
            match &tree.nodes[at] {
                TreeNode::Leaf { class_id } => Shape::Leaf(*class_id),
                TreeNode::Internal(n) => {
                    Shape::Node(Box::new(go(tree, n.left)), Box::new(go(tree, n.right)))
                }
            }
        }
        go(self, 0)
    }

    pub fn classes(&self) -> &[ActivityClass] {
        &self.classes
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub(crate) fn nodes_mut(&mut self) -> &mut [TreeNode] {
        &mut self.nodes
    }

    pub fn internal_nodes(&self) -> impl Iterator<Item = (usize, &InternalNode)> {
        self.nodes.iter().enumerate().filter_map(|(i, n)| match n {
            TreeNode::Internal(inner) => Some((i, inner)),
            TreeNode::Leaf { .. } => None,
        })
    }

    pub fn is_trained(&self) -> bool {
        self.internal_nodes().all(|(_, n)| n.model.is_some())
    }

    /// Depth of each class's leaf, in class order.
    pub fn leaf_depths(&self) -> Vec<usize> {
        let mut by_id = BTreeMap::new();
        let mut stack = vec![(0usize, 0usize)];
        while let Some((at, depth)) = stack.pop() {
            match &self.nodes[at] {
                TreeNode::Leaf { class_id } => {
                    by_id.insert(*class_id, depth);
                }
                TreeNode::Internal(n) => {
                    stack.push((n.right, depth + 1));
                    stack.push((n.left, depth + 1));
                }
            }
        }
        self.classes.iter().map(|c| by_id[&c.id]).collect()
    }

    pub fn depth(&self) -> usize {
        self.leaf_depths().into_iter().max().unwrap_or(0)
    }

    /// Nested parenthesized class ids, e.g. `(5 (2 3))`.
    pub fn topology(&self) -> String {
        fn go(shape: &Shape, out: &mut String) {
            match shape {
                Shape::Leaf(id) => out.push_str(&id.to_string()),
                Shape::Node(l, r) => {
                    out.push('(');
                    go(l, out);
                    out.push(' ');
                    go(r, out);
                    out.push(')');
                }
            }
        }
        let mut out = String::new();
        go(&self.shape(), &mut out);
        out
    }

    pub fn from_topology(classes: Vec<ActivityClass>, topology: &str) -> Result<Self> {
        let shape = parse_topology(topology)?;
        Self::from_shape(classes, &shape)
    }
}

pub(crate) fn parse_topology(text: &str) -> Result<Shape> {
    struct Cursor<'a> {
        bytes: &'a [u8],
        pos: usize,
    }
    impl Cursor<'_> {
        fn skip_ws(&mut self) {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
        }
        fn err(&self, msg: &str) -> Error {
            Error::InvalidConfig(format!("topology: {msg} at offset {}", self.pos))
        }
        fn shape(&mut self) -> Result<Shape> {
            self.skip_ws();
            match self.bytes.get(self.pos) {
                Some(b'(') => {
                    self.pos += 1;
                    let l = self.shape()?;
                    let r = self.shape()?;
                    self.skip_ws();
                    if self.bytes.get(self.pos) != Some(&b')') {
                        return Err(self.err("expected ')'"));
                    }
                    self.pos += 1;
                    Ok(Shape::Node(Box::new(l), Box::new(r)))
                }
                Some(b) if b.is_ascii_digit() => {
                    let start = self.pos;
                    while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                    let digits = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
                    digits
                        .parse()
                        .map(Shape::Leaf)
                        .map_err(|_| self.err("bad class id"))
                }
                _ => Err(self.err("expected '(' or class id")),
            }
        }
    }
    let mut cur = Cursor {
        bytes: text.as_bytes(),
        pos: 0,
    };
    let shape = cur.shape()?;
    cur.skip_ws();
    if cur.pos != cur.bytes.len() {
        return Err(cur.err("trailing input"));
    }
    Ok(shape)
}

fn weights_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Huffman merging of the lightest two subtrees until one remains.
///
/// The first subtree taken becomes the left child. Equal weights prefer the
/// most recently created composite, then leaves in insertion order; the
/// resulting `E(I)` is the same for any tie order.
pub fn build_unconstrained(classes: &[ActivityClass]) -> Result<ClassifierTree> {
    if classes.is_empty() {
        return Err(Error::Empty("class set"));
    }

    struct Pending {
        weight: f64,
        shape: Shape,
        // leaves: insertion index; composites: creation sequence
        order: usize,
        composite: bool,
    }

    fn precedes(a: &Pending, b: &Pending) -> bool {
        if !weights_equal(a.weight, b.weight) {
            return a.weight < b.weight;
        }
        match (a.composite, b.composite) {
            (true, false) => true,
            (false, true) => false,
            (true, true) => a.order > b.order,
            (false, false) => a.order < b.order,
        }
    }

    fn take_min(forest: &mut Vec<Pending>) -> Pending {
        let mut best = 0;
        for i in 1..forest.len() {
            if precedes(&forest[i], &forest[best]) {
                best = i;
            }
        }
        forest.swap_remove(best)
    }

    let mut forest: Vec<Pending> = classes
        .iter()
        .enumerate()
        .map(|(i, c)| Pending {
            weight: c.percent,
            shape: Shape::Leaf(c.id),
            order: i,
            composite: false,
        })
        .collect();
    let mut created = 0;
    while forest.len() > 1 {
        let a = take_min(&mut forest);
        let b = take_min(&mut forest);
        forest.push(Pending {
            weight: a.weight + b.weight,
            shape: Shape::Node(Box::new(a.shape), Box::new(b.shape)),
            order: created,
            composite: true,
        });
        created += 1;
    }
    let root = forest.pop().expect("forest is nonempty");
    ClassifierTree::from_shape(classes.to_vec(), &root.shape)
}

fn min_feasible_depth(n: usize) -> usize {
    // ceil(log2(n))
    (usize::BITS - n.saturating_sub(1).leading_zeros()) as usize
}

/// Leaf depths minimizing `sum p_i * l_i` subject to `l_i <= limit`, by
/// package-merge over coins of width `2^-l`. Returned in class order.
pub fn package_merge_depths(weights: &[f64], limit: usize) -> Result<Vec<usize>> {
    let n = weights.len();
    if n == 0 {
        return Err(Error::Empty("class set"));
    }
    if limit < min_feasible_depth(n) {
        return Err(Error::DepthInfeasible {
            classes: n,
            limit,
        });
    }
    if n == 1 {
        return Ok(vec![0]);
    }

    // Leaves sorted by ascending weight, stable on index.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| weights[a].total_cmp(&weights[b]).then(a.cmp(&b)));

    #[derive(Clone)]
    struct Item {
        weight: f64,
        // occurrences of each sorted leaf inside this item
        counts: Vec<u32>,
    }
    let leaves: Vec<Item> = order
        .iter()
        .enumerate()
        .map(|(rank, &i)| {
            let mut counts = vec![0; n];
            counts[rank] = 1;
            Item {
                weight: weights[i],
                counts,
            }
        })
        .collect();

    // Start at the deepest level and package upwards.
    let mut list = leaves.clone();
    for _ in 1..limit {
        let packages: Vec<Item> = list
            .chunks_exact(2)
            .map(|pair| Item {
                weight: pair[0].weight + pair[1].weight,
                counts: pair[0]
                    .counts
                    .iter()
                    .zip(&pair[1].counts)
                    .map(|(a, b)| a + b)
                    .collect(),
            })
            .collect();
        let mut merged = Vec::with_capacity(leaves.len() + packages.len());
        let (mut li, mut pi) = (0, 0);
        while li < leaves.len() || pi < packages.len() {
            let take_leaf = pi >= packages.len()
                || (li < leaves.len() && leaves[li].weight <= packages[pi].weight);
            if take_leaf {
                merged.push(leaves[li].clone());
                li += 1;
            } else {
                merged.push(packages[pi].clone());
                pi += 1;
            }
        }
        list = merged;
    }

    let mut sorted_depths = vec![0usize; n];
    for item in &list[..2 * (n - 1)] {
        for (rank, c) in item.counts.iter().enumerate() {
            sorted_depths[rank] += *c as usize;
        }
    }

    // Shortest depths to the largest weights.
    let mut depths_asc = sorted_depths;
    depths_asc.sort_unstable();
    let mut by_weight_desc: Vec<usize> = (0..n).collect();
    by_weight_desc.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
    let mut depths = vec![0; n];
    for (slot, &i) in by_weight_desc.iter().enumerate() {
        depths[i] = depths_asc[slot];
    }
    Ok(depths)
}

/// Canonical tree for a complete depth profile: leaves sorted by depth are
/// placed left to right in a depth-first walk.
pub(crate) fn shape_from_depths(ids_by_rank: &[(usize, usize)]) -> Result<Shape> {
    fn go(depth: usize, queue: &[(usize, usize)], next: &mut usize) -> Result<Shape> {
        let Some(&(id, want)) = queue.get(*next) else {
            return Err(Error::InvalidConfig("depth profile is not complete".into()));
        };
        if want == depth {
            *next += 1;
            return Ok(Shape::Leaf(id));
        }
        if want < depth {
            return Err(Error::InvalidConfig("depth profile is not complete".into()));
        }
        let l = go(depth + 1, queue, next)?;
        let r = go(depth + 1, queue, next)?;
        Ok(Shape::Node(Box::new(l), Box::new(r)))
    }
    let mut next = 0;
    let shape = go(0, ids_by_rank, &mut next)?;
    if next != ids_by_rank.len() {
        return Err(Error::InvalidConfig("depth profile is not complete".into()));
    }
    Ok(shape)
}

/// Optimal tree whose depth does not exceed `limit`.
pub fn build_depth_limited(classes: &[ActivityClass], limit: usize) -> Result<ClassifierTree> {
    let weights: Vec<f64> = classes.iter().map(|c| c.percent).collect();
    let depths = package_merge_depths(&weights, limit)?;
    let mut ranked: Vec<usize> = (0..classes.len()).collect();
    ranked.sort_by(|&a, &b| {
        depths[a]
            .cmp(&depths[b])
            .then(weights[b].total_cmp(&weights[a]))
            .then(a.cmp(&b))
    });
    let queue: Vec<(usize, usize)> = ranked.iter().map(|&i| (classes[i].id, depths[i])).collect();
    let shape = shape_from_depths(&queue)?;
    ClassifierTree::from_shape(classes.to_vec(), &shape)
}

/// Huffman tree when it satisfies the configured depth limit, otherwise the
/// package-merge tree.
pub fn build(classes: &[ActivityClass], cfg: &TreeBuildConfig) -> Result<ClassifierTree> {
    if classes.is_empty() {
        return Err(Error::Empty("class set"));
    }
    match cfg.depth_limit {
        None => build_unconstrained(classes),
        Some(limit) => {
            if limit < min_feasible_depth(classes.len()) {
                return Err(Error::DepthInfeasible {
                    classes: classes.len(),
                    limit,
                });
            }
            let tree = build_unconstrained(classes)?;
            if tree.depth() <= limit {
                Ok(tree)
            } else {
                build_depth_limited(classes, limit)
            }
        }
    }
}

/// `sum_i percent_i * depth_i`, summed in class order.
pub fn expected_instructions(tree: &ClassifierTree) -> f64 {
    tree.classes
        .iter()
        .zip(tree.leaf_depths())
        .map(|(c, d)| c.percent * d as f64)
        .sum()
}

/// Trains a model at every internal node: samples of left-subtree classes
/// are labeled `+1`, right-subtree classes `-1`.
pub fn attach_classifiers(
    tree: &ClassifierTree,
    train: &LabeledDataset,
    cfg: &TrainConfig,
) -> Result<ClassifierTree> {
    cfg.validate()?;
    for class in &tree.classes {
        if !train.labels.contains(&class.id) {
            return Err(Error::MissingClassData(class.id));
        }
    }

    let jobs: Vec<(usize, &InternalNode)> = tree.internal_nodes().collect();
    let trained = jobs
        .par_iter()
        .map(|&(at, node)| {
            let mut samples = Vec::new();
            let mut labels = Vec::new();
            let mut ids = Vec::new();
            for (i, (x, label)) in train.features.iter().zip(&train.labels).enumerate() {
                let y = if node.left_classes.contains(label) {
                    1
                } else if node.right_classes.contains(label) {
                    -1
                } else {
                    continue;
                };
                samples.push(x);
                labels.push(y);
                ids.push(i);
            }
            let model = svm::train_indexed(&samples, &labels, &ids, cfg)?;
            let correct = samples
                .iter()
                .zip(&labels)
                .filter(|(x, &y)| {
                    let side = if model.raw_decision(x) + model.bias >= 0.0 {
                        1
                    } else {
                        -1
                    };
                    side == y
                })
                .count();
            let acc = correct as f64 / samples.len() as f64;
            Ok((at, model, acc))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = tree.clone();
    for (at, model, acc) in trained {
        if let TreeNode::Internal(node) = &mut out.nodes[at] {
            node.model = Some(model);
            node.train_accuracy = Some(acc);
        }
    }
    Ok(out)
}

/// Descends from the root; returns the reached class id and the number of
/// classifiers evaluated.
pub fn classify_sample(tree: &ClassifierTree, x: &FeatureVector) -> Result<(usize, usize)> {
    let mut at = 0;
    let mut path = 0;
    loop {
        match &tree.nodes[at] {
            TreeNode::Leaf { class_id } => return Ok((*class_id, path)),
            TreeNode::Internal(node) => {
                let model = node.model.as_ref().ok_or(Error::Untrained(at))?;
                at = match model.classify(x)? {
                    Side::Left => node.left,
                    Side::Right => node.right,
                };
                path += 1;
            }
        }
    }
}

pub fn tree_stats(tree: &ClassifierTree) -> TreeStats {
    let depth = tree.depth();
    let expected_instructions = expected_instructions(tree);
    let has_internal = tree.internal_nodes().next().is_some();
    if !has_internal || !tree.is_trained() {
        return TreeStats {
            depth,
            expected_instructions,
            initial_overlap_pct: None,
            node_support_counts: Vec::new(),
            node_train_accuracy: Vec::new(),
        };
    }
    let mut counts = Vec::new();
    let mut accs = Vec::new();
    let mut distinct = HashSet::new();
    for (_, node) in tree.internal_nodes() {
        let model = node.model.as_ref().expect("checked trained");
        counts.push(model.entries.len());
        accs.push(node.train_accuracy.unwrap_or(f64::NAN));
        for e in &model.entries {
            distinct.insert(e.vector.bit_key());
        }
    }
    let total: usize = counts.iter().sum();
    let overlap = if total == 0 {
        0.0
    } else {
        100.0 * (total - distinct.len()) as f64 / total as f64
    };
    TreeStats {
        depth,
        expected_instructions,
        initial_overlap_pct: Some(overlap),
        node_support_counts: counts,
        node_train_accuracy: accs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::svm::SupportEntry;

    fn classes(w: &[f64]) -> Vec<ActivityClass> {
        ActivityClass::from_weights(w).unwrap()
    }

    #[test]
    fn table_rows() {
        for (p, depth, ei) in [
            (vec![20.0, 20.0, 5.0, 5.0, 10.0, 40.0], 5, 230.0),
            (vec![10.0, 10.0, 15.0, 15.0, 25.0, 25.0], 3, 250.0),
            (vec![8.0, 10.0, 7.0, 12.0, 21.0, 42.0], 4, 231.0),
        ] {
            let t = build_unconstrained(&classes(&p)).unwrap();
            assert_eq!(t.depth(), depth, "{p:?}");
            assert_eq!(expected_instructions(&t), ei, "{p:?}");
        }
    }

    #[test]
    fn p1_shape_puts_heaviest_class_at_depth_one() {
        let t = build_unconstrained(&classes(&[20.0, 20.0, 5.0, 5.0, 10.0, 40.0])).unwrap();
        assert_eq!(t.leaf_depths(), vec![3, 2, 5, 5, 4, 1]);
        assert_eq!(t.topology(), "(5 (1 (((2 3) 4) 0)))");
    }

    #[test]
    fn single_class() {
        let t = build_unconstrained(&classes(&[100.0])).unwrap();
        assert_eq!(t.depth(), 0);
        assert_eq!(expected_instructions(&t), 0.0);
        assert_eq!(t.nodes().len(), 1);
    }

    #[test]
    fn uniform_four_is_balanced() {
        let t = build_unconstrained(&classes(&[25.0; 4])).unwrap();
        assert_eq!(t.depth(), 2);
        assert_eq!(expected_instructions(&t), 200.0);
    }

    #[test]
    fn empty_rejected() {
        assert!(matches!(build_unconstrained(&[]), Err(Error::Empty(_))));
    }

    #[test]
    fn fractions_match_percents() {
        let t = build_unconstrained(&classes(&[0.1, 0.1, 0.15, 0.15, 0.25, 0.25])).unwrap();
        assert!((expected_instructions(&t) - 250.0).abs() < 1e-9);
    }

    #[test]
    fn depth_limited_p1() {
        let t = build_depth_limited(&classes(&[20.0, 20.0, 5.0, 5.0, 10.0, 40.0]), 3).unwrap();
        let mut depths = t.leaf_depths();
        assert_eq!(depths, vec![2, 3, 3, 3, 3, 2]);
        depths.sort_unstable();
        assert_eq!(depths, vec![2, 2, 3, 3, 3, 3]);
        assert_eq!(expected_instructions(&t), 240.0);
    }

    #[test]
    fn depth_limit_infeasible() {
        let err =
            build_depth_limited(&classes(&[20.0, 20.0, 5.0, 5.0, 10.0, 40.0]), 2).unwrap_err();
        assert!(err.to_string().contains("depth infeasible"));
        let cfg = TreeBuildConfig {
            depth_limit: Some(2),
            ..Default::default()
        };
        assert!(build(&classes(&[1.0; 6]), &cfg).is_err());
    }

    #[test]
    fn power_of_two_at_min_depth_is_balanced() {
        let t = build_depth_limited(&classes(&[70.0, 10.0, 10.0, 5.0, 2.0, 1.0, 1.0, 1.0]), 3)
            .unwrap();
        assert!(t.leaf_depths().iter().all(|&d| d == 3));
    }

    #[test]
    fn build_keeps_huffman_when_limit_is_loose() {
        let cs = classes(&[20.0, 20.0, 5.0, 5.0, 10.0, 40.0]);
        let cfg = TreeBuildConfig {
            depth_limit: Some(5),
            ..Default::default()
        };
        assert_eq!(build(&cs, &cfg).unwrap(), build_unconstrained(&cs).unwrap());
        let cfg = TreeBuildConfig {
            depth_limit: Some(4),
            ..Default::default()
        };
        let t = build(&cs, &cfg).unwrap();
        assert!(t.depth() <= 4);
    }

    #[test]
    fn expected_instructions_direct() {
        let cs = classes(&[40.0, 30.0, 20.0, 10.0]);
        let shape = shape_from_depths(&[(0, 1), (1, 2), (2, 3), (3, 3)]).unwrap();
        let t = ClassifierTree::from_shape(cs, &shape).unwrap();
        assert_eq!(t.leaf_depths(), vec![1, 2, 3, 3]);
        assert_eq!(expected_instructions(&t), 190.0);
    }

    #[test]
    fn topology_round_trip() {
        let cs = classes(&[8.0, 10.0, 7.0, 12.0, 21.0, 42.0]);
        let t = build_unconstrained(&cs).unwrap();
        let back = ClassifierTree::from_topology(cs, &t.topology()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn topology_errors() {
        let cs = classes(&[1.0, 1.0]);
        assert!(ClassifierTree::from_topology(cs.clone(), "(0 1").is_err());
        assert!(ClassifierTree::from_topology(cs.clone(), "(0 0)").is_err());
        assert!(ClassifierTree::from_topology(cs, "(0 1) x").is_err());
    }

    #[test]
    fn untrained_descent_fails() {
        let t = build_unconstrained(&classes(&[50.0, 50.0])).unwrap();
        let x = FeatureVector::new(vec![0.0]).unwrap();
        assert!(matches!(classify_sample(&t, &x), Err(Error::Untrained(0))));
        let leaf = build_unconstrained(&classes(&[100.0])).unwrap();
        assert_eq!(classify_sample(&leaf, &x).unwrap(), (0, 0));
    }

    fn model_with(vectors: &[&[f64]]) -> BinaryNodeModel {
        BinaryNodeModel {
            entries: vectors
                .iter()
                .map(|v| SupportEntry {
                    vector: FeatureVector::new(v.to_vec()).unwrap(),
                    coefficient: 1.0,
                    source_id: None,
                })
                .collect(),
            bias: 0.0,
            trained_dimension: 1,
        }
    }

    fn with_models(mut t: ClassifierTree, models: Vec<BinaryNodeModel>) -> ClassifierTree {
        let mut it = models.into_iter();
        for n in t.nodes_mut() {
            if let TreeNode::Internal(inner) = n {
                inner.model = it.next();
                inner.train_accuracy = Some(1.0);
            }
        }
        t
    }

    #[test]
    fn overlap_pct() {
        let t = build_unconstrained(&classes(&[50.0, 30.0, 20.0])).unwrap();
        assert_eq!(tree_stats(&t).initial_overlap_pct, None);

        let disjoint = with_models(
            t.clone(),
            vec![model_with(&[&[1.0], &[2.0]]), model_with(&[&[3.0]])],
        );
        assert_eq!(tree_stats(&disjoint).initial_overlap_pct, Some(0.0));

        let same = with_models(
            t,
            vec![
                model_with(&[&[1.0], &[2.0], &[3.0]]),
                model_with(&[&[1.0], &[2.0], &[3.0]]),
            ],
        );
        let stats = tree_stats(&same);
        assert_eq!(stats.initial_overlap_pct, Some(50.0));
        assert_eq!(stats.node_support_counts, vec![3, 3]);
    }
}
