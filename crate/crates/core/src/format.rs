//! Text serialization of classifier trees and their node models.
//!
//! ```text
//! hiersvm-model 1
//! layout per-node
//! classes 2
//! class 0 5.0000000000000000e1 5.0000000000000000e-1 A0
//! class 1 5.0000000000000000e1 5.0000000000000000e-1 A1
//! topology (0 1)
//! node 0 dim 2 bias -1.0000000000000000e0 entries 2 accuracy 1.0000000000000000e0
//! 5.0000000000000000e-1 1.0000000000000000e0 0.0000000000000000e0
//! -5.0000000000000000e-1 -1.0000000000000000e0 0.0000000000000000e0
//! ```
//!
//! A class line is `class <id> <percent> <probability> <name>`. Nodes are
//! numbered in preorder; an untrained node is written `node <id> untrained`.
//! In the `per-node` layout each model lists `<coefficient> <components...>`
//! per support entry. The `shared-pool` layout instead writes every distinct
//! support vector once:
//!
//! ```text
//! pool <count> dim <d>
//! <components...>            (one line per pooled vector)
//! node <id> bias <b> refs <m> [accuracy <a>]
//! <pool index> <coefficient> (one line per entry)
//! ```
//!
//! Reals use 17 significant digits so every value round-trips exactly.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::data::write_text;
use crate::error::{Error, Result};
use crate::svm::{BinaryNodeModel, FeatureVector, SupportEntry};
use crate::tree::{parse_topology, ActivityClass, ClassifierTree, TreeNode};

const MAGIC: &str = "hiersvm-model 1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    PerNode,
    SharedPool,
}

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_header(tree: &ClassifierTree, layout: Layout, out: &mut String) {
    out.push_str(MAGIC);
    out.push('\n');
    let tag = match layout {
        Layout::PerNode => "per-node",
        Layout::SharedPool => "shared-pool",
    };
    writeln!(out, "layout {tag}").unwrap();
    writeln!(out, "classes {}", tree.classes().len()).unwrap();
    for c in tree.classes() {
        writeln!(
            out,
            "class {} {} {} {}",
            c.id,
            real(c.percent),
            real(c.probability),
            c.name
        )
        .unwrap();
    }
    writeln!(out, "topology {}", tree.topology()).unwrap();
}

fn node_suffix(accuracy: Option<f64>) -> String {
    accuracy.map_or_else(String::new, |a| format!(" accuracy {}", real(a)))
}

/// Writes one model block in the per-node layout.
pub fn write_model_block(id: usize, model: &BinaryNodeModel, accuracy: Option<f64>, out: &mut String) {
    writeln!(
        out,
        "node {id} dim {} bias {} entries {}{}",
        model.trained_dimension,
        real(model.bias),
        model.entries.len(),
        node_suffix(accuracy)
    )
    .unwrap();
    for e in &model.entries {
        out.push_str(&real(e.coefficient));
        for v in e.vector.iter() {
            out.push(' ');
            out.push_str(&real(*v));
        }
        out.push('\n');
    }
}

/// Distinct support vectors across all nodes, in first-appearance order.
pub fn vector_pool(tree: &ClassifierTree) -> Vec<FeatureVector> {
    let mut seen = HashMap::new();
    let mut pool = Vec::new();
    for (_, node) in tree.internal_nodes() {
        if let Some(m) = &node.model {
            for e in &m.entries {
                seen.entry(e.vector.bit_key()).or_insert_with(|| {
                    pool.push(e.vector.clone());
                    pool.len() - 1
                });
            }
        }
    }
    pool
}

pub fn write_tree(tree: &ClassifierTree, layout: Layout) -> String {
    let mut out = String::new();
    write_header(tree, layout, &mut out);
    match layout {
        Layout::PerNode => {
            for (at, node) in tree.internal_nodes() {
                match &node.model {
                    Some(m) => write_model_block(at, m, node.train_accuracy, &mut out),
                    None => writeln!(out, "node {at} untrained").unwrap(),
                }
            }
        }
        Layout::SharedPool => {
            let pool = vector_pool(tree);
            let index: HashMap<Vec<u64>, usize> = pool
                .iter()
                .enumerate()
                .map(|(i, v)| (v.bit_key(), i))
                .collect();
            let dim = pool.first().map_or(0, |v| v.dim());
            writeln!(out, "pool {} dim {dim}", pool.len()).unwrap();
            for v in &pool {
                let line: Vec<String> = v.iter().map(|x| real(*x)).collect();
                writeln!(out, "{}", line.join(" ")).unwrap();
            }
            for (at, node) in tree.internal_nodes() {
                let Some(m) = &node.model else {
                    writeln!(out, "node {at} untrained").unwrap();
                    continue;
                };
                writeln!(
                    out,
                    "node {at} bias {} refs {}{}",
                    real(m.bias),
                    m.entries.len(),
                    node_suffix(node.train_accuracy)
                )
                .unwrap();
                for e in &m.entries {
                    writeln!(out, "{} {}", index[&e.vector.bit_key()], real(e.coefficient)).unwrap();
                }
            }
        }
    }
    out
}

struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<&'a str> {
        loop {
            match self.iter.next() {
                Some((i, l)) => {
                    self.line = i + 1;
                    let l = l.trim_end();
                    if !l.is_empty() && !l.starts_with('#') {
                        return Ok(l);
                    }
                }
                None => return Err(Error::parse(self.line + 1, "unexpected end of file")),
            }
        }
    }

    fn peek_is_end(&self) -> bool {
        self.iter
            .clone()
            .all(|(_, l)| l.trim().is_empty() || l.trim_start().starts_with('#'))
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.line, msg)
    }

    fn num<T: std::str::FromStr>(&self, tok: Option<&str>, what: &str) -> Result<T> {
        tok.and_then(|t| t.parse().ok())
            .ok_or_else(|| self.err(format!("expected {what}")))
    }

    fn keyword(&mut self, key: &str) -> Result<&'a str> {
        let l = self.next()?;
        match l.strip_prefix(key) {
            Some(rest) if rest.starts_with(' ') => Ok(rest.trim_start()),
            _ => Err(self.err(format!("expected '{key}'"))),
        }
    }
}

/// Parses `key value` pairs from the tail of a node line.
fn pairs<'a>(lines: &Lines<'_>, toks: &[&'a str]) -> Result<HashMap<&'a str, &'a str>> {
    if toks.len() % 2 != 0 {
        return Err(lines.err("node line must hold key/value pairs"));
    }
    Ok(toks.chunks(2).map(|kv| (kv[0], kv[1])).collect())
}

pub fn read_tree(text: &str) -> Result<ClassifierTree> {
    let mut lines = Lines {
        iter: text.lines().enumerate(),
        line: 0,
    };
    if lines.next()? != MAGIC {
        return Err(lines.err(format!("expected '{MAGIC}'")));
    }
    let layout = match lines.keyword("layout")? {
        "per-node" => Layout::PerNode,
        "shared-pool" => Layout::SharedPool,
        other => return Err(lines.err(format!("unknown layout {other:?}"))),
    };
    let count = lines.keyword("classes")?;
    let n: usize = lines.num(Some(count), "class count")?;
    let mut classes = Vec::with_capacity(n);
    for _ in 0..n {
        let rest = lines.keyword("class")?;
        let mut toks = rest.splitn(4, ' ');
        let id = lines.num(toks.next(), "class id")?;
        let percent = lines.num(toks.next(), "percent")?;
        let probability = lines.num(toks.next(), "probability")?;
        let name = toks.next().unwrap_or("").to_string();
        classes.push(ActivityClass {
            id,
            name,
            probability,
            percent,
        });
    }
    let topo = lines.keyword("topology")?;
    let shape = parse_topology(topo).map_err(|e| lines.err(e.to_string()))?;
    let mut tree =
        ClassifierTree::from_shape(classes, &shape).map_err(|e| lines.err(e.to_string()))?;

    let mut pool: Vec<FeatureVector> = Vec::new();
    if layout == Layout::SharedPool {
        let rest = lines.keyword("pool")?;
        let toks: Vec<&str> = rest.split(' ').collect();
        let count: usize = lines.num(toks.first().copied(), "pool size")?;
        if toks.get(1) != Some(&"dim") {
            return Err(lines.err("expected 'pool <count> dim <d>'"));
        }
        let dim: usize = lines.num(toks.get(2).copied(), "pool dimension")?;
        for _ in 0..count {
            let l = lines.next()?;
            let values = l
                .split(' ')
                .map(|t| lines.num::<f64>(Some(t), "vector component"))
                .collect::<Result<Vec<_>>>()?;
            if values.len() != dim {
                return Err(lines.err(format!("expected {dim} components, found {}", values.len())));
            }
            pool.push(FeatureVector::new(values).map_err(|e| lines.err(e.to_string()))?);
        }
    }

    let internal: Vec<usize> = tree.internal_nodes().map(|(i, _)| i).collect();
    for &expected in &internal {
        let rest = lines.keyword("node")?;
        let toks: Vec<&str> = rest.split(' ').collect();
        let id: usize = lines.num(toks.first().copied(), "node id")?;
        if id != expected {
            return Err(lines.err(format!("expected node {expected}, found {id}")));
        }
        if toks.get(1) == Some(&"untrained") && toks.len() == 2 {
            continue;
        }
        let kv = pairs(&lines, &toks[1..])?;
        let bias: f64 = lines.num(kv.get("bias").copied(), "bias")?;
        let accuracy = match kv.get("accuracy") {
            Some(a) => Some(lines.num::<f64>(Some(a), "accuracy")?),
            None => None,
        };
        let model = match layout {
            Layout::PerNode => {
                let dim: usize = lines.num(kv.get("dim").copied(), "dim")?;
                let m: usize = lines.num(kv.get("entries").copied(), "entries")?;
                let mut entries = Vec::with_capacity(m);
                for _ in 0..m {
                    let l = lines.next()?;
                    let values = l
                        .split(' ')
                        .map(|t| lines.num::<f64>(Some(t), "number"))
                        .collect::<Result<Vec<_>>>()?;
                    if values.len() != dim + 1 {
                        return Err(lines.err(format!(
                            "expected coefficient and {dim} components, found {} numbers",
                            values.len()
                        )));
                    }
                    entries.push(SupportEntry {
                        coefficient: values[0],
                        vector: FeatureVector::new(values[1..].to_vec())
                            .map_err(|e| lines.err(e.to_string()))?,
                        source_id: None,
                    });
                }
                BinaryNodeModel {
                    entries,
                    bias,
                    trained_dimension: dim,
                }
            }
            Layout::SharedPool => {
                let m: usize = lines.num(kv.get("refs").copied(), "refs")?;
                let mut entries = Vec::with_capacity(m);
                for _ in 0..m {
                    let l = lines.next()?;
                    let mut toks = l.split(' ');
                    let idx: usize = lines.num(toks.next(), "pool index")?;
                    let coefficient: f64 = lines.num(toks.next(), "coefficient")?;
                    if toks.next().is_some() {
                        return Err(lines.err("trailing tokens after coefficient"));
                    }
                    let vector = pool
                        .get(idx)
                        .cloned()
                        .ok_or_else(|| lines.err(format!("pool index {idx} out of range")))?;
                    entries.push(SupportEntry {
                        vector,
                        coefficient,
                        source_id: None,
                    });
                }
                BinaryNodeModel {
                    entries,
                    bias,
                    trained_dimension: pool.first().map_or(0, |v| v.dim()),
                }
            }
        };
        if let TreeNode::Internal(node) = &mut tree.nodes_mut()[id] {
            node.model = Some(model);
            node.train_accuracy = accuracy;
        }
    }
    if !lines.peek_is_end() {
        lines.next()?;
        return Err(lines.err("trailing content"));
    }
    Ok(tree)
}

pub fn save_tree(tree: &ClassifierTree, path: impl AsRef<Path>, layout: Layout) -> Result<()> {
    write_text(path.as_ref(), &write_tree(tree, layout))
}

pub fn load_tree(path: impl AsRef<Path>) -> Result<ClassifierTree> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_tree(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::build_unconstrained;

    fn trained_pair() -> ClassifierTree {
        let cs = ActivityClass::from_weights(&[30.0, 70.0]).unwrap();
        let mut t = build_unconstrained(&cs).unwrap();
        if let TreeNode::Internal(n) = &mut t.nodes_mut()[0] {
            n.model = Some(BinaryNodeModel {
                entries: vec![
                    SupportEntry {
                        vector: FeatureVector::new(vec![0.1, -2.5]).unwrap(),
                        coefficient: 1.0 / 3.0,
                        source_id: Some(4),
                    },
                    SupportEntry {
                        vector: FeatureVector::new(vec![1e-300, 7.0]).unwrap(),
                        coefficient: -1.0 / 3.0,
                        source_id: Some(9),
                    },
                ],
                bias: std::f64::consts::PI,
                trained_dimension: 2,
            });
            n.train_accuracy = Some(0.9);
        }
        t
    }

    #[test]
    fn per_node_round_trip_is_exact() {
        let t = trained_pair();
        let text = write_tree(&t, Layout::PerNode);
        let back = read_tree(&text).unwrap();
        assert_eq!(write_tree(&back, Layout::PerNode), text);
        let (TreeNode::Internal(a), TreeNode::Internal(b)) = (&t.nodes()[0], &back.nodes()[0]) else {
            panic!()
        };
        let (ma, mb) = (a.model.as_ref().unwrap(), b.model.as_ref().unwrap());
        assert_eq!(ma.bias.to_bits(), mb.bias.to_bits());
        assert_eq!(ma.entries[1].vector, mb.entries[1].vector);
        assert_eq!(back.classes(), t.classes());
    }

    #[test]
    fn shared_pool_round_trip() {
        let t = trained_pair();
        let text = write_tree(&t, Layout::SharedPool);
        assert!(text.contains("pool 2 dim 2"));
        let back = read_tree(&text).unwrap();
        assert_eq!(write_tree(&back, Layout::PerNode), write_tree(&t, Layout::PerNode));
    }

    #[test]
    fn untrained_and_single_leaf() {
        let cs = ActivityClass::from_weights(&[100.0]).unwrap();
        let leaf = build_unconstrained(&cs).unwrap();
        assert_eq!(read_tree(&write_tree(&leaf, Layout::PerNode)).unwrap(), leaf);
        let cs = ActivityClass::from_weights(&[1.0, 2.0, 3.0]).unwrap();
        let shape_only = build_unconstrained(&cs).unwrap();
        let text = write_tree(&shape_only, Layout::PerNode);
        assert!(text.contains("untrained"));
        assert_eq!(read_tree(&text).unwrap(), shape_only);
    }

    #[test]
    fn malformed_input_reports_line() {
        let text = write_tree(&trained_pair(), Layout::PerNode);
        let broken = text.replacen("bias", "bias x", 1);
        let err = read_tree(&broken).unwrap_err();
        assert!(err.to_string().contains("parse error at line 7"), "{err}");
        assert!(read_tree("nonsense").is_err());
        let truncated: String = text.lines().take(7).collect::<Vec<_>>().join("\n");
        assert!(read_tree(&truncated).is_err());
    }
}
