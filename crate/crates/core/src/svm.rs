//! Binary linear SVMs stored as explicit support-vector sets.
//!
//! A trained [`BinaryNodeModel`] evaluates
//! `f(x) = sum_i coef_i * <sv_i, x> + bias`, where `coef_i` is the fused
//! product of the dual multiplier and the label of support vector `i`.
//! Keeping the support vectors explicit (instead of collapsing them into a
//! weight vector) is what lets the overlap optimizer substitute and share
//! vectors between tree nodes.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A fixed-dimension vector of finite reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "feature component {pos} is not finite"
            )));
        }
        Ok(FeatureVector(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        dot(&self.0, other)
    }

    pub fn distance(&self, other: &FeatureVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Exact component-wise equality, treating `0.0` and `-0.0` as distinct.
    pub fn bitwise_eq(&self, other: &FeatureVector) -> bool {
        self.0.len() == other.0.len()
            && self
                .0
                .iter()
                .zip(&other.0)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }

    pub(crate) fn bit_key(&self) -> Vec<u64> {
        self.0.iter().map(|v| v.to_bits()).collect()
    }
}

impl Deref for FeatureVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for FeatureVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        FeatureVector::new(values)
    }
}

impl From<FeatureVector> for Vec<f64> {
    fn from(v: FeatureVector) -> Self {
        v.0
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportEntry {
    pub vector: FeatureVector,
    /// `alpha_i * y_i`.
    pub coefficient: f64,
    /// Index of the originating training sample, when known.
    pub source_id: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryNodeModel {
    pub entries: Vec<SupportEntry>,
    pub bias: f64,
    pub trained_dimension: usize,
}

/// Which child a binary node routes a sample to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub c: f64,
    pub kkt_tolerance: f64,
    /// The solver stops after `max_passes * n_samples` pair updates.
    pub max_passes: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            c: 1.0,
            kkt_tolerance: 1e-3,
            max_passes: 1000,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidConfig(format!("C must be positive, got {}", self.c)));
        }
        if !(self.kkt_tolerance > 0.0 && self.kkt_tolerance.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "kkt_tolerance must be positive, got {}",
                self.kkt_tolerance
            )));
        }
        Ok(())
    }
}

impl BinaryNodeModel {
    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.trained_dimension {
            return Err(Error::Shape {
                expected: self.trained_dimension,
                got: x.len(),
            });
        }
        Ok(self.raw_decision(x) + self.bias)
    }

    /// Returns [`Side::Left`] when `f(x) >= 0`.
    pub fn classify(&self, x: &[f64]) -> Result<Side> {
        Ok(if self.decision_value(x)? >= 0.0 {
            Side::Left
        } else {
            Side::Right
        })
    }

    /// `f(x) - bias`, without the dimension check.
    pub(crate) fn raw_decision(&self, x: &[f64]) -> f64 {
        self.entries
            .iter()
            .map(|e| e.coefficient * e.vector.dot(x))
            .sum()
    }

    pub fn coefficient_sum(&self) -> f64 {
        self.entries.iter().map(|e| e.coefficient).sum()
    }
}

pub fn decision_value(model: &BinaryNodeModel, x: &FeatureVector) -> Result<f64> {
    model.decision_value(x)
}

pub fn classify_binary(model: &BinaryNodeModel, x: &FeatureVector) -> Result<Side> {
    model.classify(x)
}

const TAU: f64 = 1e-12;

/// Gram matrix, materialized when small enough, otherwise computed per row.
struct Gram<'a> {
    samples: &'a [&'a FeatureVector],
    full: Option<Vec<f64>>,
    diag: Vec<f64>,
}

impl<'a> Gram<'a> {
    const MAX_CACHED: usize = 4_000_000;

    fn new(samples: &'a [&'a FeatureVector]) -> Self {
        let n = samples.len();
        let diag = samples.iter().map(|s| s.dot(s)).collect();
        let full = (n * n <= Self::MAX_CACHED).then(|| {
            let mut k = vec![0.0; n * n];
            for i in 0..n {
                for j in i..n {
                    let v = samples[i].dot(samples[j]);
                    k[i * n + j] = v;
                    k[j * n + i] = v;
                }
            }
            k
        });
        Gram {
            samples,
            full,
            diag,
        }
    }

    fn row(&self, i: usize, out: &mut Vec<f64>) {
        let n = self.samples.len();
        out.clear();
        match &self.full {
            Some(k) => out.extend_from_slice(&k[i * n..(i + 1) * n]),
            None => out.extend(self.samples.iter().map(|s| s.dot(self.samples[i]))),
        }
    }
}

/// Trains a linear soft-margin SVM with sequential minimal optimization.
///
/// Working pairs are chosen by the maximal-violating-pair rule with
/// second-order selection of the partner; ties resolve to the lowest sample
/// index, so results are a pure function of the inputs.
pub fn train_binary(
    samples: &[FeatureVector],
    labels: &[i8],
    cfg: &TrainConfig,
) -> Result<BinaryNodeModel> {
    let refs: Vec<&FeatureVector> = samples.iter().collect();
    let ids: Vec<usize> = (0..samples.len()).collect();
    train_indexed(&refs, labels, &ids, cfg)
}

pub(crate) fn train_indexed(
    samples: &[&FeatureVector],
    labels: &[i8],
    source_ids: &[usize],
    cfg: &TrainConfig,
) -> Result<BinaryNodeModel> {
    cfg.validate()?;
    if samples.is_empty() {
        return Err(Error::Empty("training set"));
    }
    if labels.len() != samples.len() {
        return Err(Error::Shape {
            expected: samples.len(),
            got: labels.len(),
        });
    }
    let dim = samples[0].dim();
    if let Some(bad) = samples.iter().find(|s| s.dim() != dim) {
        return Err(Error::Shape {
            expected: dim,
            got: bad.dim(),
        });
    }
    if labels.iter().any(|&y| y != 1 && y != -1) {
        return Err(Error::InvalidConfig("labels must be +1 or -1".into()));
    }
    if !(labels.contains(&1) && labels.contains(&-1)) {
        return Err(Error::DegenerateLabels);
    }

    let n = samples.len();
    let c = cfg.c;
    let eps = cfg.kkt_tolerance;
    let y: Vec<f64> = labels.iter().map(|&l| f64::from(l)).collect();
    let gram = Gram::new(samples);
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut row_i = Vec::with_capacity(n);
    let mut row_j = Vec::with_capacity(n);

    let in_up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let in_low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);

    let max_iter = cfg.max_passes.max(1).saturating_mul(n);
    for _ in 0..max_iter {
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            if in_up(alpha[t], y[t]) {
                let v = -y[t] * grad[t];
                if v > gmax {
                    gmax = v;
                    i_sel = Some(t);
                }
            }
        }
        let Some(i) = i_sel else { break };
        gram.row(i, &mut row_i);

        let mut gmax2 = f64::NEG_INFINITY;
        let mut best_obj = f64::INFINITY;
        let mut j_sel = None;
        for t in 0..n {
            if !in_low(alpha[t], y[t]) {
                continue;
            }
            let v = y[t] * grad[t];
            if v > gmax2 {
                gmax2 = v;
            }
            let b = gmax + v;
            if b > 0.0 {
                let mut a = gram.diag[i] + gram.diag[t] - 2.0 * row_i[t];
                if a <= 0.0 {
                    a = TAU;
                }
                let obj = -(b * b) / a;
                if obj < best_obj {
                    best_obj = obj;
                    j_sel = Some(t);
                }
            }
        }
        if gmax + gmax2 < eps {
            break;
        }
        let Some(j) = j_sel else { break };
        gram.row(j, &mut row_j);

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let mut quad = gram.diag[i] + gram.diag[j] - 2.0 * row_i[j];
        if quad <= 0.0 {
            quad = TAU;
        }
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let di = alpha[i] - old_i;
        let dj = alpha[j] - old_j;
        for t in 0..n {
            grad[t] += y[t] * (y[i] * row_i[t] * di + y[j] * row_j[t] * dj);
        }
    }

    // Offset from free vectors, or the midpoint of the feasible interval.
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free_sum, mut free_count) = (0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free_sum += yg;
            free_count += 1;
        }
    }
    let rho = if free_count > 0 {
        free_sum / free_count as f64
    } else {
        (ub + lb) / 2.0
    };

    let entries = (0..n)
        .filter(|&t| alpha[t] > 0.0)
        .map(|t| SupportEntry {
            vector: samples[t].clone(),
            coefficient: alpha[t] * y[t],
            source_id: Some(source_ids[t]),
        })
        .collect();

    Ok(BinaryNodeModel {
        entries,
        bias: -rho,
        trained_dimension: dim,
    })
}
