//! Accuracy measurement, epsilon sweeps and report output.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{stratified_split, write_text, LabeledDataset, Split};
use crate::error::{Error, Result};
use crate::moc::{self, DEFAULT_EXACT_LIMIT};
use crate::svm::TrainConfig;
use crate::tree::{self, ActivityClass, ClassifierTree, TreeStats};

pub const CSV_HEADER: &str = "epsilon,savings_pct,accuracy,final_stored,overlap_count,meets_floor";
pub const DEFAULT_GRID_POINTS: usize = 21;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Radii in raw feature units, ascending, starting at 0.
    pub epsilon_grid: Vec<f64>,
    /// Minimum acceptable accuracy in `[0, 1]`.
    pub accuracy_floor: f64,
    pub exact_oracle: bool,
    pub split_seed: u64,
    pub exact_limit: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            epsilon_grid: vec![0.0],
            accuracy_floor: 0.5,
            exact_oracle: false,
            split_seed: 7,
            exact_limit: DEFAULT_EXACT_LIMIT,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let g = &self.epsilon_grid;
        if g.first() != Some(&0.0) {
            return Err(Error::InvalidConfig(
                "epsilon grid must start at 0".into(),
            ));
        }
        if g.iter().any(|e| !e.is_finite()) || g.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidConfig(
                "epsilon grid must be finite and ascending".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.accuracy_floor) {
            return Err(Error::InvalidConfig(
                "accuracy floor must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub epsilon: f64,
    pub savings_pct: f64,
    pub accuracy: f64,
    pub final_stored: usize,
    pub overlap_count: usize,
    pub meets_floor: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub tree_stats: TreeStats,
    pub config: SweepConfig,
    pub records: Vec<SweepRecord>,
}

impl SweepReport {
    pub fn any_meets_floor(&self) -> bool {
        self.records.iter().any(|r| r.meets_floor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Text,
}

pub fn accuracy(tree: &ClassifierTree, test: &LabeledDataset) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::Empty("test set"));
    }
    let mut correct = 0usize;
    for (x, &label) in test.features.iter().zip(&test.labels) {
        if tree::classify_sample(tree, x)?.0 == label {
            correct += 1;
        }
    }
    Ok(correct as f64 / test.len() as f64)
}

/// `points` radii from 0 to twice the median nearest-neighbor distance
/// among the distinct support vectors of `tree`.
pub fn default_grid(tree: &ClassifierTree, points: usize) -> Result<Vec<f64>> {
    let isvs = moc::collect_initial_svs(tree)?;
    let pool = moc::candidate_pool(&[], &isvs);
    if pool.len() < 2 || points < 2 {
        return Ok(vec![0.0]);
    }
    let mut nn: Vec<f64> = pool
        .iter()
        .map(|a| {
            pool.iter()
                .filter(|b| b.candidate_index != a.candidate_index)
                .map(|b| a.vector.distance(&b.vector))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    nn.sort_by(f64::total_cmp);
    let mid = nn.len() / 2;
    let median = if nn.len() % 2 == 0 {
        0.5 * (nn[mid - 1] + nn[mid])
    } else {
        nn[mid]
    };
    let top = 2.0 * median;
    Ok((0..points)
        .map(|k| top * k as f64 / (points - 1) as f64)
        .collect())
}

/// For each radius: coverage, cover (exact when enabled and small enough,
/// greedy otherwise), model rebuild, savings and held-out accuracy.
pub fn sweep_epsilon(tree: &ClassifierTree, split: &Split, cfg: &SweepConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let isvs = moc::collect_initial_svs(tree)?;
    let pool = moc::candidate_pool(&split.train.features, &isvs);
    let use_exact = cfg.exact_oracle && isvs.len() <= cfg.exact_limit;

    let records = cfg
        .epsilon_grid
        .par_iter()
        .map(|&epsilon| {
            let cov = moc::enumerate_secondary(&isvs, &pool, epsilon)?;
            let sel = if use_exact {
                moc::exact_moc(&cov, cfg.exact_limit)?
            } else {
                moc::greedy_moc(&cov)?
            };
            let rebuilt = moc::rebuild_models(tree, &sel, &pool, &split.train)?;
            let saved = moc::savings(tree, &sel)?;
            let acc = accuracy(&rebuilt, &split.test)?;
            Ok(SweepRecord {
                epsilon,
                savings_pct: saved.savings_pct,
                accuracy: acc,
                final_stored: saved.final_stored,
                overlap_count: saved.overlap_count,
                meets_floor: acc >= cfg.accuracy_floor,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SweepReport {
        tree_stats: tree::tree_stats(tree),
        config: cfg.clone(),
        records,
    })
}

/// One tree per class distribution over the same dataset, each trained on
/// the same stratified split and swept over the same grid.
pub fn compare_structures(
    distributions: &[Vec<f64>],
    dataset: &LabeledDataset,
    cfg: &SweepConfig,
    train_cfg: &TrainConfig,
) -> Result<Vec<(TreeStats, SweepReport)>> {
    cfg.validate()?;
    let ids = dataset.class_ids();
    for probs in distributions {
        if probs.len() != ids.len() {
            return Err(Error::Arity {
                expected: ids.len(),
                got: probs.len(),
            });
        }
    }
    let split = stratified_split(dataset, cfg.split_seed)?;
    distributions
        .iter()
        .map(|probs| {
            let classes = ActivityClass::with_ids(&ids, probs)?;
            let shape = tree::build_unconstrained(&classes)?;
            let trained = tree::attach_classifiers(&shape, &split.train, train_cfg)?;
            let report = sweep_epsilon(&trained, &split, cfg)?;
            Ok((report.tree_stats.clone(), report))
        })
        .collect()
}

pub fn report_csv(report: &SweepReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &report.records {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.epsilon, r.savings_pct, r.accuracy, r.final_stored, r.overlap_count, r.meets_floor
        )
        .unwrap();
    }
    out
}

pub fn parse_report_csv(text: &str) -> Result<Vec<SweepRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == CSV_HEADER => {}
        _ => return Err(Error::SchemaMismatch(format!("expected header {CSV_HEADER:?}"))),
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let line = i + 1;
            let f: Vec<&str> = l.trim_end().split(',').collect();
            if f.len() != 6 {
                return Err(Error::parse(line, format!("expected 6 fields, found {}", f.len())));
            }
            let bad = |what: &str| Error::parse(line, format!("bad {what}"));
            Ok(SweepRecord {
                epsilon: f[0].parse().map_err(|_| bad("epsilon"))?,
                savings_pct: f[1].parse().map_err(|_| bad("savings_pct"))?,
                accuracy: f[2].parse().map_err(|_| bad("accuracy"))?,
                final_stored: f[3].parse().map_err(|_| bad("final_stored"))?,
                overlap_count: f[4].parse().map_err(|_| bad("overlap_count"))?,
                meets_floor: f[5].parse().map_err(|_| bad("meets_floor"))?,
            })
        })
        .collect()
}

/// Full report, including tree statistics and the configuration, as TOML.
pub fn report_text(report: &SweepReport) -> String {
    toml::to_string(report).expect("sweep reports are representable as TOML")
}

pub fn parse_report_text(text: &str) -> Result<SweepReport> {
    toml::from_str(text).map_err(|e| Error::parse(0, e.to_string()))
}

pub fn emit_report(report: &SweepReport, path: impl AsRef<Path>, format: ReportFormat) -> Result<()> {
    let text = match format {
        ReportFormat::Csv => report_csv(report),
        ReportFormat::Text => report_text(report),
    };
    write_text(path.as_ref(), &text)
}

pub fn load_report_csv(path: impl AsRef<Path>) -> Result<Vec<SweepRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_report_csv(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report(n: usize) -> SweepReport {
        SweepReport {
            tree_stats: TreeStats {
                depth: 3,
                expected_instructions: 250.0,
                initial_overlap_pct: Some(12.5),
                node_support_counts: vec![4, 4],
                node_train_accuracy: vec![1.0, 0.95],
            },
            config: SweepConfig {
                epsilon_grid: (0..n).map(|k| k as f64 * 0.1).collect(),
                ..SweepConfig::default()
            },
            records: (0..n)
                .map(|k| SweepRecord {
                    epsilon: k as f64 * 0.1,
                    savings_pct: 100.0 / 3.0 + k as f64,
                    accuracy: 1.0 - k as f64 / 70.0,
                    final_stored: 20 - k,
                    overlap_count: k,
                    meets_floor: k % 2 == 0,
                })
                .collect(),
        }
    }

    #[test]
    fn csv_has_header_plus_rows() {
        let text = report_csv(&sample_report(11));
        assert_eq!(text.lines().count(), 12);
        assert_eq!(text.lines().next(), Some(CSV_HEADER));
    }

    #[test]
    fn csv_round_trip() {
        let report = sample_report(11);
        assert_eq!(parse_report_csv(&report_csv(&report)).unwrap(), report.records);
    }

    #[test]
    fn text_round_trip() {
        let report = sample_report(4);
        assert_eq!(parse_report_text(&report_text(&report)).unwrap(), report);
    }

    #[test]
    fn grid_validation() {
        let mut cfg = SweepConfig::default();
        cfg.epsilon_grid = vec![];
        assert!(cfg.validate().is_err());
        cfg.epsilon_grid = vec![0.1, 0.2];
        assert!(cfg.validate().is_err());
        cfg.epsilon_grid = vec![0.0, 0.2, 0.1];
        assert!(cfg.validate().is_err());
        cfg.epsilon_grid = vec![0.0, 0.1];
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn empty_test_set() {
        let t = tree::build_unconstrained(&ActivityClass::from_weights(&[1.0]).unwrap()).unwrap();
        let empty = LabeledDataset::new(vec![], vec![]).unwrap();
        assert!(matches!(accuracy(&t, &empty), Err(Error::Empty(_))));
    }
}
