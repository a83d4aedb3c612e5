//! Sensor CSV ingestion, windowed feature extraction and seeded synthetic
//! datasets.
//!
//! Synthetic data uses ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64(seed)`; class `c` draws from its own stream
//! (`set_stream(c)`), so adding classes never perturbs earlier ones.
//! Gaussian noise comes from `rand_distr::StandardNormal`.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::svm::FeatureVector;
use crate::tree::ActivityClass;

/// Channels of a 3-axis accelerometer and a 2-axis gyroscope.
pub const DEFAULT_CHANNELS: [&str; 5] = ["ax", "ay", "az", "gx", "gy"];
pub const DEFAULT_SAMPLE_RATE: f64 = 50.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawRecording {
    pub timestamps: Vec<f64>,
    pub channels: Vec<Channel>,
    pub labels: Vec<usize>,
    pub sample_rate: f64,
}

impl RawRecording {
    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }
}

/// Expected CSV layout: `t,<channels...>,label`.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvSchema {
    /// Channel column names in order; empty accepts whatever the header has.
    pub channels: Vec<String>,
    pub sample_rate: f64,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            channels: DEFAULT_CHANNELS.iter().map(|s| s.to_string()).collect(),
            sample_rate: DEFAULT_SAMPLE_RATE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    pub length: usize,
    pub stride: usize,
}

impl WindowSpec {
    /// Two-second windows with a one-second stride.
    pub fn for_rate(sample_rate: f64) -> Self {
        let second = sample_rate.round().max(1.0) as usize;
        WindowSpec {
            length: 2 * second,
            stride: second,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.stride == 0 || self.stride > self.length {
            return Err(Error::InvalidConfig(format!(
                "window stride must satisfy 0 < stride <= length, got {}/{}",
                self.stride, self.length
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub features: Vec<FeatureVector>,
    pub labels: Vec<usize>,
    /// Classes sorted by id with empirical probabilities.
    pub classes: Vec<ActivityClass>,
    /// Sample count per class, aligned with `classes`.
    pub counts: Vec<usize>,
}

impl LabeledDataset {
    pub fn new(features: Vec<FeatureVector>, labels: Vec<usize>) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::Shape {
                expected: features.len(),
                got: labels.len(),
            });
        }
        if let Some(first) = features.first() {
            let dim = first.dim();
            if let Some(bad) = features.iter().find(|f| f.dim() != dim) {
                return Err(Error::Shape {
                    expected: dim,
                    got: bad.dim(),
                });
            }
        }
        let mut tally: BTreeMap<usize, usize> = BTreeMap::new();
        for &l in &labels {
            *tally.entry(l).or_default() += 1;
        }
        let (classes, counts) = if tally.is_empty() {
            (Vec::new(), Vec::new())
        } else {
            let ids: Vec<usize> = tally.keys().copied().collect();
            let counts: Vec<usize> = tally.values().copied().collect();
            let weights: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
            (ActivityClass::with_ids(&ids, &weights)?, counts)
        };
        Ok(LabeledDataset {
            features,
            labels,
            classes,
            counts,
        })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.features.first().map_or(0, |f| f.dim())
    }

    pub fn class_ids(&self) -> Vec<usize> {
        self.classes.iter().map(|c| c.id).collect()
    }

    fn subset(&self, idx: &[usize]) -> Result<LabeledDataset> {
        LabeledDataset::new(
            idx.iter().map(|&i| self.features[i].clone()).collect(),
            idx.iter().map(|&i| self.labels[i]).collect(),
        )
    }

    /// Dataset CSV: header `label,f0,...,f{d-1}`, one sample per row.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("label");
        for k in 0..self.dimension() {
            out.push_str(&format!(",f{k}"));
        }
        out.push('\n');
        for (x, l) in self.features.iter().zip(&self.labels) {
            out.push_str(&l.to_string());
            for v in x.iter() {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .quoting(false)
            .flexible(true)
            .from_reader(text.as_bytes());
        let mut records = rdr.records();
        let header = match records.next() {
            Some(h) => h.map_err(|e| Error::parse(1, e.to_string()))?,
            None => return Err(Error::Empty("dataset file")),
        };
        if header.get(0) != Some("label") {
            return Err(Error::SchemaMismatch(
                "dataset header must start with 'label'".into(),
            ));
        }
        let dim = header.len() - 1;
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for rec in records {
            let rec = rec.map_err(|e| Error::parse(0, e.to_string()))?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            if rec.len() != dim + 1 {
                return Err(Error::parse(
                    line,
                    format!("expected {} fields, found {}", dim + 1, rec.len()),
                ));
            }
            labels.push(
                rec[0]
                    .parse::<usize>()
                    .map_err(|_| Error::parse(line, format!("bad label {:?}", &rec[0])))?,
            );
            let values = rec
                .iter()
                .skip(1)
                .map(|s| parse_cell(s, line))
                .collect::<Result<Vec<f64>>>()?;
            features.push(FeatureVector::new(values).map_err(|e| Error::parse(line, e.to_string()))?);
        }
        LabeledDataset::new(features, labels)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_str(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_text(path.as_ref(), &self.to_csv_string())
    }
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

fn parse_cell(s: &str, line: usize) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::parse(line, format!("non-numeric cell {s:?}")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("non-finite cell {s:?}")));
    }
    Ok(v)
}

pub fn parse_csv(text: &str, schema: &CsvSchema) -> Result<RawRecording> {
    if !(schema.sample_rate > 0.0 && schema.sample_rate.is_finite()) {
        return Err(Error::InvalidConfig("sample rate must be positive".into()));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .quoting(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = rdr.records();
    let header = match records.next() {
        Some(h) => h.map_err(|e| Error::parse(1, e.to_string()))?,
        None => return Err(Error::SchemaMismatch("missing header row".into())),
    };
    let cols: Vec<&str> = header.iter().map(str::trim).collect();
    if cols.first() != Some(&"t") {
        return Err(Error::SchemaMismatch("first column must be 't'".into()));
    }
    if cols.len() < 2 || cols.last() != Some(&"label") {
        return Err(Error::SchemaMismatch("last column must be 'label'".into()));
    }
    let names: Vec<String> = cols[1..cols.len() - 1].iter().map(|s| s.to_string()).collect();
    if !schema.channels.is_empty() && names != schema.channels {
        return Err(Error::SchemaMismatch(format!(
            "expected channels {:?}, found {:?}",
            schema.channels, names
        )));
    }

    let mut timestamps = Vec::new();
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    let mut labels = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| Error::parse(0, e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != cols.len() {
            return Err(Error::parse(
                line,
                format!("expected {} fields, found {}", cols.len(), rec.len()),
            ));
        }
        timestamps.push(parse_cell(&rec[0], line)?);
        for (k, column) in values.iter_mut().enumerate() {
            column.push(parse_cell(&rec[k + 1], line)?);
        }
        let raw = rec[cols.len() - 1].trim();
        labels.push(
            raw.parse()
                .map_err(|_| Error::parse(line, format!("bad label {raw:?}")))?,
        );
    }

    Ok(RawRecording {
        timestamps,
        channels: names
            .into_iter()
            .zip(values)
            .map(|(name, values)| Channel { name, values })
            .collect(),
        labels,
        sample_rate: schema.sample_rate,
    })
}

pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<RawRecording> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, schema)
}

/// Canonical CSV text: shortest round-trip decimals, `\n` line endings.
pub fn to_csv_string(rec: &RawRecording) -> String {
    let mut out = String::from("t");
    for ch in &rec.channels {
        out.push(',');
        out.push_str(&ch.name);
    }
    out.push_str(",label\n");
    for i in 0..rec.len() {
        out.push_str(&rec.timestamps[i].to_string());
        for ch in &rec.channels {
            out.push(',');
            out.push_str(&ch.values[i].to_string());
        }
        out.push(',');
        out.push_str(&rec.labels[i].to_string());
        out.push('\n');
    }
    out
}

pub fn write_csv(rec: &RawRecording, path: impl AsRef<Path>) -> Result<()> {
    write_text(path.as_ref(), &to_csv_string(rec))
}

/// Per window and channel: mean, population standard deviation, min, max.
/// The window label is the majority sample label (ties to the smaller id).
pub fn extract_features(rec: &RawRecording, spec: &WindowSpec) -> Result<LabeledDataset> {
    spec.validate()?;
    let len = rec.len();
    if len < spec.length {
        return Err(Error::TooShort {
            len,
            window: spec.length,
        });
    }
    let windows = (len - spec.length) / spec.stride + 1;
    let mut features = Vec::with_capacity(windows);
    let mut labels = Vec::with_capacity(windows);
    for w in 0..windows {
        let range = w * spec.stride..w * spec.stride + spec.length;
        let mut values = Vec::with_capacity(4 * rec.channels.len());
        for ch in &rec.channels {
            let xs = &ch.values[range.clone()];
            let n = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / n;
            let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
            let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
            let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            values.extend([mean, var.sqrt(), min, max]);
        }
        features.push(FeatureVector::new(values)?);

        let mut votes: BTreeMap<usize, usize> = BTreeMap::new();
        for &l in &rec.labels[range] {
            *votes.entry(l).or_default() += 1;
        }
        let best = votes.values().copied().max().unwrap_or(0);
        labels.push(votes.into_iter().find(|&(_, c)| c == best).map_or(0, |(l, _)| l));
    }
    LabeledDataset::new(features, labels)
}

fn default_spread() -> f64 {
    1.0
}

fn default_separation() -> f64 {
    4.0
}

fn default_samples() -> usize {
    100
}

/// Isotropic Gaussian blobs, one per class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_classes: usize,
    pub dimension: usize,
    /// Explicit class means; when absent, class `c` sits at
    /// `+-separation` on axis `c mod dimension`.
    #[serde(default)]
    pub means: Option<Vec<Vec<f64>>>,
    #[serde(default = "default_spread")]
    pub spread: f64,
    #[serde(default = "default_separation")]
    pub separation: f64,
    #[serde(default = "default_samples")]
    pub samples_per_class: usize,
    #[serde(default)]
    pub seed: u64,
}

impl SynthSpec {
    pub fn new(n_classes: usize, dimension: usize, seed: u64) -> Self {
        SynthSpec {
            n_classes,
            dimension,
            means: None,
            spread: default_spread(),
            separation: default_separation(),
            samples_per_class: default_samples(),
            seed,
        }
    }

    pub fn class_means(&self) -> Result<Vec<Vec<f64>>> {
        if let Some(means) = &self.means {
            if means.len() != self.n_classes {
                return Err(Error::Arity {
                    expected: self.n_classes,
                    got: means.len(),
                });
            }
            if let Some(bad) = means.iter().find(|m| m.len() != self.dimension) {
                return Err(Error::Shape {
                    expected: self.dimension,
                    got: bad.len(),
                });
            }
            return Ok(means.clone());
        }
        if self.n_classes <= 2 * self.dimension {
            return Ok((0..self.n_classes)
                .map(|c| {
                    let mut m = vec![0.0; self.dimension];
                    let sign = if c < self.dimension { 1.0 } else { -1.0 };
                    m[c % self.dimension] = sign * self.separation;
                    m
                })
                .collect());
        }
        // Too many classes for signed axes: random directions.
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(u64::MAX);
        Ok((0..self.n_classes)
            .map(|_| {
                let v: Vec<f64> = (0..self.dimension)
                    .map(|_| StandardNormal.sample(&mut rng))
                    .collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
                v.into_iter().map(|x| x / norm * self.separation).collect()
            })
            .collect())
    }
}

pub fn synth_generate(spec: &SynthSpec) -> Result<LabeledDataset> {
    if spec.n_classes == 0 {
        return Err(Error::EmptySpec);
    }
    if spec.dimension == 0 || !(spec.spread >= 0.0 && spec.spread.is_finite()) {
        return Err(Error::InvalidConfig(
            "synthetic spec needs dimension > 0 and a finite spread".into(),
        ));
    }
    let means = spec.class_means()?;
    let mut features = Vec::with_capacity(spec.n_classes * spec.samples_per_class);
    let mut labels = Vec::with_capacity(features.capacity());
    for (c, mean) in means.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(c as u64);
        for _ in 0..spec.samples_per_class {
            let x: Vec<f64> = mean
                .iter()
                .map(|m| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    m + spec.spread * z
                })
                .collect();
            features.push(FeatureVector::new(x)?);
            labels.push(c);
        }
    }
    LabeledDataset::new(features, labels)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: LabeledDataset,
    pub test: LabeledDataset,
}

pub const TRAIN_FRACTION: f64 = 0.7;

/// Stratified split: each class is shuffled with its own seeded stream and
/// `round(0.7 * count)` samples (at least one) go to training. Both halves
/// keep the original sample order.
pub fn stratified_split(data: &LabeledDataset, seed: u64) -> Result<Split> {
    if data.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for class in &data.classes {
        let mut idx: Vec<usize> = (0..data.len()).filter(|&i| data.labels[i] == class.id).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(class.id as u64);
        idx.shuffle(&mut rng);
        let n_train = ((idx.len() as f64 * TRAIN_FRACTION).round() as usize).clamp(1, idx.len());
        train_idx.extend_from_slice(&idx[..n_train]);
        test_idx.extend_from_slice(&idx[n_train..]);
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok(Split {
        train: data.subset(&train_idx)?,
        test: data.subset(&test_idx)?,
    })
}
