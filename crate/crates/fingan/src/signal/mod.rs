//! RF environment, path-loss simulation, datasets, and RP splits.

mod csv;

pub use csv::{load_csv, save_csv};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::stream;

#[derive(Debug, Error)]
pub enum SignalError {
    #[error("reference point coincides with RU {ru_index} at ({x}, {y})")]
    ZeroDistance { ru_index: usize, x: f64, y: f64 },
    #[error("split by RP needs at least 3 distinct RPs, got {0}")]
    TooFewRps(usize),
    #[error("split fractions must be non-negative and sum to 1, got {0:?}")]
    BadFractions([f64; 3]),
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: row has {got} RSS values, expected {expected}")]
    DimensionMismatch { line: usize, expected: usize, got: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A 2-D point in meters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn dist(self, other: Point2) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Exact-bits key for grouping samples by RP.
    pub fn bit_key(self) -> (u64, u64) {
        (self.x.to_bits(), self.y.to_bits())
    }
}

/// Logarithm convention for the path-loss term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LogBase {
    /// `P0 - alpha * ln(d)`.
    #[default]
    Natural,
    /// `P0 - 10 * alpha * log10(d)`.
    Db10,
}

/// RF environment: RU geometry and the log-distance channel parameters.
///
/// The transmit power, antenna gain, and mean fading gain are not modelled
/// separately: only their sum reaches a fingerprint, so they are absorbed
/// into `reference_power`, and fading fluctuations into the Gaussian noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSpec {
    pub ru_positions: Vec<Point2>,
    pub path_loss_exponent: f64,
    /// dBm offset at unit distance.
    #[serde(default)]
    pub reference_power: f64,
    /// Standard deviation of the additive Gaussian noise, in dB.
    pub noise_sigma: f64,
    /// `(width, height)` of the area in meters.
    pub area: (f64, f64),
    #[serde(default)]
    pub log_base: LogBase,
}

impl EnvironmentSpec {
    pub fn num_rus(&self) -> usize {
        self.ru_positions.len()
    }

    pub fn validate(&self) -> Result<(), SignalError> {
        if self.ru_positions.is_empty() {
            return Err(SignalError::InvalidSpec("ru_positions must be non-empty".into()));
        }
        if !self.ru_positions.iter().all(|p| p.is_finite()) {
            return Err(SignalError::InvalidSpec("RU positions must be finite".into()));
        }
        if !(self.path_loss_exponent > 0.0) {
            return Err(SignalError::InvalidSpec(format!(
                "path_loss_exponent must be > 0, got {}",
                self.path_loss_exponent
            )));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(SignalError::InvalidSpec(format!(
                "noise_sigma must be >= 0, got {}",
                self.noise_sigma
            )));
        }
        if !(self.area.0 > 0.0 && self.area.1 > 0.0) {
            return Err(SignalError::InvalidSpec("area extents must be positive".into()));
        }
        Ok(())
    }
}

/// Regular training grid of `rows x cols` cells with resolution `resolution`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    pub resolution: f64,
    #[serde(default = "origin_default")]
    pub origin: Point2,
}

fn origin_default() -> Point2 {
    Point2::new(0.0, 0.0)
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), SignalError> {
        if self.rows * self.cols < 1 {
            return Err(SignalError::InvalidSpec("grid must have at least one cell".into()));
        }
        if !(self.resolution > 0.0) {
            return Err(SignalError::InvalidSpec(format!(
                "resolution must be > 0, got {}",
                self.resolution
            )));
        }
        if !self.origin.is_finite() {
            return Err(SignalError::InvalidSpec("grid origin must be finite".into()));
        }
        Ok(())
    }

    /// Checks that every cell center lies inside the environment's area.
    pub fn validate_within(&self, env: &EnvironmentSpec) -> Result<(), SignalError> {
        self.validate()?;
        for p in build_grid(self) {
            if p.x < 0.0 || p.x > env.area.0 || p.y < 0.0 || p.y > env.area.1 {
                return Err(SignalError::InvalidSpec(format!(
                    "grid center ({}, {}) outside area {:?}",
                    p.x, p.y, env.area
                )));
            }
        }
        Ok(())
    }
}

/// One fingerprint: an RP plus the RSS vector observed there (dBm, one entry
/// per RU).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RssSample {
    pub rp: Point2,
    pub rss: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }

    pub fn parse(s: &str) -> Option<Split> {
        match s {
            "train" => Some(Split::Train),
            "val" => Some(Split::Val),
            "test" => Some(Split::Test),
            _ => None,
        }
    }
}

/// A bag of fingerprints over a fixed RU count, optionally tagged by split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FingerprintDataset {
    pub samples: Vec<RssSample>,
    pub num_rus: usize,
    /// Per-sample split tags, parallel to `samples`, when a split exists.
    pub split_tags: Option<Vec<Split>>,
}

impl FingerprintDataset {
    pub fn new(num_rus: usize) -> Self {
        FingerprintDataset { samples: Vec::new(), num_rus, split_tags: None }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Distinct RPs in first-occurrence order.
    pub fn distinct_rps(&self) -> Vec<Point2> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        for s in &self.samples {
            if seen.insert(s.rp.bit_key()) {
                out.push(s.rp);
            }
        }
        out
    }

    /// Samples carrying the given tag, as a new dataset (tags dropped).
    pub fn split(&self, which: Split) -> FingerprintDataset {
        let mut out = FingerprintDataset::new(self.num_rus);
        if let Some(tags) = &self.split_tags {
            for (s, &t) in self.samples.iter().zip(tags) {
                if t == which {
                    out.samples.push(s.clone());
                }
            }
        }
        out
    }

    /// Concatenates two datasets over the same RU count.
    pub fn concat(&self, other: &FingerprintDataset) -> Result<FingerprintDataset, SignalError> {
        if self.num_rus != other.num_rus {
            return Err(SignalError::InvalidSpec(format!(
                "cannot concatenate datasets with {} and {} RUs",
                self.num_rus, other.num_rus
            )));
        }
        let mut out = FingerprintDataset::new(self.num_rus);
        out.samples.extend(self.samples.iter().cloned());
        out.samples.extend(other.samples.iter().cloned());
        Ok(out)
    }

    pub fn validate(&self) -> Result<(), SignalError> {
        for (i, s) in self.samples.iter().enumerate() {
            if s.rss.len() != self.num_rus {
                return Err(SignalError::InvalidSpec(format!(
                    "sample {i} has {} RSS values, dataset has {} RUs",
                    s.rss.len(),
                    self.num_rus
                )));
            }
            if !s.rp.is_finite() || !s.rss.iter().all(|v| v.is_finite()) {
                return Err(SignalError::InvalidSpec(format!("sample {i} has non-finite values")));
            }
        }
        if let Some(tags) = &self.split_tags {
            if tags.len() != self.samples.len() {
                return Err(SignalError::InvalidSpec("split tags length mismatch".into()));
            }
            // Each distinct RP must carry exactly one tag.
            let mut by_rp = std::collections::HashMap::new();
            for (s, &t) in self.samples.iter().zip(tags) {
                if *by_rp.entry(s.rp.bit_key()).or_insert(t) != t {
                    return Err(SignalError::InvalidSpec(format!(
                        "RP ({}, {}) appears in more than one split",
                        s.rp.x, s.rp.y
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Cell centers of the training grid, row-major: cell `(l, w)` sits at
/// `origin + ((w - 0.5) * eps, (l - 0.5) * eps)`.
pub fn build_grid(spec: &GridSpec) -> Vec<Point2> {
    let mut points = Vec::with_capacity(spec.rows * spec.cols);
    for l in 1..=spec.rows {
        for w in 1..=spec.cols {
            points.push(Point2::new(
                spec.origin.x + (w as f64 - 0.5) * spec.resolution,
                spec.origin.y + (l as f64 - 0.5) * spec.resolution,
            ));
        }
    }
    points
}

/// Noise-free RSS at `rp` from RU `l`: `P0 - alpha * log(d_l)` in the
/// environment's log convention.
pub fn noiseless_rss(env: &EnvironmentSpec, rp: Point2) -> Result<Vec<f64>, SignalError> {
    env.ru_positions
        .iter()
        .enumerate()
        .map(|(l, &ru)| {
            let d = rp.dist(ru);
            if d == 0.0 {
                return Err(SignalError::ZeroDistance { ru_index: l, x: rp.x, y: rp.y });
            }
            let loss = match env.log_base {
                LogBase::Natural => env.path_loss_exponent * d.ln(),
                LogBase::Db10 => 10.0 * env.path_loss_exponent * d.log10(),
            };
            Ok(env.reference_power - loss)
        })
        .collect()
}

/// One noisy fingerprint at `rp`; noise is drawn independently per RU from
/// the provided stream.
pub fn simulate_rss(
    env: &EnvironmentSpec,
    rp: Point2,
    rng: &mut impl Rng,
) -> Result<Vec<f64>, SignalError> {
    let mut rss = noiseless_rss(env, rp)?;
    for v in &mut rss {
        let n: f64 = rng.sample(StandardNormal);
        *v += env.noise_sigma * n;
    }
    Ok(rss)
}

/// Simulates `samples_per_rp` fingerprints at every grid point.
///
/// Each RP draws from its own stream derived from `(seed, rp_index)`, so the
/// result does not depend on evaluation order.
pub fn generate_dataset(
    env: &EnvironmentSpec,
    grid_points: &[Point2],
    samples_per_rp: usize,
    seed: u64,
) -> Result<FingerprintDataset, SignalError> {
    env.validate()?;
    if samples_per_rp < 1 {
        return Err(SignalError::InvalidSpec("samples_per_rp must be >= 1".into()));
    }
    let mut ds = FingerprintDataset::new(env.num_rus());
    for (i, &rp) in grid_points.iter().enumerate() {
        let mut rng = stream(seed, &format!("sim/rp/{i}"));
        for _ in 0..samples_per_rp {
            let rss = simulate_rss(env, rp, &mut rng)?;
            ds.samples.push(RssSample { rp, rss });
        }
    }
    Ok(ds)
}

/// Partitions the dataset's distinct RPs into train/val/test.
///
/// Counts are `round(fraction * num_rps)` for val and test with the
/// remainder assigned to train; RPs are shuffled by the seeded stream and
/// every sample inherits its RP's tag.
pub fn split_by_rp(
    ds: &FingerprintDataset,
    fractions: (f64, f64, f64),
    seed: u64,
) -> Result<FingerprintDataset, SignalError> {
    let f = [fractions.0, fractions.1, fractions.2];
    if f.iter().any(|&x| x < 0.0) || (f.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(SignalError::BadFractions(f));
    }
    let rps = ds.distinct_rps();
    if rps.len() < 3 {
        return Err(SignalError::TooFewRps(rps.len()));
    }
    let num = rps.len();
    let n_val = (fractions.1 * num as f64).round() as usize;
    let n_test = (fractions.2 * num as f64).round() as usize;
    if n_val + n_test > num {
        return Err(SignalError::BadFractions(f));
    }
    let n_train = num - n_val - n_test;

    let mut order: Vec<usize> = (0..num).collect();
    let mut rng = stream(seed, "split/rp");
    use rand::seq::SliceRandom;
    order.shuffle(&mut rng);

    let mut tag_of = std::collections::HashMap::new();
    for (pos, &idx) in order.iter().enumerate() {
        let tag = if pos < n_train {
            Split::Train
        } else if pos < n_train + n_val {
            Split::Val
        } else {
            Split::Test
        };
        tag_of.insert(rps[idx].bit_key(), tag);
    }
    let tags: Vec<Split> = ds.samples.iter().map(|s| tag_of[&s.rp.bit_key()]).collect();
    let mut out = ds.clone();
    out.split_tags = Some(tags);
    Ok(out)
}
