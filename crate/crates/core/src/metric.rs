//! Vector representation, distance functions, and the small numeric
//! helpers (normalization, center of gravity) the rest of the crate
//! builds on.
//!
//! Routing in the index only ever compares distances, so the "metric"
//! does not have to satisfy the triangle inequality. Two metrics are
//! offered: plain euclidean, and a cosine distance computed as the half
//! squared chord on L2-normalized vectors (`0.5 * Σ(aᵢ-bᵢ)²`), which
//! equals `1 - cos(a, b)` up to the normalization tolerance and is
//! exactly `0.0` for bitwise-equal inputs.

use std::str::FromStr;

use crate::error::{Error, Result};

/// Embedding dimensionality used when nothing else is configured.
pub const DEFAULT_DIMENSION: usize = 128;

/// Fixed-dimension appearance embedding of one detected object.
///
/// Entries are finite by construction; the vector is non-empty.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some(index) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }
}

/// Distance function selector; fixed per index instance at creation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MetricKind {
    /// Cosine distance on L2-normalized vectors, range [0, 2].
    Cosine,
    /// Plain euclidean distance.
    Euclidean,
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cosine" => Ok(MetricKind::Cosine),
            "euclidean" | "l2" => Ok(MetricKind::Euclidean),
            other => Err(Error::Config(format!("unknown metric '{other}'"))),
        }
    }
}

/// Per-index configuration: dimensionality, metric and the two
/// similarity thresholds driving the labeling logic.
///
/// `beta` is the match threshold: a query within `beta` of a leaf
/// representative is declared the same object. `zeta` is the placement
/// threshold choosing between down-insertion (similar, keep nearby) and
/// up-insertion (dissimilar, attach at the root). `c_max` bounds leaf
/// container size before a split is forced.
#[derive(Clone, Debug)]
pub struct IndexConfig {
    pub dimension: usize,
    pub metric: MetricKind,
    pub beta: f64,
    pub zeta: f64,
    pub c_max: usize,
}

impl IndexConfig {
    pub fn new(
        dimension: usize,
        metric: MetricKind,
        beta: f64,
        zeta: f64,
        c_max: usize,
    ) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Config("dimension must be at least 1".into()));
        }
        if !beta.is_finite() || !zeta.is_finite() {
            return Err(Error::Config("thresholds must be finite".into()));
        }
        if !(beta > 0.0 && beta < zeta) {
            return Err(Error::Config(format!(
                "thresholds must satisfy 0 < beta < zeta (got beta={beta}, zeta={zeta})"
            )));
        }
        if c_max < 2 {
            return Err(Error::Config("c_max must be at least 2".into()));
        }
        Ok(Self {
            dimension,
            metric,
            beta,
            zeta,
            c_max,
        })
    }

    /// Same as [`IndexConfig::new`] but sizes the leaf containers as
    /// `ceil(sqrt(n))` for an expected corpus of `n` vectors.
    pub fn with_corpus_hint(
        dimension: usize,
        metric: MetricKind,
        beta: f64,
        zeta: f64,
        expected_corpus: usize,
    ) -> Result<Self> {
        let c_max = ((expected_corpus as f64).sqrt().ceil() as usize).max(2);
        Self::new(dimension, metric, beta, zeta, c_max)
    }

    /// Validates a raw vector against this configuration and, under the
    /// cosine metric, L2-normalizes it. Preparation is idempotent: an
    /// already prepared vector maps to identical bits.
    pub fn prepare(&self, v: FeatureVector) -> Result<FeatureVector> {
        if v.dim() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: v.dim(),
            });
        }
        match self.metric {
            MetricKind::Euclidean => Ok(v),
            MetricKind::Cosine => normalize(&v),
        }
    }
}

/// Sum of squared component differences, the shared inner loop of both
/// metrics. Four accumulators keep the association order fixed (so the
/// result is deterministic) while still letting the FP pipeline overlap.
#[inline]
fn sum_sq_diff(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4 * 4;
    let mut i = 0;
    while i < chunks {
        let d0 = a[i] - b[i];
        let d1 = a[i + 1] - b[i + 1];
        let d2 = a[i + 2] - b[i + 2];
        let d3 = a[i + 3] - b[i + 3];
        acc[0] += d0 * d0;
        acc[1] += d1 * d1;
        acc[2] += d2 * d2;
        acc[3] += d3 * d3;
        i += 4;
    }
    let mut tail = 0.0;
    while i < a.len() {
        let d = a[i] - b[i];
        tail += d * d;
        i += 1;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
fn sum_sq(a: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4 * 4;
    let mut i = 0;
    while i < chunks {
        acc[0] += a[i] * a[i];
        acc[1] += a[i + 1] * a[i + 1];
        acc[2] += a[i + 2] * a[i + 2];
        acc[3] += a[i + 3] * a[i + 3];
        i += 4;
    }
    let mut tail = 0.0;
    while i < a.len() {
        tail += a[i] * a[i];
        i += 1;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Distance between two same-dimension vectors. Callers are expected to
/// have validated dimensions; see [`try_distance`] for the checked form.
#[inline]
pub fn distance(a: &FeatureVector, b: &FeatureVector, metric: MetricKind) -> f64 {
    debug_assert_eq!(a.dim(), b.dim(), "distance on mismatched dimensions");
    let s = sum_sq_diff(a.as_slice(), b.as_slice());
    match metric {
        MetricKind::Euclidean => s.sqrt(),
        MetricKind::Cosine => 0.5 * s,
    }
}

/// Checked distance; rejects mismatched dimensions.
pub fn try_distance(a: &FeatureVector, b: &FeatureVector, metric: MetricKind) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(distance(a, b, metric))
}

/// Returns `v` scaled to unit L2 norm. A vector whose squared norm is
/// already within 1e-12 of 1 is returned unchanged, which keeps repeated
/// preparation bitwise stable.
pub fn normalize(v: &FeatureVector) -> Result<FeatureVector> {
    let sq = sum_sq(v.as_slice());
    if sq == 0.0 {
        return Err(Error::ZeroVector);
    }
    if (sq - 1.0).abs() <= 1e-12 {
        return Ok(v.clone());
    }
    let inv = 1.0 / sq.sqrt();
    if !inv.is_finite() {
        return Err(Error::ZeroVector);
    }
    let values = v.as_slice().iter().map(|x| x * inv).collect();
    FeatureVector::new(values)
}

/// Componentwise average of two vectors (the center of gravity of the
/// pair). Under the cosine metric the result is re-normalized so it stays
/// comparable against the beta/zeta thresholds.
pub fn mean(a: &FeatureVector, b: &FeatureVector, metric: MetricKind) -> Result<FeatureVector> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let avg: Vec<f64> = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| 0.5 * (x + y))
        .collect();
    let avg = FeatureVector::new(avg)?;
    match metric {
        MetricKind::Euclidean => Ok(avg),
        MetricKind::Cosine => normalize(&avg),
    }
}

/// Componentwise average of a non-empty set, re-normalized under cosine.
pub fn mean_of(vectors: &[FeatureVector], metric: MetricKind) -> Result<FeatureVector> {
    let first = vectors.first().ok_or(Error::EmptyVector)?;
    let mut sum = vec![0.0f64; first.dim()];
    for v in vectors {
        if v.dim() != first.dim() {
            return Err(Error::DimensionMismatch {
                expected: first.dim(),
                got: v.dim(),
            });
        }
        for (s, x) in sum.iter_mut().zip(v.as_slice()) {
            *s += x;
        }
    }
    let n = vectors.len() as f64;
    for s in sum.iter_mut() {
        *s /= n;
    }
    let avg = FeatureVector::new(sum)?;
    match metric {
        MetricKind::Euclidean => Ok(avg),
        MetricKind::Cosine => normalize(&avg),
    }
}
