//! From probabilistic triadic tensors to binary formal contexts.
//!
//! A tensor of conditional probabilities `Ŷ[g, m, b]` is pooled over the
//! pattern axis into a score matrix `Î`, optionally normalized, and then
//! thresholded with a strict `> alpha` into a [`FormalContext`].

use alloc::string::String;
use alloc::vec::Vec;

use crate::context::{check_unique, FormalContext};
use crate::error::{Axis, Error, Result};
use crate::matrix::ScoreMatrix;

/// Floor substituted for zero scores before taking logarithms.
pub const LOG_FLOOR: f64 = 1e-12;

/// Slack allowed when checking that probed conditionals sum to at most one.
const MASS_TOLERANCE: f64 = 1e-6;

/// Default threshold for min-max-log normalized scores.
pub const DEFAULT_ALPHA_MINMAX: f64 = 0.6;
/// Default threshold for sigmoid normalized scores.
pub const DEFAULT_ALPHA_SIGMOID: f64 = 0.5;

/// Which conditional the tensor holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `p(g | b^{·,m})`: each `(m, b)` slice over objects is sub-stochastic.
    ObjectGivenAttribute,
    /// `p(m | b^{g,·})`: each `(g, b)` slice over attributes is sub-stochastic.
    AttributeGivenObject,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::ObjectGivenAttribute => "object-given-attribute",
            Direction::AttributeGivenObject => "attribute-given-object",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "object-given-attribute" => Some(Direction::ObjectGivenAttribute),
            "attribute-given-object" => Some(Direction::AttributeGivenObject),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TriadicTensor {
    objects: Vec<String>,
    attributes: Vec<String>,
    patterns: Vec<String>,
    direction: Direction,
    /// Flattened `[g][m][b]`.
    values: Vec<f64>,
}

impl TriadicTensor {
    /// Validates shape, identifier uniqueness, the `[0, 1]` range and the
    /// sub-normalization implied by `direction`.
    pub fn new(
        objects: Vec<String>,
        attributes: Vec<String>,
        patterns: Vec<String>,
        direction: Direction,
        values: &[Vec<Vec<f64>>],
    ) -> Result<Self> {
        check_unique(&objects, Axis::Object)?;
        check_unique(&attributes, Axis::Attribute)?;
        check_unique(&patterns, Axis::Condition)?;
        let (n, k, c) = (objects.len(), attributes.len(), patterns.len());
        if values.len() != n {
            return Err(Error::ShapeMismatch {
                expected: alloc::format!("{n} object slices"),
                found: alloc::format!("{}", values.len()),
            });
        }
        let mut flat = Vec::with_capacity(n * k * c);
        for (g, plane) in values.iter().enumerate() {
            if plane.len() != k {
                return Err(Error::ShapeMismatch {
                    expected: alloc::format!("{k} attribute rows"),
                    found: alloc::format!("{} in object {g}", plane.len()),
                });
            }
            for (m, fibre) in plane.iter().enumerate() {
                if fibre.len() != c {
                    return Err(Error::ShapeMismatch {
                        expected: alloc::format!("{c} pattern values"),
                        found: alloc::format!("{} at ({g}, {m})", fibre.len()),
                    });
                }
                for (b, &v) in fibre.iter().enumerate() {
                    if !(0.0..=1.0).contains(&v) {
                        return Err(Error::InvalidValue {
                            location: alloc::format!("values[{g}][{m}][{b}]"),
                            value: v,
                        });
                    }
                    flat.push(v);
                }
            }
        }
        let tensor = Self {
            objects,
            attributes,
            patterns,
            direction,
            values: flat,
        };
        tensor.check_mass()?;
        Ok(tensor)
    }

    fn check_mass(&self) -> Result<()> {
        let (n, k, c) = self.shape();
        match self.direction {
            Direction::ObjectGivenAttribute => {
                for m in 0..k {
                    for b in 0..c {
                        let sum: f64 = (0..n).map(|g| self.value(g, m, b)).sum();
                        if sum > 1.0 + MASS_TOLERANCE {
                            return Err(Error::InvalidValue {
                                location: alloc::format!(
                                    "mass over objects for attribute {m}, pattern {b}"
                                ),
                                value: sum,
                            });
                        }
                    }
                }
            }
            Direction::AttributeGivenObject => {
                for g in 0..n {
                    for b in 0..c {
                        let sum: f64 = (0..k).map(|m| self.value(g, m, b)).sum();
                        if sum > 1.0 + MASS_TOLERANCE {
                            return Err(Error::InvalidValue {
                                location: alloc::format!(
                                    "mass over attributes for object {g}, pattern {b}"
                                ),
                                value: sum,
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.objects.len(), self.attributes.len(), self.patterns.len())
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn patterns(&self) -> &[String] {
        &self.patterns
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    #[inline]
    pub fn value(&self, g: usize, m: usize, b: usize) -> f64 {
        let (_, k, c) = self.shape();
        self.values[(g * k + m) * c + b]
    }

    /// Nested `[g][m][b]` copy of the values.
    pub fn to_nested(&self) -> Vec<Vec<Vec<f64>>> {
        let (n, k, c) = self.shape();
        (0..n)
            .map(|g| {
                (0..k)
                    .map(|m| (0..c).map(|b| self.value(g, m, b)).collect())
                    .collect()
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pooling {
    Avg,
    Max,
}

impl Pooling {
    pub fn as_str(self) -> &'static str {
        match self {
            Pooling::Avg => "avg",
            Pooling::Max => "max",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    None,
    MinMaxLog,
    Sigmoid,
}

impl Normalization {
    pub fn as_str(self) -> &'static str {
        match self {
            Normalization::None => "none",
            Normalization::MinMaxLog => "minmax",
            Normalization::Sigmoid => "sigmoid",
        }
    }

    /// Threshold used when none is given explicitly.
    pub fn default_alpha(self) -> f64 {
        match self {
            Normalization::Sigmoid => DEFAULT_ALPHA_SIGMOID,
            _ => DEFAULT_ALPHA_MINMAX,
        }
    }
}

/// Whether min-max normalization spans the whole matrix or each row.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NormScope {
    #[default]
    Matrix,
    Row,
}

/// A two-dimensional score matrix `Î` over objects × attributes.
#[derive(Clone, Debug, PartialEq)]
pub struct PooledContext {
    pub objects: Vec<String>,
    pub attributes: Vec<String>,
    pub scores: ScoreMatrix,
    /// `None` for scores that did not come from a tensor.
    pub pooling: Option<Pooling>,
    pub normalization: Normalization,
    pub alpha: Option<f64>,
}

impl PooledContext {
    /// Validates identifiers, shape and finiteness; marks the scores as
    /// unpooled and unnormalized.
    pub fn new(objects: Vec<String>, attributes: Vec<String>, scores: ScoreMatrix) -> Result<Self> {
        check_unique(&objects, Axis::Object)?;
        check_unique(&attributes, Axis::Attribute)?;
        if scores.shape() != (objects.len(), attributes.len()) {
            return Err(Error::ShapeMismatch {
                expected: alloc::format!("{}x{}", objects.len(), attributes.len()),
                found: alloc::format!("{}x{}", scores.rows(), scores.cols()),
            });
        }
        for r in 0..scores.rows() {
            for (c, &v) in scores.row(r).iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::InvalidValue {
                        location: alloc::format!("scores[{r}][{c}]"),
                        value: v,
                    });
                }
            }
        }
        Ok(Self {
            objects,
            attributes,
            scores,
            pooling: None,
            normalization: Normalization::None,
            alpha: None,
        })
    }

    /// Reads a binary context as a 0/1 score matrix.
    pub fn from_context(ctx: &FormalContext) -> Self {
        let scores = ScoreMatrix::from_fn(ctx.num_objects(), ctx.num_attributes(), |g, m| {
            if ctx.has(g, m) {
                1.0
            } else {
                0.0
            }
        });
        Self {
            objects: ctx.objects().to_vec(),
            attributes: ctx.attributes().to_vec(),
            scores,
            pooling: None,
            normalization: Normalization::None,
            alpha: None,
        }
    }

    fn with_scores(&self, scores: ScoreMatrix, normalization: Normalization) -> Self {
        Self {
            objects: self.objects.clone(),
            attributes: self.attributes.clone(),
            scores,
            pooling: self.pooling,
            normalization,
            alpha: self.alpha,
        }
    }
}

/// Collapses the pattern axis by mean or maximum.
pub fn pool(tensor: &TriadicTensor, mode: Pooling) -> Result<PooledContext> {
    let (n, k, c) = tensor.shape();
    if c == 0 {
        return Err(Error::EmptyPatternAxis);
    }
    let scores = ScoreMatrix::from_fn(n, k, |g, m| {
        let fibre = (0..c).map(|b| tensor.value(g, m, b));
        match mode {
            Pooling::Avg => fibre.sum::<f64>() / c as f64,
            Pooling::Max => fibre.fold(f64::NEG_INFINITY, f64::max),
        }
    });
    Ok(PooledContext {
        objects: tensor.objects.clone(),
        attributes: tensor.attributes.clone(),
        scores,
        pooling: Some(mode),
        normalization: Normalization::None,
        alpha: None,
    })
}

/// Natural logarithm of every score, flooring zeros at [`LOG_FLOOR`].
fn log_scores(pooled: &PooledContext) -> Result<ScoreMatrix> {
    let mut floored = 0usize;
    for r in 0..pooled.scores.rows() {
        for (c, &v) in pooled.scores.row(r).iter().enumerate() {
            if v < 0.0 {
                return Err(Error::InvalidValue {
                    location: alloc::format!("scores[{r}][{c}]"),
                    value: v,
                });
            }
            if v < LOG_FLOOR {
                floored += 1;
            }
        }
    }
    if floored > 0 {
        log::warn!("{floored} score(s) below {LOG_FLOOR:e} clamped before taking logarithms");
    }
    Ok(pooled.scores.map(|v| libm::log(v.max(LOG_FLOOR))))
}

/// `(log Î − min log Î) / (max log Î − min log Î)` over the whole matrix.
pub fn normalize_minmax_log(pooled: &PooledContext) -> Result<PooledContext> {
    normalize_minmax_log_scoped(pooled, NormScope::Matrix)
}

pub fn normalize_minmax_log_scoped(pooled: &PooledContext, scope: NormScope) -> Result<PooledContext> {
    let logs = log_scores(pooled)?;
    let (rows, cols) = logs.shape();
    let scores = match scope {
        NormScope::Matrix => {
            let (lo, hi) = logs.min_max().ok_or(Error::DegenerateScores)?;
            if hi <= lo {
                return Err(Error::DegenerateScores);
            }
            logs.map(|v| (v - lo) / (hi - lo))
        }
        NormScope::Row => {
            let mut out = ScoreMatrix::zeros(rows, cols);
            for r in 0..rows {
                let row = logs.row(r);
                let lo = row.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if hi <= lo {
                    return Err(Error::DegenerateScores);
                }
                for (c, &v) in row.iter().enumerate() {
                    out[(r, c)] = (v - lo) / (hi - lo);
                }
            }
            out
        }
    };
    Ok(pooled.with_scores(scores, Normalization::MinMaxLog))
}

/// Element-wise `σ(scale · (log Î − shift))`. `shift` defaults to the mean
/// log-score of the matrix.
pub fn normalize_sigmoid(pooled: &PooledContext, scale: f64, shift: Option<f64>) -> Result<PooledContext> {
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::ZeroScale);
    }
    let logs = log_scores(pooled)?;
    let shift = match shift {
        Some(s) => s,
        None => {
            let vals = logs.values();
            if vals.is_empty() {
                0.0
            } else {
                vals.iter().sum::<f64>() / vals.len() as f64
            }
        }
    };
    let scores = logs.map(|v| sigmoid(scale * (v - shift)));
    Ok(pooled.with_scores(scores, Normalization::Sigmoid))
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

/// Thresholds normalized scores with a strict `score > alpha`.
pub fn binarize(pooled: &PooledContext, alpha: f64) -> Result<FormalContext> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    let s = &pooled.scores;
    for r in 0..s.rows() {
        for (c, &v) in s.row(r).iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::NotNormalized { row: r, col: c, value: v });
            }
        }
    }
    FormalContext::from_fn(pooled.objects.clone(), pooled.attributes.clone(), |g, m| {
        s[(g, m)] > alpha
    })
}

/// One object's row of scores, read as an attribute-labelled embedding.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmbeddingRow<'a> {
    pub object: &'a str,
    pub attributes: &'a [String],
    pub values: &'a [f64],
}

impl<'a> EmbeddingRow<'a> {
    pub fn get(&self, attribute: &str) -> Option<f64> {
        self.attributes
            .iter()
            .position(|a| a == attribute)
            .map(|i| self.values[i])
    }

    /// Values of the selected attribute columns, in the given order.
    pub fn project(&self, columns: &[usize]) -> Vec<f64> {
        columns.iter().map(|&c| self.values[c]).collect()
    }
}

/// Per-object embeddings, in object order.
pub fn embedding_rows(pooled: &PooledContext) -> Vec<EmbeddingRow<'_>> {
    pooled
        .objects
        .iter()
        .enumerate()
        .map(|(g, object)| EmbeddingRow {
            object,
            attributes: &pooled.attributes,
            values: pooled.scores.row(g),
        })
        .collect()
}

/// Jaccard similarity of the incident sets of two binarizations of the same
/// shape; `1` when both are empty.
pub fn incidence_jaccard(a: &FormalContext, b: &FormalContext) -> Result<f64> {
    if (a.num_objects(), a.num_attributes()) != (b.num_objects(), b.num_attributes()) {
        return Err(Error::ShapeMismatch {
            expected: alloc::format!("{}x{}", a.num_objects(), a.num_attributes()),
            found: alloc::format!("{}x{}", b.num_objects(), b.num_attributes()),
        });
    }
    let (mut inter, mut union) = (0usize, 0usize);
    for g in 0..a.num_objects() {
        inter += a.row(g).intersection(b.row(g)).len();
        union += a.row(g).union(b.row(g)).len();
    }
    Ok(if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    })
}
