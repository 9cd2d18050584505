//! Canonical representations of finite sources, reconstruction kernels,
//! distortion tables and divergence families, plus the exact information
//! measures used by every other module.
//!
//! All probabilities are `f64`, all logarithms are base 2, and `0 log 0`
//! is always treated as `0`. Every type is immutable after construction,
//! so values can be shared freely across threads.

mod divergence;
mod induced;
mod measures;
mod rational;
mod source_file;

pub use divergence::{
    aligned_target, conditional_divergence, divergence, kl_bits, total_variation,
    w2_dual_potentials, w2_squared, DiscreteDist,
};
pub use induced::{induced_laws, induced_marginals, kernel_cmi_bits, InducedLaws};
pub use measures::{
    binary_entropy, entropy_bits, info_measures, mutual_information_bits, InfoQuery, JointPmf,
};
pub use rational::RationalJoint;
pub use source_file::{load_source_file, parse_source_toml, SourceSpecFile};

use thiserror::Error;

/// Tolerance for "sums to one" checks at construction time.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Errors raised by construction and by the exact measure operations.
#[derive(Debug, Error)]
pub enum InfoError {
    #[error("pmf sums to {sum}, expected 1 within {tol}")]
    Unnormalized { sum: f64, tol: f64 },
    #[error("negative or non-finite probability {value} at entry ({row}, {col})")]
    BadProbability { value: f64, row: usize, col: usize },
    #[error("side-information symbol `{label}` has zero probability; null conditionals are rejected")]
    NullSideInfo { label: String },
    #[error("shape mismatch: {context}")]
    ShapeMismatch { context: String },
    #[error("embedding value {value} at index {index} is not finite")]
    BadEmbedding { value: f64, index: usize },
    #[error("{context} requires real embeddings, but none are attached")]
    MissingEmbedding { context: String },
    #[error("distortion entry {value} at ({row}, {col}) must be finite and non-negative")]
    BadDistortion { value: f64, row: usize, col: usize },
    #[error("KL absolute continuity violated: q({index}) = 0 but p({index}) = {p}")]
    AbsoluteContinuity { index: usize, p: f64 },
    #[error("supports differ: left has {left} atoms, right has {right}")]
    SupportMismatch { left: usize, right: usize },
    #[error("variable `{0}` does not appear in the joint")]
    UnknownVariable(String),
    #[error("kernel row (x={x}, y={y}) sums to {sum}, expected 1")]
    BadKernelRow { x: usize, y: usize, sum: f64 },
    #[error("reconstruction alphabet does not cover the source alphabet (symbol `{label}` missing); TV/KL perception needs matching supports")]
    AlphabetNotCovering { label: String },
    #[error("source file: {0}")]
    SourceFile(String),
    #[error("rational pmf: {0}")]
    Rational(String),
}

/// Finite joint law p(X, Y) with optional real-valued embeddings of the
/// X symbols (used by MSE distortion and W2 divergence).
#[derive(Debug, Clone, PartialEq)]
pub struct JointSource {
    x_alphabet: Vec<String>,
    y_alphabet: Vec<String>,
    /// Row-major by x: `pmf[x][y]`.
    pmf: Vec<Vec<f64>>,
    x_values: Option<Vec<f64>>,
    p_y: Vec<f64>,
    p_x: Vec<f64>,
}

impl JointSource {
    pub fn new(
        x_alphabet: Vec<String>,
        y_alphabet: Vec<String>,
        pmf: Vec<Vec<f64>>,
        x_values: Option<Vec<f64>>,
    ) -> Result<Self, InfoError> {
        let nx = x_alphabet.len();
        let ny = y_alphabet.len();
        if pmf.len() != nx {
            return Err(InfoError::ShapeMismatch {
                context: format!("pmf has {} rows, alphabet has {} x symbols", pmf.len(), nx),
            });
        }
        let mut sum = 0.0;
        for (i, row) in pmf.iter().enumerate() {
            if row.len() != ny {
                return Err(InfoError::ShapeMismatch {
                    context: format!("pmf row {i} has {} columns, expected {ny}", row.len()),
                });
            }
            for (j, &p) in row.iter().enumerate() {
                if !p.is_finite() || p < 0.0 {
                    return Err(InfoError::BadProbability { value: p, row: i, col: j });
                }
                sum += p;
            }
        }
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(InfoError::Unnormalized { sum, tol: NORMALIZATION_TOL });
        }
        let mut p_y = vec![0.0; ny];
        let mut p_x = vec![0.0; nx];
        for (i, row) in pmf.iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                p_y[j] += p;
                p_x[i] += p;
            }
        }
        for (j, &py) in p_y.iter().enumerate() {
            if py <= 0.0 {
                return Err(InfoError::NullSideInfo { label: y_alphabet[j].clone() });
            }
        }
        if let Some(vals) = &x_values {
            if vals.len() != nx {
                return Err(InfoError::ShapeMismatch {
                    context: format!("{} x_values for {} x symbols", vals.len(), nx),
                });
            }
            for (i, &v) in vals.iter().enumerate() {
                if !v.is_finite() {
                    return Err(InfoError::BadEmbedding { value: v, index: i });
                }
            }
        }
        Ok(Self { x_alphabet, y_alphabet, pmf, x_values, p_y, p_x })
    }

    /// Source with trivial side information (|Y| = 1).
    pub fn from_x_marginal(
        x_alphabet: Vec<String>,
        probs: Vec<f64>,
        x_values: Option<Vec<f64>>,
    ) -> Result<Self, InfoError> {
        let pmf = probs.into_iter().map(|p| vec![p]).collect();
        Self::new(x_alphabet, vec!["-".to_string()], pmf, x_values)
    }

    pub fn num_x(&self) -> usize {
        self.x_alphabet.len()
    }

    pub fn num_y(&self) -> usize {
        self.y_alphabet.len()
    }

    pub fn x_alphabet(&self) -> &[String] {
        &self.x_alphabet
    }

    pub fn y_alphabet(&self) -> &[String] {
        &self.y_alphabet
    }

    pub fn x_values(&self) -> Option<&[f64]> {
        self.x_values.as_deref()
    }

    pub fn p_xy(&self, x: usize, y: usize) -> f64 {
        self.pmf[x][y]
    }

    pub fn p_x(&self) -> &[f64] {
        &self.p_x
    }

    pub fn p_y(&self) -> &[f64] {
        &self.p_y
    }

    /// Conditional law p(X | Y = y).
    pub fn x_given_y(&self, y: usize) -> Vec<f64> {
        let py = self.p_y[y];
        (0..self.num_x()).map(|x| self.pmf[x][y] / py).collect()
    }

    /// The conditional source at a fixed y, as a |Y| = 1 source.
    pub fn condition_on_y(&self, y: usize) -> Result<JointSource, InfoError> {
        JointSource::from_x_marginal(
            self.x_alphabet.clone(),
            self.x_given_y(y),
            self.x_values.clone(),
        )
    }

    /// True when every x symbol has at most one y with p(x, y) > 0.
    pub fn y_is_deterministic_of_x(&self) -> bool {
        self.pmf
            .iter()
            .all(|row| row.iter().filter(|&&p| p > 0.0).count() <= 1)
    }
}

/// Conditional law q(x̂ | x, y): the optimization variable of the
/// trade-off solvers and the channel description for the one-shot codec.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionKernel {
    xhat_alphabet: Vec<String>,
    xhat_values: Option<Vec<f64>>,
    /// `rows[x][y][xhat]`, each row summing to 1.
    rows: Vec<Vec<Vec<f64>>>,
}

/// How far a candidate kernel row may be from normalized before it is
/// rejected (rows are renormalized exactly on construction).
const KERNEL_ROW_TOL: f64 = 1e-9;

impl ReconstructionKernel {
    pub fn new(
        xhat_alphabet: Vec<String>,
        xhat_values: Option<Vec<f64>>,
        rows: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self, InfoError> {
        let nhat = xhat_alphabet.len();
        if let Some(vals) = &xhat_values {
            if vals.len() != nhat {
                return Err(InfoError::ShapeMismatch {
                    context: format!("{} xhat_values for {} symbols", vals.len(), nhat),
                });
            }
            for (i, &v) in vals.iter().enumerate() {
                if !v.is_finite() {
                    return Err(InfoError::BadEmbedding { value: v, index: i });
                }
            }
        }
        let mut rows = rows;
        for (x, per_y) in rows.iter_mut().enumerate() {
            for (y, row) in per_y.iter_mut().enumerate() {
                if row.len() != nhat {
                    return Err(InfoError::ShapeMismatch {
                        context: format!(
                            "kernel row (x={x}, y={y}) has {} entries, expected {nhat}",
                            row.len()
                        ),
                    });
                }
                let mut sum = 0.0;
                for (k, &q) in row.iter().enumerate() {
                    if !q.is_finite() || q < -KERNEL_ROW_TOL {
                        return Err(InfoError::BadProbability { value: q, row: x, col: k });
                    }
                    sum += q.max(0.0);
                }
                if (sum - 1.0).abs() > KERNEL_ROW_TOL {
                    return Err(InfoError::BadKernelRow { x, y, sum });
                }
                for q in row.iter_mut() {
                    *q = q.max(0.0) / sum;
                }
            }
        }
        Ok(Self { xhat_alphabet, xhat_values, rows })
    }

    /// Identity copy of X. Requires the reconstruction alphabet to contain
    /// every source symbol.
    pub fn identity(source: &JointSource) -> Self {
        let n = source.num_x();
        let mut rows = vec![vec![vec![0.0; n]; source.num_y()]; n];
        for (x, per_y) in rows.iter_mut().enumerate() {
            for row in per_y.iter_mut() {
                row[x] = 1.0;
            }
        }
        Self {
            xhat_alphabet: source.x_alphabet().to_vec(),
            xhat_values: source.x_values().map(|v| v.to_vec()),
            rows,
        }
    }

    /// Kernel that always outputs one fixed symbol.
    pub fn constant(source: &JointSource, xhat_alphabet: Vec<String>, symbol: usize) -> Self {
        let n = xhat_alphabet.len();
        let mut row = vec![0.0; n];
        row[symbol] = 1.0;
        Self {
            xhat_alphabet,
            xhat_values: None,
            rows: vec![vec![row; source.num_y()]; source.num_x()],
        }
    }

    pub fn num_xhat(&self) -> usize {
        self.xhat_alphabet.len()
    }

    pub fn xhat_alphabet(&self) -> &[String] {
        &self.xhat_alphabet
    }

    pub fn xhat_values(&self) -> Option<&[f64]> {
        self.xhat_values.as_deref()
    }

    pub fn row(&self, x: usize, y: usize) -> &[f64] {
        &self.rows[x][y]
    }

    pub fn rows(&self) -> &Vec<Vec<Vec<f64>>> {
        &self.rows
    }

    pub fn num_x(&self) -> usize {
        self.rows.len()
    }

    pub fn num_y(&self) -> usize {
        self.rows.first().map_or(0, |r| r.len())
    }

    /// Checks that the kernel is indexable against the given source.
    pub fn check_compatible(&self, source: &JointSource) -> Result<(), InfoError> {
        if self.num_x() != source.num_x() || self.num_y() != source.num_y() {
            return Err(InfoError::ShapeMismatch {
                context: format!(
                    "kernel is {}x{} over (x, y), source is {}x{}",
                    self.num_x(),
                    self.num_y(),
                    source.num_x(),
                    source.num_y()
                ),
            });
        }
        Ok(())
    }
}

/// Distortion mode: explicit table or squared error on embeddings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistortionKind {
    ExplicitTable,
    MseFromEmbeddings,
}

/// Per-pair distortion Δ(x, x̂) ≥ 0, stored densely as `table[x][xhat]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionSpec {
    kind: DistortionKind,
    table: Vec<Vec<f64>>,
}

impl DistortionSpec {
    pub fn from_table(table: Vec<Vec<f64>>) -> Result<Self, InfoError> {
        for (i, row) in table.iter().enumerate() {
            for (j, &d) in row.iter().enumerate() {
                if !d.is_finite() || d < 0.0 {
                    return Err(InfoError::BadDistortion { value: d, row: i, col: j });
                }
            }
        }
        Ok(Self { kind: DistortionKind::ExplicitTable, table })
    }

    /// Squared-difference distortion built from embeddings on both alphabets.
    pub fn mse(x_values: &[f64], xhat_values: &[f64]) -> Result<Self, InfoError> {
        let table = x_values
            .iter()
            .map(|&xv| xhat_values.iter().map(|&hv| (xv - hv) * (xv - hv)).collect())
            .collect();
        let mut spec = Self::from_table(table)?;
        spec.kind = DistortionKind::MseFromEmbeddings;
        Ok(spec)
    }

    /// MSE distortion for a source against a reconstruction alphabet; errors
    /// when either side lacks embeddings.
    pub fn mse_for(source: &JointSource, xhat_values: Option<&[f64]>) -> Result<Self, InfoError> {
        let xv = source.x_values().ok_or_else(|| InfoError::MissingEmbedding {
            context: "MSE distortion (source side)".to_string(),
        })?;
        let hv = xhat_values.ok_or_else(|| InfoError::MissingEmbedding {
            context: "MSE distortion (reconstruction side)".to_string(),
        })?;
        Self::mse(xv, hv)
    }

    /// 0/1 distortion by symbol label equality.
    pub fn hamming(x_alphabet: &[String], xhat_alphabet: &[String]) -> Self {
        let table = x_alphabet
            .iter()
            .map(|xs| {
                xhat_alphabet
                    .iter()
                    .map(|hs| if xs == hs { 0.0 } else { 1.0 })
                    .collect()
            })
            .collect();
        Self { kind: DistortionKind::ExplicitTable, table }
    }

    pub fn kind(&self) -> DistortionKind {
        self.kind
    }

    pub fn value(&self, x: usize, xhat: usize) -> f64 {
        self.table[x][xhat]
    }

    pub fn num_x(&self) -> usize {
        self.table.len()
    }

    pub fn num_xhat(&self) -> usize {
        self.table.first().map_or(0, |r| r.len())
    }

    pub fn max_value(&self) -> f64 {
        self.table
            .iter()
            .flat_map(|r| r.iter().copied())
            .fold(0.0, f64::max)
    }
}

/// Divergence family for perception constraints. W2 is reported as the
/// squared-cost optimal transport value (not its square root), with the
/// ground cost the squared difference of embeddings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DivergenceSpec {
    TotalVariation,
    KullbackLeibler,
    Wasserstein2,
}

impl DivergenceSpec {
    pub const ALL: [DivergenceSpec; 3] = [
        DivergenceSpec::TotalVariation,
        DivergenceSpec::KullbackLeibler,
        DivergenceSpec::Wasserstein2,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            DivergenceSpec::TotalVariation => "tv",
            DivergenceSpec::KullbackLeibler => "kl",
            DivergenceSpec::Wasserstein2 => "w2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tv" | "total-variation" => Some(DivergenceSpec::TotalVariation),
            "kl" | "kullback-leibler" => Some(DivergenceSpec::KullbackLeibler),
            "w2" | "wasserstein2" | "wasserstein-2" => Some(DivergenceSpec::Wasserstein2),
            _ => None,
        }
    }
}
