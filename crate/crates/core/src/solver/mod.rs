//! Exact trade-off solvers on finite sources: the classical
//! rate-distortion function, its perception-constrained extension, and
//! the side-information form that conditions both constraints on Y, with
//! a brute-force enumeration oracle for tiny instances.

mod ba;
mod brute;
mod fw;
mod rdp;

pub mod curve;

pub use ba::solve_rd;
pub use brute::{brute_force_rdcp, BruteEnvelope};
pub use curve::{trace_curve, CurveCell, TradeoffCurve};
pub use rdp::{solve_rdcp, solve_rdp};

use crate::info::{
    DistortionSpec, DivergenceSpec, InfoError, JointSource, ReconstructionKernel,
};
use thiserror::Error;

/// Perception budget: an explicit unconstrained tag, never a sentinel
/// float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PerceptionBound {
    Unconstrained,
    Level(f64),
}

impl PerceptionBound {
    pub fn is_finite(&self) -> bool {
        matches!(self, PerceptionBound::Level(_))
    }

    /// Numeric view for ordering and CSV export.
    pub fn as_f64(&self) -> f64 {
        match self {
            PerceptionBound::Unconstrained => f64::INFINITY,
            PerceptionBound::Level(p) => *p,
        }
    }
}

/// Whether the distortion/perception bounds apply to every y separately
/// or to the p(y)-weighted averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintMode {
    PerY,
    YAveraged,
}

/// One trade-off query: bounds, constraint mode and divergence family.
#[derive(Debug, Clone)]
pub struct TradeoffQuery {
    pub distortion_bound: f64,
    pub perception_bound: PerceptionBound,
    pub mode: ConstraintMode,
    pub divergence: DivergenceSpec,
}

impl TradeoffQuery {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.distortion_bound >= 0.0) {
            return Err(SolverError::BadQuery(format!(
                "distortion bound {} must be non-negative",
                self.distortion_bound
            )));
        }
        if let PerceptionBound::Level(p) = self.perception_bound {
            if !(p >= 0.0) {
                return Err(SolverError::BadQuery(format!(
                    "perception bound {p} must be non-negative"
                )));
            }
        }
        Ok(())
    }
}

/// The reconstruction alphabet a solve runs over. Defaults to the source
/// alphabet; callers may widen it.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionSpace {
    pub labels: Vec<String>,
    pub values: Option<Vec<f64>>,
}

impl ReconstructionSpace {
    pub fn from_source(source: &JointSource) -> Self {
        Self {
            labels: source.x_alphabet().to_vec(),
            values: source.x_values().map(|v| v.to_vec()),
        }
    }

    pub fn new(labels: Vec<String>, values: Option<Vec<f64>>) -> Self {
        Self { labels, values }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// How the conditional-gradient solver picks its step size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepRule {
    /// Exact line search along the chosen direction, with away steps.
    LineSearch,
    /// The classic 2/(k+2) schedule, plain conditional gradient.
    Classic,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// ε in bits: certified optimality gap at termination.
    pub tolerance_bits: f64,
    /// Conditional-gradient iteration budget per solve.
    pub max_iterations: usize,
    pub step_rule: StepRule,
    /// Inner fixed-multiplier iterations for the alternating-minimization
    /// rate-distortion solver.
    pub ba_max_iterations: usize,
    /// Lagrangian sweep resolution (bisection steps over the multiplier).
    pub ba_bisection_steps: usize,
    /// Outer linearization rounds for smooth-divergence constraints.
    pub max_cut_rounds: usize,
    /// Slack allowed on realized constraints.
    pub feasibility_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance_bits: 1e-4,
            max_iterations: 20_000,
            step_rule: StepRule::LineSearch,
            ba_max_iterations: 50_000,
            ba_bisection_steps: 200,
            max_cut_rounds: 80,
            feasibility_tol: 1e-9,
        }
    }
}

/// A solved trade-off point. Realized values are recomputed from the
/// returned kernel through the induced laws, not read off solver
/// internals, so feasibility is checked end to end.
#[derive(Debug, Clone)]
pub struct TradeoffPoint {
    pub rate_bits: f64,
    /// Overall E[Δ].
    pub distortion: f64,
    /// Realized divergence: max over y in per-y mode, p(y)-weighted mean
    /// in averaged mode (0 when |Y| = 1 collapses both).
    pub perception: f64,
    pub kernel: ReconstructionKernel,
    pub per_y_distortion: Vec<f64>,
    pub per_y_perception: Vec<f64>,
    pub iterations: usize,
    /// Certified bound on rate_bits − optimum (0 is exact).
    pub certified_gap_bits: f64,
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("distortion bound {requested} is below the achievable floor {floor}")]
    InfeasibleDistortion { requested: f64, floor: f64 },
    #[error("no kernel meets distortion {d} under perception bound {p} (minimum achievable distortion there is {min_distortion})")]
    InfeasiblePair { d: f64, p: f64, min_distortion: f64 },
    #[error("query infeasible for side information `{y}`: {inner}")]
    InfeasibleForY { y: String, inner: Box<SolverError> },
    #[error("solver did not converge: certified gap {gap_bits} bits after {iterations} iterations")]
    NotConverged { gap_bits: f64, iterations: usize },
    #[error("linear subproblem failed: {0}")]
    Lp(String),
    #[error("bad query: {0}")]
    BadQuery(String),
    #[error("brute-force instance too large: {points} grid points exceeds {limit}")]
    InstanceTooLarge { points: u128, limit: u128 },
    #[error("no grid kernel satisfies the constraints")]
    EmptyFeasibleGrid,
    #[error("grid not sorted ascending")]
    GridNotSorted,
    #[error(transparent)]
    Info(#[from] InfoError),
}

/// Minimal achievable distortion: each source symbol routed to its
/// cheapest reconstruction.
pub fn distortion_floor(px: &[f64], dist: &DistortionSpec) -> f64 {
    px.iter()
        .enumerate()
        .map(|(x, &p)| {
            let best = (0..dist.num_xhat())
                .map(|k| dist.value(x, k))
                .fold(f64::INFINITY, f64::min);
            p * best
        })
        .sum()
}

/// Zero-rate distortion: the best single reconstruction point.
pub fn zero_rate_distortion(px: &[f64], dist: &DistortionSpec) -> (f64, usize) {
    let mut best = (f64::INFINITY, 0usize);
    for k in 0..dist.num_xhat() {
        let d: f64 = px.iter().enumerate().map(|(x, &p)| p * dist.value(x, k)).sum();
        if d < best.0 {
            best = (d, k);
        }
    }
    best
}

/// Assembles realized rate/distortion/perception for a kernel, closing
/// the loop through the induced laws.
pub(crate) fn point_from_kernel(
    source: &JointSource,
    dist: &DistortionSpec,
    divergence: DivergenceSpec,
    mode: ConstraintMode,
    kernel: ReconstructionKernel,
    iterations: usize,
    certified_gap_bits: f64,
) -> Result<TradeoffPoint, SolverError> {
    let rate_bits = crate::info::kernel_cmi_bits(source, &kernel)?;
    let laws = crate::info::induced_laws(source, &kernel, dist)?;
    let (mean_div, per_y_div) = crate::info::conditional_divergence(divergence, source, &kernel)?;
    let perception = match mode {
        ConstraintMode::PerY => per_y_div.iter().copied().fold(0.0, f64::max),
        ConstraintMode::YAveraged => mean_div,
    };
    Ok(TradeoffPoint {
        rate_bits,
        distortion: laws.distortion,
        perception,
        kernel,
        per_y_distortion: laws.distortion_per_y,
        per_y_perception: per_y_div,
        iterations,
        certified_gap_bits,
    })
}
