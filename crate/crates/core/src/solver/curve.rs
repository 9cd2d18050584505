//! Trade-off surfaces over (D, P) grids.

use super::{
    ConstraintMode, PerceptionBound, ReconstructionSpace, SolverConfig, SolverError,
    TradeoffQuery,
};
use crate::info::{DistortionSpec, DivergenceSpec, JointSource};
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct CurveCell {
    pub d: f64,
    pub p: PerceptionBound,
    pub rate_bits: Option<f64>,
    pub realized_d: Option<f64>,
    pub realized_p: Option<f64>,
    pub feasible: bool,
    pub iterations: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct TradeoffCurve {
    pub d_grid: Vec<f64>,
    pub p_grid: Vec<PerceptionBound>,
    /// Row-major: index = d_index * p_grid.len() + p_index.
    pub cells: Vec<CurveCell>,
    /// Monotonicity violations beyond tolerance, reported rather than
    /// silently accepted.
    pub diagnostics: Vec<String>,
}

impl TradeoffCurve {
    pub fn cell(&self, di: usize, pi: usize) -> &CurveCell {
        &self.cells[di * self.p_grid.len() + pi]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("D,P,rate_bits,realized_D,realized_P,feasible,iterations\n");
        for c in &self.cells {
            let p = match c.p {
                PerceptionBound::Unconstrained => "inf".to_string(),
                PerceptionBound::Level(v) => format!("{v}"),
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                c.d,
                p,
                c.rate_bits.map_or(String::new(), |v| v.to_string()),
                c.realized_d.map_or(String::new(), |v| v.to_string()),
                c.realized_p.map_or(String::new(), |v| v.to_string()),
                c.feasible,
                c.iterations
            ));
        }
        out
    }
}

fn ascending(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[0] <= w[1])
}

/// Solves every (D, P) cell. Infeasible cells are marked, not fatal;
/// other solver failures are carried in the cell's error field.
pub fn trace_curve(
    source: &JointSource,
    xhat: &ReconstructionSpace,
    dist: &DistortionSpec,
    divergence: DivergenceSpec,
    d_grid: &[f64],
    p_grid: &[PerceptionBound],
    mode: ConstraintMode,
    config: &SolverConfig,
) -> Result<TradeoffCurve, SolverError> {
    if d_grid.is_empty() || p_grid.is_empty() {
        return Err(SolverError::BadQuery("empty grid".to_string()));
    }
    if !ascending(d_grid) || !ascending(&p_grid.iter().map(|p| p.as_f64()).collect::<Vec<_>>()) {
        return Err(SolverError::GridNotSorted);
    }

    let queries: Vec<(f64, PerceptionBound)> = d_grid
        .iter()
        .flat_map(|&d| p_grid.iter().map(move |&p| (d, p)))
        .collect();

    let cells: Vec<CurveCell> = queries
        .par_iter()
        .map(|&(d, p)| {
            let query = TradeoffQuery {
                distortion_bound: d,
                perception_bound: p,
                mode,
                divergence,
            };
            match super::solve_rdcp(source, xhat, dist, &query, config) {
                Ok(point) => CurveCell {
                    d,
                    p,
                    rate_bits: Some(point.rate_bits),
                    realized_d: Some(point.distortion),
                    realized_p: Some(point.perception),
                    feasible: true,
                    iterations: point.iterations,
                    error: None,
                },
                Err(
                    e @ (SolverError::InfeasibleDistortion { .. }
                    | SolverError::InfeasiblePair { .. }
                    | SolverError::InfeasibleForY { .. }),
                ) => CurveCell {
                    d,
                    p,
                    rate_bits: None,
                    realized_d: None,
                    realized_p: None,
                    feasible: false,
                    iterations: 0,
                    error: Some(e.to_string()),
                },
                Err(e) => CurveCell {
                    d,
                    p,
                    rate_bits: None,
                    realized_d: None,
                    realized_p: None,
                    feasible: false,
                    iterations: 0,
                    error: Some(format!("solver failure: {e}")),
                },
            }
        })
        .collect();

    let mut curve = TradeoffCurve {
        d_grid: d_grid.to_vec(),
        p_grid: p_grid.to_vec(),
        cells,
        diagnostics: Vec::new(),
    };

    let tol = config.tolerance_bits;
    for pi in 0..curve.p_grid.len() {
        for di in 1..curve.d_grid.len() {
            if let (Some(prev), Some(cur)) =
                (curve.cell(di - 1, pi).rate_bits, curve.cell(di, pi).rate_bits)
            {
                if cur > prev + tol {
                    curve.diagnostics.push(format!(
                        "rate increased along D at (D={}, P={}): {prev} -> {cur}",
                        curve.d_grid[di],
                        curve.p_grid[pi].as_f64()
                    ));
                }
            }
        }
    }
    for di in 0..curve.d_grid.len() {
        for pi in 1..curve.p_grid.len() {
            if let (Some(prev), Some(cur)) =
                (curve.cell(di, pi - 1).rate_bits, curve.cell(di, pi).rate_bits)
            {
                if cur > prev + tol {
                    curve.diagnostics.push(format!(
                        "rate increased along P at (D={}, P={}): {prev} -> {cur}",
                        curve.d_grid[di],
                        curve.p_grid[pi].as_f64()
                    ));
                }
            }
        }
    }
    Ok(curve)
}
