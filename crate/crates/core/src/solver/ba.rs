//! Rate-distortion via alternating minimization over the kernel and the
//! output marginal, swept over the distortion multiplier.
//!
//! For a fixed multiplier β the double minimization converges to a point
//! on the curve with slope −β; bisecting β lands the distortion at the
//! requested bound. When the bound falls inside a linear segment of the
//! curve (the bracket collapses with the rate spread still open), the two
//! bracketing kernels are mixed — distortion is linear in the kernel and
//! the segment value is attained exactly by the mixture.

use super::{
    distortion_floor, point_from_kernel, zero_rate_distortion, ConstraintMode,
    ReconstructionSpace, SolverConfig, SolverError, TradeoffPoint,
};
use crate::info::{DistortionSpec, DivergenceSpec, JointSource, ReconstructionKernel};

pub(crate) struct RdSolution {
    /// `rows[x][xhat]`
    pub rows: Vec<Vec<f64>>,
    pub rate_bits: f64,
    pub iterations: usize,
}

fn mix_rows(a: &[Vec<f64>], b: &[Vec<f64>], t: f64) -> Vec<Vec<f64>> {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(&x, &y)| (1.0 - t) * x + t * y).collect())
        .collect()
}

fn rate_and_distortion(px: &[f64], dist: &DistortionSpec, rows: &[Vec<f64>]) -> (f64, f64) {
    let nhat = dist.num_xhat();
    let mut marginal = vec![0.0; nhat];
    for (x, row) in rows.iter().enumerate() {
        for (k, &q) in row.iter().enumerate() {
            marginal[k] += px[x] * q;
        }
    }
    let mut rate = 0.0;
    let mut d = 0.0;
    for (x, row) in rows.iter().enumerate() {
        if px[x] == 0.0 {
            continue;
        }
        for (k, &q) in row.iter().enumerate() {
            if q > 0.0 {
                rate += px[x] * q * (q / marginal[k]).log2();
                d += px[x] * q * dist.value(x, k);
            }
        }
    }
    (rate.max(0.0), d)
}

/// Fixed-β double minimization. β is in nats per distortion unit.
fn fixed_beta(
    px: &[f64],
    dist: &DistortionSpec,
    beta: f64,
    marginal_init: &[f64],
    max_iters: usize,
) -> (Vec<Vec<f64>>, Vec<f64>, usize) {
    let nx = px.len();
    let nhat = dist.num_xhat();
    let mut marginal = marginal_init.to_vec();
    let mut rows = vec![vec![0.0; nhat]; nx];
    let mut iters = 0;
    loop {
        iters += 1;
        for x in 0..nx {
            let dmin = (0..nhat).map(|k| dist.value(x, k)).fold(f64::INFINITY, f64::min);
            let mut z = 0.0;
            for k in 0..nhat {
                let w = marginal[k] * (-beta * (dist.value(x, k) - dmin)).exp();
                rows[x][k] = w;
                z += w;
            }
            for q in rows[x].iter_mut() {
                *q /= z;
            }
        }
        let mut next = vec![0.0; nhat];
        for x in 0..nx {
            for k in 0..nhat {
                next[k] += px[x] * rows[x][k];
            }
        }
        let delta = marginal
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        marginal = next;
        if delta < 1e-14 || iters >= max_iters {
            break;
        }
    }
    (rows, marginal, iters)
}

pub(crate) fn solve_rd_marginal(
    px: &[f64],
    dist: &DistortionSpec,
    d_bound: f64,
    config: &SolverConfig,
) -> Result<RdSolution, SolverError> {
    let nhat = dist.num_xhat();
    let floor = distortion_floor(px, dist);
    if d_bound < floor - 1e-12 {
        return Err(SolverError::InfeasibleDistortion { requested: d_bound, floor });
    }
    let (d_zero_rate, best_k) = zero_rate_distortion(px, dist);
    if d_bound >= d_zero_rate - 1e-15 {
        let mut row = vec![0.0; nhat];
        row[best_k] = 1.0;
        let rows = vec![row; px.len()];
        let (rate, _) = rate_and_distortion(px, dist, &rows);
        return Ok(RdSolution { rows, rate_bits: rate, iterations: 0 });
    }

    let uniform = vec![1.0 / nhat as f64; nhat];
    let mut total_iters = 0usize;

    let eval = |beta: f64, init: &[f64], total: &mut usize| {
        let (rows, marginal, it) = fixed_beta(px, dist, beta, init, config.ba_max_iterations);
        *total += it;
        let (rate, d) = rate_and_distortion(px, dist, &rows);
        (rows, marginal, rate, d)
    };

    // Bracket the multiplier: distortion decreases in beta.
    let mut beta_lo = 1e-9;
    let (mut rows_lo, _, mut rate_lo, mut d_lo) = eval(beta_lo, &uniform, &mut total_iters);
    if d_lo <= d_bound {
        // Already feasible at (numerically) zero slope: zero-rate regime.
        return Ok(RdSolution { rows: rows_lo, rate_bits: rate_lo, iterations: total_iters });
    }
    let mut beta_hi = 1.0;
    let (mut rows_hi, mut marg_hi, mut rate_hi, mut d_hi) =
        eval(beta_hi, &uniform, &mut total_iters);
    const BETA_CAP: f64 = 1e6;
    while d_hi > d_bound {
        beta_hi *= 2.0;
        if beta_hi > BETA_CAP {
            // The bound sits at (or numerically below) the deterministic
            // floor; hand the corner to the certified polytope solver.
            let fw = super::fw::solve_single_group_no_perception(px, dist, d_bound, config)?;
            return Ok(fw);
        }
        let out = eval(beta_hi, &marg_hi, &mut total_iters);
        rows_hi = out.0;
        marg_hi = out.1;
        rate_hi = out.2;
        d_hi = out.3;
    }
    if beta_hi > 1.0 {
        beta_lo = beta_hi / 2.0;
        let out = eval(beta_lo, &uniform, &mut total_iters);
        rows_lo = out.0;
        rate_lo = out.2;
        d_lo = out.3;
        if d_lo <= d_bound {
            return Ok(RdSolution { rows: rows_lo, rate_bits: rate_lo, iterations: total_iters });
        }
    }

    // Bisection on the multiplier. Invariant: d_lo > d_bound >= d_hi.
    for _ in 0..config.ba_bisection_steps {
        if rate_hi - rate_lo <= 0.5 * config.tolerance_bits {
            break;
        }
        if (beta_hi - beta_lo) < 1e-13 * beta_hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (beta_lo + beta_hi);
        let (rows_m, marg_m, rate_m, d_m) = eval(mid, &marg_hi, &mut total_iters);
        if d_m > d_bound {
            beta_lo = mid;
            rows_lo = rows_m;
            rate_lo = rate_m;
            d_lo = d_m;
        } else {
            beta_hi = mid;
            rows_hi = rows_m;
            marg_hi = marg_m;
            rate_hi = rate_m;
            d_hi = d_m;
        }
    }

    if rate_hi - rate_lo <= 0.5 * config.tolerance_bits {
        return Ok(RdSolution { rows: rows_hi, rate_bits: rate_hi, iterations: total_iters });
    }

    // Linear segment: mix the bracketing kernels to land exactly on the
    // bound; the mixture is optimal on the segment.
    let t = if (d_lo - d_hi).abs() < 1e-15 { 1.0 } else { (d_lo - d_bound) / (d_lo - d_hi) };
    let rows = mix_rows(&rows_lo, &rows_hi, t.clamp(0.0, 1.0));
    let (rate, _) = rate_and_distortion(px, dist, &rows);
    Ok(RdSolution { rows, rate_bits: rate, iterations: total_iters })
}

/// R(D) on the source's X marginal: minimal I(X; X̂) over kernels with
/// E[Δ] ≤ D. The returned kernel is feasible and y-independent.
pub fn solve_rd(
    source: &JointSource,
    xhat: &ReconstructionSpace,
    dist: &DistortionSpec,
    d_bound: f64,
    config: &SolverConfig,
) -> Result<TradeoffPoint, SolverError> {
    let sol = solve_rd_marginal(source.p_x(), dist, d_bound, config)?;
    let rows = sol
        .rows
        .iter()
        .map(|r| vec![r.clone(); source.num_y()])
        .collect();
    let kernel = ReconstructionKernel::new(xhat.labels.clone(), xhat.values.clone(), rows)?;
    // Perception plays no role in Eq-style rate-distortion; report the
    // realized TV for reference.
    let mut point = point_from_kernel(
        source,
        dist,
        DivergenceSpec::TotalVariation,
        ConstraintMode::YAveraged,
        kernel,
        sol.iterations,
        0.5 * config.tolerance_bits,
    )?;
    // |Y| > 1 sources: the solve ran on the X marginal, so the reported
    // rate is I(X; X̂) rather than the conditional objective.
    if source.num_y() > 1 {
        point.rate_bits = sol.rate_bits;
    }
    Ok(point)
}
