//! Query dispatch for the perception-constrained solvers.
//!
//! P = ∞ reduces to the multiplier-swept rate-distortion solve. P = 0
//! turns the perception constraint into exact marginal equalities (any
//! divergence is zero iff its arguments are equal, so the reduction is
//! family-independent; under W2 equality is taken over embedded values).
//! A finite TV bound is polyhedral; finite KL/W2 bounds run through the
//! linearization-cut outer approximation. Everything lands in the same
//! certified conditional-gradient core.

use super::fw::{solve_program, PerceptionSpec, Program};
use super::{
    ba, point_from_kernel, ConstraintMode, PerceptionBound, ReconstructionSpace, SolverConfig,
    SolverError, TradeoffPoint, TradeoffQuery,
};
use crate::info::{DistortionSpec, DivergenceSpec, InfoError, JointSource, ReconstructionKernel};

/// p(X|y) re-expressed on the hat alphabet by label matching. Errors when
/// a positive-mass source symbol has no hat counterpart.
fn aligned_target_probs(
    source: &JointSource,
    xhat: &ReconstructionSpace,
    y: usize,
) -> Result<Vec<f64>, InfoError> {
    let cond = source.x_given_y(y);
    if xhat.labels == source.x_alphabet() {
        return Ok(cond);
    }
    let mut probs = vec![0.0; xhat.len()];
    for (x, label) in source.x_alphabet().iter().enumerate() {
        match xhat.labels.iter().position(|h| h == label) {
            Some(k) => probs[k] += cond[x],
            None if cond[x] > 0.0 => {
                return Err(InfoError::AlphabetNotCovering { label: label.clone() })
            }
            None => {}
        }
    }
    Ok(probs)
}

/// Equality classes for P = 0: per hat symbol for TV/KL, per distinct
/// embedded value for W2.
fn equality_classes(
    source: &JointSource,
    xhat: &ReconstructionSpace,
    divergence: DivergenceSpec,
    ys: &[usize],
) -> Result<(Vec<Vec<usize>>, Vec<Vec<f64>>), SolverError> {
    match divergence {
        DivergenceSpec::TotalVariation | DivergenceSpec::KullbackLeibler => {
            let classes: Vec<Vec<usize>> = (0..xhat.len()).map(|k| vec![k]).collect();
            let targets = ys
                .iter()
                .map(|&y| aligned_target_probs(source, xhat, y))
                .collect::<Result<Vec<_>, _>>()?;
            Ok((classes, targets))
        }
        DivergenceSpec::Wasserstein2 => {
            let xv = source.x_values().ok_or(InfoError::MissingEmbedding {
                context: "W2 perception (source side)".to_string(),
            })?;
            let hv = xhat.values.as_deref().ok_or(InfoError::MissingEmbedding {
                context: "W2 perception (reconstruction side)".to_string(),
            })?;
            let mut class_values: Vec<f64> = Vec::new();
            let mut classes: Vec<Vec<usize>> = Vec::new();
            for (k, &v) in hv.iter().enumerate() {
                match class_values.iter().position(|&cv| cv == v) {
                    Some(c) => classes[c].push(k),
                    None => {
                        class_values.push(v);
                        classes.push(vec![k]);
                    }
                }
            }
            let mut targets = Vec::with_capacity(ys.len());
            for &y in ys {
                let cond = source.x_given_y(y);
                let mut t = vec![0.0; classes.len()];
                for (x, &p) in cond.iter().enumerate() {
                    if p == 0.0 {
                        continue;
                    }
                    match class_values.iter().position(|&cv| cv == xv[x]) {
                        Some(c) => t[c] += p,
                        None => {
                            // No hat symbol carries this value, so the
                            // value-distribution can never match: W2 > 0.
                            return Err(SolverError::InfeasiblePair {
                                d: 0.0,
                                p: 0.0,
                                min_distortion: f64::INFINITY,
                            });
                        }
                    }
                }
                targets.push(t);
            }
            Ok((classes, targets))
        }
    }
}

struct BuiltProgram {
    prog: Program,
    identity_map: Vec<Option<usize>>,
    /// (x, y) per row, for kernel assembly.
    row_xy: Vec<(usize, usize)>,
}

fn build_program(
    source: &JointSource,
    xhat: &ReconstructionSpace,
    dist: &DistortionSpec,
    divergence: DivergenceSpec,
    d_bound: f64,
    p_bound: PerceptionBound,
    ys: &[usize],
    group_weights: Vec<f64>,
) -> Result<BuiltProgram, SolverError> {
    let nx = source.num_x();
    let n_hat = xhat.len();
    let mut row_cond_weight = Vec::with_capacity(nx * ys.len());
    let mut row_group = Vec::with_capacity(nx * ys.len());
    let mut row_xy = Vec::with_capacity(nx * ys.len());
    let mut distortion_rows = Vec::with_capacity(nx * ys.len());
    for (g, &y) in ys.iter().enumerate() {
        let cond = source.x_given_y(y);
        for x in 0..nx {
            row_cond_weight.push(cond[x]);
            row_group.push(g);
            row_xy.push((x, y));
            distortion_rows.push((0..n_hat).map(|k| dist.value(x, k)).collect());
        }
    }

    let perception = match p_bound {
        PerceptionBound::Unconstrained => PerceptionSpec::None,
        PerceptionBound::Level(p) if p == 0.0 => {
            let (classes, targets) = equality_classes(source, xhat, divergence, ys)?;
            PerceptionSpec::Equality { classes, targets }
        }
        PerceptionBound::Level(p) => match divergence {
            DivergenceSpec::TotalVariation => {
                let targets = ys
                    .iter()
                    .map(|&y| aligned_target_probs(source, xhat, y))
                    .collect::<Result<Vec<_>, _>>()?;
                PerceptionSpec::TvBall { targets, bound: p }
            }
            DivergenceSpec::KullbackLeibler => {
                let targets = ys
                    .iter()
                    .map(|&y| aligned_target_probs(source, xhat, y))
                    .collect::<Result<Vec<_>, _>>()?;
                PerceptionSpec::Smooth {
                    family: divergence,
                    targets,
                    target_values: Vec::new(),
                    hat_values: None,
                    bound: p,
                }
            }
            DivergenceSpec::Wasserstein2 => {
                let xv = source.x_values().ok_or(InfoError::MissingEmbedding {
                    context: "W2 perception (source side)".to_string(),
                })?;
                let hv = xhat.values.clone().ok_or(InfoError::MissingEmbedding {
                    context: "W2 perception (reconstruction side)".to_string(),
                })?;
                let targets = ys.iter().map(|&y| source.x_given_y(y)).collect();
                PerceptionSpec::Smooth {
                    family: divergence,
                    targets,
                    target_values: xv.to_vec(),
                    hat_values: Some(hv),
                    bound: p,
                }
            }
        },
    };

    let identity_map = row_xy
        .iter()
        .map(|&(x, _)| {
            let label = &source.x_alphabet()[x];
            xhat.labels.iter().position(|h| h == label)
        })
        .collect();

    Ok(BuiltProgram {
        prog: Program {
            n_hat,
            row_cond_weight,
            row_group,
            n_groups: ys.len(),
            group_weight: group_weights,
            distortion_rows,
            d_bound,
            perception,
        },
        identity_map,
        row_xy,
    })
}

/// Single-group (|Y| = 1 view) solve returning raw kernel rows.
fn solve_single(
    source: &JointSource,
    xhat: &ReconstructionSpace,
    dist: &DistortionSpec,
    divergence: DivergenceSpec,
    d_bound: f64,
    p_bound: PerceptionBound,
    y: usize,
    config: &SolverConfig,
) -> Result<(Vec<Vec<f64>>, f64, usize), SolverError> {
    if let PerceptionBound::Unconstrained = p_bound {
        let cond = source.x_given_y(y);
        let sol = ba::solve_rd_marginal(&cond, dist, d_bound, config)?;
        return Ok((sol.rows, 0.5 * config.tolerance_bits, sol.iterations));
    }
    let built = build_program(source, xhat, dist, divergence, d_bound, p_bound, &[y], vec![1.0])?;

    // Feasibility probe: minimize distortion subject to perception alone.
    let (lower, attained) = super::fw::probe_min_distortion(&built.prog, config)?;
    if d_bound < lower - config.feasibility_tol {
        return Err(SolverError::InfeasiblePair {
            d: d_bound,
            p: p_bound.as_f64(),
            min_distortion: attained.unwrap_or(lower),
        });
    }

    let sol = solve_program(&built.prog, &built.identity_map, config)?;
    let nx = source.num_x();
    let rows: Vec<Vec<f64>> = (0..nx)
        .map(|x| sol.q[x * built.prog.n_hat..(x + 1) * built.prog.n_hat].to_vec())
        .collect();
    Ok((rows, sol.certified_gap_bits, sol.iterations))
}

/// R(D, P) on a source with trivial side information.
pub fn solve_rdp(
    source: &JointSource,
    xhat: &ReconstructionSpace,
    dist: &DistortionSpec,
    divergence: DivergenceSpec,
    d_bound: f64,
    p_bound: PerceptionBound,
    config: &SolverConfig,
) -> Result<TradeoffPoint, SolverError> {
    if source.num_y() != 1 {
        return Err(SolverError::BadQuery(format!(
            "solve_rdp expects |Y| = 1, got {} (use solve_rdcp)",
            source.num_y()
        )));
    }
    let query = TradeoffQuery {
        distortion_bound: d_bound,
        perception_bound: p_bound,
        mode: ConstraintMode::PerY,
        divergence,
    };
    solve_rdcp(source, xhat, dist, &query, config)
}

/// The conditional trade-off: minimum I(X; X̂ | Y) under distortion and
/// conditional-perception bounds. In per-y mode the program separates
/// into one solve per y; in averaged mode one joint program couples them.
pub fn solve_rdcp(
    source: &JointSource,
    xhat: &ReconstructionSpace,
    dist: &DistortionSpec,
    query: &TradeoffQuery,
    config: &SolverConfig,
) -> Result<TradeoffPoint, SolverError> {
    query.validate()?;
    if dist.num_x() != source.num_x() || dist.num_xhat() != xhat.len() {
        return Err(SolverError::BadQuery(format!(
            "distortion table {}x{} does not match source {} / reconstruction {}",
            dist.num_x(),
            dist.num_xhat(),
            source.num_x(),
            xhat.len()
        )));
    }
    let ny = source.num_y();
    match query.mode {
        ConstraintMode::PerY => {
            let mut rows = vec![vec![Vec::new(); ny]; source.num_x()];
            let mut gap = 0.0;
            let mut iterations = 0;
            for y in 0..ny {
                let (kernel_rows, gap_y, it) = solve_single(
                    source,
                    xhat,
                    dist,
                    query.divergence,
                    query.distortion_bound,
                    query.perception_bound,
                    y,
                    config,
                )
                .map_err(|e| match e {
                    e @ (SolverError::InfeasibleDistortion { .. }
                    | SolverError::InfeasiblePair { .. }) => SolverError::InfeasibleForY {
                        y: source.y_alphabet()[y].clone(),
                        inner: Box::new(e),
                    },
                    other => other,
                })?;
                for (x, row) in kernel_rows.into_iter().enumerate() {
                    rows[x][y] = row;
                }
                gap += source.p_y()[y] * gap_y;
                iterations += it;
            }
            let kernel = ReconstructionKernel::new(xhat.labels.clone(), xhat.values.clone(), rows)?;
            point_from_kernel(source, dist, query.divergence, query.mode, kernel, iterations, gap)
        }
        ConstraintMode::YAveraged => {
            let ys: Vec<usize> = (0..ny).collect();
            let built = build_program(
                source,
                xhat,
                dist,
                query.divergence,
                query.distortion_bound,
                query.perception_bound,
                &ys,
                source.p_y().to_vec(),
            )?;
            let (lower, attained) = super::fw::probe_min_distortion(&built.prog, config)?;
            if query.distortion_bound < lower - config.feasibility_tol {
                return Err(SolverError::InfeasiblePair {
                    d: query.distortion_bound,
                    p: query.perception_bound.as_f64(),
                    min_distortion: attained.unwrap_or(lower),
                });
            }
            let sol = solve_program(&built.prog, &built.identity_map, config)?;
            let n_hat = built.prog.n_hat;
            let mut rows = vec![vec![vec![0.0; n_hat]; ny]; source.num_x()];
            for (r, &(x, y)) in built.row_xy.iter().enumerate() {
                rows[x][y] = sol.q[r * n_hat..(r + 1) * n_hat].to_vec();
            }
            let kernel = ReconstructionKernel::new(xhat.labels.clone(), xhat.values.clone(), rows)?;
            point_from_kernel(
                source,
                dist,
                query.divergence,
                query.mode,
                kernel,
                sol.iterations,
                sol.certified_gap_bits,
            )
        }
    }
}
