//! Conditional-gradient minimization of (conditional) mutual information
//! over the kernel polytope.
//!
//! The feasible set is the product of per-row simplices intersected with
//! a linear distortion constraint and a perception constraint. TV balls
//! and exact marginal equalities are polyhedral and go straight into the
//! linear subproblem; KL and W2 constraints are handled through an outer
//! approximation refined with linearization cuts (valid because both are
//! convex in the reconstruction marginal), with feasibility restored by
//! mixing toward a divergence-zero anchor kernel.
//!
//! Certification: at any iterate, f(x) − <∇f(x), x − s> with s the exact
//! linear-subproblem minimizer lower-bounds the optimum of the outer
//! problem, which itself lower-bounds the true optimum. The solver keeps
//! the best such bound and terminates when the certified gap drops below
//! the configured tolerance.
//!
//! Boundary handling: the mutual-information gradient blows up on the
//! simplex boundary, which both stalls the conditional-gradient steps
//! (the true line-search minimum toward a zero coordinate can sit at
//! γ ~ 1e-30) and inflates the gap. The subproblem therefore runs over
//! the η-interior polytope q ≥ η with every constraint right-hand side
//! relaxed by the exact cost of mapping a feasible kernel to
//! (q + η)/(1 + |X̂|η); the mapping also perturbs the objective by at
//! most an entropy-modulus term, which is added to the certified gap.
//! With η = 1e-10 the extra gap is ~1e-7 bits, far below the
//! tolerances in play.

use super::{ba::RdSolution, SolverConfig, SolverError, StepRule};
use crate::info::{kl_bits, total_variation, w2_dual_potentials, w2_squared, DistortionSpec, DivergenceSpec};
use microlp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem, Variable};

/// Interior floor on kernel entries inside the linear subproblems.
const ETA: f64 = 1e-10;

#[derive(Debug, Clone)]
pub(crate) enum PerceptionSpec {
    None,
    TvBall { targets: Vec<Vec<f64>>, bound: f64 },
    /// Marginal equality over classes of hat symbols (one class per hat
    /// symbol for TV/KL; one class per distinct embedded value for W2,
    /// where divergence zero means value-distribution equality).
    Equality { classes: Vec<Vec<usize>>, targets: Vec<Vec<f64>> },
    Smooth { family: DivergenceSpec, targets: Vec<Vec<f64>>, target_values: Vec<f64>, hat_values: Option<Vec<f64>>, bound: f64 },
}

/// One convex subproblem: rows of the kernel stacked over groups (a group
/// is one value of y in averaged mode; a single group in per-y mode).
#[derive(Debug, Clone)]
pub(crate) struct Program {
    pub n_hat: usize,
    /// p(x | group) weight of each row.
    pub row_cond_weight: Vec<f64>,
    pub row_group: Vec<usize>,
    pub n_groups: usize,
    /// p(y) per group; `[1.0]` in per-y mode.
    pub group_weight: Vec<f64>,
    /// Δ(x, ·) slice per row.
    pub distortion_rows: Vec<Vec<f64>>,
    pub d_bound: f64,
    pub perception: PerceptionSpec,
}

#[derive(Debug, Clone)]
struct Cut {
    coeffs: Vec<f64>,
    rhs: f64,
}

pub(crate) struct ProgramSolution {
    pub q: Vec<f64>,
    pub certified_gap_bits: f64,
    pub iterations: usize,
}

impl Program {
    pub fn n_rows(&self) -> usize {
        self.row_cond_weight.len()
    }

    pub fn n_vars(&self) -> usize {
        self.n_rows() * self.n_hat
    }

    fn marginals(&self, q: &[f64]) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.n_hat]; self.n_groups];
        for row in 0..self.n_rows() {
            let w = self.row_cond_weight[row];
            if w == 0.0 {
                continue;
            }
            let g = self.row_group[row];
            for k in 0..self.n_hat {
                m[g][k] += w * q[row * self.n_hat + k];
            }
        }
        m
    }

    /// Objective Σ_g p(g) I_g in bits.
    pub fn objective(&self, q: &[f64]) -> f64 {
        let m = self.marginals(q);
        let mut total = 0.0;
        for row in 0..self.n_rows() {
            let w = self.row_cond_weight[row];
            if w == 0.0 {
                continue;
            }
            let g = self.row_group[row];
            let gw = self.group_weight[g];
            for k in 0..self.n_hat {
                let qv = q[row * self.n_hat + k];
                if qv > 0.0 && m[g][k] > 0.0 {
                    total += gw * w * qv * (qv / m[g][k]).log2();
                }
            }
        }
        total.max(0.0)
    }

    fn gradient(&self, q: &[f64]) -> Vec<f64> {
        let m = self.marginals(q);
        let mut grad = vec![0.0; self.n_vars()];
        for row in 0..self.n_rows() {
            let w = self.row_cond_weight[row];
            if w == 0.0 {
                continue;
            }
            let g = self.row_group[row];
            let gw = self.group_weight[g];
            for k in 0..self.n_hat {
                let qv = q[row * self.n_hat + k].max(LOG_CLAMP);
                let mv = m[g][k].max(LOG_CLAMP);
                grad[row * self.n_hat + k] = gw * w * (qv / mv).log2();
            }
        }
        grad
    }

    pub fn distortion_value(&self, q: &[f64]) -> f64 {
        let mut d = 0.0;
        for row in 0..self.n_rows() {
            let w = self.group_weight[self.row_group[row]] * self.row_cond_weight[row];
            if w == 0.0 {
                continue;
            }
            for k in 0..self.n_hat {
                d += w * self.distortion_rows[row][k] * q[row * self.n_hat + k];
            }
        }
        d
    }

    /// Aggregate perception value for Smooth constraints; +∞ encodes an
    /// absolute-continuity failure under KL.
    pub fn perception_value(&self, q: &[f64]) -> f64 {
        match &self.perception {
            PerceptionSpec::None => 0.0,
            PerceptionSpec::TvBall { targets, .. } => {
                let m = self.marginals(q);
                (0..self.n_groups)
                    .map(|g| {
                        self.group_weight[g]
                            * total_variation(&targets[g], &m[g])
                    })
                    .sum()
            }
            PerceptionSpec::Equality { classes, targets } => {
                let m = self.marginals(q);
                let mut worst: f64 = 0.0;
                for g in 0..self.n_groups {
                    for (c, members) in classes.iter().enumerate() {
                        let got: f64 = members.iter().map(|&k| m[g][k]).sum();
                        worst = worst.max((got - targets[g][c]).abs());
                    }
                }
                worst
            }
            PerceptionSpec::Smooth { family, targets, target_values, hat_values, .. } => {
                let m = self.marginals(q);
                let mut total = 0.0;
                for g in 0..self.n_groups {
                    let d = match family {
                        DivergenceSpec::KullbackLeibler => {
                            match kl_bits(&targets[g], &m[g]) {
                                Ok(v) => v,
                                Err(_) => return f64::INFINITY,
                            }
                        }
                        DivergenceSpec::Wasserstein2 => w2_squared(
                            &targets[g],
                            target_values,
                            &m[g],
                            hat_values.as_deref().unwrap_or(target_values),
                        ),
                        DivergenceSpec::TotalVariation => {
                            total_variation(&targets[g], &m[g])
                        }
                    };
                    total += self.group_weight[g] * d;
                }
                total
            }
        }
    }

    /// Linearization cut at `q0` for the Smooth constraint (valid outer
    /// cut by convexity of the divergence in its second argument).
    fn smooth_cut(&self, q0: &[f64]) -> Option<Cut> {
        let PerceptionSpec::Smooth { family, targets, target_values, hat_values, bound } =
            &self.perception
        else {
            return None;
        };
        let m = self.marginals(q0);
        let mut psi_per_group = Vec::with_capacity(self.n_groups);
        let mut c0 = 0.0;
        for g in 0..self.n_groups {
            let (d, psi) = match family {
                DivergenceSpec::KullbackLeibler => {
                    let d = kl_bits(&targets[g], &m[g]).ok()?;
                    let psi: Vec<f64> = (0..self.n_hat)
                        .map(|k| {
                            if targets[g][k] > 0.0 {
                                -targets[g][k] / (m[g][k].max(LOG_CLAMP) * std::f64::consts::LN_2)
                            } else {
                                0.0
                            }
                        })
                        .collect();
                    (d, psi)
                }
                DivergenceSpec::Wasserstein2 => {
                    let hv = hat_values.as_deref().unwrap_or(target_values);
                    let d = w2_squared(&targets[g], target_values, &m[g], hv);
                    let (_, psi) = w2_dual_potentials(&targets[g], target_values, &m[g], hv);
                    (d, psi)
                }
                DivergenceSpec::TotalVariation => return None,
            };
            c0 += self.group_weight[g] * d;
            psi_per_group.push(psi);
        }
        let mut coeffs = vec![0.0; self.n_vars()];
        let mut dot_x0 = 0.0;
        for row in 0..self.n_rows() {
            let g = self.row_group[row];
            let w = self.group_weight[g] * self.row_cond_weight[row];
            for k in 0..self.n_hat {
                let c = w * psi_per_group[g][k];
                coeffs[row * self.n_hat + k] = c;
                dot_x0 += c * q0[row * self.n_hat + k];
            }
        }
        Some(Cut { coeffs, rhs: bound - c0 + dot_x0 })
    }

    /// The divergence-zero anchor: every row routed to the hat symbol
    /// reproducing its target mass (identity when the hat alphabet mirrors
    /// the source). `None` when no such vector is available.
    fn anchor(&self, identity_map: &[Option<usize>]) -> Option<Vec<f64>> {
        let mut q = vec![0.0; self.n_vars()];
        for row in 0..self.n_rows() {
            let k = identity_map[row]?;
            q[row * self.n_hat + k] = 1.0;
        }
        Some(q)
    }
}

/// Exact linear subproblem over the outer polytope.
fn lmo(prog: &Program, objective: &[f64], cuts: &[Cut]) -> Result<Vec<f64>, SolverError> {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let n = prog.n_vars();
    let vars: Vec<Variable> = (0..n).map(|i| lp.add_var(objective[i], (0.0, 1.0))).collect();

    for row in 0..prog.n_rows() {
        let mut expr = LinearExpr::empty();
        for k in 0..prog.n_hat {
            expr.add(vars[row * prog.n_hat + k], 1.0);
        }
        lp.add_constraint(expr, ComparisonOp::Eq, 1.0);
    }

    if prog.d_bound.is_finite() {
        let mut expr = LinearExpr::empty();
        let mut any = false;
        for row in 0..prog.n_rows() {
            let w = prog.group_weight[prog.row_group[row]] * prog.row_cond_weight[row];
            if w == 0.0 {
                continue;
            }
            for k in 0..prog.n_hat {
                let c = w * prog.distortion_rows[row][k];
                if c != 0.0 {
                    expr.add(vars[row * prog.n_hat + k], c);
                    any = true;
                }
            }
        }
        if any {
            lp.add_constraint(expr, ComparisonOp::Le, prog.d_bound + 1e-11);
        }
    }

    match &prog.perception {
        PerceptionSpec::None | PerceptionSpec::Smooth { .. } => {}
        PerceptionSpec::TvBall { targets, bound } => {
            // t_{g,k} ≥ |m_g[k] − target_g[k]|, Σ_g p(g) ½ Σ_k t ≤ bound.
            let tvars: Vec<Variable> = (0..prog.n_groups * prog.n_hat)
                .map(|_| lp.add_var(0.0, (0.0, 2.0)))
                .collect();
            for g in 0..prog.n_groups {
                for k in 0..prog.n_hat {
                    let t = tvars[g * prog.n_hat + k];
                    let mut pos = LinearExpr::empty();
                    let mut neg = LinearExpr::empty();
                    for row in 0..prog.n_rows() {
                        if prog.row_group[row] != g || prog.row_cond_weight[row] == 0.0 {
                            continue;
                        }
                        pos.add(vars[row * prog.n_hat + k], prog.row_cond_weight[row]);
                        neg.add(vars[row * prog.n_hat + k], -prog.row_cond_weight[row]);
                    }
                    pos.add(t, -1.0);
                    lp.add_constraint(pos, ComparisonOp::Le, targets[g][k]);
                    neg.add(t, -1.0);
                    lp.add_constraint(neg, ComparisonOp::Le, -targets[g][k]);
                }
            }
            let mut total = LinearExpr::empty();
            for g in 0..prog.n_groups {
                for k in 0..prog.n_hat {
                    total.add(tvars[g * prog.n_hat + k], 0.5 * prog.group_weight[g]);
                }
            }
            lp.add_constraint(total, ComparisonOp::Le, *bound + 1e-11);
        }
        PerceptionSpec::Equality { classes, targets } => {
            for g in 0..prog.n_groups {
                for (c, members) in classes.iter().enumerate() {
                    let mut expr = LinearExpr::empty();
                    let mut any = false;
                    for row in 0..prog.n_rows() {
                        if prog.row_group[row] != g || prog.row_cond_weight[row] == 0.0 {
                            continue;
                        }
                        for &k in members {
                            expr.add(vars[row * prog.n_hat + k], prog.row_cond_weight[row]);
                            any = true;
                        }
                    }
                    if any {
                        lp.add_constraint(expr, ComparisonOp::Eq, targets[g][c]);
                    }
                }
            }
        }
    }

    for cut in cuts {
        let mut expr = LinearExpr::empty();
        for (i, &c) in cut.coeffs.iter().enumerate() {
            if c != 0.0 {
                expr.add(vars[i], c);
            }
        }
        lp.add_constraint(expr, ComparisonOp::Le, cut.rhs);
    }

    let solution = lp.solve().map_err(|e| SolverError::Lp(e.to_string()))?;
    Ok(vars.iter().map(|&v| (*solution.var_value(v)).clamp(0.0, 1.0)).collect())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(x: &[f64], d: &[f64], gamma: f64) -> Vec<f64> {
    x.iter().zip(d).map(|(&a, &b)| (a + gamma * b).max(0.0)).collect()
}

/// Exact line search: bisection on the directional derivative, which is
/// monotone by convexity.
fn line_search(prog: &Program, x: &[f64], d: &[f64], gamma_max: f64) -> f64 {
    let phi_prime = |gamma: f64| dot(&prog.gradient(&axpy(x, d, gamma)), d);
    if phi_prime(gamma_max) <= 0.0 {
        return gamma_max;
    }
    if phi_prime(0.0) >= 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0f64, gamma_max);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if phi_prime(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

struct ActiveSet {
    vertices: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl ActiveSet {
    fn new(start: Vec<f64>) -> Self {
        Self { vertices: vec![start], weights: vec![1.0] }
    }

    fn current(&self) -> Vec<f64> {
        let n = self.vertices[0].len();
        let mut x = vec![0.0; n];
        for (v, &w) in self.vertices.iter().zip(&self.weights) {
            for i in 0..n {
                x[i] += w * v[i];
            }
        }
        x
    }

    fn find_or_insert(&mut self, v: &[f64]) -> usize {
        for (i, u) in self.vertices.iter().enumerate() {
            if u.iter().zip(v).all(|(a, b)| (a - b).abs() < 1e-10) {
                return i;
            }
        }
        self.vertices.push(v.to_vec());
        self.weights.push(0.0);
        self.vertices.len() - 1
    }

    fn prune(&mut self) {
        let mut i = 0;
        while i < self.weights.len() {
            if self.weights[i] <= 1e-14 {
                self.weights.swap_remove(i);
                self.vertices.swap_remove(i);
            } else {
                i += 1;
            }
        }
        let total: f64 = self.weights.iter().sum();
        if total > 0.0 {
            for w in self.weights.iter_mut() {
                *w /= total;
            }
        }
    }
}

struct FwRun {
    x: Vec<f64>,
    /// Best lower bound on the outer optimum seen so far, in bits.
    lower_bound: f64,
    iterations: usize,
}

fn run_fw(
    prog: &Program,
    cuts: &[Cut],
    start: Vec<f64>,
    config: &SolverConfig,
    budget: usize,
    lower_seed: f64,
) -> Result<FwRun, SolverError> {
    let mut active = ActiveSet::new(start);
    let mut x = active.current();
    let mut lower = lower_seed;
    let mut iterations = 0;

    let debug = std::env::var_os("RDCP_FW_DEBUG").is_some();
    while iterations < budget {
        iterations += 1;
        let grad = prog.gradient(&x);
        let s = lmo(prog, &grad, cuts)?;
        let f_x = prog.objective(&x);
        let gap = (dot(&grad, &x) - dot(&grad, &s)).max(0.0);
        lower = lower.max(f_x - gap);
        if debug && iterations < 30 {
            eprintln!(
                "fw iter {iterations}: f={f_x:.6} gap={gap:.6} lower={lower:.6} |S|={} x={x:?} s={s:?}",
                active.vertices.len()
            );
        }
        if f_x - lower <= config.tolerance_bits * 0.5 {
            return Ok(FwRun { x, lower_bound: lower, iterations });
        }

        match config.step_rule {
            StepRule::Classic => {
                let gamma = 2.0 / (iterations as f64 + 2.0);
                let idx = active.find_or_insert(&s);
                for w in active.weights.iter_mut() {
                    *w *= 1.0 - gamma;
                }
                active.weights[idx] += gamma;
            }
            StepRule::LineSearch => {
                // Away-step variant: compare the regular direction with
                // moving mass off the worst active vertex.
                let mut away_idx = None;
                let mut away_score = f64::NEG_INFINITY;
                for (i, v) in active.vertices.iter().enumerate() {
                    if active.weights[i] > 1e-14 {
                        let sc = dot(&grad, v);
                        if sc > away_score {
                            away_score = sc;
                            away_idx = Some(i);
                        }
                    }
                }
                let gap_away = away_score - dot(&grad, &x);
                let use_away = match away_idx {
                    Some(_) => gap_away > gap && active.vertices.len() > 1,
                    None => false,
                };
                if use_away {
                    let vi = away_idx.unwrap();
                    let alpha = active.weights[vi];
                    let gamma_max = (alpha / (1.0 - alpha).max(1e-15)).min(1e6);
                    let d: Vec<f64> =
                        x.iter().zip(&active.vertices[vi]).map(|(&a, &b)| a - b).collect();
                    let gamma = line_search(prog, &x, &d, gamma_max);
                    if gamma > 0.0 {
                        for w in active.weights.iter_mut() {
                            *w *= 1.0 + gamma;
                        }
                        active.weights[vi] -= gamma;
                    } else {
                        // Degenerate away direction; fall back to a plain step.
                        let idx = active.find_or_insert(&s);
                        let d: Vec<f64> = s.iter().zip(&x).map(|(&a, &b)| a - b).collect();
                        let gamma = line_search(prog, &x, &d, 1.0);
                        for w in active.weights.iter_mut() {
                            *w *= 1.0 - gamma;
                        }
                        active.weights[idx] += gamma;
                    }
                } else {
                    let idx = active.find_or_insert(&s);
                    let d: Vec<f64> = s.iter().zip(&x).map(|(&a, &b)| a - b).collect();
                    let gamma = line_search(prog, &x, &d, 1.0);
                    for w in active.weights.iter_mut() {
                        *w *= 1.0 - gamma;
                    }
                    active.weights[idx] += gamma;
                }
            }
        }
        active.prune();
        x = active.current();
    }
    Ok(FwRun { x, lower_bound: lower, iterations })
}

/// Solves the convex program to the configured certified gap.
///
/// `identity_map[row]` is the hat index reproducing row's symbol, when one
/// exists; it provides the anchor for smooth-constraint restoration.
pub(crate) fn solve_program(
    prog: &Program,
    identity_map: &[Option<usize>],
    config: &SolverConfig,
) -> Result<ProgramSolution, SolverError> {
    // A feasible starting vertex: the distortion minimizer of the outer
    // polytope (always exists when the query is feasible).
    let dist_obj: Vec<f64> = (0..prog.n_vars())
        .map(|i| {
            let row = i / prog.n_hat;
            let w = prog.group_weight[prog.row_group[row]] * prog.row_cond_weight[row];
            w * prog.distortion_rows[row][i % prog.n_hat]
        })
        .collect();

    match &prog.perception {
        PerceptionSpec::None | PerceptionSpec::TvBall { .. } | PerceptionSpec::Equality { .. } => {
            let start = lmo(prog, &dist_obj, &[])?;
            let run = run_fw(prog, &[], start, config, config.max_iterations, f64::NEG_INFINITY)?;
            let gap = prog.objective(&run.x) - run.lower_bound;
            if gap > config.tolerance_bits {
                return Err(SolverError::NotConverged { gap_bits: gap, iterations: run.iterations });
            }
            Ok(ProgramSolution { q: run.x, certified_gap_bits: gap.max(0.0), iterations: run.iterations })
        }
        PerceptionSpec::Smooth { bound, .. } => {
            let bound = *bound;
            let anchor = prog.anchor(identity_map).filter(|a| {
                prog.distortion_value(a) <= prog.d_bound + config.feasibility_tol
                    && prog.perception_value(a) <= config.feasibility_tol
            });
            let mut cuts: Vec<Cut> = Vec::new();
            let mut lower = f64::NEG_INFINITY;
            let mut iterations = 0usize;
            let mut best: Option<(Vec<f64>, f64)> = None; // (feasible q, f)

            for _round in 0..config.max_cut_rounds {
                if iterations >= config.max_iterations {
                    break;
                }
                let start = match &anchor {
                    Some(a) => a.clone(),
                    None => lmo(prog, &dist_obj, &cuts)?,
                };
                let run = run_fw(
                    prog,
                    &cuts,
                    start,
                    config,
                    config.max_iterations - iterations,
                    lower,
                )?;
                iterations += run.iterations;
                lower = lower.max(run.lower_bound);
                let c = prog.perception_value(&run.x);

                let candidate = if c <= bound + config.feasibility_tol {
                    Some(run.x.clone())
                } else if let Some(a) = &anchor {
                    // Restore feasibility: convexity in the marginal makes
                    // the mixed divergence at most (1−θ)·c.
                    let mut theta = (1.0 - bound / c).clamp(0.0, 1.0) + 1e-12;
                    let mut mixed = None;
                    for _ in 0..60 {
                        let t: Vec<f64> = run
                            .x
                            .iter()
                            .zip(a)
                            .map(|(&xv, &av)| (1.0 - theta) * xv + theta * av)
                            .collect();
                        if prog.perception_value(&t) <= bound + config.feasibility_tol {
                            mixed = Some(t);
                            break;
                        }
                        theta = (theta * 1.5 + 1e-9).min(1.0);
                    }
                    mixed
                } else {
                    None
                };

                if let Some(q) = candidate {
                    let f = prog.objective(&q);
                    if best.as_ref().is_none_or(|(_, bf)| f < *bf) {
                        best = Some((q, f));
                    }
                    if let Some((_, bf)) = &best {
                        if bf - lower <= config.tolerance_bits {
                            let (q, f) = best.unwrap();
                            return Ok(ProgramSolution {
                                q,
                                certified_gap_bits: (f - lower).max(0.0),
                                iterations,
                            });
                        }
                    }
                }

                // Tighten the outer approximation at the iterate (mixed
                // toward the anchor until the divergence is finite).
                let mut cut_point = run.x.clone();
                let mut tries = 0;
                while !prog.perception_value(&cut_point).is_finite() && tries < 60 {
                    let Some(a) = &anchor else { break };
                    cut_point = cut_point
                        .iter()
                        .zip(a)
                        .map(|(&xv, &av)| 0.9 * xv + 0.1 * av)
                        .collect();
                    tries += 1;
                }
                match prog.smooth_cut(&cut_point) {
                    Some(cut) => cuts.push(cut),
                    None => break,
                }
            }

            match best {
                Some((q, f)) => {
                    let gap = (f - lower).max(0.0);
                    if gap > config.tolerance_bits {
                        Err(SolverError::NotConverged { gap_bits: gap, iterations })
                    } else {
                        Ok(ProgramSolution { q, certified_gap_bits: gap, iterations })
                    }
                }
                None => Err(SolverError::NotConverged { gap_bits: f64::INFINITY, iterations }),
            }
        }
    }
}

/// Certified minimum distortion subject to the perception constraint
/// alone (the feasibility probe). Returns `(lower_bound, attained)`:
/// `attained` is a perception-feasible distortion value when one was
/// exhibited, so `lower_bound ≤ true minimum ≤ attained`.
pub(crate) fn probe_min_distortion(
    prog: &Program,
    config: &SolverConfig,
) -> Result<(f64, Option<f64>), SolverError> {
    let mut probe = prog.clone();
    probe.d_bound = f64::INFINITY;
    let dist_obj: Vec<f64> = (0..probe.n_vars())
        .map(|i| {
            let row = i / probe.n_hat;
            let w = probe.group_weight[probe.row_group[row]] * probe.row_cond_weight[row];
            w * probe.distortion_rows[row][i % probe.n_hat]
        })
        .collect();
    match &probe.perception {
        PerceptionSpec::None | PerceptionSpec::TvBall { .. } | PerceptionSpec::Equality { .. } => {
            let q = lmo(&probe, &dist_obj, &[])?;
            let d = probe.distortion_value(&q);
            Ok((d, Some(d)))
        }
        PerceptionSpec::Smooth { bound, .. } => {
            let bound = *bound;
            let mut cuts = Vec::new();
            let mut lower = f64::NEG_INFINITY;
            for _ in 0..config.max_cut_rounds {
                let q = lmo(&probe, &dist_obj, &cuts)?;
                let d = probe.distortion_value(&q);
                lower = lower.max(d);
                if probe.perception_value(&q) <= bound + config.feasibility_tol {
                    return Ok((lower, Some(d)));
                }
                match probe.smooth_cut(&q) {
                    Some(cut) => cuts.push(cut),
                    None => break,
                }
            }
            Ok((lower, None))
        }
    }
}

/// Distortion-only solve on a bare marginal, used by the rate-distortion
/// path for the deterministic corner the multiplier sweep cannot bracket.
pub(crate) fn solve_single_group_no_perception(
    px: &[f64],
    dist: &DistortionSpec,
    d_bound: f64,
    config: &SolverConfig,
) -> Result<RdSolution, SolverError> {
    let nx = px.len();
    let nhat = dist.num_xhat();
    let prog = Program {
        n_hat: nhat,
        row_cond_weight: px.to_vec(),
        row_group: vec![0; nx],
        n_groups: 1,
        group_weight: vec![1.0],
        distortion_rows: (0..nx).map(|x| (0..nhat).map(|k| dist.value(x, k)).collect()).collect(),
        d_bound,
        perception: PerceptionSpec::None,
    };
    let identity_map = vec![None; nx];
    let sol = solve_program(&prog, &identity_map, config)?;
    let rows: Vec<Vec<f64>> = (0..nx)
        .map(|x| sol.q[x * nhat..(x + 1) * nhat].to_vec())
        .collect();
    Ok(RdSolution {
        rate_bits: prog.objective(&sol.q),
        rows,
        iterations: sol.iterations,
    })
}
