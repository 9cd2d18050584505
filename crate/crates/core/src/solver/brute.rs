//! Brute-force enumeration oracle: exhaustive search over grid kernels,
//! independent of the conditional-gradient path, with a certified
//! envelope around the true optimum.
//!
//! Upper envelope: the minimum objective over grid kernels that satisfy
//! the constraints outright. Lower envelope: any true-feasible kernel,
//! mixed slightly toward a divergence-zero anchor and rounded to the
//! grid, stays feasible; the mixing weight θ and the entropy modulus ω of
//! the objective under grid rounding bound how far the grid minimum can
//! sit above the true optimum, so `upper − θ·I(anchor) − ω` is a valid
//! lower bound. At P = 0 exact grid feasibility is rare, so the lower
//! envelope instead scans a rounding-width divergence band.

use super::{ConstraintMode, PerceptionBound, ReconstructionSpace, SolverError, TradeoffQuery};
use crate::info::{
    entropy_bits, kl_bits, total_variation, w2_squared, DistortionSpec, DivergenceSpec,
    JointSource, ReconstructionKernel,
};

pub const GRID_POINT_LIMIT: u128 = 10_000_000;

#[derive(Debug, Clone)]
pub struct BruteEnvelope {
    /// Minimum over strictly feasible grid kernels; `None` when no grid
    /// point is exactly feasible (typical at P = 0).
    pub upper_bits: Option<f64>,
    /// Certified lower bound on the true optimum.
    pub lower_bits: f64,
    /// `upper − lower` when the upper envelope exists.
    pub grid_gap_bits: Option<f64>,
    pub points_evaluated: u64,
    pub best_kernel: Option<ReconstructionKernel>,
}

fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    fn rec(prefix: &mut Vec<u32>, remaining: u32, parts_left: usize, out: &mut Vec<Vec<u32>>) {
        if parts_left == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for v in 0..=remaining {
            prefix.push(v);
            rec(prefix, remaining - v, parts_left - 1, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), total, parts, &mut out);
    out
}

fn binary_entropy_safe(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    entropy_bits(&[t, 1.0 - t])
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

struct GroupSpec<'a> {
    cond: Vec<f64>,
    support: Vec<usize>,
    /// Target for TV/KL, aligned to the hat alphabet.
    aligned: Option<Vec<f64>>,
    /// Source mass with no hat counterpart: contributes TV mass/2 flatly
    /// and makes KL infinite.
    missing_mass: f64,
    x_values: Option<&'a [f64]>,
    hat_values: Option<&'a [f64]>,
    divergence: DivergenceSpec,
    dist: &'a DistortionSpec,
    n_hat: usize,
}

impl GroupSpec<'_> {
    fn divergence_of(&self, m: &[f64]) -> f64 {
        match self.divergence {
            DivergenceSpec::TotalVariation => {
                total_variation(self.aligned.as_ref().unwrap(), m) + 0.5 * self.missing_mass
            }
            DivergenceSpec::KullbackLeibler => {
                if self.missing_mass > 0.0 {
                    return f64::INFINITY;
                }
                kl_bits(self.aligned.as_ref().unwrap(), m).unwrap_or(f64::INFINITY)
            }
            DivergenceSpec::Wasserstein2 => w2_squared(
                &self.cond,
                self.x_values.unwrap(),
                m,
                self.hat_values.unwrap(),
            ),
        }
    }

    /// Max ground cost, for W2 Lipschitz slack.
    fn w2_cost_diameter(&self) -> f64 {
        let xv = self.x_values.unwrap_or(&[]);
        let hv = self.hat_values.unwrap_or(&[]);
        let mut c: f64 = 0.0;
        for &a in xv {
            for &b in hv {
                c = c.max((a - b) * (a - b));
            }
        }
        c
    }
}

struct GroupOutcome {
    /// (objective, rows) over strictly feasible grid kernels.
    strict: Option<(f64, Vec<Vec<f64>>)>,
    /// Minimum objective over the rounding-width divergence band (P = 0).
    band: Option<f64>,
    points: u64,
    /// Certified slack for the lower envelope.
    slack: f64,
    lower_valid: bool,
}

#[allow(clippy::too_many_arguments)]
fn enumerate_group(
    spec: &GroupSpec<'_>,
    d_bound: f64,
    p_bound: PerceptionBound,
    resolution: u32,
    identity_map: &[Option<usize>],
) -> Result<GroupOutcome, SolverError> {
    let n_support = spec.support.len();
    let per_row = binomial(
        resolution as u128 + spec.n_hat as u128 - 1,
        spec.n_hat as u128 - 1,
    );
    let points = (0..n_support).try_fold(1u128, |acc, _| acc.checked_mul(per_row));
    match points {
        Some(p) if p <= GRID_POINT_LIMIT => {}
        other => {
            return Err(SolverError::InstanceTooLarge {
                points: other.unwrap_or(u128::MAX),
                limit: GRID_POINT_LIMIT,
            })
        }
    }
    let comps = compositions(resolution, spec.n_hat);
    let comps_f: Vec<Vec<f64>> = comps
        .iter()
        .map(|c| c.iter().map(|&v| v as f64 / resolution as f64).collect())
        .collect();

    // Band width at P = 0: how far rounding a divergence-zero kernel can
    // push the marginal, measured in the query's own family.
    let delta = 1.0 / resolution as f64;
    let row_l1 = spec.n_hat as f64 * delta;
    let row_tv = 0.5 * row_l1;
    let band = match (p_bound, spec.divergence) {
        (PerceptionBound::Level(p), DivergenceSpec::TotalVariation) if p == 0.0 => Some(row_tv),
        (PerceptionBound::Level(p), DivergenceSpec::Wasserstein2) if p == 0.0 => {
            Some(spec.w2_cost_diameter() * row_l1)
        }
        (PerceptionBound::Level(p), DivergenceSpec::KullbackLeibler) if p == 0.0 => {
            let t = spec.aligned.as_ref().unwrap();
            let mut b = 0.0;
            let mut ok = true;
            for &tk in t {
                if tk > 0.0 {
                    if tk <= delta {
                        ok = false;
                        break;
                    }
                    b += tk * (tk / (tk - delta)).log2();
                }
            }
            ok.then_some(b)
        }
        _ => None,
    };

    let is_p_zero = matches!(p_bound, PerceptionBound::Level(p) if p == 0.0);

    let mut strict: Option<(f64, Vec<usize>)> = None;
    let mut band_min: Option<f64> = None;
    let mut idx = vec![0usize; n_support];
    let mut evaluated: u64 = 0;
    let n_comps = comps_f.len();
    let mut m = vec![0.0; spec.n_hat];
    loop {
        evaluated += 1;
        for v in m.iter_mut() {
            *v = 0.0;
        }
        for (si, &x) in spec.support.iter().enumerate() {
            let w = spec.cond[x];
            for (k, &q) in comps_f[idx[si]].iter().enumerate() {
                m[k] += w * q;
            }
        }
        let mut dist = 0.0;
        let mut obj = 0.0;
        for (si, &x) in spec.support.iter().enumerate() {
            let w = spec.cond[x];
            for (k, &q) in comps_f[idx[si]].iter().enumerate() {
                if q > 0.0 {
                    dist += w * q * spec.dist.value(x, k);
                    obj += w * q * (q / m[k]).log2();
                }
            }
        }
        if dist <= d_bound + 1e-12 {
            let d = spec.divergence_of(&m);
            let feasible = match p_bound {
                PerceptionBound::Unconstrained => true,
                PerceptionBound::Level(p) if p == 0.0 => d <= 1e-12,
                PerceptionBound::Level(p) => d <= p + 1e-12,
            };
            if feasible && strict.as_ref().is_none_or(|(best, _)| obj < *best) {
                strict = Some((obj, idx.clone()));
            }
            if let Some(b) = band {
                if d <= b + 1e-12 && band_min.is_none_or(|best| obj < best) {
                    band_min = Some(obj);
                }
            }
        }

        // Odometer, last row fastest: keeps kernels in ascending
        // lexicographic order of the flattened table.
        if n_support == 0 {
            break;
        }
        let mut pos = n_support;
        let mut wrapped = true;
        while pos > 0 {
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < n_comps {
                wrapped = false;
                break;
            }
            idx[pos] = 0;
        }
        if wrapped {
            break;
        }
    }

    // Lower-envelope slack: entropy modulus of the objective under grid
    // rounding plus the anchor-mixing cost.
    let omega = 2.0
        * (row_tv * ((spec.n_hat.max(2) - 1) as f64).log2() + binary_entropy_safe(row_tv.min(0.5)));
    let anchor_ok = spec.support.iter().all(|&x| identity_map[x].is_some());
    let (slack, lower_valid) = if is_p_zero {
        (omega, band.is_some())
    } else if !anchor_ok {
        (f64::INFINITY, false)
    } else {
        // Anchor distortion and divergence.
        let mut anchor_dist = 0.0;
        let mut m_anchor = vec![0.0; spec.n_hat];
        for &x in &spec.support {
            let k = identity_map[x].unwrap();
            anchor_dist += spec.cond[x] * spec.dist.value(x, k);
            m_anchor[k] += spec.cond[x];
        }
        let anchor_div = spec.divergence_of(&m_anchor);
        if anchor_div > 1e-15 {
            (f64::INFINITY, false)
        } else {
            let dist_pert = spec.dist.max_value() * row_l1;
            let theta_d = if d_bound > anchor_dist + 1e-15 {
                dist_pert / (d_bound - anchor_dist)
            } else if dist_pert == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            let theta_p = match p_bound {
                PerceptionBound::Unconstrained => 0.0,
                PerceptionBound::Level(p) => match spec.divergence {
                    DivergenceSpec::TotalVariation => row_tv / p,
                    DivergenceSpec::Wasserstein2 => spec.w2_cost_diameter() * row_l1 / p,
                    DivergenceSpec::KullbackLeibler => {
                        let t = spec.aligned.as_ref().unwrap();
                        let mut found = f64::INFINITY;
                        let mut theta = 1.0;
                        for _ in 0..48 {
                            let mut pert = 0.0;
                            let mut ok = true;
                            for &tk in t {
                                if tk > 0.0 {
                                    let floor = theta * tk;
                                    if floor <= delta {
                                        ok = false;
                                        break;
                                    }
                                    pert += tk * (floor / (floor - delta)).log2();
                                }
                            }
                            if ok && pert <= theta * p {
                                found = theta;
                            }
                            theta *= 0.5;
                        }
                        found
                    }
                },
            };
            let theta = theta_d.max(theta_p);
            if theta > 1.0 {
                (f64::INFINITY, false)
            } else {
                // I of the anchor: H(X|y) over the support.
                let h_anchor = entropy_bits(&spec.support.iter().map(|&x| spec.cond[x]).collect::<Vec<_>>());
                (theta * h_anchor + omega, true)
            }
        }
    };

    let strict_rows = strict.map(|(obj, idx)| {
        let mut rows = Vec::with_capacity(spec.cond.len());
        let mut si = 0;
        for x in 0..spec.cond.len() {
            if spec.support.contains(&x) {
                rows.push(comps_f[idx[si]].clone());
                si += 1;
            } else {
                // Off-support rows never occur; pin them deterministically.
                let mut r = vec![0.0; spec.n_hat];
                r[0] = 1.0;
                rows.push(r);
            }
        }
        (obj, rows)
    });

    Ok(GroupOutcome { strict: strict_rows, band: band_min, points: evaluated, slack, lower_valid })
}

/// Exhaustive grid search. `resolution` is the grid denominator: kernel
/// rows range over compositions of `resolution` into |X̂| parts. The grid
/// must stay within 10^7 points per enumeration (enforced).
pub fn brute_force_rdcp(
    source: &JointSource,
    xhat: &ReconstructionSpace,
    dist: &DistortionSpec,
    query: &TradeoffQuery,
    resolution: u32,
) -> Result<BruteEnvelope, SolverError> {
    query.validate()?;
    if query.mode == ConstraintMode::YAveraged && source.num_y() > 1 {
        return Err(SolverError::BadQuery(
            "brute force supports y-averaged mode only for |Y| = 1; constraints couple otherwise"
                .to_string(),
        ));
    }
    let identity_map: Vec<Option<usize>> = source
        .x_alphabet()
        .iter()
        .map(|label| xhat.labels.iter().position(|h| h == label))
        .collect();

    let needs_aligned = !matches!(query.divergence, DivergenceSpec::Wasserstein2);

    let mut upper_total = Some(0.0);
    let mut lower_total = 0.0;
    let mut points = 0u64;
    let mut per_y_rows: Vec<Option<Vec<Vec<f64>>>> = vec![None; source.num_y()];
    let mut any_feasible = false;

    for y in 0..source.num_y() {
        let cond = source.x_given_y(y);
        let support: Vec<usize> = (0..source.num_x()).filter(|&x| cond[x] > 0.0).collect();
        let (aligned, missing_mass) = if needs_aligned {
            let (probs, missing) = aligned_probs(source, xhat, y);
            (Some(probs), missing)
        } else {
            (None, 0.0)
        };
        let spec = GroupSpec {
            cond,
            support,
            aligned,
            missing_mass,
            x_values: source.x_values(),
            hat_values: xhat.values.as_deref(),
            divergence: query.divergence,
            dist,
            n_hat: xhat.len(),
        };
        if matches!(query.divergence, DivergenceSpec::Wasserstein2)
            && (spec.x_values.is_none() || spec.hat_values.is_none())
        {
            return Err(SolverError::Info(crate::info::InfoError::MissingEmbedding {
                context: "W2 brute force".to_string(),
            }));
        }
        let out = enumerate_group(
            &spec,
            query.distortion_bound,
            query.perception_bound,
            resolution,
            &identity_map,
        )?;
        points += out.points;
        let py = source.p_y()[y];
        match &out.strict {
            Some((obj, rows)) => {
                any_feasible = true;
                if let Some(u) = upper_total.as_mut() {
                    *u += py * obj;
                }
                per_y_rows[y] = Some(rows.clone());
            }
            None => upper_total = None,
        }
        let base = match (out.strict.as_ref(), out.band) {
            (_, Some(b)) => Some(b),
            (Some((obj, _)), None) => Some(*obj),
            (None, None) => None,
        };
        match base {
            Some(b) if out.lower_valid => {
                any_feasible = true;
                lower_total += py * (b - out.slack).max(0.0);
            }
            Some(_) => { /* slack invalid: contribute the trivial 0 bound */ }
            None => {
                if !out.lower_valid {
                    // Neither a feasible point nor a valid relaxation:
                    // nothing to certify for this y.
                }
            }
        }
    }

    if !any_feasible {
        return Err(SolverError::EmptyFeasibleGrid);
    }

    let best_kernel = if per_y_rows.iter().all(|r| r.is_some()) {
        let nx = source.num_x();
        let mut rows = vec![vec![Vec::new(); source.num_y()]; nx];
        for (y, per_y) in per_y_rows.iter().enumerate() {
            for (x, row) in per_y.as_ref().unwrap().iter().enumerate() {
                rows[x][y] = row.clone();
            }
        }
        Some(ReconstructionKernel::new(xhat.labels.clone(), xhat.values.clone(), rows)?)
    } else {
        None
    };

    Ok(BruteEnvelope {
        upper_bits: upper_total,
        lower_bits: lower_total,
        grid_gap_bits: upper_total.map(|u| u - lower_total),
        points_evaluated: points,
        best_kernel,
    })
}

/// Lenient alignment: source mass without a hat counterpart is returned
/// separately rather than rejected, so the enumerator can price it into
/// the divergence.
fn aligned_probs(source: &JointSource, xhat: &ReconstructionSpace, y: usize) -> (Vec<f64>, f64) {
    let cond = source.x_given_y(y);
    if xhat.labels == source.x_alphabet() {
        return (cond, 0.0);
    }
    let mut probs = vec![0.0; xhat.len()];
    let mut missing = 0.0;
    for (x, label) in source.x_alphabet().iter().enumerate() {
        match xhat.labels.iter().position(|h| h == label) {
            Some(k) => probs[k] += cond[x],
            None => missing += cond[x],
        }
    }
    (probs, missing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::binary_entropy;
    use crate::solver::{solve_rdcp, SolverConfig};

    fn bernoulli(p: f64) -> JointSource {
        JointSource::from_x_marginal(
            vec!["0".into(), "1".into()],
            vec![1.0 - p, p],
            Some(vec![0.0, 1.0]),
        )
        .unwrap()
    }

    #[test]
    fn grid_envelope_brackets_binary_closed_form() {
        // Self-consistency against h(1/2) - h(0.1) at grid 1e-3.
        let src = bernoulli(0.5);
        let xhat = ReconstructionSpace::from_source(&src);
        let dist = DistortionSpec::hamming(src.x_alphabet(), &xhat.labels);
        let query = TradeoffQuery {
            distortion_bound: 0.1,
            perception_bound: PerceptionBound::Unconstrained,
            mode: ConstraintMode::PerY,
            divergence: DivergenceSpec::TotalVariation,
        };
        let env = brute_force_rdcp(&src, &xhat, &dist, &query, 1000).unwrap();
        let truth = binary_entropy(0.5) - binary_entropy(0.1);
        let upper = env.upper_bits.unwrap();
        assert!(upper + 1e-12 >= truth, "upper {upper} below truth {truth}");
        assert!(env.lower_bits <= truth + 1e-12, "lower {} above truth", env.lower_bits);
        assert!(
            (upper - truth).abs() <= 1e-3 + env.grid_gap_bits.unwrap(),
            "upper {upper} vs {truth} gap {:?}",
            env.grid_gap_bits
        );
        // The upper envelope is tight at this resolution.
        assert!(upper - truth < 5e-3, "upper {upper} vs truth {truth}");
    }

    #[test]
    fn empty_feasible_grid_is_an_error() {
        // D = 0, P = 0 with the reconstruction alphabet missing a source
        // symbol: no kernel can reproduce the source law.
        let src = bernoulli(0.3);
        let xhat = ReconstructionSpace::new(vec!["0".into()], Some(vec![0.0]));
        let dist = DistortionSpec::hamming(src.x_alphabet(), &xhat.labels);
        let query = TradeoffQuery {
            distortion_bound: 0.0,
            perception_bound: PerceptionBound::Level(0.0),
            mode: ConstraintMode::PerY,
            divergence: DivergenceSpec::TotalVariation,
        };
        let err = brute_force_rdcp(&src, &xhat, &dist, &query, 64).unwrap_err();
        assert!(matches!(err, SolverError::EmptyFeasibleGrid), "got {err}");
    }

    #[test]
    fn instance_size_is_enforced() {
        let src = JointSource::from_x_marginal(
            (0..6).map(|i| i.to_string()).collect(),
            vec![1.0 / 6.0; 6],
            None,
        )
        .unwrap();
        let xhat = ReconstructionSpace::from_source(&src);
        let dist = DistortionSpec::hamming(src.x_alphabet(), &xhat.labels);
        let query = TradeoffQuery {
            distortion_bound: 0.2,
            perception_bound: PerceptionBound::Unconstrained,
            mode: ConstraintMode::PerY,
            divergence: DivergenceSpec::TotalVariation,
        };
        let err = brute_force_rdcp(&src, &xhat, &dist, &query, 100).unwrap_err();
        assert!(matches!(err, SolverError::InstanceTooLarge { .. }));
    }

    #[test]
    fn solver_lands_inside_envelope_on_small_instances() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(2024);
        let cfg = SolverConfig::default();
        for trial in 0..6 {
            // Random 2x2x2 instance.
            let mut pmf = [[0.0f64; 2]; 2];
            let mut total = 0.0;
            for row in pmf.iter_mut() {
                for v in row.iter_mut() {
                    *v = rng.random_range(0.05..1.0);
                    total += *v;
                }
            }
            let src = JointSource::new(
                vec!["0".into(), "1".into()],
                vec!["u".into(), "v".into()],
                pmf.iter().map(|r| r.iter().map(|v| v / total).collect()).collect(),
                Some(vec![0.0, 1.0]),
            )
            .unwrap();
            let xhat = ReconstructionSpace::from_source(&src);
            let dist = DistortionSpec::hamming(src.x_alphabet(), &xhat.labels);
            let query = TradeoffQuery {
                distortion_bound: rng.random_range(0.05..0.4),
                perception_bound: PerceptionBound::Level(rng.random_range(0.02..0.3)),
                mode: ConstraintMode::PerY,
                divergence: DivergenceSpec::TotalVariation,
            };
            let env = brute_force_rdcp(&src, &xhat, &dist, &query, 250).unwrap();
            let pt = solve_rdcp(&src, &xhat, &dist, &query, &cfg).unwrap();
            let upper = env.upper_bits.expect("strictly feasible grid point");
            assert!(
                pt.rate_bits <= upper + 1e-3,
                "trial {trial}: solver {} above grid upper {upper}",
                pt.rate_bits
            );
            assert!(
                pt.rate_bits >= env.lower_bits - 1e-3,
                "trial {trial}: solver {} below certified lower {}",
                pt.rate_bits,
                env.lower_bits
            );
        }
    }
}
