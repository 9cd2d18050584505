//! Divergence families: total variation, KL (bits), and squared-cost
//! optimal transport on real embeddings.

use super::{DivergenceSpec, InfoError, JointSource, ReconstructionKernel};

/// A pmf with an optional real embedding of its support.
#[derive(Debug, Clone)]
pub struct DiscreteDist {
    pub probs: Vec<f64>,
    pub values: Option<Vec<f64>>,
}

impl DiscreteDist {
    pub fn new(probs: Vec<f64>) -> Self {
        Self { probs, values: None }
    }

    pub fn with_values(probs: Vec<f64>, values: Vec<f64>) -> Self {
        Self { probs, values: Some(values) }
    }
}

/// d(p, q) for the chosen family. TV and KL require equal support sizes;
/// W2 requires embeddings on both sides (supports may differ) and returns
/// the squared-cost transport value, not its square root.
pub fn divergence(
    spec: DivergenceSpec,
    p: &DiscreteDist,
    q: &DiscreteDist,
) -> Result<f64, InfoError> {
    match spec {
        DivergenceSpec::TotalVariation => {
            check_same_support(p, q)?;
            Ok(total_variation(&p.probs, &q.probs))
        }
        DivergenceSpec::KullbackLeibler => {
            check_same_support(p, q)?;
            kl_bits(&p.probs, &q.probs)
        }
        DivergenceSpec::Wasserstein2 => {
            let vp = p.values.as_deref().ok_or_else(|| InfoError::MissingEmbedding {
                context: "W2 divergence (left argument)".to_string(),
            })?;
            let vq = q.values.as_deref().ok_or_else(|| InfoError::MissingEmbedding {
                context: "W2 divergence (right argument)".to_string(),
            })?;
            Ok(w2_squared(&p.probs, vp, &q.probs, vq))
        }
    }
}

fn check_same_support(p: &DiscreteDist, q: &DiscreteDist) -> Result<(), InfoError> {
    if p.probs.len() != q.probs.len() {
        return Err(InfoError::SupportMismatch { left: p.probs.len(), right: q.probs.len() });
    }
    Ok(())
}

/// ½ Σ |p − q|.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// KL(p ‖ q) in bits. Errors when q(i) = 0 but p(i) > 0.
pub fn kl_bits(p: &[f64], q: &[f64]) -> Result<f64, InfoError> {
    let mut total = 0.0;
    for (i, (&pi, &qi)) in p.iter().zip(q).enumerate() {
        if pi > 0.0 {
            if qi <= 0.0 {
                return Err(InfoError::AbsoluteContinuity { index: i, p: pi });
            }
            total += pi * (pi / qi).log2();
        }
    }
    Ok(total.max(0.0))
}

/// Exact squared-cost transport value between two real-embedded pmfs.
///
/// On the line with convex cost, the monotone (quantile) coupling is
/// optimal, so the value is computed by merging the two sorted supports
/// and pairing mass in CDF order.
pub fn w2_squared(p: &[f64], vp: &[f64], q: &[f64], vq: &[f64]) -> f64 {
    let mut a: Vec<(f64, f64)> = vp
        .iter()
        .zip(p)
        .filter(|(_, &m)| m > 0.0)
        .map(|(&v, &m)| (v, m))
        .collect();
    let mut b: Vec<(f64, f64)> = vq
        .iter()
        .zip(q)
        .filter(|(_, &m)| m > 0.0)
        .map(|(&v, &m)| (v, m))
        .collect();
    a.sort_by(|x, y| x.0.total_cmp(&y.0));
    b.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut cost = 0.0;
    let (mut i, mut j) = (0usize, 0usize);
    let (mut ra, mut rb) = (
        a.first().map_or(0.0, |t| t.1),
        b.first().map_or(0.0, |t| t.1),
    );
    while i < a.len() && j < b.len() {
        let m = ra.min(rb);
        let d = a[i].0 - b[j].0;
        cost += m * d * d;
        ra -= m;
        rb -= m;
        if ra <= 1e-15 {
            i += 1;
            ra = if i < a.len() { a[i].1 } else { 0.0 };
        }
        if rb <= 1e-15 {
            j += 1;
            rb = if j < b.len() { b[j].1 } else { 0.0 };
        }
    }
    cost
}

/// Kantorovich dual potentials (phi, psi) of the monotone optimal plan for
/// W2 between `p` (fixed) and `q`, both on the FULL index sets (including
/// zero-mass atoms). `psi` is a subgradient of q ↦ W2²(p, q):
/// W2²(p, q') ≥ W2²(p, q) + <psi, q' − q> for all pmfs q'.
pub fn w2_dual_potentials(p: &[f64], vp: &[f64], q: &[f64], vq: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut ap: Vec<usize> = (0..p.len()).filter(|&i| p[i] > 0.0).collect();
    let mut aq: Vec<usize> = (0..q.len()).filter(|&j| q[j] > 0.0).collect();
    ap.sort_by(|&x, &y| vp[x].total_cmp(&vp[y]));
    aq.sort_by(|&x, &y| vq[x].total_cmp(&vq[y]));

    let mut phi = vec![f64::NEG_INFINITY; p.len()];
    let mut psi = vec![f64::NEG_INFINITY; q.len()];
    if ap.is_empty() || aq.is_empty() {
        return (vec![0.0; p.len()], vec![0.0; q.len()]);
    }

    // Walk the monotone plan; on each support edge complementary slackness
    // pins phi_i + psi_j = c_ij, which chains the potentials along the
    // staircase. Normalize with psi at the first q atom = 0.
    let (mut i, mut j) = (0usize, 0usize);
    let (mut ra, mut rb) = (p[ap[0]], q[aq[0]]);
    psi[aq[0]] = 0.0;
    let cost = |x: usize, y: usize| {
        let d = vp[x] - vq[y];
        d * d
    };
    phi[ap[0]] = cost(ap[0], aq[0]) - psi[aq[0]];
    while i < ap.len() && j < aq.len() {
        if phi[ap[i]] == f64::NEG_INFINITY {
            phi[ap[i]] = cost(ap[i], aq[j]) - psi[aq[j]];
        }
        if psi[aq[j]] == f64::NEG_INFINITY {
            psi[aq[j]] = cost(ap[i], aq[j]) - phi[ap[i]];
        }
        let m = ra.min(rb);
        ra -= m;
        rb -= m;
        if ra <= 1e-15 {
            i += 1;
            if i < ap.len() {
                ra = p[ap[i]];
            }
        }
        if rb <= 1e-15 {
            j += 1;
            if j < aq.len() {
                rb = q[aq[j]];
            }
        }
    }
    // Zero-mass atoms get the tightest dual-feasible completion.
    for jj in 0..q.len() {
        if psi[jj] == f64::NEG_INFINITY {
            psi[jj] = ap
                .iter()
                .map(|&ii| cost(ii, jj) - phi[ii])
                .fold(f64::INFINITY, f64::min);
        }
    }
    for ii in 0..p.len() {
        if phi[ii] == f64::NEG_INFINITY {
            phi[ii] = aq
                .iter()
                .map(|&jj| cost(ii, jj) - psi[jj])
                .fold(f64::INFINITY, f64::min);
        }
    }
    (phi, psi)
}

/// p(y)-weighted mean of d(p_{X|y}, p_{X̂|y}) plus the per-y values, with
/// the reconstruction law induced by the kernel.
pub fn conditional_divergence(
    spec: DivergenceSpec,
    source: &JointSource,
    kernel: &ReconstructionKernel,
) -> Result<(f64, Vec<f64>), InfoError> {
    kernel.check_compatible(source)?;
    let (p_xhat_given_y, _) = super::induced_marginals(source, kernel)?;
    let mut per_y = Vec::with_capacity(source.num_y());
    let mut mean = 0.0;
    for y in 0..source.num_y() {
        let target = aligned_target(spec, source, kernel, y)?;
        let induced = DiscreteDist {
            probs: p_xhat_given_y[y].clone(),
            values: kernel.xhat_values().map(|v| v.to_vec()),
        };
        let d = divergence(spec, &target, &induced)?;
        mean += source.p_y()[y] * d;
        per_y.push(d);
    }
    Ok((mean, per_y))
}

/// The source conditional p(X|y) expressed on the kernel's reconstruction
/// support. For TV/KL the supports must match by label (the default
/// X̂ = X alphabet always does); for W2 embeddings carry the geometry and
/// no alignment is needed.
pub fn aligned_target(
    spec: DivergenceSpec,
    source: &JointSource,
    kernel: &ReconstructionKernel,
    y: usize,
) -> Result<DiscreteDist, InfoError> {
    let cond = source.x_given_y(y);
    match spec {
        DivergenceSpec::Wasserstein2 => {
            let values = source
                .x_values()
                .ok_or_else(|| InfoError::MissingEmbedding {
                    context: "W2 perception (source side)".to_string(),
                })?
                .to_vec();
            Ok(DiscreteDist::with_values(cond, values))
        }
        _ => {
            if kernel.xhat_alphabet() == source.x_alphabet() {
                return Ok(DiscreteDist::new(cond));
            }
            let mut probs = vec![0.0; kernel.num_xhat()];
            for (x, label) in source.x_alphabet().iter().enumerate() {
                match kernel.xhat_alphabet().iter().position(|h| h == label) {
                    Some(k) => probs[k] += cond[x],
                    None => {
                        if cond[x] > 0.0 {
                            return Err(InfoError::AlphabetNotCovering { label: label.clone() });
                        }
                    }
                }
            }
            Ok(DiscreteDist::new(probs))
        }
    }
}
