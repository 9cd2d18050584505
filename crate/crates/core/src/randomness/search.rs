//! Exact feasibility search for the smallest uniform common-randomness
//! alphabet admitting a deterministic decoder with a perfectly matched
//! reconstruction law.
//!
//! With W uniform on {1..w} and g deterministic on (M, W[, Y]), the
//! induced law is Σ_m p(m) c(m, x̂)/w where c counts how many w-values
//! each (m, x̂) pair absorbs. On a common-denominator rational source the
//! matching condition Σ_m N(m) c(m, x̂) = w · N(x̂) is pure integer
//! arithmetic, so feasibility for each w is decided exactly by a
//! depth-first search over count matrices with column-sum pruning.

use super::{RandomnessError, RandomnessInstance};

#[derive(Debug, Clone)]
pub struct RandomnessWitness {
    pub w_size: usize,
    /// Count matrices per context: `counts[ctx][m][xhat]`.
    pub counts: Vec<Vec<Vec<u32>>>,
    /// Decoder tables g[ctx][m][w] = xhat, expanded from the counts in
    /// ascending xhat order (the lexicographically smallest witness).
    pub decoder: Vec<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone)]
pub struct LowerboundReport {
    /// H(X) bits, or H(X|Y) in conditional mode.
    pub hx_bits: f64,
    pub r0_bits: f64,
    /// hx − (R⁰ + 1).
    pub bound_bits: f64,
    pub min_w: usize,
    pub log2_w_bits: f64,
    /// log₂|W| − bound (never negative when the theorem holds).
    pub gap_bits: f64,
    pub satisfied: bool,
}

/// Integer feasibility for one context: find the lexicographically
/// smallest count matrix, or `None`.
fn feasible_counts(m_weights: &[u64], targets: &[u64], w: u32) -> Option<Vec<Vec<u32>>> {
    let n_m = m_weights.len();
    let n_hat = targets.len();
    let w_u64 = w as u64;
    // Scaled column targets: Σ_m N(m) c(m, x̂) must land exactly here.
    let goals: Vec<u64> = targets.iter().map(|&t| w_u64 * t).collect();
    // Suffix weight sums for the upper prune.
    let mut suffix: Vec<u64> = vec![0; n_m + 1];
    for m in (0..n_m).rev() {
        suffix[m] = suffix[m + 1] + m_weights[m];
    }

    let mut counts = vec![vec![0u32; n_hat]; n_m];
    let mut col_sums = vec![0u64; n_hat];

    fn rec(
        m: usize,
        k: usize,
        remaining: u32,
        m_weights: &[u64],
        goals: &[u64],
        suffix: &[u64],
        w: u32,
        counts: &mut Vec<Vec<u32>>,
        col_sums: &mut Vec<u64>,
    ) -> bool {
        let n_m = m_weights.len();
        let n_hat = goals.len();
        if m == n_m {
            return col_sums.iter().zip(goals).all(|(s, g)| s == g);
        }
        if m_weights[m] == 0 {
            // Mass-zero codes do not constrain the marginal; pin their
            // rows to the first symbol.
            if k == 0 {
                counts[m][0] = remaining;
                let ok = rec(m + 1, 0, w, m_weights, goals, suffix, w, counts, col_sums);
                if ok {
                    return true;
                }
                counts[m][0] = 0;
                return false;
            }
            unreachable!("zero-weight rows are assigned in one step");
        }
        if k == n_hat - 1 {
            // Last column takes the rest.
            let c = remaining;
            let add = m_weights[m] * c as u64;
            if col_sums[k] + add > goals[k] {
                return false;
            }
            counts[m][k] = c;
            col_sums[k] += add;
            if prune_ok(m + 1, m_weights, goals, suffix, w, col_sums)
                && rec(m + 1, 0, w, m_weights, goals, suffix, w, counts, col_sums)
            {
                return true;
            }
            col_sums[k] -= add;
            counts[m][k] = 0;
            return false;
        }
        for c in 0..=remaining {
            let add = m_weights[m] * c as u64;
            if col_sums[k] + add > goals[k] {
                break;
            }
            counts[m][k] = c;
            col_sums[k] += add;
            if rec(m, k + 1, remaining - c, m_weights, goals, suffix, w, counts, col_sums) {
                return true;
            }
            col_sums[k] -= add;
            counts[m][k] = 0;
        }
        false
    }

    /// Remaining rows can add at most suffix[m]·w to any column.
    fn prune_ok(
        m: usize,
        m_weights: &[u64],
        goals: &[u64],
        suffix: &[u64],
        w: u32,
        col_sums: &[u64],
    ) -> bool {
        let _ = m_weights;
        let headroom = suffix[m] * w as u64;
        col_sums.iter().zip(goals).all(|(&s, &g)| s <= g && s + headroom >= g)
    }

    if rec(0, 0, w, m_weights, &goals, &suffix, w, &mut counts, &mut col_sums) {
        Some(counts)
    } else {
        None
    }
}

/// Per-context weights and targets in common-denominator numerators.
fn context_systems(instance: &RandomnessInstance) -> Vec<(Vec<u64>, Vec<u64>)> {
    let (nx, ny) = (instance.source.num_x(), instance.source.num_y());
    let m_count = instance.m_count();
    if instance.conditional && ny > 1 {
        (0..ny)
            .map(|y| {
                let mut m_weights = vec![0u64; m_count];
                let mut targets = vec![0u64; nx];
                for x in 0..nx {
                    let n = instance.source.num(x, y);
                    m_weights[instance.encoder[x][y]] += n;
                    targets[x] += n;
                }
                (m_weights, targets)
            })
            .collect()
    } else {
        let mut m_weights = vec![0u64; m_count];
        let mut targets = vec![0u64; nx];
        for x in 0..nx {
            for y in 0..ny {
                let n = instance.source.num(x, y);
                m_weights[instance.encoder[x][y]] += n;
                targets[x] += n;
            }
        }
        vec![(m_weights, targets)]
    }
}

fn expand_decoder(counts: &[Vec<u32>]) -> Vec<Vec<usize>> {
    counts
        .iter()
        .map(|row| {
            let mut g = Vec::new();
            for (xhat, &c) in row.iter().enumerate() {
                for _ in 0..c {
                    g.push(xhat);
                }
            }
            g
        })
        .collect()
}

/// Smallest uniform |W| with a deterministic decoder that reproduces the
/// source law exactly (per y in conditional mode). The witness is the
/// lowest-|W|, lexicographically smallest decoder.
pub fn min_common_randomness(
    instance: &RandomnessInstance,
) -> Result<RandomnessWitness, RandomnessError> {
    instance.validate()?;
    let systems = context_systems(instance);
    for w in 1..=instance.max_w {
        let mut counts = Vec::with_capacity(systems.len());
        let mut all = true;
        for (m_weights, targets) in &systems {
            match feasible_counts(m_weights, targets, w as u32) {
                Some(c) => counts.push(c),
                None => {
                    all = false;
                    break;
                }
            }
        }
        if all {
            let decoder = counts.iter().map(|c| expand_decoder(c)).collect();
            return Ok(RandomnessWitness { w_size: w, counts, decoder });
        }
    }
    Err(RandomnessError::NotFound { max_tried: instance.max_w })
}

/// Floating-tolerance variant for sources without a common denominator:
/// "minimal |W|" means minimal with marginals matched within `tol`.
pub fn min_common_randomness_float(
    p_m: &[f64],
    targets: &[f64],
    max_w: usize,
    tol: f64,
) -> Option<(usize, Vec<Vec<u32>>)> {
    fn rec(
        m: usize,
        k: usize,
        remaining: u32,
        p_m: &[f64],
        targets: &[f64],
        suffix: &[f64],
        w: u32,
        tol: f64,
        counts: &mut Vec<Vec<u32>>,
        col: &mut Vec<f64>,
    ) -> bool {
        let n_m = p_m.len();
        let n_hat = targets.len();
        if m == n_m {
            return col
                .iter()
                .zip(targets)
                .all(|(&s, &t)| (s / w as f64 - t).abs() <= tol);
        }
        if k == n_hat - 1 {
            let add = p_m[m] * remaining as f64;
            counts[m][k] = remaining;
            col[k] += add;
            if prune(m + 1, targets, suffix, w, tol, col)
                && rec(m + 1, 0, w, p_m, targets, suffix, w, tol, counts, col)
            {
                return true;
            }
            col[k] -= add;
            counts[m][k] = 0;
            return false;
        }
        for c in 0..=remaining {
            let add = p_m[m] * c as f64;
            if col[k] + add > (targets[k] + tol) * w as f64 + 1e-12 {
                break;
            }
            counts[m][k] = c;
            col[k] += add;
            if rec(m, k + 1, remaining - c, p_m, targets, suffix, w, tol, counts, col) {
                return true;
            }
            col[k] -= add;
            counts[m][k] = 0;
        }
        false
    }

    fn prune(m: usize, targets: &[f64], suffix: &[f64], w: u32, tol: f64, col: &[f64]) -> bool {
        let headroom = suffix[m] * w as f64;
        col.iter().zip(targets).all(|(&s, &t)| {
            s <= (t + tol) * w as f64 + 1e-12 && s + headroom + 1e-12 >= (t - tol) * w as f64
        })
    }

    let n_m = p_m.len();
    let n_hat = targets.len();
    let mut suffix = vec![0.0; n_m + 1];
    for m in (0..n_m).rev() {
        suffix[m] = suffix[m + 1] + p_m[m];
    }
    for w in 1..=max_w {
        let mut counts = vec![vec![0u32; n_hat]; n_m];
        let mut col = vec![0.0; n_hat];
        if rec(0, 0, w as u32, p_m, targets, &suffix, w as u32, tol, &mut counts, &mut col) {
            return Some((w, counts));
        }
    }
    None
}

/// Checks log₂|W| ≥ H(X) − (R⁰ + 1) (or the H(X|Y) form) and reports the
/// gap.
pub fn verify_lowerbound(
    instance: &RandomnessInstance,
    witness: &RandomnessWitness,
) -> LowerboundReport {
    let hx = if instance.conditional && instance.source.num_y() > 1 {
        instance.source.entropy_x_given_y_bits()
    } else {
        instance.source.entropy_x_bits()
    };
    let r0 = instance.expected_code_length_bits();
    let bound = hx - (r0 + 1.0);
    let log2w = (witness.w_size as f64).log2();
    let gap = log2w - bound;
    LowerboundReport {
        hx_bits: hx,
        r0_bits: r0,
        bound_bits: bound,
        min_w: witness.w_size,
        log2_w_bits: log2w,
        gap_bits: gap,
        satisfied: gap >= -1e-12,
    }
}

/// The witness pushed back through the induced law must reproduce the
/// target marginals exactly (used by tests and the report generator).
pub fn witness_reproduces_law(
    instance: &RandomnessInstance,
    witness: &RandomnessWitness,
) -> bool {
    let systems = context_systems(instance);
    systems.iter().zip(&witness.counts).all(|((m_weights, targets), counts)| {
        let w = witness.w_size as u64;
        (0..targets.len()).all(|xhat| {
            let got: u64 = m_weights
                .iter()
                .zip(counts)
                .map(|(&n, row)| n * row[xhat] as u64)
                .sum();
            got == w * targets[xhat]
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::RationalJoint;

    fn uniform4_instance(m_count: usize, encoder_map: &[usize], lengths: Vec<u32>) -> RandomnessInstance {
        let _ = m_count;
        RandomnessInstance {
            source: RationalJoint::marginal(vec![1, 1, 1, 1], 4).unwrap(),
            encoder: encoder_map.iter().map(|&m| vec![m]).collect(),
            code_lengths: vec![lengths],
            conditional: false,
            max_w: 24,
        }
    }

    #[test]
    fn lossless_codec_needs_no_randomness() {
        // M = X: a deterministic decoder suffices, |W| = 1, and the bound
        // H(X) − (R⁰ + 1) = 2 − 3 ≤ 0 is vacuous.
        let inst = uniform4_instance(4, &[0, 1, 2, 3], vec![2, 2, 2, 2]);
        let witness = min_common_randomness(&inst).unwrap();
        assert_eq!(witness.w_size, 1);
        assert!(witness_reproduces_law(&inst, &witness));
        let report = verify_lowerbound(&inst, &witness);
        assert!(report.bound_bits <= 0.0);
        assert!(report.satisfied);
    }

    #[test]
    fn constant_code_needs_four_values() {
        // |M| = 1, R⁰ = 0: the decoder must synthesize a uniform 4-ary
        // law from W alone, so the minimal uniform |W| is 4 and
        // log₂|W| = 2 ≥ H(X) − 1 = 1 with gap exactly 1.
        let inst = uniform4_instance(1, &[0, 0, 0, 0], vec![0]);
        let witness = min_common_randomness(&inst).unwrap();
        assert_eq!(witness.w_size, 4);
        assert!(witness_reproduces_law(&inst, &witness));
        let report = verify_lowerbound(&inst, &witness);
        assert!((report.bound_bits - 1.0).abs() < 1e-12);
        assert!((report.gap_bits - 1.0).abs() < 1e-12);
        assert!(report.satisfied);
        // Lexicographically smallest decoder: w-values in xhat order.
        assert_eq!(witness.decoder[0][0], vec![0, 1, 2, 3]);
    }

    #[test]
    fn one_bit_code_needs_two_values() {
        // |M| = 2 with a fixed 1-bit code: minimal |W| = 2 and
        // log₂|W| = 1 ≥ 2 − 2 = 0.
        let inst = uniform4_instance(2, &[0, 0, 1, 1], vec![1, 1]);
        let witness = min_common_randomness(&inst).unwrap();
        assert_eq!(witness.w_size, 2);
        assert!(witness_reproduces_law(&inst, &witness));
        let report = verify_lowerbound(&inst, &witness);
        assert!((report.bound_bits - 0.0).abs() < 1e-12);
        assert!((report.gap_bits - 1.0).abs() < 1e-12);
    }

    #[test]
    fn doubling_preserves_feasibility() {
        let inst = uniform4_instance(1, &[0, 0, 0, 0], vec![0]);
        let systems = context_systems(&inst);
        let (m_weights, targets) = &systems[0];
        for w in 1..=12u32 {
            if feasible_counts(m_weights, targets, w).is_some() {
                assert!(
                    feasible_counts(m_weights, targets, 2 * w).is_some(),
                    "w={w} feasible but 2w not"
                );
            }
        }
    }

    #[test]
    fn conditional_matching_solves_per_y() {
        // Y splits a uniform 4-ary X into two halves; M is constant, so
        // each conditional needs its own uniform pair: |W| = 2.
        let inst = RandomnessInstance {
            source: RationalJoint::new(
                vec![vec![1, 0], vec![1, 0], vec![0, 1], vec![0, 1]],
                4,
            )
            .unwrap(),
            encoder: vec![vec![0, 0]; 4],
            code_lengths: vec![vec![0]],
            conditional: true,
            max_w: 24,
        };
        let witness = min_common_randomness(&inst).unwrap();
        assert_eq!(witness.w_size, 2);
        assert!(witness_reproduces_law(&inst, &witness));
        let report = verify_lowerbound(&inst, &witness);
        // H(X|Y) = 1, bound = 0, log2(2) = 1.
        assert!((report.hx_bits - 1.0).abs() < 1e-12);
        assert!(report.satisfied);
    }

    #[test]
    fn bound_violations_are_impossible_on_feasible_instances() {
        // Skewed rational source, |M| = 1: search confirms the theorem
        // with the smallest W that clears the divisibility constraint.
        let inst = RandomnessInstance {
            source: RationalJoint::marginal(vec![1, 2, 3], 6).unwrap(),
            encoder: vec![vec![0], vec![0], vec![0]],
            code_lengths: vec![vec![0]],
            conditional: false,
            max_w: 24,
        };
        let witness = min_common_randomness(&inst).unwrap();
        assert_eq!(witness.w_size, 6, "needs all residues of the denominator");
        let report = verify_lowerbound(&inst, &witness);
        assert!(report.satisfied);
    }

    #[test]
    fn not_found_is_reported_with_the_bound() {
        // Denominator 7 with |M| = 1 needs |W| divisible by 7... within
        // bound 5 nothing works.
        let inst = RandomnessInstance {
            source: RationalJoint::marginal(vec![1, 2, 4], 7).unwrap(),
            encoder: vec![vec![0], vec![0], vec![0]],
            code_lengths: vec![vec![0]],
            conditional: false,
            max_w: 5,
        };
        let err = min_common_randomness(&inst).unwrap_err();
        assert!(matches!(err, RandomnessError::NotFound { max_tried: 5 }));
    }

    #[test]
    fn float_mode_matches_exact_mode_on_rationals() {
        let p_m = [0.5, 0.5];
        let targets = [0.25, 0.25, 0.5];
        let (w, counts) = min_common_randomness_float(&p_m, &targets, 24, 1e-9).unwrap();
        // Exact equivalent: denominators of 4 force |W| = 2:
        // c(m, xhat)/2 averaged over two codes must give quarters.
        assert_eq!(w, 2);
        for (m, row) in counts.iter().enumerate() {
            assert_eq!(row.iter().sum::<u32>(), 2, "row {m}");
        }
    }

    #[test]
    fn kraft_violation_rejected() {
        let inst = uniform4_instance(2, &[0, 0, 1, 1], vec![0, 0]);
        assert!(matches!(
            min_common_randomness(&inst),
            Err(RandomnessError::KraftViolation { .. })
        ));
    }
}
