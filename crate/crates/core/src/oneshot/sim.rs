//! Monte-Carlo driver for the one-shot codec: realized rate, constraint
//! values and distributional checks against the kernel.

use super::{delta_length_bits, pfr_select, sample_pmf, OneshotError, SharedRandomnessStream, CANDIDATE_CAP};
use crate::info::{
    induced_marginals, kernel_cmi_bits, DiscreteDist, DistortionSpec, DivergenceSpec, JointSource,
    ReconstructionKernel,
};
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub trial: u64,
    pub y: usize,
    pub x: usize,
    pub xhat: usize,
    pub index: u64,
    pub codelen_bits: u64,
}

#[derive(Debug, Clone)]
pub struct OneshotReport {
    pub trials: u64,
    pub cap_failures: u64,
    pub mean_codelen_bits: f64,
    pub stderr_codelen_bits: f64,
    /// I(X; X̂ | Y) of the simulated kernel.
    pub cmi_bits: f64,
    /// One-shot achievability budget: I + log2(I + 1) + 5.
    pub rate_bound_bits: f64,
    pub distortion_overall: f64,
    pub distortion_per_y: Vec<f64>,
    /// d(p_{X|y}, empirical law of X̂ | y) per y, and the p(y)-weighted mean.
    pub empirical_divergence_per_y: Vec<f64>,
    pub empirical_divergence_mean: f64,
    /// `xhat_counts[x][y][xhat]` for goodness-of-fit checks.
    pub xhat_counts: Vec<Vec<Vec<u64>>>,
    pub xy_counts: Vec<Vec<u64>>,
    pub records: Option<Vec<TrialRecord>>,
    /// Kernel rows, kept so goodness-of-fit can be recomputed without
    /// carrying the kernel around.
    pub kernel_rows: Vec<Vec<Vec<f64>>>,
}

impl OneshotReport {
    /// Smallest per-(x, y) chi-square p-value of simulated reconstruction
    /// counts against the kernel rows; `None` when every conditioned cell
    /// is deterministic or unobserved.
    pub fn min_chi_square_p_value(&self) -> Option<f64> {
        let mut min_p: Option<f64> = None;
        for (x, per_y) in self.xhat_counts.iter().enumerate() {
            for (y, counts) in per_y.iter().enumerate() {
                let n = self.xy_counts[x][y];
                if n == 0 {
                    continue;
                }
                // kernel row is recoverable from expected frequencies the
                // caller supplied at build time; stored here directly.
                if let Some(p) = chi_square_p_value(counts, &self.kernel_rows[x][y], n) {
                    min_p = Some(min_p.map_or(p, |m: f64| m.min(p)));
                }
            }
        }
        min_p
    }
}

impl OneshotReport {
    fn new_shell() -> Self {
        OneshotReport {
            trials: 0,
            cap_failures: 0,
            mean_codelen_bits: 0.0,
            stderr_codelen_bits: 0.0,
            cmi_bits: 0.0,
            rate_bound_bits: 0.0,
            distortion_overall: 0.0,
            distortion_per_y: Vec::new(),
            empirical_divergence_per_y: Vec::new(),
            empirical_divergence_mean: 0.0,
            xhat_counts: Vec::new(),
            xy_counts: Vec::new(),
            records: None,
            kernel_rows: Vec::new(),
        }
    }
}

/// Pearson chi-square upper-tail p-value of `observed` against `probs`
/// with `n` draws. `None` when fewer than two outcomes have mass (no
/// degrees of freedom to test).
pub fn chi_square_p_value(observed: &[u64], probs: &[f64], n: u64) -> Option<f64> {
    let support: Vec<usize> = (0..probs.len()).filter(|&k| probs[k] > 0.0).collect();
    if support.len() < 2 || n == 0 {
        return None;
    }
    let mut stat = 0.0;
    for &k in &support {
        let expected = n as f64 * probs[k];
        let diff = observed[k] as f64 - expected;
        stat += diff * diff / expected;
    }
    let dof = (support.len() - 1) as f64;
    let dist = ChiSquared::new(dof).ok()?;
    Some(1.0 - dist.cdf(stat))
}

/// Runs `trials` independent one-shot encodings of the kernel over the
/// source, conditioning the candidate race on y with the kernel-induced
/// marginal as the shared reference.
pub fn simulate_oneshot(
    source: &JointSource,
    kernel: &ReconstructionKernel,
    dist: &DistortionSpec,
    divergence: DivergenceSpec,
    trials: u64,
    stream: &SharedRandomnessStream,
    collect_records: bool,
) -> Result<OneshotReport, OneshotError> {
    kernel.check_compatible(source)?;
    let (nx, ny, nhat) = (source.num_x(), source.num_y(), kernel.num_xhat());
    let (reference_per_y, _) = induced_marginals(source, kernel)?;
    let cmi = kernel_cmi_bits(source, kernel)?;

    // Flattened source pmf for the per-trial draw.
    let joint: Vec<f64> = (0..nx)
        .flat_map(|x| (0..ny).map(move |y| source.p_xy(x, y)))
        .collect();

    let mut report = OneshotReport::new_shell();
    report.cmi_bits = cmi;
    report.rate_bound_bits = cmi + (cmi + 1.0).log2() + 5.0;
    report.kernel_rows = (0..nx)
        .map(|x| (0..ny).map(|y| kernel.row(x, y).to_vec()).collect())
        .collect();
    report.xhat_counts = vec![vec![vec![0u64; nhat]; ny]; nx];
    report.xy_counts = vec![vec![0u64; ny]; nx];
    let mut records = collect_records.then(Vec::new);

    let mut sum_len = 0.0f64;
    let mut sum_len_sq = 0.0f64;
    let mut dist_sum_per_y = vec![0.0f64; ny];
    let mut y_counts = vec![0u64; ny];
    let mut completed = 0u64;

    for trial in 0..trials {
        let mut src_rng = stream.source_rng(trial);
        let flat = sample_pmf(&joint, &mut src_rng);
        let (x, y) = (flat / ny, flat % ny);
        let target = kernel.row(x, y);
        let mut race_rng = stream.candidate_rng(trial);
        let sel = match pfr_select(target, &reference_per_y[y], &mut race_rng, CANDIDATE_CAP) {
            Ok(sel) => sel,
            Err(OneshotError::CandidateCapExceeded { .. }) => {
                report.cap_failures += 1;
                continue;
            }
            Err(other) => return Err(other),
        };
        let len = delta_length_bits(sel.index);
        sum_len += len as f64;
        sum_len_sq += (len * len) as f64;
        dist_sum_per_y[y] += dist.value(x, sel.sample);
        y_counts[y] += 1;
        report.xhat_counts[x][y][sel.sample] += 1;
        report.xy_counts[x][y] += 1;
        completed += 1;
        if let Some(recs) = records.as_mut() {
            recs.push(TrialRecord {
                trial,
                y,
                x,
                xhat: sel.sample,
                index: sel.index,
                codelen_bits: len,
            });
        }
    }

    report.trials = completed;
    if completed > 0 {
        let n = completed as f64;
        report.mean_codelen_bits = sum_len / n;
        let var = (sum_len_sq / n - report.mean_codelen_bits * report.mean_codelen_bits).max(0.0);
        report.stderr_codelen_bits = (var / n).sqrt();
    }
    report.distortion_per_y = dist_sum_per_y
        .iter()
        .zip(&y_counts)
        .map(|(&s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect();
    report.distortion_overall = dist_sum_per_y.iter().sum::<f64>() / completed.max(1) as f64;

    // Empirical conditional divergence: law of the simulated X̂ given y
    // against the source conditional.
    let mut per_y_div = Vec::with_capacity(ny);
    for y in 0..ny {
        let total: u64 = (0..nx).map(|x| report.xy_counts[x][y]).sum();
        if total == 0 {
            per_y_div.push(0.0);
            continue;
        }
        let mut empirical = vec![0.0f64; nhat];
        for x in 0..nx {
            for k in 0..nhat {
                empirical[k] += report.xhat_counts[x][y][k] as f64;
            }
        }
        for v in empirical.iter_mut() {
            *v /= total as f64;
        }
        let target = crate::info::aligned_target(divergence, source, kernel, y)?;
        let induced = DiscreteDist {
            probs: empirical,
            values: kernel.xhat_values().map(|v| v.to_vec()),
        };
        per_y_div.push(crate::info::divergence(divergence, &target, &induced)?);
    }
    report.empirical_divergence_mean = per_y_div
        .iter()
        .zip(source.p_y())
        .map(|(d, p)| d * p)
        .sum();
    report.empirical_divergence_per_y = per_y_div;
    report.records = records;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oneshot::reproduce_sample;

    fn uniform_binary() -> JointSource {
        JointSource::from_x_marginal(
            vec!["0".into(), "1".into()],
            vec![0.5, 0.5],
            Some(vec![0.0, 1.0]),
        )
        .unwrap()
    }

    #[test]
    fn identity_kernel_respects_one_shot_budget() {
        let src = uniform_binary();
        let kernel = ReconstructionKernel::identity(&src);
        let dist = DistortionSpec::hamming(src.x_alphabet(), kernel.xhat_alphabet());
        let stream = SharedRandomnessStream::new(17);
        let report = simulate_oneshot(
            &src,
            &kernel,
            &dist,
            DivergenceSpec::TotalVariation,
            20_000,
            &stream,
            false,
        )
        .unwrap();
        assert!((report.cmi_bits - 1.0).abs() < 1e-12);
        // I + log2(I + 1) + 5 = 7 bits.
        assert!((report.rate_bound_bits - 7.0).abs() < 1e-12);
        assert!(
            report.mean_codelen_bits <= 7.0,
            "mean {} exceeds budget",
            report.mean_codelen_bits
        );
        assert!(report.distortion_overall == 0.0);
        assert_eq!(report.cap_failures, 0);
    }

    #[test]
    fn zero_information_kernel_sends_one_bit() {
        // Rows equal to the output marginal: the race always stops at the
        // first candidate, so every codeword is delta(1) = 1 bit.
        let src = uniform_binary();
        let kernel = ReconstructionKernel::new(
            src.x_alphabet().to_vec(),
            Some(vec![0.0, 1.0]),
            vec![vec![vec![0.5, 0.5]], vec![vec![0.5, 0.5]]],
        )
        .unwrap();
        let dist = DistortionSpec::hamming(src.x_alphabet(), kernel.xhat_alphabet());
        let stream = SharedRandomnessStream::new(23);
        let report = simulate_oneshot(
            &src,
            &kernel,
            &dist,
            DivergenceSpec::TotalVariation,
            20_000,
            &stream,
            false,
        )
        .unwrap();
        assert!(report.cmi_bits < 1e-12);
        assert_eq!(report.mean_codelen_bits, 1.0);
        assert!(
            report.empirical_divergence_mean < 0.02,
            "divergence {}",
            report.empirical_divergence_mean
        );
    }

    #[test]
    fn records_decode_back_to_the_same_sample() {
        let src = JointSource::new(
            vec!["0".into(), "1".into()],
            vec!["u".into(), "v".into()],
            vec![vec![0.3, 0.2], vec![0.1, 0.4]],
            Some(vec![0.0, 1.0]),
        )
        .unwrap();
        let kernel = ReconstructionKernel::new(
            src.x_alphabet().to_vec(),
            Some(vec![0.0, 1.0]),
            vec![
                vec![vec![0.8, 0.2], vec![0.6, 0.4]],
                vec![vec![0.3, 0.7], vec![0.1, 0.9]],
            ],
        )
        .unwrap();
        let dist = DistortionSpec::hamming(src.x_alphabet(), kernel.xhat_alphabet());
        let stream = SharedRandomnessStream::new(40);
        let (reference_per_y, _) = induced_marginals(&src, &kernel).unwrap();
        let report = simulate_oneshot(
            &src,
            &kernel,
            &dist,
            DivergenceSpec::TotalVariation,
            2_000,
            &stream,
            true,
        )
        .unwrap();
        for rec in report.records.as_ref().unwrap() {
            let mut rng = stream.candidate_rng(rec.trial);
            let decoded = reproduce_sample(&reference_per_y[rec.y], &mut rng, rec.index);
            assert_eq!(decoded, rec.xhat, "trial {}", rec.trial);
        }
    }

    #[test]
    fn goodness_of_fit_passes_on_faithful_simulation() {
        let src = uniform_binary();
        let kernel = ReconstructionKernel::new(
            src.x_alphabet().to_vec(),
            Some(vec![0.0, 1.0]),
            vec![vec![vec![0.9, 0.1]], vec![vec![0.2, 0.8]]],
        )
        .unwrap();
        let dist = DistortionSpec::hamming(src.x_alphabet(), kernel.xhat_alphabet());
        let stream = SharedRandomnessStream::new(55);
        let report = simulate_oneshot(
            &src,
            &kernel,
            &dist,
            DivergenceSpec::TotalVariation,
            50_000,
            &stream,
            false,
        )
        .unwrap();
        let min_p = report.min_chi_square_p_value().unwrap();
        assert!(min_p >= 1e-3, "chi-square min p {min_p}");
        assert!(report.mean_codelen_bits <= report.rate_bound_bits);
    }

    #[test]
    fn chi_square_helper_flags_wrong_law() {
        // 60/40 observed against a 90/10 model over 1000 draws.
        let p = chi_square_p_value(&[600, 400], &[0.9, 0.1], 1000).unwrap();
        assert!(p < 1e-6);
        let ok = chi_square_p_value(&[905, 95], &[0.9, 0.1], 1000).unwrap();
        assert!(ok > 0.05);
        assert!(chi_square_p_value(&[1000, 0], &[1.0, 0.0], 1000).is_none());
    }
}
