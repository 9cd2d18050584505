//! Acceptance suite: one test per acceptance criterion, each printing a
//! single PASS/FAIL line (`cargo test --test acceptance -- --nocapture`
//! shows them). Tolerances and thresholds are pinned in code.

use rdcp_core::codec::{attach_posterior_decoder, design_mse_codec, dp_traversal, overhead_audit};
use rdcp_core::corpus;
use rdcp_core::entropy::{ac_decode, ac_encode, ideal_length_bits, read_golden, FrequencyModel};
use rdcp_core::info::{
    binary_entropy, DistortionSpec, DivergenceSpec, JointSource, ReconstructionKernel,
};
use rdcp_core::oneshot::{simulate_oneshot, SharedRandomnessStream};
use rdcp_core::randomness::{
    float_gaussian_entropy, min_common_randomness, verify_lowerbound, witness_reproduces_law,
    QuantizerSpec,
};
use rdcp_core::solver::{
    brute_force_rdcp, solve_rd, solve_rdcp, ConstraintMode, PerceptionBound, ReconstructionSpace,
    SolverConfig, TradeoffQuery,
};
use rand::prelude::*;
use std::time::Instant;

fn report(criterion: u32, name: &str, passed: bool, detail: &str) {
    println!(
        "ACCEPTANCE {criterion} ({name}): {} — {detail}",
        if passed { "PASS" } else { "FAIL" }
    );
    assert!(passed, "criterion {criterion} ({name}): {detail}");
}

fn bernoulli(p: f64) -> JointSource {
    JointSource::from_x_marginal(
        vec!["0".into(), "1".into()],
        vec![1.0 - p, p],
        Some(vec![0.0, 1.0]),
    )
    .unwrap()
}

fn hamming_setup(src: &JointSource) -> (ReconstructionSpace, DistortionSpec) {
    let xhat = ReconstructionSpace::from_source(src);
    let dist = DistortionSpec::hamming(src.x_alphabet(), &xhat.labels);
    (xhat, dist)
}

#[test]
fn criterion_01_rd_closed_form() {
    let start = Instant::now();
    let cfg = SolverConfig::default();
    let mut max_err = 0.0f64;
    for &p in &[0.1, 0.2, 0.5] {
        let src = bernoulli(p);
        let (xhat, dist) = hamming_setup(&src);
        for i in 0..20 {
            let d = 0.005 + (0.95 * p - 0.005) * i as f64 / 19.0;
            let want = binary_entropy(p) - binary_entropy(d);
            let pt = solve_rd(&src, &xhat, &dist, d, &cfg).unwrap();
            max_err = max_err.max((pt.rate_bits - want).abs());
            assert!(pt.distortion <= d + 1e-9);
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        1,
        "rd-closed-form",
        max_err <= 1e-3 && elapsed < 10.0,
        &format!("max |rate - (h(p)-h(D))| = {max_err:.2e} over 60 cells in {elapsed:.2}s"),
    );
}

#[test]
fn criterion_02_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = corpus::rng(0xacce_0002);
    let cfg = SolverConfig::default();
    let mut worst: f64 = 0.0;
    for trial in 0..50 {
        let src = corpus::random_2x2_source(&mut rng);
        let (xhat, dist) = hamming_setup(&src);
        let divergence = match trial % 5 {
            0 | 1 | 2 => DivergenceSpec::TotalVariation,
            3 => DivergenceSpec::KullbackLeibler,
            _ => DivergenceSpec::Wasserstein2,
        };
        let query = TradeoffQuery {
            distortion_bound: rng.random_range(0.05..0.40),
            perception_bound: PerceptionBound::Level(rng.random_range(0.02..0.30)),
            mode: ConstraintMode::PerY,
            divergence,
        };
        let env = brute_force_rdcp(&src, &xhat, &dist, &query, 250).unwrap();
        let pt = solve_rdcp(&src, &xhat, &dist, &query, &cfg)
            .unwrap_or_else(|e| panic!("trial {trial} ({divergence:?}): {e}"));
        let upper = env.upper_bits.expect("strictly feasible grid point");
        let gap = env.grid_gap_bits.unwrap();
        assert!(
            (pt.rate_bits - upper).abs() <= 1e-3 + gap,
            "trial {trial}: |{} - {upper}| > 1e-3 + {gap}",
            pt.rate_bits
        );
        // Strict two-sided envelope.
        assert!(pt.rate_bits <= upper + 1e-3, "trial {trial}: above the grid minimum");
        assert!(pt.rate_bits >= env.lower_bits - 1e-3, "trial {trial}: below certified bound");
        worst = worst.max(pt.rate_bits - upper);
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        2,
        "oracle-equivalence",
        elapsed < 300.0,
        &format!("50 random 2x2x2 instances, worst (solver - grid min) = {worst:.2e}, {elapsed:.1}s"),
    );
}

#[test]
fn criterion_03_monotonicity_and_midpoint_convexity() {
    let mut rng = corpus::rng(0xacce_0003);
    let cfg = SolverConfig::default();
    let d_grid: Vec<f64> = (0..5).map(|i| 0.02 + 0.43 * i as f64 / 4.0).collect();
    let p_grid: Vec<f64> = (0..5).map(|i| 0.4 * i as f64 / 4.0).collect();
    let mut mono_violations = 0usize;
    let mut convex_violations = 0usize;
    for _ in 0..20 {
        let nx = rng.random_range(2..=3);
        let ny = rng.random_range(1..=2);
        let src = corpus::random_source(&mut rng, nx, ny, true);
        let (xhat, dist) = hamming_setup(&src);
        let mut rates = vec![vec![0.0f64; p_grid.len()]; d_grid.len()];
        for (di, &d) in d_grid.iter().enumerate() {
            for (pi, &p) in p_grid.iter().enumerate() {
                let query = TradeoffQuery {
                    distortion_bound: d,
                    perception_bound: PerceptionBound::Level(p),
                    mode: ConstraintMode::PerY,
                    divergence: DivergenceSpec::TotalVariation,
                };
                rates[di][pi] = solve_rdcp(&src, &xhat, &dist, &query, &cfg).unwrap().rate_bits;
            }
        }
        for di in 0..d_grid.len() {
            for pi in 0..p_grid.len() {
                if di > 0 && rates[di][pi] > rates[di - 1][pi] + 1e-4 {
                    mono_violations += 1;
                }
                if pi > 0 && rates[di][pi] > rates[di][pi - 1] + 1e-4 {
                    mono_violations += 1;
                }
            }
        }
        // Midpoint convexity on index pairs whose midpoint is a grid
        // point (the grids are uniform).
        for a in 0..d_grid.len() {
            for b in 0..p_grid.len() {
                for c in a..d_grid.len() {
                    for e in 0..p_grid.len() {
                        if (a + c) % 2 == 0 && (b + e) % 2 == 0 {
                            let mid = rates[(a + c) / 2][(b + e) / 2];
                            if mid > 0.5 * (rates[a][b] + rates[c][e]) + 2e-4 {
                                convex_violations += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    report(
        3,
        "monotone-and-convex",
        mono_violations == 0 && convex_violations == 0,
        &format!(
            "{mono_violations} monotonicity and {convex_violations} midpoint-convexity violations over 20 sources x 5x5 TV grids"
        ),
    );
}

#[test]
fn criterion_04_half_distortion_bound() {
    let mut rng = corpus::rng(0xacce_0004);
    let cfg = SolverConfig::default();
    let mut worst: f64 = f64::NEG_INFINITY;
    for trial in 0..20 {
        let nx = rng.random_range(2..=4);
        let ny = rng.random_range(1..=2);
        let src = corpus::random_source(&mut rng, nx, ny, true);
        let xhat = ReconstructionSpace::from_source(&src);
        let dist = DistortionSpec::mse_for(&src, xhat.values.as_deref()).unwrap();
        // Any D is feasible at P = 0 (the identity kernel), so sweep a
        // spread of scales against the per-y zero-rate variances.
        let scale: f64 = (0..ny)
            .map(|y| {
                let cond = src.x_given_y(y);
                let vals = src.x_values().unwrap();
                let mean: f64 = cond.iter().zip(vals).map(|(&p, &v)| p * v).sum();
                2.0 * cond
                    .iter()
                    .zip(vals)
                    .map(|(&p, &v)| p * (v - mean) * (v - mean))
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min);
        let d = rng.random_range(0.2..1.0) * scale.max(1e-3);
        let family = DivergenceSpec::ALL[trial % 3];
        let perfect = solve_rdcp(
            &src,
            &xhat,
            &dist,
            &TradeoffQuery {
                distortion_bound: d,
                perception_bound: PerceptionBound::Level(0.0),
                mode: ConstraintMode::PerY,
                divergence: family,
            },
            &cfg,
        )
        .unwrap();
        let half = solve_rdcp(
            &src,
            &xhat,
            &dist,
            &TradeoffQuery {
                distortion_bound: d / 2.0,
                perception_bound: PerceptionBound::Unconstrained,
                mode: ConstraintMode::PerY,
                divergence: family,
            },
            &cfg,
        )
        .unwrap();
        let slack = perfect.rate_bits - half.rate_bits;
        worst = worst.max(slack);
        assert!(
            slack <= 2.0 * cfg.tolerance_bits,
            "trial {trial} ({family:?}): R(D,0) = {} > R(D/2,inf) = {}",
            perfect.rate_bits,
            half.rate_bits
        );
    }
    report(
        4,
        "half-distortion-bound",
        true,
        &format!("R(D,0) <= R(D/2,inf) on 20 embedded sources x 3 families; worst slack {worst:.2e}"),
    );
}

#[test]
fn criterion_05_one_shot_rate_bound() {
    let cfg = SolverConfig::default();
    let stream = SharedRandomnessStream::new(0xacce_0005);
    let trials = 100_000u64;

    // Corpus: identity on uniform binary, zero-information, the
    // rate-distortion-optimal kernel at D = 0.1 (I ~ 0.531), a noisy
    // channel, and a conditional two-y kernel.
    let mut corpus_kernels: Vec<(String, JointSource, ReconstructionKernel)> = Vec::new();
    let uni = bernoulli(0.5);
    corpus_kernels.push(("identity-uniform".into(), uni.clone(), ReconstructionKernel::identity(&uni)));
    let b3 = bernoulli(0.3);
    let zero_info = ReconstructionKernel::new(
        b3.x_alphabet().to_vec(),
        Some(vec![0.0, 1.0]),
        vec![vec![vec![0.7, 0.3]], vec![vec![0.7, 0.3]]],
    )
    .unwrap();
    corpus_kernels.push(("zero-info".into(), b3.clone(), zero_info));
    let (xhat, dist) = hamming_setup(&uni);
    let rd_kernel = solve_rd(&uni, &xhat, &dist, 0.1, &cfg).unwrap().kernel;
    corpus_kernels.push(("rd-optimal-0.1".into(), uni.clone(), rd_kernel));
    let bsc = ReconstructionKernel::new(
        b3.x_alphabet().to_vec(),
        Some(vec![0.0, 1.0]),
        vec![vec![vec![0.9, 0.1]], vec![vec![0.1, 0.9]]],
    )
    .unwrap();
    corpus_kernels.push(("bsc-0.1".into(), b3, bsc));
    let pair = JointSource::new(
        vec!["0".into(), "1".into()],
        vec!["y0".into(), "y1".into()],
        vec![vec![0.45, 0.05], vec![0.05, 0.45]],
        Some(vec![0.0, 1.0]),
    )
    .unwrap();
    let cond_kernel = ReconstructionKernel::new(
        pair.x_alphabet().to_vec(),
        Some(vec![0.0, 1.0]),
        vec![
            vec![vec![0.95, 0.05], vec![0.75, 0.25]],
            vec![vec![0.25, 0.75], vec![0.05, 0.95]],
        ],
    )
    .unwrap();
    corpus_kernels.push(("conditional-pair".into(), pair, cond_kernel));

    let mut details = Vec::new();
    for (name, src, kernel) in &corpus_kernels {
        let d = DistortionSpec::hamming(src.x_alphabet(), kernel.xhat_alphabet());
        let rep = simulate_oneshot(src, kernel, &d, DivergenceSpec::TotalVariation, trials, &stream, false)
            .unwrap();
        assert_eq!(rep.cap_failures, 0, "{name}: candidate cap hit");
        assert!(
            rep.mean_codelen_bits <= rep.rate_bound_bits,
            "{name}: mean {} exceeds bound {}",
            rep.mean_codelen_bits,
            rep.rate_bound_bits
        );
        let min_p = rep.min_chi_square_p_value();
        assert!(
            min_p.is_none_or(|p| p >= 1e-3),
            "{name}: chi-square min p {min_p:?} below 1e-3"
        );
        // One-shot shadow of the converse: the empirical rate cannot sit
        // below the solver optimum at the kernel's realized constraints.
        let realized_d = {
            let laws = rdcp_core::info::induced_laws(src, kernel, &d).unwrap();
            laws.distortion_per_y.iter().copied().fold(0.0f64, f64::max)
        };
        let (_, per_y_div) =
            rdcp_core::info::conditional_divergence(DivergenceSpec::TotalVariation, src, kernel)
                .unwrap();
        let realized_p = per_y_div.iter().copied().fold(0.0f64, f64::max);
        let query = TradeoffQuery {
            distortion_bound: realized_d + 1e-9,
            perception_bound: PerceptionBound::Level(realized_p + 1e-9),
            mode: ConstraintMode::PerY,
            divergence: DivergenceSpec::TotalVariation,
        };
        let xh = ReconstructionSpace::new(
            kernel.xhat_alphabet().to_vec(),
            kernel.xhat_values().map(|v| v.to_vec()),
        );
        let optimum = solve_rdcp(src, &xh, &d, &query, &cfg).unwrap().rate_bits;
        assert!(
            rep.mean_codelen_bits + 3.0 * rep.stderr_codelen_bits >= optimum - 1e-3,
            "{name}: empirical rate {} below solver optimum {optimum}",
            rep.mean_codelen_bits
        );
        details.push(format!("{name}: {:.3} <= {:.3}", rep.mean_codelen_bits, rep.rate_bound_bits));
        if name == "rd-optimal-0.1" {
            assert!((rep.rate_bound_bits - 6.1455).abs() < 5e-3, "bound {}", rep.rate_bound_bits);
        }
    }
    report(5, "one-shot-rate-bound", true, &details.join("; "));
}

#[test]
fn criterion_06_posterior_decoder_doubling() {
    let mut rng = corpus::rng(0xacce_0006);
    let mut pipelines: Vec<(JointSource, usize)> = vec![(corpus::golden_pipeline_source(), 2)];
    for _ in 0..10 {
        let nx = rng.random_range(2..=6);
        let ny = rng.random_range(1..=3);
        let src = corpus::random_source(&mut rng, nx, ny, true);
        let budget = rng.random_range(1..=nx);
        pipelines.push((src, budget));
    }
    let mut max_perception_dev = 0.0f64;
    let mut max_equality_dev = 0.0f64;
    for (src, budget) in &pipelines {
        let mut pipe = design_mse_codec(src, *budget, true).unwrap();
        attach_posterior_decoder(&mut pipe, src, 99).unwrap();
        let values = src.x_values().unwrap();
        for y in 0..src.num_y() {
            let cond = src.x_given_y(y);
            // Computed induced law of the sampled reconstruction.
            for x in 0..src.num_x() {
                let induced: f64 = (0..pipe.m_count())
                    .filter_map(|m| pipe.posterior_row(m, y).map(|r| (m, r)))
                    .filter(|(_, r)| !r.is_empty())
                    .map(|(m, r)| {
                        let (symbols, probs, _) = pipe.context(y);
                        let pm = symbols
                            .iter()
                            .position(|&s| s == m)
                            .map_or(0.0, |i| probs[i]);
                        pm * r[x]
                    })
                    .sum();
                max_perception_dev = max_perception_dev.max((induced - cond[x]).abs());
            }
            // Doubling with equality per y.
            let mut mse1 = 0.0;
            let mut mse2 = 0.0;
            for x in 0..src.num_x() {
                if cond[x] == 0.0 {
                    continue;
                }
                let m = pipe.encode_map(x, y);
                let mean = pipe.posterior_mean(m, y);
                mse1 += cond[x] * (values[x] - mean) * (values[x] - mean);
                for (xt, &pt) in pipe.posterior_row(m, y).unwrap().iter().enumerate() {
                    if pt > 0.0 {
                        let d = values[x] - values[xt];
                        mse2 += cond[x] * pt * d * d;
                    }
                }
            }
            assert!(mse2 <= 2.0 * mse1 + 1e-12, "doubling bound broken at y={y}");
            max_equality_dev = max_equality_dev.max((mse2 - 2.0 * mse1).abs());
        }
    }
    report(
        6,
        "posterior-decoder-doubling",
        max_perception_dev <= 1e-12 && max_equality_dev <= 1e-12,
        &format!(
            "{} pipelines: max law deviation {max_perception_dev:.2e}, max |E(X-Xt)^2 - 2 MSE| = {max_equality_dev:.2e}",
            pipelines.len()
        ),
    );
}

#[test]
fn criterion_07_two_bit_overhead() {
    let mut rng = corpus::rng(0xacce_0007);
    let count = 1000;
    let mut ok_budget = 0usize;
    let mut ok_identity = 0usize;
    for i in 0..count {
        let nx = rng.random_range(3..=6);
        let ny = rng.random_range(2..=3.min(nx));
        let src = corpus::random_det_y_source(&mut rng, nx, ny);
        let budget = rng.random_range(1..=nx);
        let mut pipe = design_mse_codec(&src, budget, true).unwrap();
        attach_posterior_decoder(&mut pipe, &src, i as u64).unwrap();
        let audit = overhead_audit(&pipe, &src).unwrap();
        if audit.within_budget {
            ok_budget += 1;
        }
        if audit.identity_holds {
            ok_identity += 1;
        }
    }
    report(
        7,
        "two-bit-overhead",
        ok_budget == count && ok_identity == count,
        &format!("{ok_budget}/{count} within R + 2, {ok_identity}/{count} exact H(M|Y)+H(Y)=H(M)"),
    );
}

#[test]
fn criterion_08_common_randomness_lower_bound() {
    let start = Instant::now();
    let mut instances = corpus::bundled_randomness_instances();
    for (i, inst) in corpus::randomness_corpus(0xacce_0008, 200).into_iter().enumerate() {
        instances.push((format!("gen-{i}"), inst));
    }
    let mut min_gap = f64::INFINITY;
    for (name, inst) in &instances {
        let witness = min_common_randomness(inst).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(witness_reproduces_law(inst, &witness), "{name}: witness law mismatch");
        let rep = verify_lowerbound(inst, &witness);
        assert!(rep.satisfied, "{name}: gap {} < 0", rep.gap_bits);
        min_gap = min_gap.min(rep.gap_bits);
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        8,
        "common-randomness-bound",
        elapsed < 600.0,
        &format!("{} instances, min gap {min_gap:.4} bits, {elapsed:.1}s", instances.len()),
    );
}

#[test]
fn criterion_09_float_gaussian_entropy() {
    let start = Instant::now();
    let est = float_gaussian_entropy(1_000_000, QuantizerSpec::Binary32Like, 0xacce_0009);
    let elapsed = start.elapsed().as_secs_f64();
    report(
        9,
        "float-gaussian-entropy",
        (est.bits_per_dim - 26.55).abs() <= 0.3 && elapsed < 60.0,
        &format!(
            "{:.4} ± {:.4} bits/dim vs 26.55 ± 0.3 ({} samples, {} redraws, {elapsed:.1}s)",
            est.bits_per_dim, est.stderr_bits, est.samples, est.redraws
        ),
    );
}

#[test]
fn criterion_10_interpolation_law() {
    let mut rng = corpus::rng(0xacce_0010);
    let alphas: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let mut checked = 0usize;
    for trial in 0..10 {
        let nx = rng.random_range(3..=6);
        let ny = rng.random_range(1..=2);
        let src = corpus::random_source(&mut rng, nx, ny, true);
        let budget = rng.random_range(1..nx);
        let mut pipe = design_mse_codec(&src, budget, true).unwrap();
        attach_posterior_decoder(&mut pipe, &src, trial as u64).unwrap();
        let points = dp_traversal(
            &pipe,
            &src,
            &alphas,
            DivergenceSpec::Wasserstein2,
            20_000,
            0xacce_0010 ^ trial as u64,
        )
        .unwrap();
        let mse1 = pipe.g1_mse();
        for p in &points {
            assert!(
                (p.mse_measured - p.mse_predicted).abs() <= 3.0 * p.mse_stderr.max(1e-9),
                "trial {trial} alpha {}: measured {} vs {} (se {})",
                p.alpha,
                p.mse_measured,
                p.mse_predicted,
                p.mse_stderr
            );
            assert!(
                (p.mse_exact - p.mse_predicted).abs() <= 1e-12,
                "trial {trial} alpha {}: exact law disagrees with the identity",
                p.alpha
            );
            checked += 1;
        }
        assert!((points[0].mse_exact - mse1).abs() <= 1e-12, "alpha=0 endpoint");
        assert!((points[10].mse_exact - 2.0 * mse1).abs() <= 1e-12, "alpha=1 endpoint");
        assert!(points[10].divergence <= 1e-12, "alpha=1 divergence {}", points[10].divergence);
    }
    report(
        10,
        "interpolation-law",
        true,
        &format!("{checked} (pipeline, alpha) cells within 3 standard errors; endpoints exact"),
    );
}

#[test]
fn criterion_11_entropy_coder() {
    let mut rng = corpus::rng(0xacce_0011);
    // 10^4 random round-trips under random static models.
    for _ in 0..10_000 {
        let n_symbols = rng.random_range(2..=32);
        let counts: Vec<u32> = (0..n_symbols).map(|_| rng.random_range(1..500)).collect();
        let model = FrequencyModel::from_counts(&counts).unwrap();
        let len = rng.random_range(0..120);
        let symbols: Vec<usize> = (0..len)
            .map(|_| model.locate(rng.random_range(0..model.total())))
            .collect();
        let models: Vec<&FrequencyModel> = symbols.iter().map(|_| &model).collect();
        let stream = ac_encode(&symbols, &models).unwrap();
        assert_eq!(ac_decode(&stream, &models).unwrap(), symbols, "round-trip broke");
        let ideal = ideal_length_bits(&symbols, &models);
        assert!(
            (stream.len_bits() as f64) <= ideal + 2.0 + 1e-4 * len as f64,
            "length {} vs ideal {ideal}",
            stream.len_bits()
        );
    }

    // Golden bitstreams: regenerate in memory and compare bytes.
    let golden_dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/goldens");
    let mut stable = 0usize;
    for input in corpus::golden_ac_inputs() {
        let models: Vec<&FrequencyModel> = input.model_ids.iter().map(|&i| &input.models[i]).collect();
        let stream = ac_encode(&input.symbols, &models).unwrap();
        let golden = read_golden(&golden_dir, input.name).unwrap();
        assert_eq!(golden.stream.bytes(), stream.bytes(), "{}: bytes drifted", input.name);
        assert_eq!(golden.stream.len_bits(), stream.len_bits());
        assert_eq!(golden.symbols, input.symbols, "{}: sidecar symbols", input.name);
        // The recorded stream decodes to the recorded symbols.
        let decoded = ac_decode(&golden.stream, &models).unwrap();
        assert_eq!(decoded, golden.symbols, "{}: golden decode", input.name);
        stable += 1;
    }
    report(
        11,
        "entropy-coder",
        stable == 2,
        &format!("10^4 random round-trips identity, length <= ideal + 2; {stable} goldens byte-stable"),
    );
}
