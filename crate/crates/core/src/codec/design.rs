//! MSE codec design by partition search, and the posterior-sampling
//! decoder attached on top of it.
//!
//! Small per-y supports (≤ 8 symbols) get an exhaustive search over set
//! partitions into at most |M| cells; larger supports fall back to a
//! Lloyd-style alternation from a quantile initialization, which is
//! locally optimal only. The decoder is always the exact posterior mean,
//! so the later doubling guarantee of the sampling decoder holds with
//! equality.

use super::{CodecError, CodecPipeline, PipelineRates, PosteriorDecoder};
use crate::entropy::{huffman_build, FrequencyModel, PrefixCode};
use crate::info::{entropy_bits, InfoError, JointSource};

/// Supports up to this size are partitioned exhaustively.
pub const EXHAUSTIVE_SUPPORT_LIMIT: usize = 8;

/// Enumerates set partitions of {0..n} into at most `max_blocks` blocks
/// as restricted growth strings, in ascending lexicographic order.
fn for_each_partition(n: usize, max_blocks: usize, mut f: impl FnMut(&[usize])) {
    let mut rgs = vec![0usize; n];
    if n == 0 {
        f(&rgs);
        return;
    }
    loop {
        f(&rgs);
        // next RGS: increment the rightmost position that can grow.
        let mut i = n;
        loop {
            if i == 1 {
                return;
            }
            i -= 1;
            let max_prefix = rgs[..i].iter().copied().max().unwrap_or(0);
            if rgs[i] <= max_prefix && rgs[i] + 1 < max_blocks {
                rgs[i] += 1;
                for v in rgs[i + 1..].iter_mut() {
                    *v = 0;
                }
                break;
            }
            rgs[i] = 0;
        }
    }
}

/// Weighted within-cell squared error of an assignment.
fn partition_sse(values: &[f64], weights: &[f64], assign: &[usize], blocks: usize) -> f64 {
    let mut wsum = vec![0.0; blocks];
    let mut vsum = vec![0.0; blocks];
    for (i, &b) in assign.iter().enumerate() {
        wsum[b] += weights[i];
        vsum[b] += weights[i] * values[i];
    }
    let mut sse = 0.0;
    for (i, &b) in assign.iter().enumerate() {
        if wsum[b] > 0.0 {
            let mean = vsum[b] / wsum[b];
            let d = values[i] - mean;
            sse += weights[i] * d * d;
        }
    }
    sse
}

fn exhaustive_partition(values: &[f64], weights: &[f64], max_blocks: usize) -> Vec<usize> {
    let n = values.len();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for_each_partition(n, max_blocks.min(n).max(1), |rgs| {
        let blocks = rgs.iter().copied().max().unwrap_or(0) + 1;
        let sse = partition_sse(values, weights, rgs, blocks);
        if best.as_ref().is_none_or(|(b, _)| sse < *b - 1e-15) {
            best = Some((sse, rgs.to_vec()));
        }
    });
    best.unwrap().1
}

/// Lloyd-style alternation from a quantile initialization; locally
/// optimal only, used beyond the exhaustive support limit.
fn lloyd_partition(values: &[f64], weights: &[f64], max_blocks: usize) -> Vec<usize> {
    let n = values.len();
    let blocks = max_blocks.min(n).max(1);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    // Quantile split of the sorted support.
    let total: f64 = weights.iter().sum();
    let mut assign = vec![0usize; n];
    let mut acc = 0.0;
    for &i in &order {
        let b = ((acc / total) * blocks as f64).floor() as usize;
        assign[i] = b.min(blocks - 1);
        acc += weights[i];
    }
    for _ in 0..200 {
        let mut wsum = vec![0.0; blocks];
        let mut vsum = vec![0.0; blocks];
        for (i, &b) in assign.iter().enumerate() {
            wsum[b] += weights[i];
            vsum[b] += weights[i] * values[i];
        }
        let means: Vec<Option<f64>> = (0..blocks)
            .map(|b| (wsum[b] > 0.0).then(|| vsum[b] / wsum[b]))
            .collect();
        let mut changed = false;
        for i in 0..n {
            let mut best = assign[i];
            let mut best_d = f64::INFINITY;
            for (b, mean) in means.iter().enumerate() {
                if let Some(m) = mean {
                    let d = (values[i] - m).abs();
                    if d < best_d - 1e-15 {
                        best_d = d;
                        best = b;
                    }
                }
            }
            if best != assign[i] {
                assign[i] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    assign
}

/// Renumber an assignment into dense block ids in first-occurrence order.
fn dense_blocks(assign: &[usize]) -> (Vec<usize>, usize) {
    let mut map: Vec<Option<usize>> = vec![None; assign.len() + 1];
    let mut dense = Vec::with_capacity(assign.len());
    let mut next = 0usize;
    for &b in assign {
        let id = match map[b] {
            Some(id) => id,
            None => {
                map[b] = Some(next);
                next += 1;
                next - 1
            }
        };
        dense.push(id);
    }
    (dense, next)
}

/// Designs the encoder partition and the posterior-mean decoder.
///
/// With `conditional` set, the partition (and hence the code M) is
/// designed per y and M labels are globally distinct across y, so the
/// side information is recoverable from M when Y is deterministic of X.
/// Otherwise a single partition of the X alphabet is shared by every y.
/// A budget above |X| is clamped with a design note.
pub fn design_mse_codec(
    source: &JointSource,
    m_budget: usize,
    conditional: bool,
) -> Result<CodecPipeline, CodecError> {
    if m_budget == 0 {
        return Err(CodecError::BadBudget);
    }
    let x_values = source
        .x_values()
        .ok_or(InfoError::MissingEmbedding { context: "MSE codec design".to_string() })?
        .to_vec();
    let (nx, ny) = (source.num_x(), source.num_y());
    let mut notes = Vec::new();
    let budget = if m_budget > nx {
        notes.push(format!("|M| budget {m_budget} clamped to |X| = {nx}"));
        nx
    } else {
        m_budget
    };

    let mut encoder = vec![vec![0usize; ny]; nx];
    let mut m_count = 0usize;
    // Cells as (y or usize::MAX for shared, members).
    let mut cell_members: Vec<(usize, Vec<usize>)> = Vec::new();

    if conditional {
        for y in 0..ny {
            let cond = source.x_given_y(y);
            let support: Vec<usize> = (0..nx).filter(|&x| cond[x] > 0.0).collect();
            let values: Vec<f64> = support.iter().map(|&x| x_values[x]).collect();
            let weights: Vec<f64> = support.iter().map(|&x| cond[x]).collect();
            let assign = if support.len() <= EXHAUSTIVE_SUPPORT_LIMIT {
                exhaustive_partition(&values, &weights, budget)
            } else {
                notes.push(format!(
                    "support of y={y} has {} symbols; Lloyd alternation (locally optimal)",
                    support.len()
                ));
                lloyd_partition(&values, &weights, budget)
            };
            let (dense, blocks) = dense_blocks(&assign);
            let offset = m_count;
            for b in 0..blocks {
                let members: Vec<usize> = support
                    .iter()
                    .zip(&dense)
                    .filter(|(_, &d)| d == b)
                    .map(|(&x, _)| x)
                    .collect();
                cell_members.push((y, members));
            }
            for (si, &x) in support.iter().enumerate() {
                encoder[x][y] = offset + dense[si];
            }
            // Off-support symbols never occur for this y; route them to
            // the cell with the nearest mean for determinism.
            let means: Vec<f64> = (offset..offset + blocks)
                .map(|m| {
                    let (_, members) = &cell_members[m];
                    let w: f64 = members.iter().map(|&x| cond[x]).sum();
                    members.iter().map(|&x| cond[x] * x_values[x]).sum::<f64>() / w
                })
                .collect();
            for x in 0..nx {
                if cond[x] == 0.0 {
                    let mut best = 0usize;
                    let mut best_d = f64::INFINITY;
                    for (b, &mean) in means.iter().enumerate() {
                        let d = (x_values[x] - mean).abs();
                        if d < best_d - 1e-15 {
                            best_d = d;
                            best = b;
                        }
                    }
                    encoder[x][y] = offset + best;
                }
            }
            m_count += blocks;
        }
    } else {
        let px = source.p_x();
        let support: Vec<usize> = (0..nx).filter(|&x| px[x] > 0.0).collect();
        let values: Vec<f64> = support.iter().map(|&x| x_values[x]).collect();
        // Objective weights: the shared partition minimizes
        // Σ_y p(y) Var(X | cell, y); with posterior means per (cell, y)
        // this is not separable exactly, so weight by the marginal (the
        // classical design) and document.
        let weights: Vec<f64> = support.iter().map(|&x| px[x]).collect();
        let assign = if support.len() <= EXHAUSTIVE_SUPPORT_LIMIT {
            exhaustive_partition(&values, &weights, budget)
        } else {
            notes.push(format!(
                "support has {} symbols; Lloyd alternation (locally optimal)",
                support.len()
            ));
            lloyd_partition(&values, &weights, budget)
        };
        let (dense, blocks) = dense_blocks(&assign);
        for b in 0..blocks {
            let members: Vec<usize> = support
                .iter()
                .zip(&dense)
                .filter(|(_, &d)| d == b)
                .map(|(&x, _)| x)
                .collect();
            cell_members.push((usize::MAX, members));
        }
        for (si, &x) in support.iter().enumerate() {
            for y in 0..ny {
                encoder[x][y] = dense[si];
            }
        }
        for x in 0..nx {
            if px[x] == 0.0 {
                for y in 0..ny {
                    encoder[x][y] = 0;
                }
            }
        }
        m_count = blocks;
    }

    // Posterior means and per-context statistics.
    let mut g1 = vec![vec![f64::NAN; ny]; m_count];
    let mut p_m_given_y = vec![vec![0.0f64; ny]; m_count];
    for y in 0..ny {
        let cond = source.x_given_y(y);
        for m in 0..m_count {
            let mut w = 0.0;
            let mut v = 0.0;
            for x in 0..nx {
                if encoder[x][y] == m && cond[x] > 0.0 {
                    w += cond[x];
                    v += cond[x] * x_values[x];
                }
            }
            if w > 0.0 {
                g1[m][y] = v / w;
                p_m_given_y[m][y] = w;
            }
        }
    }

    let mut m_symbols_per_y = Vec::with_capacity(ny);
    let mut m_probs_per_y = Vec::with_capacity(ny);
    let mut m_models = Vec::with_capacity(ny);
    for y in 0..ny {
        let symbols: Vec<usize> = (0..m_count).filter(|&m| p_m_given_y[m][y] > 0.0).collect();
        let probs: Vec<f64> = symbols.iter().map(|&m| p_m_given_y[m][y]).collect();
        let model = FrequencyModel::from_pmf(&probs, 1 << 16)?;
        m_symbols_per_y.push(symbols);
        m_probs_per_y.push(probs);
        m_models.push(model);
    }

    let y_code: PrefixCode = huffman_build(source.p_y())?;
    let r_y_bits = y_code.expected_length_bits(source.p_y());
    let h_y_bits = entropy_bits(source.p_y());
    let mut h_m_given_y = 0.0;
    let mut r_m_bits = 0.0;
    for y in 0..ny {
        let probs = &m_probs_per_y[y];
        h_m_given_y += source.p_y()[y] * entropy_bits(probs);
        let model = &m_models[y];
        let cost: f64 = probs
            .iter()
            .enumerate()
            .map(|(s, &p)| p * model.ideal_bits(s))
            .sum();
        r_m_bits += source.p_y()[y] * cost;
    }
    let p_m: Vec<f64> = (0..m_count)
        .map(|m| (0..ny).map(|y| p_m_given_y[m][y] * source.p_y()[y]).sum())
        .collect();
    let h_m_bits = entropy_bits(&p_m);

    // Overall MSE of the posterior-mean decoder.
    let mut mse_g1 = 0.0;
    for y in 0..ny {
        let cond = source.x_given_y(y);
        for x in 0..nx {
            if cond[x] > 0.0 {
                let m = encoder[x][y];
                let d = x_values[x] - g1[m][y];
                mse_g1 += source.p_y()[y] * cond[x] * d * d;
            }
        }
    }

    Ok(CodecPipeline {
        conditional,
        x_values,
        y_labels: source.y_alphabet().to_vec(),
        p_y: source.p_y().to_vec(),
        encoder,
        m_count,
        g1,
        m_symbols_per_y,
        m_probs_per_y,
        m_models,
        y_code,
        g2: None,
        rates: PipelineRates { r_y_bits, r_m_bits, h_y_bits, h_m_bits, h_m_given_y_bits: h_m_given_y },
        mse_g1,
        design_notes: notes,
    })
}

/// Attaches the posterior-sampling decoder: rows computed exactly by
/// Bayes from the encoder partition, so the induced law of the sampled
/// reconstruction equals the source conditional exactly.
///
/// Requires g1 to be the posterior-mean decoder (validated against the
/// source), the precondition of the doubling guarantee.
pub fn attach_posterior_decoder(
    pipeline: &mut CodecPipeline,
    source: &JointSource,
    seed: u64,
) -> Result<(), CodecError> {
    validate_against_source(pipeline, source)?;
    let (nx, ny) = (source.num_x(), source.num_y());
    let mut rows = vec![vec![Vec::new(); ny]; pipeline.m_count];
    for y in 0..ny {
        let cond = source.x_given_y(y);
        for m in 0..pipeline.m_count {
            let mass: f64 = (0..nx)
                .filter(|&x| pipeline.encoder[x][y] == m)
                .map(|x| cond[x])
                .sum();
            if mass == 0.0 {
                continue;
            }
            // Posterior-mean validation for occupied cells.
            let mean: f64 = (0..nx)
                .filter(|&x| pipeline.encoder[x][y] == m)
                .map(|x| cond[x] * pipeline.x_values[x])
                .sum::<f64>()
                / mass;
            let got = pipeline.g1[m][y];
            if (got - mean).abs() > 1e-12 {
                return Err(CodecError::NotPosteriorMean { m, y, got, want: mean });
            }
            let row: Vec<f64> = (0..nx)
                .map(|x| if pipeline.encoder[x][y] == m { cond[x] / mass } else { 0.0 })
                .collect();
            rows[m][y] = row;
        }
        // Induced law check: sum_m p(m|y) p(x|m,y) must reproduce the
        // conditional exactly.
        for x in 0..nx {
            let induced: f64 = (0..pipeline.m_count)
                .filter(|&m| !rows[m][y].is_empty())
                .map(|m| pipeline.p_m_given_y(m, y) * rows[m][y][x])
                .sum();
            if (induced - cond[x]).abs() > 1e-12 {
                return Err(CodecError::Mismatch(format!(
                    "induced law at (x={x}, y={y}) is {induced}, source has {}",
                    cond[x]
                )));
            }
        }
    }
    pipeline.g2 = Some(PosteriorDecoder { rows, seed });
    Ok(())
}

impl CodecPipeline {
    pub(crate) fn p_m_given_y(&self, m: usize, y: usize) -> f64 {
        match self.m_symbols_per_y[y].iter().position(|&s| s == m) {
            Some(i) => self.m_probs_per_y[y][i],
            None => 0.0,
        }
    }
}

/// Shape checks between a pipeline and a source.
pub(crate) fn validate_against_source(
    pipeline: &CodecPipeline,
    source: &JointSource,
) -> Result<(), CodecError> {
    if pipeline.encoder.len() != source.num_x() || pipeline.y_labels.len() != source.num_y() {
        return Err(CodecError::Mismatch(format!(
            "pipeline is {}x{}, source is {}x{}",
            pipeline.encoder.len(),
            pipeline.y_labels.len(),
            source.num_x(),
            source.num_y()
        )));
    }
    match source.x_values() {
        Some(v) if v == pipeline.x_values.as_slice() => Ok(()),
        _ => Err(CodecError::Mismatch("source embeddings differ from the pipeline".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four_point() -> JointSource {
        JointSource::from_x_marginal(
            (0..4).map(|i| i.to_string()).collect(),
            vec![0.25; 4],
            Some(vec![0.0, 1.0, 2.0, 3.0]),
        )
        .unwrap()
    }

    #[test]
    fn identity_budget_is_lossless() {
        let src = four_point();
        let pipe = design_mse_codec(&src, 4, true).unwrap();
        assert_eq!(pipe.m_count(), 4);
        assert!(pipe.g1_mse() == 0.0);
    }

    #[test]
    fn single_cell_is_the_conditional_mean() {
        let src = JointSource::new(
            vec!["0".into(), "1".into()],
            vec!["u".into(), "v".into()],
            vec![vec![0.4, 0.1], vec![0.1, 0.4]],
            Some(vec![0.0, 1.0]),
        )
        .unwrap();
        let pipe = design_mse_codec(&src, 1, true).unwrap();
        // X̂ = E[X|Y]; distortion = Σ p(y) Var(X|y) = 0.2*0.8 = 0.16.
        assert_eq!(pipe.m_count(), 2); // one cell per y, globally distinct
        let want: f64 = 0.16;
        assert!((pipe.g1_mse() - want).abs() < 1e-12, "mse {}", pipe.g1_mse());
        for y in 0..2 {
            let m = pipe.encode_map(0, y);
            let mean = pipe.posterior_mean(m, y);
            assert!((mean - if y == 0 { 0.2 } else { 0.8 }).abs() < 1e-12);
        }
    }

    #[test]
    fn four_point_two_cells_matches_exhaustive_oracle() {
        // Uniform X on {0,1,2,3}, |M| = 2: the best partition is
        // {0,1} | {2,3} with means 0.5 and 2.5 and MSE 0.25.
        let src = four_point();
        let pipe = design_mse_codec(&src, 2, true).unwrap();
        assert_eq!(pipe.m_count(), 2);
        assert!((pipe.g1_mse() - 0.25).abs() < 1e-12, "mse {}", pipe.g1_mse());
        assert_eq!(pipe.encode_map(0, 0), pipe.encode_map(1, 0));
        assert_eq!(pipe.encode_map(2, 0), pipe.encode_map(3, 0));
        let m_lo = pipe.encode_map(0, 0);
        let m_hi = pipe.encode_map(3, 0);
        assert!((pipe.posterior_mean(m_lo, 0) - 0.5).abs() < 1e-12);
        assert!((pipe.posterior_mean(m_hi, 0) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn budget_above_alphabet_clamps_with_note() {
        let src = four_point();
        let pipe = design_mse_codec(&src, 9, true).unwrap();
        assert_eq!(pipe.m_count(), 4);
        assert!(pipe.design_notes().iter().any(|n| n.contains("clamped")));
        assert!(design_mse_codec(&src, 0, true).is_err());
    }

    #[test]
    fn missing_embeddings_rejected() {
        let src = JointSource::from_x_marginal(
            vec!["a".into(), "b".into()],
            vec![0.5, 0.5],
            None,
        )
        .unwrap();
        assert!(matches!(
            design_mse_codec(&src, 2, true),
            Err(CodecError::Info(InfoError::MissingEmbedding { .. }))
        ));
    }

    #[test]
    fn posterior_decoder_rows_are_exact() {
        let src = four_point();
        let mut pipe = design_mse_codec(&src, 2, true).unwrap();
        attach_posterior_decoder(&mut pipe, &src, 7).unwrap();
        let m = pipe.encode_map(0, 0);
        let row = pipe.posterior_row(m, 0).unwrap();
        assert_eq!(row, &[0.5, 0.5, 0.0, 0.0]);
    }

    #[test]
    fn tampered_g1_is_rejected() {
        let src = four_point();
        let mut pipe = design_mse_codec(&src, 2, true).unwrap();
        pipe.g1[0][0] += 0.25;
        let err = attach_posterior_decoder(&mut pipe, &src, 7).unwrap_err();
        assert!(matches!(err, CodecError::NotPosteriorMean { .. }));
    }

    #[test]
    fn lloyd_handles_larger_supports() {
        let n = 12;
        let probs = vec![1.0 / n as f64; n];
        let src = JointSource::from_x_marginal(
            (0..n).map(|i| i.to_string()).collect(),
            probs,
            Some((0..n).map(|i| i as f64).collect()),
        )
        .unwrap();
        let pipe = design_mse_codec(&src, 3, true).unwrap();
        assert!(pipe.m_count() <= 3);
        assert!(pipe.design_notes().iter().any(|n| n.contains("Lloyd")));
        // Quantile-initialized Lloyd on a uniform grid lands on the
        // contiguous thirds: MSE = mean within-cell variance of 4 points.
        let within = |k: f64| {
            let vals: Vec<f64> = (0..4).map(|i| k + i as f64).collect();
            let mean = vals.iter().sum::<f64>() / 4.0;
            vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 4.0
        };
        let want = (within(0.0) + within(4.0) + within(8.0)) / 3.0;
        assert!((pipe.g1_mse() - want).abs() < 1e-9, "mse {}", pipe.g1_mse());
    }
}
