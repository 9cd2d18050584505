//! Overhead audit of the lossless-Y framework: compares coding M
//! unconditionally against the conditional split R_M + R_Y, and reports
//! the exact entropy identity behind the two-bit budget.

use super::{design::validate_against_source, CodecError, CodecPipeline};
use crate::entropy::huffman_build;
use crate::info::{entropy_bits, JointSource};

#[derive(Debug, Clone)]
pub struct OverheadAudit {
    /// Expected one-shot code length of M ignoring Y.
    pub r_unconditional_bits: f64,
    /// Expected per-context code length of M.
    pub r_m_bits: f64,
    /// Expected prefix-code length of Y.
    pub r_y_bits: f64,
    /// r_unconditional + 2 − (r_m + r_y).
    pub slack_bits: f64,
    pub h_m_bits: f64,
    pub h_m_given_y_bits: f64,
    pub h_y_bits: f64,
    pub h_y_given_m_bits: f64,
    /// H(M|Y) + H(Y) = H(M) within 1e-10 (equivalently H(Y|M) = 0).
    pub identity_holds: bool,
    /// R_M + R_Y ≤ R + 2.
    pub within_budget: bool,
}

/// Audits the split coding of a designed pipeline over a source whose
/// side information is deterministic of the symbol. One-shot code
/// lengths are Huffman expected lengths, so each channel sits within one
/// bit of its entropy and the comparison matches the two-bit budget.
pub fn overhead_audit(
    pipeline: &CodecPipeline,
    source: &JointSource,
) -> Result<OverheadAudit, CodecError> {
    validate_against_source(pipeline, source)?;
    if !source.y_is_deterministic_of_x() {
        return Err(CodecError::YNotDeterministic);
    }
    if pipeline.g2.is_none() {
        return Err(CodecError::NoPosteriorDecoder);
    }
    let (nx, ny) = (source.num_x(), source.num_y());

    // Joint law of (M, Y) induced by the encoder.
    let mut p_my = vec![vec![0.0f64; ny]; pipeline.m_count];
    for x in 0..nx {
        for y in 0..ny {
            let p = source.p_xy(x, y);
            if p > 0.0 {
                p_my[pipeline.encoder[x][y]][y] += p;
            }
        }
    }
    let p_m: Vec<f64> = p_my.iter().map(|row| row.iter().sum()).collect();
    let p_y = source.p_y();

    let h_m = entropy_bits(&p_m);
    let h_y = entropy_bits(p_y);
    let h_my = entropy_bits(&p_my.iter().flatten().copied().collect::<Vec<_>>());
    let h_m_given_y = h_my - h_y;
    let h_y_given_m = h_my - h_m;

    // Unconditional coding of M.
    let m_support: Vec<f64> = p_m.iter().copied().filter(|&p| p > 0.0).collect();
    let r_unconditional = huffman_build(&m_support)?.expected_length_bits(&m_support);

    // Conditional coding: per-y prefix code over the context alphabet.
    let mut r_m = 0.0;
    for y in 0..ny {
        let probs: Vec<f64> = (0..pipeline.m_count)
            .filter(|&m| p_my[m][y] > 0.0)
            .map(|m| p_my[m][y] / p_y[y])
            .collect();
        r_m += p_y[y] * huffman_build(&probs)?.expected_length_bits(&probs);
    }
    let r_y = pipeline.y_code.expected_length_bits(p_y);

    let slack = r_unconditional + 2.0 - (r_m + r_y);
    Ok(OverheadAudit {
        r_unconditional_bits: r_unconditional,
        r_m_bits: r_m,
        r_y_bits: r_y,
        slack_bits: slack,
        h_m_bits: h_m,
        h_m_given_y_bits: h_m_given_y,
        h_y_bits: h_y,
        h_y_given_m_bits: h_y_given_m,
        identity_holds: (h_m_given_y + h_y - h_m).abs() <= 1e-10 && h_y_given_m.abs() <= 1e-10,
        within_budget: slack >= 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{attach_posterior_decoder, design_mse_codec};

    fn parity_source() -> JointSource {
        JointSource::new(
            (0..4).map(|i| i.to_string()).collect(),
            vec!["even".into(), "odd".into()],
            vec![
                vec![0.25, 0.0],
                vec![0.0, 0.25],
                vec![0.25, 0.0],
                vec![0.0, 0.25],
            ],
            Some(vec![0.0, 1.0, 2.0, 3.0]),
        )
        .unwrap()
    }

    #[test]
    fn trivial_side_information_wastes_the_slack() {
        let src = JointSource::from_x_marginal(
            (0..4).map(|i| i.to_string()).collect(),
            vec![0.25; 4],
            Some(vec![0.0, 1.0, 2.0, 3.0]),
        )
        .unwrap();
        let mut pipe = design_mse_codec(&src, 4, true).unwrap();
        attach_posterior_decoder(&mut pipe, &src, 1).unwrap();
        let audit = overhead_audit(&pipe, &src).unwrap();
        assert_eq!(audit.r_y_bits, 0.0);
        assert!((audit.r_m_bits - audit.r_unconditional_bits).abs() < 1e-12);
        assert!((audit.slack_bits - 2.0).abs() < 1e-12);
        assert!(audit.identity_holds && audit.within_budget);
    }

    #[test]
    fn parity_identity_is_exact() {
        // X uniform 4-ary, Y = parity, |M| = 4 identity code:
        // H(Y|M) = 0 and H(M|Y) + H(Y) = H(M) = 2 bits exactly.
        let src = parity_source();
        let mut pipe = design_mse_codec(&src, 2, true).unwrap();
        // Budget 2 per context with 2 support symbols each: identity
        // within contexts, 4 global codes.
        attach_posterior_decoder(&mut pipe, &src, 1).unwrap();
        assert_eq!(pipe.m_count(), 4);
        let audit = overhead_audit(&pipe, &src).unwrap();
        assert!((audit.h_m_bits - 2.0).abs() < 1e-12);
        assert!((audit.h_y_bits - 1.0).abs() < 1e-12);
        assert!((audit.h_m_given_y_bits - 1.0).abs() < 1e-12);
        assert!(audit.h_y_given_m_bits.abs() < 1e-12);
        assert!(audit.identity_holds);
        assert!(audit.within_budget, "slack {}", audit.slack_bits);
    }

    #[test]
    fn stochastic_side_information_is_rejected() {
        let src = JointSource::new(
            vec!["0".into(), "1".into()],
            vec!["u".into(), "v".into()],
            vec![vec![0.25, 0.25], vec![0.25, 0.25]],
            Some(vec![0.0, 1.0]),
        )
        .unwrap();
        let mut pipe = design_mse_codec(&src, 2, true).unwrap();
        attach_posterior_decoder(&mut pipe, &src, 1).unwrap();
        assert!(matches!(overhead_audit(&pipe, &src), Err(CodecError::YNotDeterministic)));
    }

    #[test]
    fn missing_perceptual_decoder_is_rejected() {
        let src = parity_source();
        let pipe = design_mse_codec(&src, 2, true).unwrap();
        assert!(matches!(overhead_audit(&pipe, &src), Err(CodecError::NoPosteriorDecoder)));
    }
}
