//! Per-instance encoding and decoding through the pipeline: Y through
//! its prefix code, M through the arithmetic coder under the y context,
//! then both reconstructions (and their interpolation) from the same
//! decoded code.

use super::{CodecError, CodecPipeline};
use crate::entropy::{ac_decode_one, ac_encode, Bitstream};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

#[derive(Debug, Clone)]
pub struct EncodedInstance {
    pub y_bits: Bitstream,
    pub m_bits: Bitstream,
    pub m: usize,
}

#[derive(Debug, Clone)]
pub struct DecodedInstance {
    pub y: usize,
    pub m: usize,
    /// Posterior-mean reconstruction.
    pub x_hat: f64,
    /// Sampled reconstruction (symbol index and embedded value).
    pub x_tilde_index: usize,
    pub x_tilde: f64,
    /// (1 − α) x̂ + α x̃.
    pub x_alpha: f64,
    pub r_y_bits: usize,
    pub r_m_bits: usize,
}

/// Full per-instance record: inputs, code, reconstructions and the
/// actual emitted stream lengths.
#[derive(Debug, Clone)]
pub struct ReconstructionRecord {
    pub x: usize,
    pub y: usize,
    pub m: usize,
    pub x_hat: f64,
    pub x_tilde: f64,
    pub x_alpha: f64,
    pub r_y_bits: usize,
    pub r_m_bits: usize,
}

pub fn encode_instance(
    pipeline: &CodecPipeline,
    x: usize,
    y: usize,
) -> Result<EncodedInstance, CodecError> {
    if x >= pipeline.encoder.len() || y >= pipeline.y_labels.len() {
        return Err(CodecError::Mismatch(format!("symbol ({x}, {y}) outside the pipeline")));
    }
    let mut y_bits = Bitstream::new();
    pipeline.y_code.encode_into(y, &mut y_bits);
    let m = pipeline.encoder[x][y];
    let (symbols, _, model) = pipeline.context(y);
    let sym = symbols
        .iter()
        .position(|&s| s == m)
        .ok_or_else(|| CodecError::Mismatch(format!("m={m} unmodeled in context y={y}")))?;
    let m_bits = ac_encode(&[sym], &[model])?;
    Ok(EncodedInstance { y_bits, m_bits, m })
}

/// Decoder order: Y from its prefix stream, then M under the y context,
/// then both reconstructions from the single decoded code.
pub fn decode_instance(
    pipeline: &CodecPipeline,
    y_bits: &Bitstream,
    m_bits: &Bitstream,
    alpha: f64,
    sample_seed: u64,
) -> Result<DecodedInstance, CodecError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(CodecError::BadAlpha(alpha));
    }
    let g2 = pipeline.g2.as_ref().ok_or(CodecError::NoPosteriorDecoder)?;
    let mut reader = y_bits.reader();
    let y = pipeline.y_code.decode(&mut reader)?;
    let (symbols, _, model) = pipeline.context(y);
    let sym = ac_decode_one(m_bits, model)?;
    let m = symbols[sym];
    let x_hat = pipeline.g1[m][y];
    let row = &g2.rows[m][y];
    if row.is_empty() {
        return Err(CodecError::Mismatch(format!("posterior row missing for (m={m}, y={y})")));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(g2.seed ^ sample_seed.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let x_tilde_index = sample_row(row, &mut rng);
    let x_tilde = pipeline.x_values[x_tilde_index];
    let x_alpha = (1.0 - alpha) * x_hat + alpha * x_tilde;
    Ok(DecodedInstance {
        y,
        m,
        x_hat,
        x_tilde_index,
        x_tilde,
        x_alpha,
        r_y_bits: y_bits.len_bits(),
        r_m_bits: m_bits.len_bits(),
    })
}

pub(crate) fn sample_row(row: &[f64], rng: &mut ChaCha12Rng) -> usize {
    use rand_chacha::rand_core::RngCore;
    let u = ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
    let mut acc = 0.0;
    for (i, &p) in row.iter().enumerate() {
        acc += p;
        if u <= acc {
            return i;
        }
    }
    row.len() - 1
}

/// Encode, decode and assemble the full record for one (x, y) draw.
pub fn roundtrip_instance(
    pipeline: &CodecPipeline,
    x: usize,
    y: usize,
    alpha: f64,
    sample_seed: u64,
) -> Result<ReconstructionRecord, CodecError> {
    let enc = encode_instance(pipeline, x, y)?;
    let dec = decode_instance(pipeline, &enc.y_bits, &enc.m_bits, alpha, sample_seed)?;
    debug_assert_eq!(dec.y, y);
    debug_assert_eq!(dec.m, enc.m);
    Ok(ReconstructionRecord {
        x,
        y,
        m: dec.m,
        x_hat: dec.x_hat,
        x_tilde: dec.x_tilde,
        x_alpha: dec.x_alpha,
        r_y_bits: dec.r_y_bits,
        r_m_bits: dec.r_m_bits,
    })
}
