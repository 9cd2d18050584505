//! Brute-force verification of the common-randomness lower bound for
//! perfect (conditional) perceptual quality, plus the float-quantized
//! Gaussian entropy Monte Carlo.

mod float_entropy;
mod search;

pub use float_entropy::{
    exact_grid_entropy_bits, float_gaussian_entropy, EntropyEstimate, QuantizerSpec,
};
pub use search::{
    min_common_randomness, min_common_randomness_float, verify_lowerbound,
    witness_reproduces_law, LowerboundReport, RandomnessWitness,
};

use crate::info::RationalJoint;
use thiserror::Error;

pub const MAX_DENOMINATOR: u64 = 10_000;
pub const MAX_M: usize = 6;
pub const MAX_X: usize = 6;
pub const MAX_W_BOUND: usize = 24;

#[derive(Debug, Error)]
pub enum RandomnessError {
    #[error("instance outside the enumerable envelope: {0}")]
    TooLarge(String),
    #[error("encoder table shape mismatch: {0}")]
    BadEncoder(String),
    #[error("prefix-code lengths violate Kraft in context {context}: sum 2^-l = {sum}")]
    KraftViolation { context: usize, sum: f64 },
    #[error("no witness decoder found up to |W| = {max_tried}")]
    NotFound { max_tried: usize },
    #[error(transparent)]
    Info(#[from] crate::info::InfoError),
}

/// One enumerable instance: a rational source, a deterministic encoder,
/// and the prefix code that prices its output.
#[derive(Debug, Clone)]
pub struct RandomnessInstance {
    pub source: RationalJoint,
    /// m = encoder[x][y].
    pub encoder: Vec<Vec<usize>>,
    /// Codeword lengths per context: one row when the code ignores y,
    /// one row per y otherwise.
    pub code_lengths: Vec<Vec<u32>>,
    /// Demand per-y marginal matching (perfect conditional perception)
    /// instead of overall marginal matching.
    pub conditional: bool,
    /// Search bound on |W| (≤ 24).
    pub max_w: usize,
}

impl RandomnessInstance {
    pub fn validate(&self) -> Result<(), RandomnessError> {
        let (nx, ny) = (self.source.num_x(), self.source.num_y());
        if self.source.denominator() > MAX_DENOMINATOR {
            return Err(RandomnessError::TooLarge(format!(
                "denominator {} exceeds {MAX_DENOMINATOR}",
                self.source.denominator()
            )));
        }
        if nx > MAX_X {
            return Err(RandomnessError::TooLarge(format!("|X| = {nx} exceeds {MAX_X}")));
        }
        if self.max_w == 0 || self.max_w > MAX_W_BOUND {
            return Err(RandomnessError::TooLarge(format!(
                "|W| bound {} outside 1..={MAX_W_BOUND}",
                self.max_w
            )));
        }
        if self.encoder.len() != nx || self.encoder.iter().any(|r| r.len() != ny) {
            return Err(RandomnessError::BadEncoder(format!(
                "encoder must be {nx}x{ny}"
            )));
        }
        let m_count = self.m_count();
        if m_count > MAX_M {
            return Err(RandomnessError::TooLarge(format!("|M| = {m_count} exceeds {MAX_M}")));
        }
        let contexts = self.code_lengths.len();
        if contexts != 1 && contexts != ny {
            return Err(RandomnessError::BadEncoder(format!(
                "{contexts} code contexts for {ny} side-information symbols"
            )));
        }
        for (ctx, lengths) in self.code_lengths.iter().enumerate() {
            if lengths.len() != m_count {
                return Err(RandomnessError::BadEncoder(format!(
                    "context {ctx} prices {} codes, encoder uses {m_count}",
                    lengths.len()
                )));
            }
            let sum: f64 = lengths.iter().map(|&l| 2f64.powi(-(l as i32))).sum();
            if sum > 1.0 + 1e-12 {
                return Err(RandomnessError::KraftViolation { context: ctx, sum });
            }
        }
        Ok(())
    }

    pub fn m_count(&self) -> usize {
        self.encoder.iter().flatten().copied().max().map_or(0, |m| m + 1)
    }

    /// R⁰ = E[ℓ(M)] in bits.
    pub fn expected_code_length_bits(&self) -> f64 {
        let den = self.source.denominator() as f64;
        let mut total = 0.0;
        for x in 0..self.source.num_x() {
            for y in 0..self.source.num_y() {
                let p = self.source.num(x, y) as f64 / den;
                if p > 0.0 {
                    let ctx = if self.code_lengths.len() == 1 { 0 } else { y };
                    total += p * self.code_lengths[ctx][self.encoder[x][y]] as f64;
                }
            }
        }
        total
    }
}
