//! One-shot channel simulation with shared randomness: an exponential
//! race over a shared candidate sequence selects a sample exactly
//! distributed as the target row, and the winning index is sent with a
//! universal integer code.

mod elias;
mod pfr;
mod sim;

pub use elias::{decode_delta, delta_length_bits, encode_delta};
pub use pfr::{pfr_select, reproduce_sample, PfrSelection};
pub use sim::{simulate_oneshot, OneshotReport, TrialRecord};

use crate::entropy::Bitstream;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

/// Candidate budget per selection; the theoretical race is unbounded.
pub const CANDIDATE_CAP: u64 = 10_000_000;

#[derive(Debug, Error)]
pub enum OneshotError {
    #[error("candidate cap {cap} exceeded; worst target/reference density ratio is {max_density_ratio}")]
    CandidateCapExceeded { cap: u64, max_density_ratio: f64 },
    #[error("target places mass {p} on symbol {index} where the reference has none")]
    NotAbsolutelyContinuous { index: usize, p: f64 },
    #[error("distribution is empty or unnormalized")]
    BadDistribution,
    #[error(transparent)]
    Info(#[from] crate::info::InfoError),
    #[error(transparent)]
    Coder(#[from] crate::entropy::CoderError),
}

/// Seeded factory for the encoder/decoder-shared randomness: the same
/// seed reproduces bit-identical candidate sequences on both sides, and
/// distinct trials get disjoint substreams.
#[derive(Debug, Clone, Copy)]
pub struct SharedRandomnessStream {
    seed: u64,
}

impl SharedRandomnessStream {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Substream shared by encoder and decoder for one trial's candidate
    /// race.
    pub fn candidate_rng(&self, trial: u64) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(2 * trial + 1);
        rng
    }

    /// Encoder-private substream that draws the trial's source pair.
    pub fn source_rng(&self, trial: u64) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(2 * trial);
        rng
    }
}

/// Uniform in (0, 1], suitable for `-ln(u)` exponentials.
pub(crate) fn unit_open(rng: &mut ChaCha12Rng) -> f64 {
    use rand_chacha::rand_core::RngCore;
    ((rng.next_u64() >> 11) as f64 + 1.0) / (1u64 << 53) as f64
}

/// Inverse-CDF draw from a pmf; deterministic given the rng state.
pub(crate) fn sample_pmf(pmf: &[f64], rng: &mut ChaCha12Rng) -> usize {
    let u = unit_open(rng);
    let mut acc = 0.0;
    for (i, &p) in pmf.iter().enumerate() {
        acc += p;
        if u <= acc {
            return i;
        }
    }
    pmf.len() - 1
}

/// Prefix-free integer code for the winning index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexCode {
    pub index: u64,
    pub codeword: Bitstream,
}

impl IndexCode {
    pub fn for_index(index: u64) -> Self {
        let mut codeword = Bitstream::new();
        encode_delta(index, &mut codeword);
        Self { index, codeword }
    }

    pub fn length_bits(&self) -> usize {
        self.codeword.len_bits()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substreams_are_reproducible_and_disjoint() {
        use rand_chacha::rand_core::RngCore;
        let s = SharedRandomnessStream::new(99);
        let a: Vec<u64> = {
            let mut r = s.candidate_rng(3);
            (0..8).map(|_| r.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut r = s.candidate_rng(3);
            (0..8).map(|_| r.next_u64()).collect()
        };
        assert_eq!(a, b);
        let c: Vec<u64> = {
            let mut r = s.candidate_rng(4);
            (0..8).map(|_| r.next_u64()).collect()
        };
        assert_ne!(a, c);
        let d: Vec<u64> = {
            let mut r = s.source_rng(3);
            (0..8).map(|_| r.next_u64()).collect()
        };
        assert_ne!(a, d);
    }

    #[test]
    fn index_code_matches_delta_length() {
        for k in [1u64, 2, 3, 4, 16, 17, 1000, 65_535] {
            let code = IndexCode::for_index(k);
            assert_eq!(code.length_bits() as u64, delta_length_bits(k));
        }
    }
}
