//! Elias-delta universal integer code (k ≥ 1, prefix-free).
//!
//! Codeword length is ⌊log₂k⌋ + 2⌊log₂(⌊log₂k⌋ + 1)⌋ + 1 bits: the
//! mantissa of k minus its leading one, headed by the gamma code of its
//! bit count.

use crate::entropy::{BitReader, Bitstream, CoderError};

pub fn encode_delta(k: u64, out: &mut Bitstream) {
    assert!(k >= 1, "delta codes start at 1");
    let n = 64 - k.leading_zeros(); // bit count of k
    let ln = 32 - n.leading_zeros(); // bit count of n
    for _ in 0..ln - 1 {
        out.push(false);
    }
    out.push_bits(n as u64, ln);
    if n > 1 {
        out.push_bits(k & ((1 << (n - 1)) - 1), n - 1);
    }
}

pub fn decode_delta(reader: &mut BitReader<'_>) -> Result<u64, CoderError> {
    let mut zeros = 0u32;
    while !reader.read_bit()? {
        zeros += 1;
        if zeros > 63 {
            return Err(CoderError::Golden("delta code desynchronized".into()));
        }
    }
    let mut n: u64 = 1;
    for _ in 0..zeros {
        n = (n << 1) | reader.read_bit()? as u64;
    }
    let mut k: u64 = 1;
    for _ in 0..n - 1 {
        k = (k << 1) | reader.read_bit()? as u64;
    }
    Ok(k)
}

/// ⌊log₂k⌋ + 2⌊log₂(⌊log₂k⌋+1)⌋ + 1.
pub fn delta_length_bits(k: u64) -> u64 {
    assert!(k >= 1);
    let floor_log = 63 - k.leading_zeros() as u64;
    let inner = floor_log + 1;
    let floor_log_inner = 63 - (inner as u64).leading_zeros() as u64;
    floor_log + 2 * floor_log_inner + 1
}
