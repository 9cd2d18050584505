//! Bit-exact entropy coding: a 32-bit renormalizing arithmetic coder with
//! static frequency models, optimal prefix codes for lossless Y, and the
//! `.bits` golden-file format.

mod ac;
mod golden;
mod huffman;
mod model;

pub use ac::{ac_decode, ac_decode_one, ac_encode, ideal_length_bits, AcDecoder};
pub use golden::{read_golden, write_golden, GoldenRecord, GOLDEN_FORMAT_VERSION};
pub use huffman::{huffman_build, PrefixCode};
pub use model::FrequencyModel;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoderError {
    #[error("symbol {symbol} at position {position} has zero frequency in its model")]
    ZeroCountSymbol { symbol: usize, position: usize },
    #[error("model total {total} exceeds the 16-bit limit {limit}")]
    TotalOverflow { total: u64, limit: u64 },
    #[error("model has no symbols")]
    EmptyModel,
    #[error("count for symbol {symbol} must be at least 1")]
    ZeroCount { symbol: usize },
    #[error("pmf entry for symbol {symbol} is zero or negative; every modeled symbol needs mass")]
    ZeroProbability { symbol: usize },
    #[error("bitstream exhausted: decoder needed bit {needed} but only {available} were emitted")]
    Exhausted { needed: usize, available: usize },
    #[error("{expected} models supplied for {got} positions")]
    ModelCountMismatch { expected: usize, got: usize },
    #[error("golden file: {0}")]
    Golden(String),
}

/// MSB-first bit sequence with exact length, packed big-endian within
/// bytes; the final byte is zero-padded.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Bitstream {
    bytes: Vec<u8>,
    len: usize,
}

impl Bitstream {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_bytes(bytes: Vec<u8>, len: usize) -> Self {
        assert!(len <= bytes.len() * 8, "length exceeds byte storage");
        Self { bytes, len }
    }

    pub fn push(&mut self, bit: bool) {
        let byte = self.len / 8;
        if byte == self.bytes.len() {
            self.bytes.push(0);
        }
        if bit {
            self.bytes[byte] |= 0x80 >> (self.len % 8);
        }
        self.len += 1;
    }

    /// Appends `count` bits of `value`, most significant first.
    pub fn push_bits(&mut self, value: u64, count: u32) {
        for i in (0..count).rev() {
            self.push((value >> i) & 1 == 1);
        }
    }

    pub fn extend(&mut self, other: &Bitstream) {
        for i in 0..other.len {
            self.push(other.bit(i));
        }
    }

    pub fn bit(&self, i: usize) -> bool {
        assert!(i < self.len);
        (self.bytes[i / 8] >> (7 - i % 8)) & 1 == 1
    }

    pub fn len_bits(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn reader(&self) -> BitReader<'_> {
        BitReader { stream: self, pos: 0 }
    }
}

/// Cursor over a [`Bitstream`]. `read_bit` is strict; the arithmetic
/// decoder uses `read_bit_padded`, which tolerates the ≤ 32 phantom zero
/// bits needed to prime and drain its register and errors beyond that.
#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    stream: &'a Bitstream,
    pos: usize,
}

/// Zero-padding window tolerated past the end of a stream: exactly the
/// decoder register width.
pub const PAD_WINDOW_BITS: usize = 32;

impl<'a> BitReader<'a> {
    pub fn read_bit(&mut self) -> Result<bool, CoderError> {
        if self.pos >= self.stream.len_bits() {
            return Err(CoderError::Exhausted {
                needed: self.pos,
                available: self.stream.len_bits(),
            });
        }
        let b = self.stream.bit(self.pos);
        self.pos += 1;
        Ok(b)
    }

    pub fn read_bit_padded(&mut self) -> Result<bool, CoderError> {
        if self.pos < self.stream.len_bits() {
            let b = self.stream.bit(self.pos);
            self.pos += 1;
            return Ok(b);
        }
        if self.pos < self.stream.len_bits() + PAD_WINDOW_BITS {
            self.pos += 1;
            return Ok(false);
        }
        Err(CoderError::Exhausted { needed: self.pos, available: self.stream.len_bits() })
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    /// Bits actually consumed from the stream (phantom padding excluded).
    pub fn consumed(&self) -> usize {
        self.pos.min(self.stream.len_bits())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_roundtrip_and_packing() {
        let mut s = Bitstream::new();
        s.push_bits(0b1011, 4);
        s.push(true);
        assert_eq!(s.len_bits(), 5);
        assert_eq!(s.bytes(), &[0b1011_1000]);
        assert!(s.bit(0) && !s.bit(1) && s.bit(2) && s.bit(3) && s.bit(4));
    }

    #[test]
    fn reader_strict_and_padded() {
        let mut s = Bitstream::new();
        s.push(true);
        let mut r = s.reader();
        assert!(r.read_bit().unwrap());
        assert!(matches!(r.read_bit(), Err(CoderError::Exhausted { .. })));
        let mut rp = s.reader();
        assert!(rp.read_bit_padded().unwrap());
        for _ in 0..PAD_WINDOW_BITS {
            assert!(!rp.read_bit_padded().unwrap());
        }
        assert!(matches!(rp.read_bit_padded(), Err(CoderError::Exhausted { .. })));
        assert_eq!(rp.consumed(), 1);
    }
}
