//! 32-bit renormalizing arithmetic coder with carry handling via pending
//! (underflow) bits and a two-bit interval disambiguation at termination.
//!
//! The emitted stream is uniquely decodable given the same per-position
//! models; length never exceeds the ideal codelength by more than 2 bits
//! plus a ~2^-14-per-symbol range-quantization term.

use super::{BitReader, Bitstream, CoderError, FrequencyModel};

const HALF: u32 = 0x8000_0000;
const QTR: u32 = 0x4000_0000;
const THREE_QTR: u32 = 0xC000_0000;

struct Encoder {
    low: u32,
    high: u32,
    pending: u64,
    out: Bitstream,
}

impl Encoder {
    fn new() -> Self {
        Self { low: 0, high: u32::MAX, pending: 0, out: Bitstream::new() }
    }

    fn emit(&mut self, bit: bool) {
        self.out.push(bit);
        for _ in 0..self.pending {
            self.out.push(!bit);
        }
        self.pending = 0;
    }

    fn encode_symbol(&mut self, model: &FrequencyModel, symbol: usize) {
        let (cum_lo, cum_hi) = model.range(symbol);
        let total = model.total() as u64;
        let range = (self.high - self.low) as u64 + 1;
        self.high = self.low + ((range * cum_hi as u64) / total - 1) as u32;
        self.low += ((range * cum_lo as u64) / total) as u32;
        loop {
            if self.high < HALF {
                self.emit(false);
            } else if self.low >= HALF {
                self.emit(true);
                self.low -= HALF;
                self.high -= HALF;
            } else if self.low >= QTR && self.high < THREE_QTR {
                self.pending += 1;
                self.low -= QTR;
                self.high -= QTR;
            } else {
                break;
            }
            self.low <<= 1;
            self.high = (self.high << 1) | 1;
        }
    }

    fn finish(mut self) -> Bitstream {
        self.pending += 1;
        let bit = self.low >= QTR;
        self.emit(bit);
        self.out
    }
}

/// Encodes `symbols[i]` under `models[i]`. A symbol outside its model's
/// alphabet is a zero-frequency symbol and is rejected.
pub fn ac_encode(symbols: &[usize], models: &[&FrequencyModel]) -> Result<Bitstream, CoderError> {
    if symbols.len() != models.len() {
        return Err(CoderError::ModelCountMismatch { expected: symbols.len(), got: models.len() });
    }
    let mut enc = Encoder::new();
    for (pos, (&s, m)) in symbols.iter().zip(models).enumerate() {
        if s >= m.num_symbols() {
            return Err(CoderError::ZeroCountSymbol { symbol: s, position: pos });
        }
        enc.encode_symbol(m, s);
    }
    Ok(enc.finish())
}

/// Streaming decoder; models must be presented in encoding order.
pub struct AcDecoder<'a> {
    reader: BitReader<'a>,
    low: u32,
    high: u32,
    value: u32,
}

impl<'a> AcDecoder<'a> {
    pub fn new(stream: &'a Bitstream) -> Result<Self, CoderError> {
        let mut reader = stream.reader();
        let mut value = 0u32;
        for _ in 0..32 {
            value = (value << 1) | reader.read_bit_padded()? as u32;
        }
        Ok(Self { reader, low: 0, high: u32::MAX, value })
    }

    pub fn decode_symbol(&mut self, model: &FrequencyModel) -> Result<usize, CoderError> {
        let total = model.total() as u64;
        let range = (self.high - self.low) as u64 + 1;
        let scaled = (((self.value - self.low) as u64 + 1) * total - 1) / range;
        let symbol = model.locate(scaled as u32);
        let (cum_lo, cum_hi) = model.range(symbol);
        self.high = self.low + ((range * cum_hi as u64) / total - 1) as u32;
        self.low += ((range * cum_lo as u64) / total) as u32;
        loop {
            if self.high < HALF {
                // nothing
            } else if self.low >= HALF {
                self.low -= HALF;
                self.high -= HALF;
                self.value -= HALF;
            } else if self.low >= QTR && self.high < THREE_QTR {
                self.low -= QTR;
                self.high -= QTR;
                self.value -= QTR;
            } else {
                break;
            }
            self.low <<= 1;
            self.high = (self.high << 1) | 1;
            self.value = (self.value << 1) | self.reader.read_bit_padded()? as u32;
        }
        Ok(symbol)
    }

    pub fn consumed_bits(&self) -> usize {
        self.reader.consumed()
    }
}

/// Exact round-trip inverse of [`ac_encode`]: decodes `models.len()`
/// symbols under the same per-position models.
pub fn ac_decode(stream: &Bitstream, models: &[&FrequencyModel]) -> Result<Vec<usize>, CoderError> {
    let mut dec = AcDecoder::new(stream)?;
    models.iter().map(|m| dec.decode_symbol(m)).collect()
}

/// Decodes a single symbol (convenience for one-symbol streams).
pub fn ac_decode_one(stream: &Bitstream, model: &FrequencyModel) -> Result<usize, CoderError> {
    Ok(ac_decode(stream, &[model])?[0])
}

/// Σ −log2 p̂(symbol) under the per-position models.
pub fn ideal_length_bits(symbols: &[usize], models: &[&FrequencyModel]) -> f64 {
    symbols
        .iter()
        .zip(models)
        .map(|(&s, m)| m.ideal_bits(s))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    fn roundtrip(symbols: &[usize], model: &FrequencyModel) -> Bitstream {
        let models: Vec<&FrequencyModel> = symbols.iter().map(|_| model).collect();
        let stream = ac_encode(symbols, &models).unwrap();
        let decoded = ac_decode(&stream, &models).unwrap();
        assert_eq!(decoded, symbols);
        stream
    }

    #[test]
    fn empty_sequence_terminates_in_two_bits() {
        let stream = ac_encode(&[], &[]).unwrap();
        assert!(stream.len_bits() <= 2);
        assert_eq!(ac_decode(&stream, &[]).unwrap(), Vec::<usize>::new());
    }

    #[test]
    fn single_uniform_256_symbol_costs_about_eight_bits() {
        let model = FrequencyModel::from_counts(&vec![1u32; 256]).unwrap();
        let stream = roundtrip(&[97], &model);
        let len = stream.len_bits() as f64;
        assert!((len - 8.0).abs() <= 2.0, "len {len}");
    }

    #[test]
    fn thousand_bernoulli_symbols_near_entropy() {
        // Expected-codelength oracle: Σ −log2 p̂ for the drawn sequence,
        // which is near 1000·h(0.1) ≈ 469 bits.
        let model = FrequencyModel::from_pmf(&[0.9, 0.1], 1 << 16).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let symbols: Vec<usize> = (0..1000)
            .map(|_| usize::from(rng.random::<f64>() < 0.1))
            .collect();
        let models: Vec<&FrequencyModel> = symbols.iter().map(|_| &model).collect();
        let stream = roundtrip(&symbols, &model);
        let ideal = ideal_length_bits(&symbols, &models);
        let len = stream.len_bits() as f64;
        assert!(len <= ideal + 2.0, "len {len} vs ideal {ideal}");
        assert!(len >= ideal - 1.0, "suspiciously short: {len} vs {ideal}");
        assert!((len - 469.0).abs() < 25.0, "len {len} far from 1000 h(0.1)");
    }

    #[test]
    fn zero_count_symbol_is_rejected() {
        let model = FrequencyModel::from_counts(&[1, 1]).unwrap();
        let err = ac_encode(&[2], &[&model]).unwrap_err();
        assert!(matches!(err, CoderError::ZeroCountSymbol { symbol: 2, position: 0 }));
    }

    #[test]
    fn truncated_stream_raises_exhaustion() {
        let model = FrequencyModel::from_pmf(&[0.5, 0.5], 1 << 12).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let symbols: Vec<usize> = (0..400).map(|_| rng.random_range(0..2)).collect();
        let models: Vec<&FrequencyModel> = symbols.iter().map(|_| &model).collect();
        let stream = ac_encode(&symbols, &models).unwrap();
        let keep = stream.len_bits() / 2;
        let truncated = Bitstream::from_bytes(stream.bytes().to_vec(), keep);
        let err = ac_decode(&truncated, &models).unwrap_err();
        assert!(matches!(err, CoderError::Exhausted { .. }));
    }

    #[test]
    fn per_position_contexts_roundtrip() {
        let m0 = FrequencyModel::from_counts(&[3, 1]).unwrap();
        let m1 = FrequencyModel::from_counts(&[1, 1, 6]).unwrap();
        let symbols = vec![0usize, 2, 1, 2, 0, 1];
        let models: Vec<&FrequencyModel> = symbols
            .iter()
            .enumerate()
            .map(|(i, _)| if i % 2 == 0 { &m0 } else { &m1 })
            .collect();
        let stream = ac_encode(&symbols, &models).unwrap();
        assert_eq!(ac_decode(&stream, &models).unwrap(), symbols);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]

        /// Round-trip identity and the per-message length bound on random
        /// models and sequences.
        #[test]
        fn roundtrip_identity_and_length_bound(
            seed in 0u64..1_000_000,
            n_symbols in 1usize..48,
            len in 0usize..300,
        ) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let counts: Vec<u32> = (0..n_symbols).map(|_| rng.random_range(1..1000)).collect();
            let model = FrequencyModel::from_counts(&counts).unwrap();
            let symbols: Vec<usize> = (0..len).map(|_| {
                // draw from the model law itself
                let t = rng.random_range(0..model.total());
                model.locate(t)
            }).collect();
            let models: Vec<&FrequencyModel> = symbols.iter().map(|_| &model).collect();
            let stream = ac_encode(&symbols, &models).unwrap();
            let decoded = ac_decode(&stream, &models).unwrap();
            proptest::prop_assert_eq!(decoded, symbols.clone());
            let ideal = ideal_length_bits(&symbols, &models);
            proptest::prop_assert!((stream.len_bits() as f64) <= ideal + 2.0 + 1e-4 * len as f64);
        }
    }
}
