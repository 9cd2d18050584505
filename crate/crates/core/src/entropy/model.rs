//! Static frequency models with 16-bit totals.

use super::CoderError;

pub const MAX_TOTAL: u64 = 1 << 16;

/// Cumulative counts per symbol. Every modeled symbol has count ≥ 1 and
/// the cumulative array is strictly increasing; totals stay within 2^16
/// so the 32-bit coder never loses a symbol interval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyModel {
    /// `cum[s]..cum[s+1]` is symbol s's slice; `cum[n]` is the total.
    cum: Vec<u32>,
}

impl FrequencyModel {
    pub fn from_counts(counts: &[u32]) -> Result<Self, CoderError> {
        if counts.is_empty() {
            return Err(CoderError::EmptyModel);
        }
        let mut cum = Vec::with_capacity(counts.len() + 1);
        cum.push(0u32);
        let mut total: u64 = 0;
        for (s, &c) in counts.iter().enumerate() {
            if c == 0 {
                return Err(CoderError::ZeroCount { symbol: s });
            }
            total += c as u64;
            if total > MAX_TOTAL {
                return Err(CoderError::TotalOverflow { total, limit: MAX_TOTAL });
            }
            cum.push(total as u32);
        }
        Ok(Self { cum })
    }

    /// Exact pmf scaled to `total` counts by largest-remainder rounding,
    /// with every symbol guaranteed at least one count. The pmf must be
    /// strictly positive: a zero-frequency symbol could never be encoded.
    pub fn from_pmf(pmf: &[f64], total: u32) -> Result<Self, CoderError> {
        if pmf.is_empty() {
            return Err(CoderError::EmptyModel);
        }
        if (total as u64) > MAX_TOTAL {
            return Err(CoderError::TotalOverflow { total: total as u64, limit: MAX_TOTAL });
        }
        let n = pmf.len() as u32;
        assert!(total >= n, "total {total} cannot give {n} symbols a count each");
        for (s, &p) in pmf.iter().enumerate() {
            if !(p > 0.0) {
                return Err(CoderError::ZeroProbability { symbol: s });
            }
        }
        let sum: f64 = pmf.iter().sum();
        let scaled: Vec<f64> = pmf.iter().map(|&p| p / sum * total as f64).collect();
        let mut counts: Vec<u32> = scaled.iter().map(|&v| (v.floor() as u32).max(1)).collect();
        let mut assigned: i64 = counts.iter().map(|&c| c as i64).sum();
        // Distribute the remainder by largest fractional part, stealing
        // from the largest counts if the minimum-one rule overshot.
        let mut order: Vec<usize> = (0..pmf.len()).collect();
        order.sort_by(|&a, &b| {
            let fa = scaled[a] - scaled[a].floor();
            let fb = scaled[b] - scaled[b].floor();
            fb.total_cmp(&fa).then(a.cmp(&b))
        });
        let mut k = 0;
        while assigned < total as i64 {
            counts[order[k % order.len()]] += 1;
            assigned += 1;
            k += 1;
        }
        while assigned > total as i64 {
            let big = (0..counts.len())
                .max_by(|&a, &b| counts[a].cmp(&counts[b]).then(b.cmp(&a)))
                .unwrap();
            assert!(counts[big] > 1, "cannot shrink below one count per symbol");
            counts[big] -= 1;
            assigned -= 1;
        }
        Self::from_counts(&counts)
    }

    pub fn num_symbols(&self) -> usize {
        self.cum.len() - 1
    }

    pub fn total(&self) -> u32 {
        *self.cum.last().unwrap()
    }

    pub fn count(&self, symbol: usize) -> u32 {
        self.cum[symbol + 1] - self.cum[symbol]
    }

    pub fn range(&self, symbol: usize) -> (u32, u32) {
        (self.cum[symbol], self.cum[symbol + 1])
    }

    /// Symbol whose cumulative slice contains `scaled` ∈ [0, total).
    pub fn locate(&self, scaled: u32) -> usize {
        debug_assert!(scaled < self.total());
        // cum is strictly increasing; binary search for the slice.
        match self.cum.binary_search(&scaled) {
            Ok(i) => i,
            Err(i) => i - 1,
        }
    }

    /// −log2(count/total): the model's ideal codelength for a symbol.
    pub fn ideal_bits(&self, symbol: usize) -> f64 {
        -((self.count(symbol) as f64 / self.total() as f64).log2())
    }

    pub fn counts(&self) -> Vec<u32> {
        (0..self.num_symbols()).map(|s| self.count(s)).collect()
    }
}
