//! Optimal prefix codes for the lossless side-information channel.

use super::{BitReader, Bitstream, CoderError};
use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// Canonical prefix code: lengths from a Huffman tree, codewords assigned
/// in (length, symbol) order so equal inputs always produce identical
/// tables. A single-symbol alphabet gets a zero-length code — there is
/// nothing to transmit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixCode {
    lengths: Vec<u32>,
    codes: Vec<u64>,
}

/// Builds the optimal prefix code for a strictly positive pmf.
pub fn huffman_build(pmf: &[f64]) -> Result<PrefixCode, CoderError> {
    if pmf.is_empty() {
        return Err(CoderError::EmptyModel);
    }
    for (s, &p) in pmf.iter().enumerate() {
        if !(p > 0.0) {
            return Err(CoderError::ZeroProbability { symbol: s });
        }
    }
    let n = pmf.len();
    if n == 1 {
        return Ok(PrefixCode { lengths: vec![0], codes: vec![0] });
    }

    // Heap of (weight, tiebreak id, node). Ordering on the f64 bits via
    // total_cmp through a wrapper keeps ties deterministic.
    #[derive(PartialEq)]
    struct W(f64);
    impl Eq for W {}
    impl PartialOrd for W {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for W {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            self.0.total_cmp(&other.0)
        }
    }

    enum Node {
        Leaf(usize),
        Internal(Box<Node>, Box<Node>),
    }

    let mut heap: BinaryHeap<Reverse<(W, usize, Node)>> = BinaryHeap::new();
    impl PartialEq for Node {
        fn eq(&self, _: &Self) -> bool {
            false
        }
    }
    impl Eq for Node {}
    impl PartialOrd for Node {
        fn partial_cmp(&self, _: &Self) -> Option<std::cmp::Ordering> {
            Some(std::cmp::Ordering::Equal)
        }
    }
    impl Ord for Node {
        fn cmp(&self, _: &Self) -> std::cmp::Ordering {
            std::cmp::Ordering::Equal
        }
    }

    let mut next_id = n;
    for (s, &p) in pmf.iter().enumerate() {
        heap.push(Reverse((W(p), s, Node::Leaf(s))));
    }
    while heap.len() > 1 {
        let Reverse((wa, _, a)) = heap.pop().unwrap();
        let Reverse((wb, _, b)) = heap.pop().unwrap();
        heap.push(Reverse((W(wa.0 + wb.0), next_id, Node::Internal(Box::new(a), Box::new(b)))));
        next_id += 1;
    }
    let Reverse((_, _, root)) = heap.pop().unwrap();

    let mut lengths = vec![0u32; n];
    fn walk(node: &Node, depth: u32, lengths: &mut [u32]) {
        match node {
            Node::Leaf(s) => lengths[*s] = depth,
            Node::Internal(a, b) => {
                walk(a, depth + 1, lengths);
                walk(b, depth + 1, lengths);
            }
        }
    }
    walk(&root, 0, &mut lengths);

    Ok(PrefixCode::from_lengths(lengths))
}

impl PrefixCode {
    /// Canonical code assignment from lengths.
    pub fn from_lengths(lengths: Vec<u32>) -> Self {
        let mut order: Vec<usize> = (0..lengths.len()).collect();
        order.sort_by_key(|&s| (lengths[s], s));
        let mut codes = vec![0u64; lengths.len()];
        let mut code: u64 = 0;
        let mut prev_len = 0u32;
        for &s in &order {
            code <<= lengths[s] - prev_len;
            codes[s] = code;
            prev_len = lengths[s];
            code += 1;
        }
        Self { lengths, codes }
    }

    pub fn num_symbols(&self) -> usize {
        self.lengths.len()
    }

    pub fn length(&self, symbol: usize) -> u32 {
        self.lengths[symbol]
    }

    pub fn lengths(&self) -> &[u32] {
        &self.lengths
    }

    pub fn expected_length_bits(&self, pmf: &[f64]) -> f64 {
        pmf.iter()
            .zip(&self.lengths)
            .map(|(&p, &l)| p * l as f64)
            .sum()
    }

    pub fn kraft_sum(&self) -> f64 {
        if self.lengths.len() == 1 {
            // The empty codeword alone fills the code space.
            return 1.0;
        }
        self.lengths.iter().map(|&l| 2f64.powi(-(l as i32))).sum()
    }

    pub fn encode_into(&self, symbol: usize, out: &mut Bitstream) {
        out.push_bits(self.codes[symbol], self.lengths[symbol]);
    }

    pub fn decode(&self, reader: &mut BitReader<'_>) -> Result<usize, CoderError> {
        if self.lengths.len() == 1 {
            return Ok(0);
        }
        let mut code: u64 = 0;
        let mut len: u32 = 0;
        loop {
            code = (code << 1) | reader.read_bit()? as u64;
            len += 1;
            for s in 0..self.lengths.len() {
                if self.lengths[s] == len && self.codes[s] == code {
                    return Ok(s);
                }
            }
            if len > 64 {
                return Err(CoderError::Golden("prefix code desynchronized".into()));
            }
        }
    }
}
