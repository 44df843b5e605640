//! Canonical Huffman coding over the quantizer's bin alphabet.
//!
//! Codebooks are canonical: codeword bit patterns are fully determined by
//! the per-symbol lengths, so a bitstream header only needs to carry the
//! lengths. Tie-breaking during tree construction is deterministic (merge
//! the two lowest-weight nodes, ties broken by smallest contained symbol
//! index), and zero-probability symbols still receive codewords so any
//! decodable stream stays representable.

use std::collections::BinaryHeap;
use std::cmp::Reverse;

use crate::error::Error;
use crate::rate::SymbolDistribution;
use crate::Result;

/// Probabilities are quantized to integer weights on this scale for exact,
/// platform-independent tree construction; zero probabilities become
/// weight 1 ("as if probability epsilon").
const WEIGHT_SCALE: f64 = (1u64 << 48) as f64;

/// A canonical prefix code: per-symbol lengths plus MSB-first bit patterns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HuffmanCode {
    lengths: Vec<u8>,
    codes: Vec<u32>,
}

impl HuffmanCode {
    /// Build an optimal prefix code for `dist`.
    pub fn build(dist: &SymbolDistribution) -> Result<Self> {
        if dist.probs.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        if !dist.probs.iter().any(|&p| p > 0.0) {
            return Err(Error::EmptyAlphabet);
        }
        if dist.probs.len() == 1 {
            return Self::from_lengths(&[1]);
        }

        // (weight, smallest contained symbol) keyed min-heap.
        #[derive(PartialEq, Eq, PartialOrd, Ord)]
        struct Node {
            weight: u64,
            min_symbol: usize,
            id: usize,
        }
        let n = dist.probs.len();
        let mut children: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut heap: BinaryHeap<Reverse<Node>> = dist
            .probs
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                Reverse(Node { weight: ((p * WEIGHT_SCALE).round() as u64).max(1), min_symbol: i, id: i })
            })
            .collect();
        while heap.len() > 1 {
            let a = heap.pop().unwrap().0;
            let b = heap.pop().unwrap().0;
            let id = children.len();
            children.push(Some((a.id, b.id)));
            heap.push(Reverse(Node {
                weight: a.weight + b.weight,
                min_symbol: a.min_symbol.min(b.min_symbol),
                id,
            }));
        }
        let root = heap.pop().unwrap().0.id;

        let mut lengths = vec![0u8; n];
        let mut stack = vec![(root, 0usize)];
        while let Some((id, depth)) = stack.pop() {
            match children[id] {
                Some((l, r)) => {
                    stack.push((l, depth + 1));
                    stack.push((r, depth + 1));
                }
                None => {
                    if depth > 255 {
                        return Err(Error::CodeTooLong { length: depth });
                    }
                    lengths[id] = depth.max(1) as u8;
                }
            }
        }
        Self::from_lengths(&lengths)
    }

    /// Reconstruct the canonical code from per-symbol lengths alone, as a
    /// decoder does from a stream header.
    pub fn from_lengths(lengths: &[u8]) -> Result<Self> {
        if lengths.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        let max_len = *lengths.iter().max().unwrap() as usize;
        if max_len == 0 {
            return Err(Error::EmptyAlphabet);
        }
        if max_len > 32 {
            // Codewords are carried in u32; realistic bin distributions
            // never get near this depth.
            return Err(Error::CodeTooLong { length: max_len });
        }
        // Kraft check: a decodable header must describe a prefix code.
        let kraft: f64 = lengths.iter().filter(|&&l| l > 0).map(|&l| 2f64.powi(-(l as i32))).sum();
        if kraft > 1.0 + 1e-9 {
            return Err(Error::BadStream {
                field: "code_lengths",
                detail: format!("Kraft sum {kraft} exceeds 1"),
            });
        }

        // Canonical assignment: symbols ordered by (length, index).
        let mut order: Vec<usize> = (0..lengths.len()).collect();
        order.sort_by_key(|&i| (lengths[i], i));
        let mut codes = vec![0u32; lengths.len()];
        let mut code = 0u32;
        let mut prev_len = 0u8;
        for &i in &order {
            let len = lengths[i];
            if len == 0 {
                continue;
            }
            code <<= (len - prev_len) as u32;
            codes[i] = code;
            code += 1;
            prev_len = len;
        }
        Ok(Self { lengths: lengths.to_vec(), codes })
    }

    pub fn lengths(&self) -> &[u8] {
        &self.lengths
    }

    pub fn alphabet_size(&self) -> usize {
        self.lengths.len()
    }

    /// Expected codeword length in bits/symbol under `probs`.
    pub fn average_length(&self, probs: &[f64]) -> f64 {
        self.lengths.iter().zip(probs).map(|(&l, &p)| l as f64 * p).sum()
    }

    /// Kraft sum over assigned codewords.
    pub fn kraft_sum(&self) -> f64 {
        self.lengths.iter().filter(|&&l| l > 0).map(|&l| 2f64.powi(-(l as i32))).sum()
    }

    /// Encode dense symbol offsets into an MSB-first bit vector; returns
    /// the packed bytes and the exact payload bit count.
    pub fn encode(&self, symbols: &[usize]) -> Result<(Vec<u8>, u64)> {
        let mut w = BitWriter::new();
        for (pos, &s) in symbols.iter().enumerate() {
            if s >= self.lengths.len() || self.lengths[s] == 0 {
                return Err(Error::BadStream {
                    field: "symbol",
                    detail: format!("symbol {s} at position {pos} has no codeword"),
                });
            }
            w.push(self.codes[s], self.lengths[s]);
        }
        Ok(w.finish())
    }

    /// Decode exactly `n` symbols from `bytes`.
    pub fn decode(&self, bytes: &[u8], n: usize) -> Result<Vec<usize>> {
        // Each symbol consumes at least one bit, so an undersized payload
        // is rejected before any allocation sized by the (untrusted) n.
        if (n as u64) > bytes.len() as u64 * 8 {
            return Err(Error::Truncated("payload too short for the declared symbol count"));
        }
        // Canonical decoding tables: per length, the first code value and
        // the symbols of that length in canonical order.
        let max_len = *self.lengths.iter().max().unwrap() as usize;
        let mut count = vec![0u32; max_len + 1];
        for &l in &self.lengths {
            if l > 0 {
                count[l as usize] += 1;
            }
        }
        let mut first_code = vec![0u32; max_len + 2];
        let mut code = 0u32;
        for len in 1..=max_len {
            code = (code + count[len - 1]) << 1;
            first_code[len] = code;
        }
        let mut symbols_by_len: Vec<Vec<usize>> = vec![Vec::new(); max_len + 1];
        let mut order: Vec<usize> = (0..self.lengths.len()).collect();
        order.sort_by_key(|&i| (self.lengths[i], i));
        for &i in &order {
            if self.lengths[i] > 0 {
                symbols_by_len[self.lengths[i] as usize].push(i);
            }
        }

        let mut out = Vec::with_capacity(n);
        let mut reader = BitReader::new(bytes);
        for _ in 0..n {
            let mut acc = 0u32;
            let mut len = 0usize;
            loop {
                let bit = reader.next().ok_or(Error::Truncated("bitstream ended mid-codeword"))?;
                acc = (acc << 1) | bit as u32;
                len += 1;
                if len > max_len {
                    return Err(Error::BadStream {
                        field: "payload",
                        detail: format!("no codeword of length <= {max_len} matches"),
                    });
                }
                let offset = acc.wrapping_sub(first_code[len]);
                if count[len] > 0 && acc >= first_code[len] && (offset as usize) < symbols_by_len[len].len() {
                    out.push(symbols_by_len[len][offset as usize]);
                    break;
                }
            }
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Bit i/o
// ---------------------------------------------------------------------------

struct BitWriter {
    bytes: Vec<u8>,
    bits: u64,
}

impl BitWriter {
    fn new() -> Self {
        Self { bytes: Vec::new(), bits: 0 }
    }

    fn push(&mut self, code: u32, len: u8) {
        for k in (0..len).rev() {
            let bit = (code >> k) & 1;
            let byte_idx = (self.bits / 8) as usize;
            if byte_idx == self.bytes.len() {
                self.bytes.push(0);
            }
            self.bytes[byte_idx] |= (bit as u8) << (7 - (self.bits % 8));
            self.bits += 1;
        }
    }

    /// Zero-padded bytes plus the exact bit count.
    fn finish(self) -> (Vec<u8>, u64) {
        (self.bytes, self.bits)
    }
}

struct BitReader<'a> {
    bytes: &'a [u8],
    pos: u64,
}

impl<'a> BitReader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn next(&mut self) -> Option<u8> {
        let byte_idx = (self.pos / 8) as usize;
        if byte_idx >= self.bytes.len() {
            return None;
        }
        let bit = (self.bytes[byte_idx] >> (7 - (self.pos % 8))) & 1;
        self.pos += 1;
        Some(bit)
    }
}
