// Copyright (c) 2026 qmt Contributors
// SPDX-License-Identifier: Apache-2.0

//! Bit strings, the length-then-lexicographic ranking, and the strict
//! self-delimiting tuple code used everywhere above this layer.
//!
//! Ranking is 1-based: rank 1 is the empty string, rank 2 is "0",
//! rank 3 is "1", rank 4 is "00", and strings of length L occupy the
//! ranks 2^L .. 2^(L+1)-1.
//!
//! The tuple code maps each component x = b1..bn to 11 a(b1)..a(bn)
//! where a(0) = "00" and a(1) = "01"; components are concatenated and
//! the empty string encodes the empty tuple.  Any block starting "10"
//! has no preimage, which gives a guaranteed non-codeword prefix that
//! the padding layer exploits.

use alloc::string::String;
use alloc::vec::Vec;

/// Maximum string length for which rank arithmetic is supported.
/// Ranks are held in `u128`, so lengths must stay below 127 bits.
pub const MAX_RANK_LEN: usize = 126;

/// A finite binary string.  Ordering is shortlex (length first, then
/// lexicographic), matching the ranking functions below.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString {
    bits: Vec<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CodecError {
    /// A decoder was handed a string outside the codomain of the encoder.
    NotAnEncoding,
    /// A positional accessor was asked for a position past the end.
    IndexOutOfRange,
    /// Rank arithmetic was attempted on a string longer than `MAX_RANK_LEN`.
    TooLong,
}

impl core::fmt::Display for CodecError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CodecError::NotAnEncoding => write!(f, "not in the codomain of the encoder"),
            CodecError::IndexOutOfRange => write!(f, "position out of range"),
            CodecError::TooLong => write!(f, "string too long for rank arithmetic"),
        }
    }
}

impl BitString {
    pub fn new() -> Self {
        BitString { bits: Vec::new() }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        BitString { bits }
    }

    /// Parses a string of '0'/'1' characters.
    pub fn parse(s: &str) -> Result<Self, CodecError> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return Err(CodecError::NotAnEncoding),
            }
        }
        Ok(BitString { bits })
    }

    /// 0^n.
    pub fn zeros(n: usize) -> Self {
        BitString {
            bits: alloc::vec![false; n],
        }
    }

    /// 1^n.
    pub fn ones(n: usize) -> Self {
        BitString {
            bits: alloc::vec![true; n],
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// The i-th bit, 1-based.
    pub fn bit_at(&self, i: usize) -> Result<bool, CodecError> {
        if i == 0 || i > self.bits.len() {
            return Err(CodecError::IndexOutOfRange);
        }
        Ok(self.bits[i - 1])
    }

    /// The prefix consisting of the first i bits, 1-based count.
    pub fn prefix(&self, i: usize) -> Result<BitString, CodecError> {
        if i > self.bits.len() {
            return Err(CodecError::IndexOutOfRange);
        }
        Ok(BitString {
            bits: self.bits[..i].to_vec(),
        })
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut bits = self.bits.clone();
        bits.extend_from_slice(&other.bits);
        BitString { bits }
    }

    pub fn is_all_zeros(&self) -> bool {
        self.bits.iter().all(|&b| !b)
    }

    pub fn is_all_ones(&self) -> bool {
        self.bits.iter().all(|&b| b)
    }

    /// Position in the global shortlex order; the empty string has rank 1.
    pub fn lex_rank(&self) -> u128 {
        assert!(
            self.bits.len() <= MAX_RANK_LEN,
            "rank arithmetic capped at length {}",
            MAX_RANK_LEN
        );
        (1u128 << self.bits.len()) + self.value()
    }

    /// 1-based position among the strings of the same length.
    pub fn rank_at_length(&self) -> u128 {
        assert!(
            self.bits.len() <= MAX_RANK_LEN,
            "rank arithmetic capped at length {}",
            MAX_RANK_LEN
        );
        self.value() + 1
    }

    /// The string read as a binary numeral (empty string = 0).
    fn value(&self) -> u128 {
        let mut v = 0u128;
        for &b in &self.bits {
            v = (v << 1) | (b as u128);
        }
        v
    }

    /// Inverse of `lex_rank`.  Panics on rank 0.
    pub fn lex_unrank(rank: u128) -> BitString {
        assert!(rank >= 1, "ranks are 1-based");
        let len = (127 - rank.leading_zeros()) as usize;
        let value = rank - (1u128 << len);
        Self::at_length_with_rank(len, value + 1)
    }

    /// The string of the given length whose `rank_at_length` is `rank`.
    /// Panics unless 1 <= rank <= 2^len.
    pub fn at_length_with_rank(len: usize, rank: u128) -> BitString {
        assert!(len <= MAX_RANK_LEN);
        assert!(rank >= 1 && rank <= 1u128 << len, "rank out of range for length");
        let value = rank - 1;
        let mut bits = Vec::with_capacity(len);
        for i in (0..len).rev() {
            bits.push((value >> i) & 1 == 1);
        }
        BitString { bits }
    }

    /// The standard binary numeral for n: no leading zeros, except that
    /// 0 itself is written "0".
    pub fn numeral(n: u128) -> BitString {
        if n == 0 {
            return BitString::parse("0").unwrap();
        }
        let len = (128 - n.leading_zeros()) as usize;
        let mut bits = Vec::with_capacity(len);
        for i in (0..len).rev() {
            bits.push((n >> i) & 1 == 1);
        }
        BitString { bits }
    }

    /// Inverse of `numeral`: rejects empty strings and leading zeros
    /// (other than the numeral "0" itself).
    pub fn numeral_value(&self) -> Result<u128, CodecError> {
        if self.bits.is_empty() {
            return Err(CodecError::NotAnEncoding);
        }
        if self.bits.len() > 1 && !self.bits[0] {
            return Err(CodecError::NotAnEncoding);
        }
        if self.bits.len() > 127 {
            return Err(CodecError::TooLong);
        }
        Ok(self.value())
    }
}

impl core::fmt::Display for BitString {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        for &b in &self.bits {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl core::fmt::Debug for BitString {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "\"{}\"", self)
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BitString {
    /// Shortlex: shorter strings first, ties broken lexicographically.
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.bits
            .len()
            .cmp(&other.bits.len())
            .then_with(|| self.bits.cmp(&other.bits))
    }
}

impl From<&str> for BitString {
    fn from(s: &str) -> Self {
        BitString::parse(s).expect("literal bit string")
    }
}

/// Encodes a tuple of strings.  Length is exactly 2(k + sum of |x_i|).
pub fn multi_pair(parts: &[BitString]) -> BitString {
    let total: usize = parts.iter().map(|p| p.len()).sum();
    let mut bits = Vec::with_capacity(2 * (parts.len() + total));
    for part in parts {
        bits.push(true);
        bits.push(true);
        for &b in part.bits() {
            bits.push(false);
            bits.push(b);
        }
    }
    BitString { bits }
}

/// Strict inverse of `multi_pair`.  The empty string decodes to the
/// empty tuple; anything not produced by `multi_pair` is rejected, in
/// particular any string containing the block "10" at an even offset.
pub fn multi_unpair(s: &BitString) -> Result<Vec<BitString>, CodecError> {
    if s.len() % 2 != 0 {
        return Err(CodecError::NotAnEncoding);
    }
    let mut parts: Vec<BitString> = Vec::new();
    let bits = s.bits();
    let mut i = 0;
    while i < bits.len() {
        let (hi, lo) = (bits[i], bits[i + 1]);
        match (hi, lo) {
            (true, true) => parts.push(BitString::new()),
            (false, b) => match parts.last_mut() {
                Some(last) => last.push(b),
                None => return Err(CodecError::NotAnEncoding),
            },
            (true, false) => return Err(CodecError::NotAnEncoding),
        }
        i += 2;
    }
    Ok(parts)
}

/// Convenience: encodes a pair.
pub fn pair(a: &BitString, b: &BitString) -> BitString {
    multi_pair(&[a.clone(), b.clone()])
}

/// Strict pair decoder: the tuple must have exactly two components.
pub fn unpair(s: &BitString) -> Result<(BitString, BitString), CodecError> {
    let mut parts = multi_unpair(s)?;
    if parts.len() != 2 {
        return Err(CodecError::NotAnEncoding);
    }
    let b = parts.pop().unwrap();
    let a = parts.pop().unwrap();
    Ok((a, b))
}

/// All strings of the given length in lexicographic order.
pub fn strings_of_length(len: usize) -> Vec<BitString> {
    assert!(len < 32, "enumeration capped well below 2^32 strings");
    (1..=(1u128 << len))
        .map(|r| BitString::at_length_with_rank(len, r))
        .collect()
}

/// All strings of length at most `max_len`, in shortlex order.
pub fn strings_up_to(max_len: usize) -> Vec<BitString> {
    let mut out = Vec::new();
    for len in 0..=max_len {
        out.extend(strings_of_length(len));
    }
    out
}

/// Renders a bit string for diagnostics; the empty string prints as "".
pub fn render(s: &BitString) -> String {
    alloc::format!("{}", s)
}
