//! String distances over trip strings.
//!
//! The weighted Hamming distance gives position `i` (1-based) of a length-`l`
//! string the weight `2^(l-i)`, so a single mismatch at an early position
//! outweighs any number of later ones. Values reach `2^l - 1` and are kept as
//! exact big integers; they are never routed through floating point.

use std::fmt;
use std::ops::Add;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::grid::Symbol;

/// Exact weighted Hamming distance.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Distance(BigUint);

impl Distance {
    pub fn zero() -> Distance {
        Distance(BigUint::zero())
    }

    /// `2^exp - 1`: the largest distance between two strings that agree on all
    /// but their last `exp` positions.
    pub fn all_ones(exp: usize) -> Distance {
        Distance((BigUint::from(1u8) << exp) - 1u8)
    }

    pub fn pow2(exp: usize) -> Distance {
        Distance(BigUint::from(1u8) << exp)
    }

    pub fn from_u64(v: u64) -> Distance {
        Distance(BigUint::from(v))
    }

    /// From little-endian base-2^32 digits.
    pub fn from_digits(digits: &[u32]) -> Distance {
        Distance(BigUint::from_slice(digits))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }

    pub fn as_biguint(&self) -> &BigUint {
        &self.0
    }

    /// Number of significant bits; equals `l - p` when the strings first
    /// differ at 1-based position `p + 1`.
    pub fn bit_len(&self) -> u64 {
        self.0.bits()
    }
}

impl Add for &Distance {
    type Output = Distance;

    fn add(self, rhs: &Distance) -> Distance {
        Distance(&self.0 + &rhs.0)
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

fn check_lengths(a: &[Symbol], b: &[Symbol]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Precondition(format!(
            "strings must have equal length, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// `d(s, s') = sum_i 2^(l-i) [s_i != s'_i]`. Padding symbols equal only each other.
pub fn weighted_hamming(a: &[Symbol], b: &[Symbol]) -> Result<Distance> {
    check_lengths(a, b)?;
    let l = a.len();
    let mut digits = vec![0u32; l.div_ceil(32)];
    for (pos, (x, y)) in a.iter().zip(b).enumerate() {
        if x != y {
            let bit = l - 1 - pos;
            digits[bit / 32] |= 1 << (bit % 32);
        }
    }
    Ok(Distance(BigUint::from_slice(&digits)))
}

pub fn shared_prefix_len(a: &[Symbol], b: &[Symbol]) -> Result<usize> {
    check_lengths(a, b)?;
    Ok(a.iter().zip(b).take_while(|(x, y)| x == y).count())
}

/// Drops the trailing run of padding symbols.
pub fn strip_padding(s: &[Symbol]) -> &[Symbol] {
    let end = s
        .iter()
        .rposition(|z| !z.is_null_pad())
        .map_or(0, |p| p + 1);
    &s[..end]
}

/// Edit distance (unit-cost insertion, deletion, substitution) between two
/// routes. Trailing padding is removed from both inputs first.
pub fn levenshtein(a: &[Symbol], b: &[Symbol]) -> usize {
    let a = strip_padding(a);
    let b = strip_padding(b);
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return long.len();
    }

    let mut prev: Vec<usize> = (0..=short.len()).collect();
    let mut cur = vec![0usize; short.len() + 1];
    for (i, x) in long.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in short.iter().enumerate() {
            let substitution = prev[j] + usize::from(x != y);
            cur[j + 1] = substitution.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[short.len()]
}
