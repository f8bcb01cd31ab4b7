use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;

use crate::error::{Error, Result};

type Words = SmallVec<[u64; 6]>;

/// Paley index of a Walsh function, stored as an unbounded bit-vector.
///
/// Bit `j - 1` is set exactly when the Rademacher function `r_j` is a factor
/// of the Walsh function. The word vector never carries trailing zero words,
/// so derived equality and hashing are bitwise.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Frequency {
    words: Words,
}

impl Frequency {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_u64(n: u64) -> Self {
        let mut words = Words::new();
        if n != 0 {
            words.push(n);
        }
        Self { words }
    }

    /// Frequency with the single bit `bit` (0-based) set.
    pub fn single_bit(bit: usize) -> Self {
        let mut words: Words = SmallVec::from_elem(0, bit / 64 + 1);
        words[bit / 64] = 1 << (bit % 64);
        Self { words }
    }

    pub fn from_words(words: &[u64]) -> Self {
        let mut out = Self {
            words: SmallVec::from_slice(words),
        };
        out.trim();
        out
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    fn trim(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.is_empty()
    }

    /// Number of significant bits; 0 for the zero frequency.
    pub fn width(&self) -> usize {
        match self.words.last() {
            None => 0,
            Some(&top) => 64 * (self.words.len() - 1) + (64 - top.leading_zeros() as usize),
        }
    }

    pub fn popcount(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn bit(&self, bit: usize) -> bool {
        self.words.get(bit / 64).is_some_and(|w| (w >> (bit % 64)) & 1 == 1)
    }

    pub fn as_u64(&self) -> Option<u64> {
        match self.words.len() {
            0 => Some(0),
            1 => Some(self.words[0]),
            _ => None,
        }
    }

    pub fn xor(&self, other: &Frequency) -> Frequency {
        let (long, short) = if self.words.len() >= other.words.len() {
            (&self.words, &other.words)
        } else {
            (&other.words, &self.words)
        };
        let mut words = long.clone();
        for (w, s) in words.iter_mut().zip(short.iter()) {
            *w ^= s;
        }
        let mut out = Frequency { words };
        out.trim();
        out
    }

    /// Parity of `popcount(self AND other)`.
    pub fn and_parity(&self, other: &Frequency) -> bool {
        let ones: u32 = self
            .words
            .iter()
            .zip(other.words.iter())
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones & 1 == 1
    }

    /// Positions (0-based) of the set bits, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * 64 + b)
            })
        })
    }

    /// Lower-case hex, most significant nibble first, no prefix; `"0"` for zero.
    pub fn to_hex(&self) -> String {
        let Some((top, rest)) = self.words.split_last() else {
            return "0".to_string();
        };
        let mut s = format!("{top:x}");
        for w in rest.iter().rev() {
            s.push_str(&format!("{w:016x}"));
        }
        s
    }

    pub fn from_hex(text: &str) -> Result<Self> {
        let digits = text
            .strip_prefix("0x")
            .or_else(|| text.strip_prefix("0X"))
            .unwrap_or(text);
        if digits.is_empty() {
            return Err(Error::InvalidArgument(format!("empty hex frequency `{text}`")));
        }
        let bytes = digits.as_bytes();
        let mut words = Words::new();
        let mut end = bytes.len();
        while end > 0 {
            let start = end.saturating_sub(16);
            let chunk = std::str::from_utf8(&bytes[start..end]).expect("ascii slice of str");
            let w = u64::from_str_radix(chunk, 16)
                .map_err(|_| Error::InvalidArgument(format!("bad hex frequency `{text}`")))?;
            words.push(w);
            end = start;
        }
        let mut out = Frequency { words };
        out.trim();
        Ok(out)
    }
}

impl Ord for Frequency {
    /// Numeric order of the Paley index.
    fn cmp(&self, other: &Self) -> Ordering {
        self.words
            .len()
            .cmp(&other.words.len())
            .then_with(|| self.words.iter().rev().cmp(other.words.iter().rev()))
    }
}

impl PartialOrd for Frequency {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Frequency(0x{})", self.to_hex())
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}", self.to_hex())
    }
}

impl From<u64> for Frequency {
    fn from(n: u64) -> Self {
        Self::from_u64(n)
    }
}

/// Frequency of the Rademacher function `r_j`, i.e. Paley index `2^(j-1)`.
pub fn rademacher_index(j: usize) -> Frequency {
    assert!(j >= 1, "Rademacher functions are numbered from 1");
    Frequency::single_bit(j - 1)
}

/// Number of powers of two in `1..=n`.
fn powers_of_two_up_to(n: u64) -> u64 {
    if n == 0 {
        0
    } else {
        u64::from(64 - n.leading_zeros())
    }
}

/// The `k`-th (1-based) non-negative integer whose popcount is not 1.
///
/// These are the Walsh functions that are not Rademacher functions, listed in
/// Paley order: 0, 3, 5, 6, 7, 9, ...
pub fn phi_index(k: u64) -> Frequency {
    Frequency::from_u64(phi_value(k))
}

pub(crate) fn phi_value(k: u64) -> u64 {
    assert!(k >= 1, "phi functions are numbered from 1");
    // n is the k-th non-power when n + 1 - #powers(1..=n) == k.
    let mut n = k - 1;
    loop {
        let next = k - 1 + powers_of_two_up_to(n);
        if next == n {
            break;
        }
        n = next;
    }
    while n.is_power_of_two() {
        n += 1;
    }
    n
}

/// Position of `n` in the phi enumeration, if `n` is not a power of two.
pub(crate) fn phi_position(n: u64) -> Option<u64> {
    if n.is_power_of_two() {
        None
    } else {
        Some(n + 1 - powers_of_two_up_to(n))
    }
}

/// What a frequency is within the Rademacher / phi split of the Walsh system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WalshRole {
    /// `r_j`, 1-based.
    Rademacher(usize),
    /// `phi_k`, 1-based.
    Phi(u64),
}

/// Inverse of [`rademacher_index`] and [`phi_index`]. `None` only for phi
/// indices too large to count in a `u64`.
pub fn walsh_role(n: &Frequency) -> Option<WalshRole> {
    if n.popcount() == 1 {
        return Some(WalshRole::Rademacher(n.width()));
    }
    n.as_u64().and_then(phi_position).map(WalshRole::Phi)
}
