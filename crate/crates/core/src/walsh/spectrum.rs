use std::hash::Hash;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

use super::{walsh_eval, DyadicPoint, Frequency};

/// Default cap on pair products in [`WalshSpectrum::product`].
pub const DEFAULT_PRODUCT_BUDGET: u128 = 1 << 24;

/// A finite Walsh series `sum c_n W_n`.
///
/// Terms are kept sorted by frequency and no stored coefficient is zero, so
/// structural equality is equality of the represented functions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WalshSpectrum {
    terms: Vec<(Frequency, f64)>,
}

impl WalshSpectrum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(n: Frequency, c: f64) -> Self {
        Self::from_terms([(n, c)])
    }

    /// Sums duplicate frequencies and drops zero coefficients.
    pub fn from_terms<I: IntoIterator<Item = (Frequency, f64)>>(terms: I) -> Self {
        let mut terms: Vec<(Frequency, f64)> = terms.into_iter().collect();
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Frequency, f64)> = Vec::with_capacity(terms.len());
        for (n, c) in terms {
            match merged.last_mut() {
                Some((m, acc)) if *m == n => *acc += c,
                _ => merged.push((n, c)),
            }
        }
        merged.retain(|(_, c)| *c != 0.0);
        Self { terms: merged }
    }

    /// Terms already sorted by strictly increasing frequency.
    fn from_sorted_unchecked(mut terms: Vec<(Frequency, f64)>) -> Self {
        terms.retain(|(_, c)| *c != 0.0);
        debug_assert!(terms.windows(2).all(|w| w[0].0 < w[1].0));
        Self { terms }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(Frequency, f64)] {
        &self.terms
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Frequency, f64)> {
        self.terms.iter().map(|(n, c)| (n, *c))
    }

    pub fn coefficient(&self, n: &Frequency) -> f64 {
        self.terms
            .binary_search_by(|(m, _)| m.cmp(n))
            .map(|i| self.terms[i].1)
            .unwrap_or(0.0)
    }

    /// Largest frequency width; every term is constant on cells of this depth.
    pub fn depth(&self) -> usize {
        self.terms.last().map_or(0, |(n, _)| n.width())
    }

    pub fn add(&self, other: &WalshSpectrum) -> WalshSpectrum {
        self.linear_combination(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &WalshSpectrum) -> WalshSpectrum {
        self.linear_combination(1.0, other, -1.0)
    }

    pub fn scale(&self, c: f64) -> WalshSpectrum {
        Self::from_sorted_unchecked(self.terms.iter().map(|(n, v)| (n.clone(), v * c)).collect())
    }

    /// `a * self + b * other`, merged in frequency order.
    pub fn linear_combination(&self, a: f64, other: &WalshSpectrum, b: f64) -> WalshSpectrum {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() || j < other.terms.len() {
            let ord = match (self.terms.get(i), other.terms.get(j)) {
                (Some(x), Some(y)) => x.0.cmp(&y.0),
                (Some(_), None) => std::cmp::Ordering::Less,
                _ => std::cmp::Ordering::Greater,
            };
            match ord {
                std::cmp::Ordering::Less => {
                    out.push((self.terms[i].0.clone(), a * self.terms[i].1));
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push((other.terms[j].0.clone(), b * other.terms[j].1));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((self.terms[i].0.clone(), a * self.terms[i].1 + b * other.terms[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        Self::from_sorted_unchecked(out)
    }

    /// `sum_n f[n] g[n]`, which is `integral_0^1 f g` by orthonormality.
    pub fn inner(&self, other: &WalshSpectrum) -> f64 {
        let (mut i, mut j) = (0, 0);
        let mut acc = 0.0;
        while i < self.terms.len() && j < other.terms.len() {
            match self.terms[i].0.cmp(&other.terms[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.terms[i].1 * other.terms[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    pub fn l2_norm(&self) -> f64 {
        self.terms.iter().fold(0.0, |acc, (_, c)| acc + c * c).sqrt()
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.iter().fold(0.0, |m, (_, c)| m.max(c.abs()))
    }

    /// Value of the function on the cell `t`.
    pub fn eval(&self, t: &DyadicPoint) -> Result<f64> {
        let mut acc = 0.0;
        for (n, c) in &self.terms {
            acc += f64::from(walsh_eval(n, t)?) * c;
        }
        Ok(acc)
    }

    /// Pointwise product via XOR convolution, capped at [`DEFAULT_PRODUCT_BUDGET`].
    pub fn product(&self, other: &WalshSpectrum) -> Result<WalshSpectrum> {
        self.product_with_budget(other, DEFAULT_PRODUCT_BUDGET)
    }

    pub fn product_with_budget(&self, other: &WalshSpectrum, budget: u128) -> Result<WalshSpectrum> {
        let pairs = self.len() as u128 * other.len() as u128;
        if pairs > budget {
            return Err(Error::TermBudgetExceeded { pairs, budget });
        }
        let width = self.depth().max(other.depth());
        Ok(dispatch_width(width, |conv| conv.product(self, other)))
    }

    /// Pointwise square, using the symmetry of the convolution to halve the
    /// number of pair products.
    pub fn square(&self) -> Result<WalshSpectrum> {
        self.square_with_budget(DEFAULT_PRODUCT_BUDGET)
    }

    pub fn square_with_budget(&self, budget: u128) -> Result<WalshSpectrum> {
        let n = self.len() as u128;
        let pairs = n * (n + 1) / 2;
        if pairs > budget {
            return Err(Error::TermBudgetExceeded { pairs, budget });
        }
        Ok(dispatch_width(self.depth(), |conv| conv.square(self)))
    }

    /// `integral_0^1 f^4`, i.e. the squared `L_2` norm of `f^2`, without
    /// materializing `f^2` as a sorted spectrum.
    pub fn fourth_moment(&self) -> Result<f64> {
        self.fourth_moment_with_budget(DEFAULT_PRODUCT_BUDGET)
    }

    pub fn fourth_moment_with_budget(&self, budget: u128) -> Result<f64> {
        let n = self.len() as u128;
        let pairs = n * (n + 1) / 2;
        if pairs > budget {
            return Err(Error::TermBudgetExceeded { pairs, budget });
        }
        Ok(dispatch_width(self.depth(), |conv| conv.square_energy(self)))
    }
}

/// Selects the cheapest hash-map key able to hold frequencies of `width` bits.
fn dispatch_width<R>(width: usize, run: impl FnOnce(Convolver) -> R) -> R {
    run(if width <= 64 {
        Convolver::Narrow
    } else if width <= 64 * WIDE_WORDS {
        Convolver::Wide
    } else {
        Convolver::Arbitrary
    })
}

const WIDE_WORDS: usize = 6;

enum Convolver {
    Narrow,
    Wide,
    Arbitrary,
}

impl Convolver {
    fn product(self, f: &WalshSpectrum, g: &WalshSpectrum) -> WalshSpectrum {
        match self {
            Convolver::Narrow => convolve::<u64>(f, g),
            Convolver::Wide => convolve::<[u64; WIDE_WORDS]>(f, g),
            Convolver::Arbitrary => convolve::<Frequency>(f, g),
        }
    }

    fn square(self, f: &WalshSpectrum) -> WalshSpectrum {
        match self {
            Convolver::Narrow => collect(self_convolve_map::<u64>(f)),
            Convolver::Wide => collect(self_convolve_map::<[u64; WIDE_WORDS]>(f)),
            Convolver::Arbitrary => collect(self_convolve_map::<Frequency>(f)),
        }
    }

    fn square_energy(self, f: &WalshSpectrum) -> f64 {
        match self {
            Convolver::Narrow => energy(self_convolve_map::<u64>(f)),
            Convolver::Wide => energy(self_convolve_map::<[u64; WIDE_WORDS]>(f)),
            Convolver::Arbitrary => energy(self_convolve_map::<Frequency>(f)),
        }
    }
}

trait XorKey: Hash + Eq + Sized {
    /// Numeric order of the represented frequencies.
    fn numeric_cmp(&self, other: &Self) -> std::cmp::Ordering;
    fn from_frequency(n: &Frequency) -> Self;
    fn into_frequency(self) -> Frequency;
    fn xor(&self, other: &Self) -> Self;
}

impl XorKey for u64 {
    fn numeric_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.cmp(other)
    }
    fn from_frequency(n: &Frequency) -> Self {
        n.as_u64().expect("narrow key")
    }
    fn into_frequency(self) -> Frequency {
        Frequency::from_u64(self)
    }
    fn xor(&self, other: &Self) -> Self {
        self ^ other
    }
}

impl XorKey for [u64; WIDE_WORDS] {
    fn numeric_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.iter().rev().cmp(other.iter().rev())
    }
    fn from_frequency(n: &Frequency) -> Self {
        let mut out = [0; WIDE_WORDS];
        out[..n.words().len()].copy_from_slice(n.words());
        out
    }
    fn into_frequency(self) -> Frequency {
        Frequency::from_words(&self)
    }
    fn xor(&self, other: &Self) -> Self {
        std::array::from_fn(|i| self[i] ^ other[i])
    }
}

impl XorKey for Frequency {
    fn numeric_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.cmp(other)
    }
    fn from_frequency(n: &Frequency) -> Self {
        n.clone()
    }
    fn into_frequency(self) -> Frequency {
        self
    }
    fn xor(&self, other: &Self) -> Self {
        Frequency::xor(self, other)
    }
}

fn keyed<K: XorKey>(f: &WalshSpectrum) -> Vec<(K, f64)> {
    f.terms.iter().map(|(n, c)| (K::from_frequency(n), *c)).collect()
}

fn collect<K: XorKey>(acc: FxHashMap<K, f64>) -> WalshSpectrum {
    let mut keyed: Vec<(K, f64)> = acc.into_iter().collect();
    keyed.sort_unstable_by(|a, b| a.0.numeric_cmp(&b.0));
    WalshSpectrum::from_sorted_unchecked(keyed.into_iter().map(|(k, c)| (k.into_frequency(), c)).collect())
}

/// Sum of squared coefficients. FxHash is unseeded, so iteration order (and
/// hence the rounding of this sum) is the same on every run.
fn energy<K: XorKey>(acc: FxHashMap<K, f64>) -> f64 {
    acc.values().fold(0.0, |s, c| s + c * c)
}

// Accumulation order is fixed by the (sorted) input order, so results are
// bit-for-bit reproducible regardless of hash-map iteration order.
fn convolve<K: XorKey>(f: &WalshSpectrum, g: &WalshSpectrum) -> WalshSpectrum {
    let a = keyed::<K>(f);
    let b = keyed::<K>(g);
    let mut acc: FxHashMap<K, f64> = FxHashMap::default();
    acc.reserve(a.len().saturating_mul(b.len()).min(1 << 20));
    for (ka, ca) in &a {
        for (kb, cb) in &b {
            *acc.entry(ka.xor(kb)).or_insert(0.0) += ca * cb;
        }
    }
    collect(acc)
}

fn self_convolve_map<K: XorKey>(f: &WalshSpectrum) -> FxHashMap<K, f64> {
    let a = keyed::<K>(f);
    let mut acc: FxHashMap<K, f64> = FxHashMap::default();
    acc.reserve((a.len() * a.len() / 2 + 1).min(1 << 20));
    let diagonal: f64 = a.iter().map(|(_, c)| c * c).sum();
    if let Some((k0, _)) = a.first() {
        acc.insert(k0.xor(k0), diagonal);
    }
    for (i, (ka, ca)) in a.iter().enumerate() {
        let twice = 2.0 * ca;
        for (kb, cb) in &a[i + 1..] {
            *acc.entry(ka.xor(kb)).or_insert(0.0) += twice * cb;
        }
    }
    acc
}

#[derive(Serialize, Deserialize)]
struct TermRecord {
    n: String,
    c: f64,
}

#[derive(Serialize, Deserialize)]
struct SpectrumFile {
    terms: Vec<TermRecord>,
}

impl Serialize for WalshSpectrum {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SpectrumFile {
            terms: self
                .terms
                .iter()
                .map(|(n, c)| TermRecord { n: n.to_hex(), c: *c })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for WalshSpectrum {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let file = SpectrumFile::deserialize(deserializer)?;
        let terms = file
            .terms
            .into_iter()
            .map(|t| Frequency::from_hex(&t.n).map(|n| (n, t.c)))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        Ok(WalshSpectrum::from_terms(terms))
    }
}
