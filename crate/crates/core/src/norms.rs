//! `L_p[0, 1]` norms of Walsh series.
//!
//! Three engines:
//!
//! * [`lp_dense`] synthesizes the function on its own dyadic grid, where it is
//!   piecewise constant, so the integral is a finite mean (depth ≤ 24).
//! * [`lp_even_spectral`] uses `‖f‖_{2m}^{2m} = ⟨f^m, f^m⟩` with powers formed
//!   by XOR convolution; it is exact at any depth but the term count grows.
//! * [`lp_monte_carlo`] samples uniform cells at the spectrum's depth. The
//!   integrand is constant on each cell, so the estimator is unbiased with no
//!   discretization error.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::walsh::{synthesize, Frequency, WalshSpectrum, DEFAULT_PRODUCT_BUDGET};

/// Deepest spectrum accepted by [`lp_dense`] (2^24 cells).
pub const MAX_DENSE_NORM_DEPTH: usize = 24;

/// Two-sided 95% normal quantile.
const Z_95: f64 = 1.959_963_984_540_054;

/// Relative widening of sampled intervals. Without it a zero-variance sample
/// (e.g. `|f|` constant) gives a point interval that misses the exact value by
/// round-off.
const ROUNDING_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimateKind {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub p: f64,
    pub value: f64,
    pub kind: EstimateKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ci_low: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ci_high: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
}

impl NormEstimate {
    pub fn exact(p: f64, value: f64) -> Self {
        Self {
            p,
            value,
            kind: EstimateKind::Exact,
            ci_low: None,
            ci_high: None,
            samples: None,
            seed: None,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.kind == EstimateKind::Exact
    }

    /// Interval endpoints; both equal `value` for exact estimates.
    pub fn interval(&self) -> (f64, f64) {
        (self.ci_low.unwrap_or(self.value), self.ci_high.unwrap_or(self.value))
    }

    pub fn contains(&self, x: f64) -> bool {
        let (lo, hi) = self.interval();
        lo <= x && x <= hi
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "norm exponent p = {p} must be finite and >= 1"
        )));
    }
    Ok(())
}

/// `Some(m)` when `p = 2m` for a positive integer `m`.
pub fn even_half(p: f64) -> Option<u32> {
    if (2.0..=64.0).contains(&p) && p.fract() == 0.0 && (p as u32).is_multiple_of(2) {
        Some(p as u32 / 2)
    } else {
        None
    }
}

/// Exact `‖f‖_p` from the cell values at depth `f.depth()`.
pub fn lp_dense(f: &WalshSpectrum, p: f64) -> Result<NormEstimate> {
    check_p(p)?;
    let depth = f.depth();
    if depth > MAX_DENSE_NORM_DEPTH {
        return Err(Error::DepthOverflow {
            depth,
            max: MAX_DENSE_NORM_DEPTH,
        });
    }
    let dense = synthesize(f, depth)?;
    Ok(NormEstimate::exact(p, dense.abs_power_mean(p).powf(1.0 / p)))
}

/// Exact `sup |f|`, from the dense grid at `depth`.
pub fn sup_norm_dense(f: &WalshSpectrum, depth: usize) -> Result<f64> {
    if depth > MAX_DENSE_NORM_DEPTH {
        return Err(Error::DepthOverflow {
            depth,
            max: MAX_DENSE_NORM_DEPTH,
        });
    }
    Ok(synthesize(f, depth)?.sup_abs())
}

/// Exact `‖f‖_p` for even integer `p`, via spectral powers.
pub fn lp_even_spectral(f: &WalshSpectrum, p: u32) -> Result<NormEstimate> {
    lp_even_spectral_with_budget(f, p, DEFAULT_PRODUCT_BUDGET)
}

pub fn lp_even_spectral_with_budget(f: &WalshSpectrum, p: u32, budget: u128) -> Result<NormEstimate> {
    if p < 2 || !p.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "spectral engine needs an even p >= 2, got {p}"
        )));
    }
    let integral = if p == 4 {
        f.fourth_moment_with_budget(budget)?
    } else {
        let power = spectral_power(f, p / 2, budget)?;
        power.inner(&power)
    };
    Ok(NormEstimate::exact(f64::from(p), integral.powf(1.0 / f64::from(p))))
}

/// `f^m` by binary exponentiation.
fn spectral_power(f: &WalshSpectrum, m: u32, budget: u128) -> Result<WalshSpectrum> {
    let mut result: Option<WalshSpectrum> = None;
    let mut base = f.clone();
    let mut e = m;
    loop {
        if e & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => r.product_with_budget(&base, budget)?,
            });
        }
        e >>= 1;
        if e == 0 {
            break;
        }
        base = base.square_with_budget(budget)?;
    }
    Ok(result.expect("m >= 1"))
}

/// Draws `samples` uniform cells at depth `f.depth()` and returns the sample
/// `p`-th power mean, raised to `1/p`, with a 95% normal-approximation interval.
///
/// Sample `i` uses its own ChaCha stream `i` under `seed`, so the result does
/// not depend on how the work is split across threads.
pub fn lp_monte_carlo(f: &WalshSpectrum, p: f64, samples: u64, seed: u64) -> Result<NormEstimate> {
    check_p(p)?;
    if samples < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 samples, got {samples}"
        )));
    }
    let depth = f.depth();
    let words = depth.div_ceil(64);
    let powers: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let digits = random_digits(&mut rng, depth, words);
            let v: f64 = f.iter().map(|(n, c)| if n.and_parity(&digits) { -c } else { c }).sum();
            v.abs().powf(p)
        })
        .collect();
    let n = samples as f64;
    let mean = powers.iter().sum::<f64>() / n;
    let var = powers.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    let half = Z_95 * (var / n).sqrt() + ROUNDING_SLACK * mean.abs();
    let root = |x: f64| x.max(0.0).powf(1.0 / p);
    Ok(NormEstimate {
        p,
        value: root(mean),
        kind: EstimateKind::Sampled,
        ci_low: Some(root(mean - half)),
        ci_high: Some(root(mean + half)),
        samples: Some(samples),
        seed: Some(seed),
    })
}

fn random_digits(rng: &mut ChaCha8Rng, depth: usize, words: usize) -> Frequency {
    let mut w: Vec<u64> = (0..words).map(|_| rng.next_u64()).collect();
    if !depth.is_multiple_of(64) {
        if let Some(top) = w.last_mut() {
            *top &= (1u64 << (depth % 64)) - 1;
        }
    }
    Frequency::from_words(&w)
}

/// How to compute a norm when the caller does not care which engine is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "engine")]
pub enum NormEngine {
    Dense,
    EvenSpectral,
    MonteCarlo {
        samples: u64,
        seed: u64,
    },
    /// Exact whenever possible: spectral for even `p`, dense for shallow
    /// spectra, sampling otherwise.
    Auto {
        samples: u64,
        seed: u64,
    },
}

impl Default for NormEngine {
    fn default() -> Self {
        NormEngine::Auto {
            samples: 20_000,
            seed: 0,
        }
    }
}

/// Spectra at most this deep go to the dense engine under [`NormEngine::Auto`].
const AUTO_DENSE_DEPTH: usize = 20;

impl NormEngine {
    pub fn lp(&self, f: &WalshSpectrum, p: f64) -> Result<NormEstimate> {
        match *self {
            NormEngine::Dense => lp_dense(f, p),
            NormEngine::EvenSpectral => {
                let m = even_half(p)
                    .ok_or_else(|| Error::InvalidArgument(format!("spectral engine needs an even p, got {p}")))?;
                lp_even_spectral(f, 2 * m)
            }
            NormEngine::MonteCarlo { samples, seed } => lp_monte_carlo(f, p, samples, seed),
            NormEngine::Auto { samples, seed } => {
                if p == 2.0 {
                    return Ok(NormEstimate::exact(p, f.l2_norm()));
                }
                if f.len() <= 1 {
                    let c = f.max_abs_coefficient();
                    return Ok(NormEstimate::exact(p, c));
                }
                if let Some(m) = even_half(p) {
                    match lp_even_spectral(f, 2 * m) {
                        Err(Error::TermBudgetExceeded { .. }) => {}
                        other => return other,
                    }
                }
                if f.depth() <= AUTO_DENSE_DEPTH {
                    lp_dense(f, p)
                } else {
                    lp_monte_carlo(f, p, samples, seed)
                }
            }
        }
    }

    /// Whether [`NormEngine::lp`] can return a sampled estimate.
    pub fn may_sample(&self) -> bool {
        matches!(self, NormEngine::MonteCarlo { .. } | NormEngine::Auto { .. })
    }
}
