//! Walsh and Rademacher functions on `[0, 1)` in Paley order, and exact
//! arithmetic on finite Walsh series.
//!
//! `W_n = prod_j r_j^(ε_j)` where `n = sum_j ε_j 2^(j-1)`, so `W_a W_b = W_(a ^ b)`
//! and pointwise products of series become XOR convolutions of their spectra.

mod dense;
mod frequency;
mod point;
mod spectrum;

pub use dense::{analyze_dense, fwht_in_place, synthesize, DenseDyadic, ANALYSIS_ZERO_TOL, MAX_DENSE_DEPTH};
pub use frequency::{phi_index, rademacher_index, walsh_role, Frequency, WalshRole};
pub use point::{walsh_eval, DyadicPoint};
pub use spectrum::{WalshSpectrum, DEFAULT_PRODUCT_BUDGET};

/// `⟨f, g⟩ = integral_0^1 f g`.
pub fn inner_product(f: &WalshSpectrum, g: &WalshSpectrum) -> f64 {
    f.inner(g)
}

pub fn spectrum_product(f: &WalshSpectrum, g: &WalshSpectrum) -> crate::Result<WalshSpectrum> {
    f.product(g)
}
