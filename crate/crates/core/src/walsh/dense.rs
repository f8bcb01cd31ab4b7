use crate::error::{Error, Result};

use super::{Frequency, WalshSpectrum};

/// Deepest dyadic grid that may be materialized (2^30 cells).
pub const MAX_DENSE_DEPTH: usize = 30;

/// Coefficients below this fraction of the largest cell value are treated as
/// FWHT round-off and dropped by [`analyze_dense`].
pub const ANALYSIS_ZERO_TOL: f64 = 1e-14;

/// Values of a function on each of the `2^depth` dyadic cells, in cell order.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseDyadic {
    depth: usize,
    values: Vec<f64>,
}

impl DenseDyadic {
    pub fn new(depth: usize, values: Vec<f64>) -> Result<Self> {
        if depth > MAX_DENSE_DEPTH {
            return Err(Error::DepthOverflow {
                depth,
                max: MAX_DENSE_DEPTH,
            });
        }
        if values.len() != 1 << depth {
            return Err(Error::SizeMismatch {
                expected: 1 << depth,
                got: values.len(),
            });
        }
        Ok(Self { depth, values })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `integral_0^1 |f|^p`, summed with Neumaier compensation.
    pub fn abs_power_mean(&self, p: f64) -> f64 {
        let (mut sum, mut carry) = (0.0f64, 0.0f64);
        for v in &self.values {
            let x = v.abs().powf(p);
            let t = sum + x;
            carry += if sum.abs() >= x { (sum - t) + x } else { (x - t) + sum };
            sum = t;
        }
        (sum + carry) / self.values.len() as f64
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Unnormalized in-place Walsh–Hadamard butterfly in natural (Hadamard) order.
pub fn fwht_in_place(data: &mut [f64]) {
    let n = data.len();
    assert!(n.is_power_of_two(), "FWHT length must be a power of two");
    let mut h = 1;
    while h < n {
        for block in data.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

fn bit_reverse(x: usize, depth: usize) -> usize {
    if depth == 0 {
        0
    } else {
        x.reverse_bits() >> (usize::BITS as usize - depth)
    }
}

// Cell c has digit t_j at bit (D - j) of c while frequency n keeps ε_j at
// bit (j - 1), so W_n on cell c is the Hadamard character of bitrev(n) at c.

/// Values of `f` on every cell at `depth`.
pub fn synthesize(f: &WalshSpectrum, depth: usize) -> Result<DenseDyadic> {
    if depth > MAX_DENSE_DEPTH {
        return Err(Error::DepthOverflow {
            depth,
            max: MAX_DENSE_DEPTH,
        });
    }
    if f.depth() > depth {
        return Err(Error::DepthTooSmall {
            needed: f.depth(),
            got: depth,
        });
    }
    let mut data = vec![0.0; 1 << depth];
    for (n, c) in f.iter() {
        let n = n.as_u64().expect("width checked against depth") as usize;
        data[bit_reverse(n, depth)] = c;
    }
    fwht_in_place(&mut data);
    DenseDyadic::new(depth, data)
}

/// Walsh coefficients `<f, W_n>` of a cellwise-constant function.
pub fn analyze_dense(v: &DenseDyadic) -> WalshSpectrum {
    let depth = v.depth();
    let mut data = v.values.clone();
    fwht_in_place(&mut data);
    let scale = (1u64 << depth) as f64;
    let cutoff = ANALYSIS_ZERO_TOL * v.sup_abs();
    let terms = data
        .iter()
        .enumerate()
        .map(|(h, s)| (bit_reverse(h, depth), s / scale))
        .filter(|(_, c)| c.abs() > cutoff)
        .map(|(n, c)| (Frequency::from_u64(n as u64), c));
    WalshSpectrum::from_terms(terms)
}
