use crate::error::{Error, Result};

use super::Frequency;

/// The dyadic interval `[cell * 2^-depth, (cell + 1) * 2^-depth)`.
///
/// Stored by its binary digits: bit `j - 1` of `digits` is `t_j`, the `j`-th
/// binary digit of any point in the cell. On this cell `r_j = (-1)^(t_j)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DyadicPoint {
    depth: usize,
    digits: Frequency,
}

impl DyadicPoint {
    /// Cell `cell` at `depth <= 64`.
    pub fn from_cell(depth: usize, cell: u64) -> Result<Self> {
        if depth > 64 {
            return Err(Error::InvalidArgument(format!(
                "from_cell supports depth <= 64, got {depth}"
            )));
        }
        if depth < 64 && cell >> depth != 0 {
            return Err(Error::IndexOutOfRange(format!("cell {cell} at depth {depth}")));
        }
        let digits = if depth == 0 {
            0
        } else {
            cell.reverse_bits() >> (64 - depth)
        };
        Ok(Self {
            depth,
            digits: Frequency::from_u64(digits),
        })
    }

    /// Point from its digit vector (`t_j` at bit `j - 1`).
    pub fn from_digits(depth: usize, digits: Frequency) -> Result<Self> {
        if digits.width() > depth {
            return Err(Error::IndexOutOfRange(format!(
                "digit vector of width {} at depth {depth}",
                digits.width()
            )));
        }
        Ok(Self { depth, digits })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn digits(&self) -> &Frequency {
        &self.digits
    }

    /// `t_j` for `1 <= j <= depth`.
    pub fn digit(&self, j: usize) -> bool {
        self.digits.bit(j - 1)
    }

    /// Cell number when `depth <= 64`.
    pub fn cell(&self) -> Option<u64> {
        if self.depth > 64 {
            return None;
        }
        let d = self.digits.as_u64()?;
        Some(if self.depth == 0 {
            0
        } else {
            d.reverse_bits() >> (64 - self.depth)
        })
    }

    /// Left endpoint of the cell, rounded to double precision.
    pub fn left(&self) -> f64 {
        self.digits.ones().map(|b| 0.5f64.powi(b as i32 + 1)).sum()
    }
}

/// Value of `W_n` on the cell `t`: `(-1)^popcount(n AND t_bits)`.
pub fn walsh_eval(n: &Frequency, t: &DyadicPoint) -> Result<i8> {
    if n.width() > t.depth {
        return Err(Error::DepthTooSmall {
            needed: n.width(),
            got: t.depth,
        });
    }
    Ok(if n.and_parity(&t.digits) { -1 } else { 1 })
}
