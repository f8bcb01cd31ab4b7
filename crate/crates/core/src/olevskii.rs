//! Olevskiĭ matrices `A^k`, the `2^k x 2^k` orthogonal matrices that mix one
//! constant column with `2^k - 1` Haar-like columns.
//!
//! Column 1 is constant `2^(-k/2)`. Column `j = 2^s + ν` (`1 <= ν <= 2^s`,
//! `0 <= s < k`) is `+2^((s-k)/2)` on rows `((ν-1) 2^(k-s), (2ν-1) 2^(k-s-1)]`,
//! `-2^((s-k)/2)` on rows `((2ν-1) 2^(k-s-1), ν 2^(k-s)]`, and zero elsewhere.
//! Each row therefore has exactly one nonzero entry per band `s`, which bounds
//! every row's absolute sum by `1 + sqrt(2)`.
//!
//! Nothing here materializes a dense matrix.

use crate::error::{Error, Result};

/// Largest order accepted by the row and entry functions (rows fit in `u64`).
pub const MAX_ORDER: u32 = 62;

/// Default cap for [`check_orthogonality`], which is quadratic in `2^k`.
pub const DEFAULT_ORTHOGONALITY_CAP: u32 = 10;

/// One matrix entry `sign * 2^((scale - order) / 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OlevskiiEntry {
    pub sign: i8,
    pub scale: u32,
    pub order: u32,
}

impl OlevskiiEntry {
    pub const fn zero(order: u32) -> Self {
        Self {
            sign: 0,
            scale: 0,
            order,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn value(&self) -> f64 {
        if self.sign == 0 {
            return 0.0;
        }
        f64::from(self.sign) * magnitude(self.scale, self.order)
    }

    /// Product of two entries of the same matrix as an integer numerator over
    /// the common denominator `2^order`. Exact for entries sharing a column,
    /// which always have equal scales.
    pub fn product_numerator(&self, other: &OlevskiiEntry) -> Option<i128> {
        if self.sign == 0 || other.sign == 0 {
            return Some(0);
        }
        if self.scale != other.scale || self.order != other.order {
            return None;
        }
        Some(i128::from(self.sign * other.sign) << self.scale)
    }
}

/// `2^((scale - order) / 2)`, computed from powers of two so that even
/// exponents are exact.
fn magnitude(scale: u32, order: u32) -> f64 {
    let e = scale as i32 - order as i32;
    let half = 2f64.powi(e.div_euclid(2));
    if e.rem_euclid(2) == 0 {
        half
    } else {
        half * std::f64::consts::SQRT_2
    }
}

fn check_order(k: u32) -> Result<()> {
    if k == 0 || k > MAX_ORDER {
        return Err(Error::IndexOutOfRange(format!(
            "Olevskii order {k} not in 1..={MAX_ORDER}"
        )));
    }
    Ok(())
}

fn check_index(k: u32, name: &str, v: u64) -> Result<()> {
    if v == 0 || v > 1u64 << k {
        return Err(Error::IndexOutOfRange(format!(
            "{name} = {v} not in 1..={} for order {k}",
            1u64 << k
        )));
    }
    Ok(())
}

/// Band `s` and offset `ν` of column `j >= 2`.
fn band_of_column(j: u64) -> (u32, u64) {
    let s = 63 - (j - 1).leading_zeros();
    (s, j - (1u64 << s))
}

/// `a_{ij}` of `A^k`.
pub fn entry(k: u32, i: u64, j: u64) -> Result<OlevskiiEntry> {
    check_order(k)?;
    check_index(k, "row", i)?;
    check_index(k, "column", j)?;
    if j == 1 {
        return Ok(OlevskiiEntry {
            sign: 1,
            scale: 0,
            order: k,
        });
    }
    let (s, nu) = band_of_column(j);
    let width = 1u64 << (k - s);
    let lo = (nu - 1) * width;
    let mid = lo + width / 2;
    let hi = nu * width;
    let sign = if i > lo && i <= mid {
        1
    } else if i > mid && i <= hi {
        -1
    } else {
        0
    };
    Ok(OlevskiiEntry {
        sign,
        scale: s,
        order: k,
    })
}

/// The `k + 1` nonzero entries of row `i`, by increasing column.
pub fn row_nonzeros(k: u32, i: u64) -> Result<Vec<(u64, OlevskiiEntry)>> {
    check_order(k)?;
    check_index(k, "row", i)?;
    let mut out = Vec::with_capacity(k as usize + 1);
    out.push((
        1,
        OlevskiiEntry {
            sign: 1,
            scale: 0,
            order: k,
        },
    ));
    for s in 0..k {
        let width = 1u64 << (k - s);
        let nu = (i - 1) / width + 1;
        let offset = (i - 1) % width;
        let sign = if offset < width / 2 { 1 } else { -1 };
        out.push((
            (1u64 << s) + nu,
            OlevskiiEntry {
                sign,
                scale: s,
                order: k,
            },
        ));
    }
    Ok(out)
}

/// Rows `lo..=hi` on which column `j` is nonzero, together with the entry's
/// magnitude; the first half of the range is positive, the second negative.
fn column_support(k: u32, j: u64) -> (u64, u64, OlevskiiEntry) {
    if j == 1 {
        return (
            1,
            1u64 << k,
            OlevskiiEntry {
                sign: 1,
                scale: 0,
                order: k,
            },
        );
    }
    let (s, nu) = band_of_column(j);
    let width = 1u64 << (k - s);
    (
        (nu - 1) * width + 1,
        nu * width,
        OlevskiiEntry {
            sign: 1,
            scale: s,
            order: k,
        },
    )
}

/// `sum_j |a_{ij}|`, summed from the row's actual entries.
pub fn row_abs_sum(k: u32, i: u64) -> Result<f64> {
    Ok(row_nonzeros(k, i)?.iter().map(|(_, e)| e.value().abs()).sum())
}

/// `2^(-k/2) + sum_{s=0}^{k-1} 2^((s-k)/2)`, the common row sum of `A^k`.
pub fn row_abs_sum_closed_form(k: u32) -> f64 {
    magnitude(0, k) + (0..k).map(|s| magnitude(s, k)).sum::<f64>()
}

/// Limit of [`row_abs_sum_closed_form`] as `k` grows.
pub const ROW_SUM_LIMIT: f64 = 1.0 + std::f64::consts::SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Accumulation {
    /// Integer numerators over `2^k`; any deviation is reported exactly.
    Exact,
    /// Double-precision sums of entry values.
    Float,
}

/// `max |(A A^T)_{il} - δ_{il}|` over all row pairs of `A^k`, for `k` up to
/// [`DEFAULT_ORTHOGONALITY_CAP`].
pub fn check_orthogonality(k: u32, mode: Accumulation) -> Result<f64> {
    check_orthogonality_capped(k, mode, DEFAULT_ORTHOGONALITY_CAP)
}

pub fn check_orthogonality_capped(k: u32, mode: Accumulation, cap: u32) -> Result<f64> {
    if k > cap {
        return Err(Error::OrderCap { order: k, cap });
    }
    check_order(k)?;
    let n = 1u64 << k;
    let rows: Vec<Vec<(u64, OlevskiiEntry)>> = (1..=n).map(|i| row_nonzeros(k, i)).collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    for (a, row_a) in rows.iter().enumerate() {
        for (b, row_b) in rows.iter().enumerate().skip(a) {
            let target = if a == b { 1.0 } else { 0.0 };
            let deviation = match mode {
                Accumulation::Exact => {
                    let num = sparse_dot(row_a, row_b, |x, y| {
                        x.product_numerator(y).expect("same column, same scale")
                    });
                    let target_num = if a == b { 1i128 << k } else { 0 };
                    (num - target_num).unsigned_abs() as f64 / n as f64
                }
                Accumulation::Float => (sparse_dot(row_a, row_b, |x, y| x.value() * y.value()) - target).abs(),
            };
            worst = worst.max(deviation);
        }
    }
    Ok(worst)
}

fn sparse_dot<T: std::ops::Add<Output = T> + Default>(
    a: &[(u64, OlevskiiEntry)],
    b: &[(u64, OlevskiiEntry)],
    mul: impl Fn(&OlevskiiEntry, &OlevskiiEntry) -> T,
) -> T {
    let (mut x, mut y) = (0, 0);
    let mut acc = T::default();
    while x < a.len() && y < b.len() {
        match a[x].0.cmp(&b[y].0) {
            std::cmp::Ordering::Less => x += 1,
            std::cmp::Ordering::Greater => y += 1,
            std::cmp::Ordering::Equal => {
                acc = acc + mul(&a[x].1, &b[y].1);
                x += 1;
                y += 1;
            }
        }
    }
    acc
}

/// Column sums `sum_{i in rows} a_{ij}` for every column `j`, aligned with
/// `symbols` (which must have length `2^k`).
pub fn apply_rows<T>(k: u32, rows: &[u64], symbols: &[T]) -> Result<Vec<f64>> {
    check_order(k)?;
    let n = 1usize << k;
    if symbols.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            got: symbols.len(),
        });
    }
    let weighted: Vec<(u64, f64)> = rows.iter().map(|&i| (i, 1.0)).collect();
    apply_weighted_rows(k, &weighted)
}

/// `sum_i w_i a_{ij}` for every column `j` (dense, length `2^k`).
pub fn apply_weighted_rows(k: u32, rows: &[(u64, f64)]) -> Result<Vec<f64>> {
    check_order(k)?;
    let n = usize::try_from(1u64 << k).map_err(|_| Error::MaterializationCap {
        terms: 1u128 << k,
        cap: usize::MAX as u128,
    })?;
    let mut out = vec![0.0; n];
    for &(i, w) in rows {
        for (j, e) in row_nonzeros(k, i)? {
            out[(j - 1) as usize] += w * e.value();
        }
    }
    Ok(out)
}

/// `sum_j a_{ij} v_j` for every row `i`, given `v` as sparse `(column, value)`
/// pairs. This is `A^k v`; the result is dense of length `2^k`.
pub fn apply_to_columns(k: u32, columns: &[(u64, f64)]) -> Result<Vec<f64>> {
    check_order(k)?;
    let n = usize::try_from(1u64 << k).map_err(|_| Error::MaterializationCap {
        terms: 1u128 << k,
        cap: usize::MAX as u128,
    })?;
    let mut out = vec![0.0; n];
    for &(j, v) in columns {
        check_index(k, "column", j)?;
        let (lo, hi, e) = column_support(k, j);
        let m = e.value() * v;
        let mid = lo + (hi - lo).div_ceil(2);
        for i in lo..=hi {
            out[(i - 1) as usize] += if i < mid || j == 1 { m } else { -m };
        }
    }
    Ok(out)
}
