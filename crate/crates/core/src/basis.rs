//! Block schedules and the basis `ψ` built from them.
//!
//! Block `k` consists of `N_k = 2^g(k)` Walsh functions: the spare function
//! `φ_k` followed by the Rademacher functions `r_{F_{k-1}+1}, ..., r_{F_k}`,
//! where `F_0 = 0` and `F_k - F_{k-1} = N_k - 1`. Rotating the block by the
//! Olevskiĭ matrix `A^{g(k)}` gives
//!
//! ```text
//! ψ_i^(k) = φ_k / sqrt(N_k) + sum_{j=2}^{N_k} a_ij r_{F_{k-1}+j-1}
//! ```
//!
//! and the basis is `ψ_1^(1), ..., ψ_{N_1}^(1), ψ_1^(2), ...` with global
//! index `m` counting from 1.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::olevskii;
use crate::walsh::{phi_index, rademacher_index, walsh_role, Frequency, WalshRole, WalshSpectrum};

/// Largest block that may be materialized as a spectrum by default.
pub const DEFAULT_MATERIALIZATION_CAP: u128 = 1 << 20;

/// Growth exponents `g(1) < g(2) < ... < g(K)`, so that `N_k = 2^g(k)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthSchedule(Vec<u32>);

impl GrowthSchedule {
    pub fn new(g: Vec<u32>) -> Self {
        Self(g)
    }

    /// `g(k) = 10^k` for `k = 1, 2`. Only block 1 can be materialized.
    pub fn paper() -> Self {
        Self(vec![10, 100])
    }

    /// `g = (2, 4, 8)`: `N = (4, 16, 256)`, `F = (3, 18, 273)`.
    pub fn desk() -> Self {
        Self(vec![2, 4, 8])
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }
}

/// Position of a basis element inside its block (both 1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockIndex {
    pub block: usize,
    pub row: u128,
}

/// A validated schedule with its block sizes and Rademacher offsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPlan {
    schedule: GrowthSchedule,
    sizes: Vec<u128>,
    /// `F_0, F_1, ..., F_K`.
    offsets: Vec<u128>,
    /// `sum_{j<k} N_j` for `k = 1..=K+1`.
    starts: Vec<u128>,
}

/// Checks that `g` is strictly increasing and builds the plan.
pub fn validate_schedule(schedule: GrowthSchedule) -> Result<BlockPlan> {
    BlockPlan::new(schedule)
}

impl BlockPlan {
    pub fn new(schedule: GrowthSchedule) -> Result<Self> {
        let g = schedule.exponents();
        if g.is_empty() || g[0] == 0 || g.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::NonIncreasingSchedule(g.to_vec()));
        }
        let overflow = || Error::ScheduleOverflow(g.to_vec());
        let mut sizes = Vec::with_capacity(g.len());
        let mut offsets = vec![0u128];
        let mut starts = vec![0u128];
        for &e in g {
            if e >= 127 {
                return Err(overflow());
            }
            let n = 1u128 << e;
            let f = offsets.last().unwrap().checked_add(n - 1).ok_or_else(overflow)?;
            let s = starts.last().unwrap().checked_add(n).ok_or_else(overflow)?;
            sizes.push(n);
            offsets.push(f);
            starts.push(s);
        }
        Ok(Self {
            schedule,
            sizes,
            offsets,
            starts,
        })
    }

    pub fn paper() -> Self {
        Self::new(GrowthSchedule::paper()).expect("preset is valid")
    }

    pub fn desk() -> Self {
        Self::new(GrowthSchedule::desk()).expect("preset is valid")
    }

    pub fn schedule(&self) -> &GrowthSchedule {
        &self.schedule
    }

    /// Number of blocks `K`.
    pub fn horizon(&self) -> usize {
        self.sizes.len()
    }

    /// `g(k)`, 1-based.
    pub fn exponent(&self, k: usize) -> u32 {
        self.schedule.0[k - 1]
    }

    /// `N_k`, 1-based.
    pub fn block_size(&self, k: usize) -> u128 {
        self.sizes[k - 1]
    }

    pub fn block_sizes(&self) -> &[u128] {
        &self.sizes
    }

    /// `F_k` for `0 <= k <= K`.
    pub fn offset(&self, k: usize) -> u128 {
        self.offsets[k]
    }

    /// `F_1, ..., F_K`.
    pub fn offsets(&self) -> &[u128] {
        &self.offsets[1..]
    }

    /// Total number of basis elements up to the horizon.
    pub fn dimension(&self) -> u128 {
        *self.starts.last().unwrap()
    }

    /// Global index of the first element of block `k`, minus one.
    pub fn block_start(&self, k: usize) -> u128 {
        self.starts[k - 1]
    }

    /// `g(k+1) >= 2 g(k)` for every consecutive pair.
    pub fn democracy_condition(&self) -> bool {
        self.schedule.0.windows(2).all(|w| w[1] >= 2 * w[0])
    }

    /// `g(k+1) >= 10 g(k)` for every consecutive pair, i.e. `1/N_k >= N_{k+1}^(-1/10)`.
    pub fn lambda_separation(&self) -> bool {
        self.schedule.0.windows(2).all(|w| w[1] >= 10 * w[0])
    }

    /// Short identifier used in result files, e.g. `g=2-4-8`.
    pub fn label(&self) -> String {
        let parts: Vec<String> = self.schedule.0.iter().map(u32::to_string).collect();
        format!("g={}", parts.join("-"))
    }

    fn check_block(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.horizon() {
            return Err(Error::IndexOutOfRange(format!(
                "block {k} outside horizon 1..={}",
                self.horizon()
            )));
        }
        Ok(())
    }

    pub fn to_global(&self, k: usize, i: u128) -> Result<u128> {
        self.check_block(k)?;
        if i == 0 || i > self.block_size(k) {
            return Err(Error::IndexOutOfRange(format!(
                "row {i} not in 1..={} for block {k}",
                self.block_size(k)
            )));
        }
        Ok(self.block_start(k) + i)
    }

    pub fn to_block(&self, m: u128) -> Result<BlockIndex> {
        if m == 0 || m > self.dimension() {
            return Err(Error::IndexOutOfRange(format!(
                "basis index {m} not in 1..={}",
                self.dimension()
            )));
        }
        let k = self.starts.partition_point(|&s| s < m);
        Ok(BlockIndex {
            block: k,
            row: m - self.starts[k - 1],
        })
    }

    /// Walsh function occupying column `j` of block `k`.
    pub fn column_frequency(&self, k: usize, j: u128) -> Result<Frequency> {
        self.check_block(k)?;
        if j == 0 || j > self.block_size(k) {
            return Err(Error::IndexOutOfRange(format!("column {j} of block {k}")));
        }
        if j == 1 {
            return Ok(phi_index(k as u64));
        }
        let r = self.offset(k - 1) + j - 1;
        let r = usize::try_from(r).map_err(|_| Error::MaterializationCap {
            terms: r,
            cap: usize::MAX as u128,
        })?;
        Ok(rademacher_index(r))
    }

    /// Block and column holding the Walsh function `n`.
    pub fn locate_frequency(&self, n: &Frequency) -> Result<(usize, u128)> {
        let outside = || Error::OutsideHorizon(n.to_string());
        match walsh_role(n).ok_or_else(outside)? {
            WalshRole::Phi(k) => {
                let k = usize::try_from(k).map_err(|_| outside())?;
                if k > self.horizon() {
                    return Err(outside());
                }
                Ok((k, 1))
            }
            WalshRole::Rademacher(j) => {
                let j = j as u128;
                if j > self.offset(self.horizon()) {
                    return Err(outside());
                }
                let k = self.offsets.partition_point(|&f| f < j);
                Ok((k, j - self.offset(k - 1) + 1))
            }
        }
    }

    /// Every Walsh function spanned by the first `K` blocks, in basis order.
    pub fn horizon_frequencies(&self) -> Result<Vec<Frequency>> {
        let mut out = Vec::new();
        for k in 1..=self.horizon() {
            self.check_cap(k, DEFAULT_MATERIALIZATION_CAP)?;
            for j in 1..=self.block_size(k) {
                out.push(self.column_frequency(k, j)?);
            }
        }
        Ok(out)
    }

    fn check_cap(&self, k: usize, cap: u128) -> Result<()> {
        let terms = self.block_size(k);
        if terms > cap {
            return Err(Error::MaterializationCap { terms, cap });
        }
        Ok(())
    }
}

impl fmt::Display for BlockPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Plan file contents: `{"g": [2, 4, 8]}` or `{"preset": "paper" | "desk"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PlanSpec {
    Schedule { g: Vec<u32> },
    Preset { preset: String },
}

impl PlanSpec {
    pub fn to_plan(&self) -> Result<BlockPlan> {
        match self {
            PlanSpec::Schedule { g } => BlockPlan::new(GrowthSchedule::new(g.clone())),
            PlanSpec::Preset { preset } => match preset.as_str() {
                "paper" => Ok(BlockPlan::paper()),
                "desk" => Ok(BlockPlan::desk()),
                other => Err(Error::Config(format!("unknown plan preset `{other}`"))),
            },
        }
    }

    /// A preset name, or the path of a JSON plan file.
    pub fn load(arg: &str) -> Result<BlockPlan> {
        match arg {
            "paper" | "desk" => PlanSpec::Preset {
                preset: arg.to_string(),
            }
            .to_plan(),
            path => {
                let text = std::fs::read_to_string(Path::new(path))?;
                let spec: PlanSpec =
                    serde_json::from_str(&text).map_err(|e| Error::Config(format!("plan file {path}: {e}")))?;
                spec.to_plan()
            }
        }
    }
}

/// `ψ_i^(k)` as a Walsh series, with one term per nonzero row entry.
pub fn psi_spectrum(plan: &BlockPlan, k: usize, i: u128) -> Result<WalshSpectrum> {
    psi_spectrum_capped(plan, k, i, DEFAULT_MATERIALIZATION_CAP)
}

pub fn psi_spectrum_capped(plan: &BlockPlan, k: usize, i: u128, cap: u128) -> Result<WalshSpectrum> {
    plan.to_global(k, i)?;
    plan.check_cap(k, cap)?;
    let row = olevskii::row_nonzeros(plan.exponent(k), i as u64)?;
    let terms = row
        .into_iter()
        .map(|(j, e)| Ok((plan.column_frequency(k, u128::from(j))?, e.value())))
        .collect::<Result<Vec<_>>>()?;
    Ok(WalshSpectrum::from_terms(terms))
}

/// `sum_m w_m ψ_m`, computed block by block from weighted column sums of the
/// Olevskiĭ matrix. Indices are global; repeated indices add up.
pub fn weighted_sum_spectrum(plan: &BlockPlan, items: &[(u128, f64)]) -> Result<WalshSpectrum> {
    weighted_sum_spectrum_capped(plan, items, DEFAULT_MATERIALIZATION_CAP)
}

pub fn weighted_sum_spectrum_capped(plan: &BlockPlan, items: &[(u128, f64)], cap: u128) -> Result<WalshSpectrum> {
    let mut by_block: BTreeMap<usize, Vec<(u64, f64)>> = BTreeMap::new();
    for &(m, w) in items {
        let b = plan.to_block(m)?;
        plan.check_cap(b.block, cap)?;
        by_block.entry(b.block).or_default().push((b.row as u64, w));
    }
    let mut terms = Vec::new();
    for (k, rows) in by_block {
        let columns = olevskii::apply_weighted_rows(plan.exponent(k), &rows)?;
        for (j0, c) in columns.into_iter().enumerate() {
            if c != 0.0 {
                terms.push((plan.column_frequency(k, j0 as u128 + 1)?, c));
            }
        }
    }
    Ok(WalshSpectrum::from_terms(terms))
}

/// `sum_{m in A} ψ_m`.
pub fn sum_spectrum(plan: &BlockPlan, indices: &[u128]) -> Result<WalshSpectrum> {
    let items: Vec<(u128, f64)> = indices.iter().map(|&m| (m, 1.0)).collect();
    weighted_sum_spectrum(plan, &items)
}

/// `⟨f, ψ_m⟩` for every `m` whose `ψ_m` shares a frequency with `f`, in
/// increasing `m`. Exact zeros are omitted.
pub fn expansion_coefficients(plan: &BlockPlan, f: &WalshSpectrum) -> Result<Vec<(u128, f64)>> {
    let mut by_block: BTreeMap<usize, Vec<(u64, f64)>> = BTreeMap::new();
    for (n, c) in f.iter() {
        let (k, j) = plan.locate_frequency(n)?;
        plan.check_cap(k, DEFAULT_MATERIALIZATION_CAP)?;
        by_block.entry(k).or_default().push((j as u64, c));
    }
    let mut out = Vec::new();
    for (k, columns) in by_block {
        let rows = olevskii::apply_to_columns(plan.exponent(k), &columns)?;
        for (i0, c) in rows.into_iter().enumerate() {
            if c != 0.0 {
                out.push((plan.block_start(k) + i0 as u128 + 1, c));
            }
        }
    }
    Ok(out)
}
