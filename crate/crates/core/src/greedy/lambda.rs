use serde::Serialize;

use crate::basis::BlockPlan;
use crate::error::Result;

use super::CoefficientList;

/// Three-way split of one block's coefficients by magnitude:
/// `Λ'` is `|c| <= 1/N_k`, `Λ''` is `|c| >= N_k^(-1/10)`, `Λ` is strictly between.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockLambda {
    pub block: usize,
    pub lower: f64,
    pub upper: f64,
    pub lambda: Vec<u128>,
    pub lambda_prime: Vec<u128>,
    pub lambda_double_prime: Vec<u128>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaReport {
    pub blocks: Vec<BlockLambda>,
    /// For every pair of consecutive blocks with nonempty middle sets,
    /// `1/N_k >= N_{k+1}^(-1/10)`, so every middle coefficient of block `k`
    /// exceeds every middle coefficient of block `k+1`.
    pub separation_holds: bool,
    /// The data-level conclusion: `min_{Λ_k} |c| > max_{Λ_{k+1}} |c|` for
    /// every consecutive pair, i.e. sorting the middle sets by magnitude only
    /// rearranges terms within blocks.
    pub rearrangement_within_blocks: bool,
}

/// `2^(-g)` and `2^(-g/10)`.
fn thresholds(plan: &BlockPlan, k: usize) -> (f64, f64) {
    let g = f64::from(plan.exponent(k));
    (2f64.powf(-g), 2f64.powf(-g / 10.0))
}

/// Splits each block's coefficients into `Λ_k`, `Λ'_k`, `Λ''_k` and checks the
/// separation between consecutive blocks.
pub fn lambda_classify(coeffs: &CoefficientList, plan: &BlockPlan) -> Result<LambdaReport> {
    let mut blocks: Vec<BlockLambda> = (1..=plan.horizon())
        .map(|k| {
            let (lower, upper) = thresholds(plan, k);
            BlockLambda {
                block: k,
                lower,
                upper,
                lambda: Vec::new(),
                lambda_prime: Vec::new(),
                lambda_double_prime: Vec::new(),
            }
        })
        .collect();
    let mut magnitudes: Vec<Vec<f64>> = vec![Vec::new(); plan.horizon()];
    for &(m, c) in coeffs.entries() {
        let k = plan.to_block(m)?.block;
        let b = &mut blocks[k - 1];
        let a = c.abs();
        if a <= b.lower {
            b.lambda_prime.push(m);
        } else if a >= b.upper {
            b.lambda_double_prime.push(m);
        } else {
            b.lambda.push(m);
            magnitudes[k - 1].push(a);
        }
    }
    let mut separation_holds = true;
    let mut rearrangement_within_blocks = true;
    for k in 1..plan.horizon() {
        let (here, next) = (&magnitudes[k - 1], &magnitudes[k]);
        if here.is_empty() || next.is_empty() {
            continue;
        }
        let (lower_k, _) = thresholds(plan, k);
        let (_, upper_next) = thresholds(plan, k + 1);
        separation_holds &= lower_k >= upper_next;
        let min_here = here.iter().copied().fold(f64::INFINITY, f64::min);
        let max_next = next.iter().copied().fold(0.0, f64::max);
        rearrangement_within_blocks &= min_here > max_next;
    }
    Ok(LambdaReport {
        blocks,
        separation_holds,
        rearrangement_within_blocks,
    })
}
