//! Expansions in an orthonormal system, the greedy ordering and the two
//! families of approximants compared throughout: greedy `G_m` and linear
//! partial sums `S_n`.
//!
//! The greedy ordering `ρ` lists coefficients by decreasing magnitude; equal
//! magnitudes are listed by increasing basis index.

mod coefficients;
mod lambda;
mod system;

use std::cmp::Ordering;

use serde::Serialize;

use crate::basis::BlockPlan;
use crate::error::Result;
use crate::norms::{NormEngine, NormEstimate};
use crate::walsh::WalshSpectrum;

pub use coefficients::CoefficientList;
pub use lambda::{lambda_classify, BlockLambda, LambdaReport};
pub use system::{OrthonormalSystem, PsiSystem, WalshSystem};

/// Coefficients smaller than this are treated as zero by the greedy ordering.
pub const ZERO_COEFFICIENT: f64 = 1e-15;

/// `⟨f, ψ_m⟩` for the plan's basis.
pub fn analyze(f: &WalshSpectrum, plan: &BlockPlan) -> Result<CoefficientList> {
    PsiSystem::new(plan).analyze(f)
}

/// Positions into a [`CoefficientList`] in greedy order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreedyOrdering {
    rho: Vec<usize>,
}

impl GreedyOrdering {
    /// Positions into the coefficient list, largest magnitude first.
    pub fn positions(&self) -> &[usize] {
        &self.rho
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    /// Basis indices in greedy order.
    pub fn indices(&self, coeffs: &CoefficientList) -> Vec<u128> {
        self.rho.iter().map(|&p| coeffs.entries()[p].0).collect()
    }

    /// The first `m` terms `(index, coefficient)`.
    pub fn leading(&self, coeffs: &CoefficientList, m: usize) -> Vec<(u128, f64)> {
        self.rho.iter().take(m).map(|&p| coeffs.entries()[p]).collect()
    }
}

/// The greedy permutation of the nonzero support.
pub fn greedy_order(coeffs: &CoefficientList) -> GreedyOrdering {
    let entries = coeffs.entries();
    let mut rho: Vec<usize> = (0..entries.len())
        .filter(|&p| entries[p].1.abs() >= ZERO_COEFFICIENT)
        .collect();
    rho.sort_by(|&a, &b| {
        let (ma, ca) = entries[a];
        let (mb, cb) = entries[b];
        cb.abs()
            .partial_cmp(&ca.abs())
            .unwrap_or(Ordering::Equal)
            .then(ma.cmp(&mb))
    });
    GreedyOrdering { rho }
}

/// One step of a greedy approximation: the term added to reach `G_m` and the
/// residual norms `‖f - G_m f‖_p`.
#[derive(Debug, Clone, Serialize)]
pub struct TraceStep {
    pub m: usize,
    pub selected: Option<u128>,
    pub coefficient: Option<f64>,
    pub residuals: Vec<NormEstimate>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ApproximantTrace {
    pub steps: Vec<TraceStep>,
}

/// `p` values at which a trace records residuals and the engine used for them.
#[derive(Debug, Clone)]
pub struct TraceOptions {
    pub p: Vec<f64>,
    pub engine: NormEngine,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            p: vec![2.0],
            engine: NormEngine::default(),
        }
    }
}

/// `G_m f = sum_{j<=m} c_{ρ(j)} e_{ρ(j)}` for coefficients already in hand.
pub fn greedy_sum<S: OrthonormalSystem + ?Sized>(
    system: &S,
    coeffs: &CoefficientList,
    ordering: &GreedyOrdering,
    m: usize,
) -> Result<WalshSpectrum> {
    system.synthesize(&ordering.leading(coeffs, m))
}

/// `G_m f` in `system`, with residual norms recorded for every `0..=m`.
pub fn greedy_approximant_in<S: OrthonormalSystem + ?Sized>(
    system: &S,
    f: &WalshSpectrum,
    m: usize,
    opts: &TraceOptions,
) -> Result<(WalshSpectrum, ApproximantTrace)> {
    let coeffs = system.analyze(f)?;
    let ordering = greedy_order(&coeffs);
    let mut trace = ApproximantTrace::default();
    let mut approx = WalshSpectrum::new();
    for step in 0..=m.min(ordering.len()) {
        let (selected, coefficient) = if step == 0 {
            (None, None)
        } else {
            let (idx, c) = coeffs.entries()[ordering.positions()[step - 1]];
            approx = approx.add(&system.synthesize(&[(idx, c)])?);
            (Some(idx), Some(c))
        };
        let residual = f.sub(&approx);
        let residuals = opts
            .p
            .iter()
            .map(|&p| opts.engine.lp(&residual, p))
            .collect::<Result<Vec<_>>>()?;
        trace.steps.push(TraceStep {
            m: step,
            selected,
            coefficient,
            residuals,
        });
    }
    if m >= ordering.len() {
        // Past the support the approximant is f itself (up to round-off).
        approx = greedy_sum(system, &coeffs, &ordering, ordering.len())?;
    }
    Ok((approx, trace))
}

/// `G_m f` in the plan's basis, tracing the `L_2` residual.
pub fn greedy_approximant(f: &WalshSpectrum, plan: &BlockPlan, m: usize) -> Result<(WalshSpectrum, ApproximantTrace)> {
    greedy_approximant_in(&PsiSystem::new(plan), f, m, &TraceOptions::default())
}

/// `S_n f = sum_{m<=n} ⟨f, e_m⟩ e_m`.
pub fn partial_sum_in<S: OrthonormalSystem + ?Sized>(system: &S, f: &WalshSpectrum, n: u128) -> Result<WalshSpectrum> {
    let coeffs = system.analyze(f)?;
    partial_sum_of(system, &coeffs, n)
}

pub fn partial_sum_of<S: OrthonormalSystem + ?Sized>(
    system: &S,
    coeffs: &CoefficientList,
    n: u128,
) -> Result<WalshSpectrum> {
    let head: Vec<(u128, f64)> = coeffs.entries().iter().copied().filter(|&(m, _)| m <= n).collect();
    system.synthesize(&head)
}

pub fn partial_sum(f: &WalshSpectrum, plan: &BlockPlan, n: u128) -> Result<WalshSpectrum> {
    partial_sum_in(&PsiSystem::new(plan), f, n)
}

/// `P_A f = sum_{m in A} c_m e_m`; `indices` must be sorted.
pub fn projection<S: OrthonormalSystem + ?Sized>(
    system: &S,
    coeffs: &CoefficientList,
    indices: &[u128],
) -> Result<WalshSpectrum> {
    system.synthesize(&coeffs.restrict(indices))
}

/// `(sum_{j>m} c_{ρ(j)}^2)^(1/2)`, the exact `L_2` greedy residual.
pub fn parseval_tail(coeffs: &CoefficientList, ordering: &GreedyOrdering, m: usize) -> f64 {
    let mut kept = vec![false; coeffs.len()];
    for &p in ordering.positions().iter().take(m) {
        kept[p] = true;
    }
    let dropped = coeffs
        .entries()
        .iter()
        .zip(&kept)
        .filter(|(_, &k)| !k)
        .fold(0.0, |acc, ((_, c), _)| acc + c * c);
    dropped.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::psi_spectrum;
    use proptest::prelude::*;

    fn list(e: &[(u128, f64)]) -> CoefficientList {
        CoefficientList::new(e.to_vec()).unwrap()
    }

    fn holds_invariant(c: &CoefficientList, o: &GreedyOrdering) -> bool {
        o.positions().windows(2).all(|w| {
            let (mj, cj) = c.entries()[w[0]];
            let (mk, ck) = c.entries()[w[1]];
            ck.abs() < cj.abs() || (ck.abs() == cj.abs() && mk > mj)
        })
    }

    #[test]
    fn ordering_examples() {
        let c = list(&[(1, 0.5), (2, -0.5), (3, 0.9)]);
        assert_eq!(greedy_order(&c).indices(&c), vec![3, 1, 2]);
        let flat = list(&[(1, 1.0), (2, -1.0), (5, 1.0)]);
        assert_eq!(greedy_order(&flat).indices(&flat), vec![1, 2, 5]);
        let dec = list(&[(1, 3.0), (2, -2.0), (3, 1.0)]);
        assert_eq!(greedy_order(&dec).indices(&dec), vec![1, 2, 3]);
        let noisy = list(&[(1, 1e-16), (2, 0.0), (3, 1.0)]);
        assert_eq!(greedy_order(&noisy).indices(&noisy), vec![3]);
    }

    #[test]
    fn analyze_examples() {
        let plan = BlockPlan::desk();
        let psi3 = psi_spectrum(&plan, 1, 3).unwrap();
        let c = analyze(&psi3, &plan).unwrap();
        let big: Vec<_> = c.entries().iter().filter(|e| e.1.abs() > 1e-12).collect();
        assert_eq!(big.len(), 1);
        assert_eq!(big[0].0, 3);
        assert!((big[0].1 - 1.0).abs() < 1e-15);

        let small = BlockPlan::new(crate::basis::GrowthSchedule::new(vec![1])).unwrap();
        let f = WalshSpectrum::single(crate::walsh::Frequency::zero(), std::f64::consts::SQRT_2);
        let c = analyze(&f, &small).unwrap();
        assert_eq!(c.len(), 2);
        assert!(c.entries().iter().all(|e| (e.1 - 1.0).abs() < 1e-15));
    }

    #[test]
    fn approximant_examples() {
        let plan = BlockPlan::desk();
        let sys = PsiSystem::new(&plan);
        let f = sys.synthesize(&[(1, 0.9), (2, 0.5), (3, -0.5)]).unwrap();
        let (g1, trace) = greedy_approximant(&f, &plan, 1).unwrap();
        let expect = psi_spectrum(&plan, 1, 1).unwrap().scale(0.9);
        assert!(g1.sub(&expect).max_abs_coefficient() < 1e-14);
        assert_eq!(trace.steps.len(), 2);
        assert_eq!(trace.steps[1].selected, Some(1));
        assert!((trace.steps[1].residuals[0].value - 0.5f64.hypot(0.5)).abs() < 1e-14);

        let (g0, _) = greedy_approximant(&f, &plan, 0).unwrap();
        assert!(g0.is_empty());
        let (g3, trace) = greedy_approximant(&f, &plan, 3).unwrap();
        assert!(f.sub(&g3).l2_norm() <= 1e-12);
        assert!(trace.steps.last().unwrap().residuals[0].value <= 1e-12);
        let (g9, _) = greedy_approximant(&f, &plan, 9).unwrap();
        assert!(f.sub(&g9).l2_norm() <= 1e-12);
    }

    #[test]
    fn partial_sums_of_basis_elements() {
        let plan = BlockPlan::desk();
        for j in [1u128, 4, 5, 20, 21, 276] {
            let b = plan.to_block(j).unwrap();
            let psi = psi_spectrum(&plan, b.block, b.row).unwrap();
            for n in [0u128, 3, 4, 19, 20, 100, 276] {
                let s = partial_sum(&psi, &plan, n).unwrap();
                let expect = if j <= n { psi.clone() } else { WalshSpectrum::new() };
                assert!(s.sub(&expect).max_abs_coefficient() < 1e-12, "j={j} n={n}");
            }
        }
    }

    #[test]
    fn block_boundary_partial_sums_are_projections() {
        let plan = BlockPlan::desk();
        let f = WalshSpectrum::from_terms((1..=40).map(|j| (crate::walsh::rademacher_index(j), (j as f64).sin())))
            .add(&WalshSpectrum::single(crate::walsh::phi_index(2), 0.7));
        for n in [4u128, 20, 276] {
            let s = partial_sum(&f, &plan, n).unwrap();
            assert!(s.l2_norm() <= f.l2_norm() + 1e-12);
            // Projection: the residual is orthogonal to the retained part.
            assert!(s.inner(&f.sub(&s)).abs() < 1e-12);
        }
        assert!(partial_sum(&f, &plan, 276).unwrap().sub(&f).l2_norm() <= 1e-12);
    }

    fn coeff_strategy() -> impl Strategy<Value = CoefficientList> {
        prop::collection::btree_map(
            1u128..=276,
            prop_oneof![(-3i32..=3).prop_map(|v| f64::from(v) * 0.5), -2.0f64..2.0,],
            0..25,
        )
        .prop_map(|m| CoefficientList::new(m.into_iter().collect()).unwrap())
    }

    proptest! {
        #[test]
        fn ordering_invariant(c in coeff_strategy()) {
            let o = greedy_order(&c);
            prop_assert!(holds_invariant(&c, &o));
            prop_assert_eq!(o.len(), c.support().count());
        }

        #[test]
        fn residuals_are_parseval_tails(c in coeff_strategy()) {
            let plan = BlockPlan::desk();
            let sys = PsiSystem::new(&plan);
            let o = greedy_order(&c);
            let f = sys.synthesize(c.entries()).unwrap();
            let mut previous = f64::INFINITY;
            for m in 0..=o.len() {
                let g = greedy_sum(&sys, &c, &o, m).unwrap();
                let r = f.sub(&g).l2_norm();
                prop_assert!((r - parseval_tail(&c, &o, m)).abs() <= 1e-12);
                prop_assert!(r <= previous + 1e-12);
                previous = r;
            }
        }

        #[test]
        fn analysis_inverts_synthesis(c in coeff_strategy()) {
            let plan = BlockPlan::desk();
            let sys = PsiSystem::new(&plan);
            let f = sys.synthesize(c.entries()).unwrap();
            let back = sys.analyze(&f).unwrap();
            let g = sys.synthesize(back.entries()).unwrap();
            prop_assert!(f.sub(&g).max_abs_coefficient() <= 1e-12);
            prop_assert!((back.sum_of_squares() - f.inner(&f)).abs() <= 1e-12 * (1.0 + f.inner(&f)));
        }
    }
}
