use crate::basis::{expansion_coefficients, weighted_sum_spectrum, BlockPlan};
use crate::error::{Error, Result};
use crate::walsh::{Frequency, WalshSpectrum};

use super::CoefficientList;

/// A finite orthonormal system `e_1, ..., e_D` of Walsh series.
pub trait OrthonormalSystem: Sync {
    fn label(&self) -> String;

    /// Number of elements `D`.
    fn dimension(&self) -> u128;

    /// `sum c_m e_m`.
    fn synthesize(&self, coeffs: &[(u128, f64)]) -> Result<WalshSpectrum>;

    /// `⟨f, e_m⟩` for the `m` that can be nonzero.
    fn analyze(&self, f: &WalshSpectrum) -> Result<CoefficientList>;
}

/// The rotated system `ψ_m` of a block plan.
#[derive(Debug, Clone, Copy)]
pub struct PsiSystem<'a> {
    plan: &'a BlockPlan,
}

impl<'a> PsiSystem<'a> {
    pub fn new(plan: &'a BlockPlan) -> Self {
        Self { plan }
    }

    pub fn plan(&self) -> &BlockPlan {
        self.plan
    }
}

impl OrthonormalSystem for PsiSystem<'_> {
    fn label(&self) -> String {
        format!("psi[{}]", self.plan.label())
    }

    fn dimension(&self) -> u128 {
        self.plan.dimension()
    }

    fn synthesize(&self, coeffs: &[(u128, f64)]) -> Result<WalshSpectrum> {
        weighted_sum_spectrum(self.plan, coeffs)
    }

    fn analyze(&self, f: &WalshSpectrum) -> Result<CoefficientList> {
        CoefficientList::new(expansion_coefficients(self.plan, f)?)
    }
}

/// The Walsh system in Paley order, `e_m = W_{m-1}`.
#[derive(Debug, Clone, Copy)]
pub struct WalshSystem {
    dimension: u128,
}

impl WalshSystem {
    pub fn new(dimension: u128) -> Self {
        Self { dimension }
    }
}

impl OrthonormalSystem for WalshSystem {
    fn label(&self) -> String {
        format!("walsh[{}]", self.dimension)
    }

    fn dimension(&self) -> u128 {
        self.dimension
    }

    fn synthesize(&self, coeffs: &[(u128, f64)]) -> Result<WalshSpectrum> {
        let terms = coeffs
            .iter()
            .map(|&(m, c)| {
                if m == 0 || m > self.dimension {
                    return Err(Error::IndexOutOfRange(format!("Walsh index {m} of {}", self.dimension)));
                }
                let n =
                    u64::try_from(m - 1).map_err(|_| Error::IndexOutOfRange(format!("Walsh index {m} too large")))?;
                Ok((Frequency::from_u64(n), c))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(WalshSpectrum::from_terms(terms))
    }

    fn analyze(&self, f: &WalshSpectrum) -> Result<CoefficientList> {
        let entries = f
            .iter()
            .map(|(n, c)| {
                let m = n.as_u64().map(|v| u128::from(v) + 1);
                match m {
                    Some(m) if m <= self.dimension => Ok((m, c)),
                    _ => Err(Error::OutsideHorizon(n.to_string())),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        CoefficientList::new(entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn walsh_system_is_paley_order() {
        let s = WalshSystem::new(8);
        let f = s.synthesize(&[(1, 2.0), (4, -1.0)]).unwrap();
        assert_eq!(f.coefficient(&Frequency::from_u64(0)), 2.0);
        assert_eq!(f.coefficient(&Frequency::from_u64(3)), -1.0);
        assert_eq!(s.analyze(&f).unwrap().entries(), &[(1, 2.0), (4, -1.0)]);
        assert!(s.synthesize(&[(9, 1.0)]).is_err());
        assert!(s.analyze(&WalshSpectrum::single(Frequency::from_u64(8), 1.0)).is_err());
    }

    #[test]
    fn psi_system_roundtrip() {
        let plan = BlockPlan::desk();
        let s = PsiSystem::new(&plan);
        let coeffs = vec![(1, 0.5), (6, -2.0), (30, 1.25), (276, 0.1)];
        let f = s.synthesize(&coeffs).unwrap();
        let back = s.analyze(&f).unwrap();
        let mut n = 0;
        for &(m, c) in back.entries() {
            let expect = coeffs.iter().find(|e| e.0 == m).map_or(0.0, |e| e.1);
            assert!((c - expect).abs() < 1e-12, "m = {m}");
            if c.abs() > 1e-12 {
                n += 1;
            }
        }
        assert_eq!(n, coeffs.len());
    }
}
