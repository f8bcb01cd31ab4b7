use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::basis::{BlockPlan, PlanSpec};
use crate::error::{Error, Result};

/// Everything needed to re-run an experiment. Every field that influences the
/// output is either here or derived from `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub plan: PlanSpec,
    #[serde(default = "default_p")]
    pub p: Vec<f64>,
    /// Index-set sizes for the democracy experiment.
    #[serde(default)]
    pub sizes: Vec<usize>,
    /// Inclusive range appended to `sizes`.
    #[serde(default)]
    pub size_range: Option<(usize, usize)>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub corpus: CorpusSpec,
    /// `m` values for greedy experiments; empty means every `m` up to the support.
    #[serde(default)]
    pub m_grid: Vec<usize>,
    /// `n` values for partial sums; empty means every `n` up to the plan dimension.
    #[serde(default)]
    pub n_grid: Vec<u128>,
    /// Random candidate sets per `m` in the almost-greedy search.
    #[serde(default = "default_random_candidates")]
    pub random_candidates: usize,
    /// Supports at most this large are searched exhaustively in the
    /// almost-greedy experiment (0 disables).
    #[serde(default)]
    pub exhaustive_up_to: usize,
    /// Longest Rademacher sum in the Khintchine experiment (at most 16).
    #[serde(default = "default_khintchine_terms")]
    pub khintchine_terms: usize,
    /// Samples per Monte-Carlo norm when `p` is not an even integer.
    #[serde(default = "default_mc_samples")]
    pub mc_samples: u64,
    #[serde(default)]
    pub thresholds: Thresholds,
}

/// Empirical bounds frozen alongside a corpus and its seed. The library never
/// reads these; acceptance checks compare experiment summaries against them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    pub democracy_max: Option<f64>,
    pub quasi_greedy_max: Option<f64>,
    pub partial_sum_max: Option<f64>,
    pub almost_greedy_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSpec {
    pub count: usize,
    /// Generator names, used round-robin, e.g. `decay(1.0)` or `indicator(2)`.
    pub generators: Vec<String>,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            count: 50,
            generators: vec![
                "decay(1.0)".into(),
                "decay(0.5,60,shuffle)".into(),
                "flat_block(1,2)".into(),
                "lacunary_sign".into(),
                "indicator(2)".into(),
            ],
        }
    }
}

fn default_p() -> Vec<f64> {
    vec![2.0, 4.0]
}

fn default_trials() -> usize {
    100
}

fn default_random_candidates() -> usize {
    8
}

fn default_khintchine_terms() -> usize {
    16
}

fn default_mc_samples() -> u64 {
    20_000
}

impl ExperimentConfig {
    /// A config with defaults for everything except plan and seed.
    pub fn new(plan: PlanSpec, seed: u64) -> Self {
        Self {
            plan,
            p: default_p(),
            sizes: Vec::new(),
            size_range: None,
            trials: default_trials(),
            seed,
            corpus: CorpusSpec::default(),
            m_grid: Vec::new(),
            n_grid: Vec::new(),
            random_candidates: default_random_candidates(),
            exhaustive_up_to: 0,
            khintchine_terms: default_khintchine_terms(),
            mc_samples: default_mc_samples(),
            thresholds: Thresholds::default(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p.iter().any(|&p| !(p > 1.0 && p.is_finite())) {
            return Err(Error::Config(format!(
                "every p must be finite and > 1, got {:?}",
                self.p
            )));
        }
        if self.khintchine_terms == 0 || self.khintchine_terms > 16 {
            return Err(Error::Config(format!(
                "khintchine_terms must be in 1..=16, got {}",
                self.khintchine_terms
            )));
        }
        if self.mc_samples < 2 {
            return Err(Error::Config("mc_samples must be at least 2".into()));
        }
        if let Some((lo, hi)) = self.size_range {
            if lo == 0 || lo > hi {
                return Err(Error::Config(format!("bad size_range ({lo}, {hi})")));
            }
        }
        self.plan_checked().map(|_| ())
    }

    pub fn plan_checked(&self) -> Result<BlockPlan> {
        self.plan.to_plan().map_err(|e| match e {
            Error::NonIncreasingSchedule(_) => Error::Config(e.to_string()),
            other => other,
        })
    }

    /// `sizes` followed by `size_range`, in order.
    pub fn all_sizes(&self) -> Vec<usize> {
        let mut out = self.sizes.clone();
        if let Some((lo, hi)) = self.size_range {
            out.extend(lo..=hi);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg: ExperimentConfig = serde_json::from_str(r#"{"plan": {"preset": "desk"}, "seed": 7}"#).unwrap();
        assert_eq!(
            cfg,
            ExperimentConfig::new(PlanSpec::Preset { preset: "desk".into() }, 7)
        );
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn rejects_bad_values() {
        let mut cfg = ExperimentConfig::new(PlanSpec::Schedule { g: vec![2, 4] }, 1);
        cfg.p = vec![1.0];
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        cfg.p = vec![4.0];
        cfg.khintchine_terms = 17;
        assert!(cfg.validate().is_err());
        cfg.khintchine_terms = 4;
        cfg.plan = PlanSpec::Schedule { g: vec![4, 2] };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"plan": {"g": [1]}, "seed": 1, "typo": 3}"#).is_err());
    }

    #[test]
    fn sizes_concatenate() {
        let mut cfg = ExperimentConfig::new(PlanSpec::Schedule { g: vec![2] }, 1);
        cfg.sizes = vec![7];
        cfg.size_range = Some((1, 3));
        assert_eq!(cfg.all_sizes(), vec![7, 1, 2, 3]);
    }
}
