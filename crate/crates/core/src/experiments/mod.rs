//! Empirical checks of democracy, quasi-greedy and Schauder behaviour of the
//! rotated basis, Khintchine constants, the almost-greedy ratio, and a
//! comparison against the plain Walsh system.
//!
//! Every experiment is a pure function of its [`ExperimentConfig`]. Work is
//! split into independent units (one trial, one corpus function); each unit
//! draws its randomness from `derive_seed(cfg.seed, unit coordinates)`, so the
//! output does not depend on how rayon schedules the units.

mod config;
mod corpus;
mod record;
mod seed;

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::basis::{sum_spectrum, BlockPlan};
use crate::error::{Error, Result};
use crate::greedy::{
    greedy_order, parseval_tail, CoefficientList, GreedyOrdering, OrthonormalSystem, PsiSystem, WalshSystem,
};
use crate::norms::{lp_dense, NormEngine, NormEstimate};
use crate::walsh::{rademacher_index, synthesize, WalshSpectrum};

pub use config::{CorpusSpec, ExperimentConfig, Thresholds};
pub use corpus::{corpus_functions, corpus_generate, indicator_spectrum, CorpusFunction, Generator};
pub use record::{read_records, write_records, write_trace, ResultRecord};
pub use seed::{derive_seed, rng_for};

use record::ratio;

/// `results.csv` label of the almost-greedy rows. The denominator is a minimum
/// over candidate sets only, so it can exceed the true infimum.
pub const ALMOST_GREEDY_LABEL: &str = "almostgreedy_candidate_ratio";

const DEMOCRACY_STREAM: u64 = 1;
const QUASI_GREEDY_STREAM: u64 = 2;
const PARTIAL_SUM_STREAM: u64 = 3;
const KHINTCHINE_STREAM: u64 = 4;
const ALMOST_GREEDY_STREAM: u64 = 5;
const BASELINE_STREAM: u64 = 6;

/// Partial-sum sweeps default to every `n` only up to this dimension.
const MAX_DEFAULT_N_GRID: u128 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Democracy,
    #[serde(rename = "quasigreedy")]
    QuasiGreedy,
    #[serde(rename = "partialsum")]
    PartialSum,
    Khintchine,
    #[serde(rename = "almostgreedy")]
    AlmostGreedy,
    WalshBaseline,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::Democracy,
        ExperimentKind::QuasiGreedy,
        ExperimentKind::PartialSum,
        ExperimentKind::Khintchine,
        ExperimentKind::AlmostGreedy,
        ExperimentKind::WalshBaseline,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Democracy => "democracy",
            ExperimentKind::QuasiGreedy => "quasigreedy",
            ExperimentKind::PartialSum => "partialsum",
            ExperimentKind::Khintchine => "khintchine",
            ExperimentKind::AlmostGreedy => "almostgreedy",
            ExperimentKind::WalshBaseline => "walsh-baseline",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}

/// Range of a ratio over all rows with one `p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioStats {
    pub p: f64,
    pub count: usize,
    pub min: f64,
    pub max: f64,
    /// False if any contributing value was sampled.
    pub exact: bool,
}

fn stats_by_p<'a>(rows: impl IntoIterator<Item = &'a ResultRecord>, ps: &[f64]) -> Vec<RatioStats> {
    let mut out: Vec<RatioStats> = ps
        .iter()
        .map(|&p| RatioStats {
            p,
            count: 0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            exact: true,
        })
        .collect();
    for r in rows {
        if let Some(s) = out.iter_mut().find(|s| s.p == r.p) {
            s.count += 1;
            s.min = s.min.min(r.value);
            s.max = s.max.max(r.value);
            s.exact &= r.exact;
        }
    }
    out
}

/// Largest ratio over `m` for one corpus function at one `p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionSup {
    pub trial: u64,
    pub generator: String,
    pub p: f64,
    pub sup: f64,
}

fn sups_by_function(rows: &[ResultRecord], label: &str, corpus: &[CorpusFunction]) -> Vec<FunctionSup> {
    let mut out: Vec<FunctionSup> = Vec::new();
    for r in rows.iter().filter(|r| r.experiment == label) {
        match out.iter_mut().find(|s| s.trial == r.trial && s.p == r.p) {
            Some(s) => s.sup = s.sup.max(r.value),
            None => out.push(FunctionSup {
                trial: r.trial,
                generator: corpus[r.trial as usize].generator.clone(),
                p: r.p,
                sup: r.value,
            }),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemocracySummary {
    pub per_p: Vec<RatioStats>,
    pub per_size: Vec<(usize, Vec<RatioStats>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiGreedySummary {
    /// `sup_m ‖G_m f‖_p / ‖f‖_p` over the whole corpus: the empirical constant.
    pub per_p: Vec<RatioStats>,
    pub per_function: Vec<FunctionSup>,
    /// `max | ‖f - G_m f‖_2 - (sum of dropped c^2)^(1/2) |`.
    pub max_parseval_deviation: f64,
    /// `max ‖f - G_m f‖_2` at `m = |support|`.
    pub max_terminal_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartialSumSummary {
    /// `sup_{f, n} ‖S_n f‖_p / ‖f‖_p`.
    pub per_p: Vec<RatioStats>,
    /// The same restricted to block ends `n = F_k + k`.
    pub boundary: Vec<RatioStats>,
    pub interior: Vec<RatioStats>,
    /// `max_{f, n} (‖S_n f‖_2 - ‖f‖_2)`.
    pub max_l2_excess: f64,
    /// `max |ratio - 1|` at `n = dim`.
    pub max_terminal_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KhintchineConstants {
    pub p: f64,
    /// Smallest observed `‖sum a_k r_k‖_p / ‖a‖_2`.
    pub a_p: f64,
    /// Largest observed ratio.
    pub b_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KhintchineSummary {
    pub per_p: Vec<KhintchineConstants>,
    /// Largest relative gap between `∫ f^4` by enumeration and `3(sum a^2)^2 - 2 sum a^4`.
    pub max_fourth_moment_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlmostGreedySummary {
    /// `‖f - G_m f‖_p / min_A ‖f - P_A f‖_p`, the minimum over candidate sets.
    pub per_p: Vec<RatioStats>,
    pub per_function: Vec<FunctionSup>,
    /// `(f, m, p)` cases searched exhaustively, and how many of them the
    /// heuristic candidates alone already minimised.
    pub exhaustive_cases: usize,
    pub exhaustive_agreement: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineConstants {
    pub p: f64,
    pub psi: f64,
    pub walsh: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineSummary {
    pub per_p: Vec<BaselineConstants>,
    pub psi: Vec<FunctionSup>,
    pub walsh: Vec<FunctionSup>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Summary {
    Democracy(DemocracySummary),
    QuasiGreedy(QuasiGreedySummary),
    PartialSum(PartialSumSummary),
    Khintchine(KhintchineSummary),
    AlmostGreedy(AlmostGreedySummary),
    WalshBaseline(BaselineSummary),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub kind: ExperimentKind,
    pub plan: String,
    pub seed: u64,
    #[serde(skip)]
    pub records: Vec<ResultRecord>,
    pub summary: Summary,
}

pub fn run_experiment(kind: ExperimentKind, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    match kind {
        ExperimentKind::Democracy => democracy_experiment(cfg),
        ExperimentKind::QuasiGreedy => quasi_greedy_experiment(cfg),
        ExperimentKind::PartialSum => partial_sum_experiment(cfg),
        ExperimentKind::Khintchine => khintchine_experiment(cfg),
        ExperimentKind::AlmostGreedy => almost_greedy_experiment(cfg),
        ExperimentKind::WalshBaseline => baseline_walsh_comparison(cfg),
    }
}

fn engine(cfg: &ExperimentConfig, seed: u64) -> NormEngine {
    NormEngine::Auto {
        samples: cfg.mc_samples,
        seed,
    }
}

/// Seed for the norm of one object of a unit, so sampled norms never share streams.
fn norm_seed(unit: u64, m: u128, p: f64) -> u64 {
    derive_seed(unit, &[m as u64, (m >> 64) as u64, p.to_bits()])
}

fn lp_all(cfg: &ExperimentConfig, f: &WalshSpectrum, unit: u64, m: u128) -> Result<Vec<NormEstimate>> {
    cfg.p
        .iter()
        .map(|&p| engine(cfg, norm_seed(unit, m, p)).lp(f, p))
        .collect()
}

fn flatten<T>(units: Vec<Result<Vec<T>>>) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for u in units {
        out.extend(u?);
    }
    Ok(out)
}

fn report(
    kind: ExperimentKind,
    cfg: &ExperimentConfig,
    plan: &BlockPlan,
    records: Vec<ResultRecord>,
    summary: Summary,
) -> ExperimentReport {
    ExperimentReport {
        kind,
        plan: plan.label(),
        seed: cfg.seed,
        records,
        summary,
    }
}

/// `‖sum_{m in A} ψ_m‖_p / |A|^(1/2)` for `cfg.trials` random sets `A` of
/// each size.
pub fn democracy_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let plan = cfg.plan_checked()?;
    let label = plan.label();
    let sizes = cfg.all_sizes();
    let dim = plan.dimension();
    if let Some(&s) = sizes.iter().find(|&&s| s == 0 || s as u128 > dim) {
        return Err(Error::Config(format!("democracy size {s} outside 1..={dim}")));
    }
    let dim = usize::try_from(dim).unwrap_or(usize::MAX);
    let units: Vec<(usize, u64)> = sizes
        .iter()
        .flat_map(|&s| (0..cfg.trials as u64).map(move |t| (s, t)))
        .collect();
    let rows = units
        .par_iter()
        .map(|&(size, trial)| {
            let unit = derive_seed(cfg.seed, &[DEMOCRACY_STREAM, size as u64, trial]);
            let mut set: Vec<u128> = sample(&mut rng_for(unit), dim, size)
                .into_iter()
                .map(|i| i as u128 + 1)
                .collect();
            set.sort_unstable();
            let f = sum_spectrum(&plan, &set)?;
            let scale = NormEstimate::exact(0.0, (size as f64).sqrt());
            Ok(lp_all(cfg, &f, unit, size as u128)?
                .iter()
                .map(|e| ResultRecord::ratio("democracy", &label, size as u128, trial, e, &scale, unit))
                .collect())
        })
        .collect::<Vec<_>>();
    let records = flatten(rows)?;
    let mut per_size = Vec::new();
    for &s in sizes.iter().unique() {
        let rows = records.iter().filter(|r| r.size_or_m == s as u128);
        per_size.push((s, stats_by_p(rows, &cfg.p)));
    }
    let summary = DemocracySummary {
        per_p: stats_by_p(&records, &cfg.p),
        per_size,
    };
    Ok(report(
        ExperimentKind::Democracy,
        cfg,
        &plan,
        records,
        Summary::Democracy(summary),
    ))
}

/// `m` values to evaluate for a support of size `s`.
fn m_values(cfg: &ExperimentConfig, s: usize) -> Vec<usize> {
    if cfg.m_grid.is_empty() {
        (1..=s).collect()
    } else {
        cfg.m_grid
            .iter()
            .copied()
            .filter(|&m| m >= 1 && m <= s)
            .sorted()
            .dedup()
            .collect()
    }
}

/// `G_m f` for each `m` in increasing `ms`, built incrementally.
fn greedy_prefixes<S: OrthonormalSystem + ?Sized>(
    system: &S,
    coeffs: &CoefficientList,
    ordering: &GreedyOrdering,
    ms: &[usize],
) -> Result<Vec<WalshSpectrum>> {
    let mut out = Vec::with_capacity(ms.len());
    let mut g = WalshSpectrum::new();
    let mut done = 0;
    for &m in ms {
        let new: Vec<(u128, f64)> = ordering.positions()[done..m]
            .iter()
            .map(|&p| coeffs.entries()[p])
            .collect();
        if !new.is_empty() {
            g = g.add(&system.synthesize(&new)?);
        }
        done = m;
        out.push(g.clone());
    }
    Ok(out)
}

struct GreedyUnit {
    ratios: Vec<ResultRecord>,
    residuals: Vec<ResultRecord>,
    parseval_deviation: f64,
    terminal_residual: f64,
}

#[allow(clippy::too_many_arguments)]
fn greedy_unit<S: OrthonormalSystem + ?Sized>(
    cfg: &ExperimentConfig,
    system: &S,
    experiment: &str,
    label: &str,
    trial: u64,
    func: &CorpusFunction,
    unit: u64,
    with_residuals: bool,
) -> Result<GreedyUnit> {
    let coeffs = &func.coeffs;
    let f = func.synthesize_in(system)?;
    let ordering = greedy_order(coeffs);
    let support = ordering.len();
    let mut ms = m_values(cfg, support);
    if with_residuals && !ms.contains(&support) {
        ms.push(support);
    }
    let full = lp_all(cfg, &f, unit, 0)?;
    let prefixes = greedy_prefixes(system, coeffs, &ordering, &ms)?;
    let mut out = GreedyUnit {
        ratios: Vec::new(),
        residuals: Vec::new(),
        parseval_deviation: 0.0,
        terminal_residual: 0.0,
    };
    for (&m, g) in ms.iter().zip(&prefixes) {
        let in_grid = cfg.m_grid.is_empty() || cfg.m_grid.contains(&m);
        if in_grid {
            for (e, base) in lp_all(cfg, g, unit, m as u128)?.iter().zip(&full) {
                out.ratios
                    .push(ResultRecord::ratio(experiment, label, m as u128, trial, e, base, unit));
            }
        }
        if with_residuals {
            let r = f.sub(g).l2_norm();
            out.parseval_deviation = out
                .parseval_deviation
                .max((r - parseval_tail(coeffs, &ordering, m)).abs());
            if m == support {
                out.terminal_residual = r;
            }
            if in_grid {
                out.residuals.push(ResultRecord::exact(
                    "quasigreedy_residual",
                    label,
                    2.0,
                    m as u128,
                    trial,
                    r,
                    unit,
                ));
            }
        }
    }
    Ok(out)
}

/// `sup_m ‖G_m f‖_p / ‖f‖_p` for every corpus function, with the `L_2`
/// residual curve checked against the dropped coefficients.
pub fn quasi_greedy_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let plan = cfg.plan_checked()?;
    let label = plan.label();
    let corpus = corpus_functions(&cfg.corpus, cfg.seed, &plan)?;
    let system = PsiSystem::new(&plan);
    let units = corpus
        .par_iter()
        .enumerate()
        .map(|(i, func)| {
            let unit = derive_seed(cfg.seed, &[QUASI_GREEDY_STREAM, i as u64]);
            greedy_unit(cfg, &system, "quasigreedy", &label, i as u64, func, unit, true)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut records = Vec::new();
    let (mut dev, mut term) = (0.0f64, 0.0f64);
    for u in units {
        records.extend(u.ratios);
        records.extend(u.residuals);
        dev = dev.max(u.parseval_deviation);
        term = term.max(u.terminal_residual);
    }
    let summary = QuasiGreedySummary {
        per_p: stats_by_p(records.iter().filter(|r| r.experiment == "quasigreedy"), &cfg.p),
        per_function: sups_by_function(&records, "quasigreedy", &corpus),
        max_parseval_deviation: dev,
        max_terminal_residual: term,
    };
    Ok(report(
        ExperimentKind::QuasiGreedy,
        cfg,
        &plan,
        records,
        Summary::QuasiGreedy(summary),
    ))
}

fn block_ends(plan: &BlockPlan) -> Vec<u128> {
    (1..=plan.horizon())
        .map(|k| plan.block_start(k) + plan.block_size(k))
        .collect()
}

/// `‖S_n f‖_p / ‖f‖_p` over the corpus for every `n` in the grid.
pub fn partial_sum_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let plan = cfg.plan_checked()?;
    let label = plan.label();
    let dim = plan.dimension();
    let grid: Vec<u128> = if cfg.n_grid.is_empty() {
        if dim > MAX_DEFAULT_N_GRID {
            return Err(Error::Config(format!("plan dimension {dim} needs an explicit n_grid")));
        }
        (1..=dim).collect()
    } else {
        cfg.n_grid
            .iter()
            .copied()
            .filter(|&n| n >= 1)
            .sorted()
            .dedup()
            .collect()
    };
    let corpus = corpus_functions(&cfg.corpus, cfg.seed, &plan)?;
    let system = PsiSystem::new(&plan);
    let units = corpus
        .par_iter()
        .enumerate()
        .map(|(i, func)| -> Result<(Vec<ResultRecord>, f64)> {
            let unit = derive_seed(cfg.seed, &[PARTIAL_SUM_STREAM, i as u64]);
            let entries = func.coeffs.entries();
            let f = func.synthesize_in(&system)?;
            let full = lp_all(cfg, &f, unit, 0)?;
            let f_l2 = f.l2_norm();
            let mut rows = Vec::new();
            let mut excess = f64::NEG_INFINITY;
            let mut s = WalshSpectrum::new();
            let mut taken = 0;
            let mut norms: Option<Vec<NormEstimate>> = None;
            for &n in &grid {
                let upto = entries.partition_point(|&(m, _)| m <= n);
                if upto > taken || norms.is_none() {
                    if upto > taken {
                        s = s.add(&system.synthesize(&entries[taken..upto])?);
                        taken = upto;
                    }
                    norms = Some(lp_all(cfg, &s, unit, n)?);
                    excess = excess.max(s.l2_norm() - f_l2);
                }
                for (e, base) in norms.as_ref().into_iter().flatten().zip(&full) {
                    rows.push(ResultRecord::ratio("partialsum", &label, n, i as u64, e, base, unit));
                }
            }
            Ok((rows, excess))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut records = Vec::new();
    let mut max_l2_excess = f64::NEG_INFINITY;
    for (rows, excess) in units {
        records.extend(rows);
        max_l2_excess = max_l2_excess.max(excess);
    }
    let ends = block_ends(&plan);
    let max_terminal_deviation = records
        .iter()
        .filter(|r| r.size_or_m == dim)
        .map(|r| (r.value - 1.0).abs())
        .fold(0.0, f64::max);
    let summary = PartialSumSummary {
        per_p: stats_by_p(&records, &cfg.p),
        boundary: stats_by_p(records.iter().filter(|r| ends.contains(&r.size_or_m)), &cfg.p),
        interior: stats_by_p(records.iter().filter(|r| !ends.contains(&r.size_or_m)), &cfg.p),
        max_l2_excess,
        max_terminal_deviation,
    };
    Ok(report(
        ExperimentKind::PartialSum,
        cfg,
        &plan,
        records,
        Summary::PartialSum(summary),
    ))
}

/// `3 (sum a^2)^2 - 2 sum a^4`, the fourth moment of `sum a_k r_k`.
pub fn rademacher_fourth_moment(a: &[f64]) -> f64 {
    let s2: f64 = a.iter().map(|x| x * x).sum();
    let s4: f64 = a.iter().map(|x| x.powi(4)).sum();
    3.0 * s2 * s2 - 2.0 * s4
}

/// `sum a_k r_k` as a Walsh series.
pub fn rademacher_sum(a: &[f64]) -> WalshSpectrum {
    WalshSpectrum::from_terms(a.iter().enumerate().map(|(k, &c)| (rademacher_index(k + 1), c)))
}

/// Exact `‖sum a_k r_k‖_p / ‖a‖_2` by enumerating all `2^n` sign patterns,
/// for random `a` of random length `n <= cfg.khintchine_terms`.
pub fn khintchine_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let plan = cfg.plan_checked()?;
    let label = plan.label();
    let units = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|trial| -> Result<Vec<ResultRecord>> {
            let unit = derive_seed(cfg.seed, &[KHINTCHINE_STREAM, trial]);
            let mut rng = rng_for(unit);
            let n = rng.gen_range(1..=cfg.khintchine_terms);
            let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let f = rademacher_sum(&a);
            let a2 = NormEstimate::exact(0.0, f.l2_norm());
            let mut rows = Vec::new();
            for &p in &cfg.p {
                let e = lp_dense(&f, p)?;
                rows.push(ResultRecord::ratio(
                    "khintchine",
                    &label,
                    n as u128,
                    trial,
                    &e,
                    &a2,
                    unit,
                ));
            }
            let dense = synthesize(&f, n)?;
            let moment = dense.abs_power_mean(4.0);
            let expect = rademacher_fourth_moment(&a);
            let err = ratio((moment - expect).abs(), expect.abs());
            rows.push(ResultRecord::exact(
                "khintchine_fourth_moment_error",
                &label,
                4.0,
                n as u128,
                trial,
                err,
                unit,
            ));
            Ok(rows)
        })
        .collect::<Vec<_>>();
    let records = flatten(units)?;
    let per_p = stats_by_p(records.iter().filter(|r| r.experiment == "khintchine"), &cfg.p)
        .into_iter()
        .map(|s| KhintchineConstants {
            p: s.p,
            a_p: s.min,
            b_p: s.max,
        })
        .collect();
    let max_fourth_moment_error = records
        .iter()
        .filter(|r| r.experiment == "khintchine_fourth_moment_error")
        .map(|r| r.value)
        .fold(0.0, f64::max);
    let summary = KhintchineSummary {
        per_p,
        max_fourth_moment_error,
    };
    Ok(report(
        ExperimentKind::Khintchine,
        cfg,
        &plan,
        records,
        Summary::Khintchine(summary),
    ))
}

/// Candidate index sets of size `m` drawn from the support. The greedy set
/// is always first.
fn candidate_sets<R: Rng>(
    plan: &BlockPlan,
    coeffs: &CoefficientList,
    ordering: &GreedyOrdering,
    m: usize,
    random: usize,
    rng: &mut R,
) -> Result<Vec<Vec<u128>>> {
    let support: Vec<(u128, f64)> = ordering.positions().iter().map(|&p| coeffs.entries()[p]).collect();
    let take = |mut v: Vec<(u128, f64)>| {
        let mut set: Vec<u128> = v.drain(..m).map(|(i, _)| i).collect();
        set.sort_unstable();
        set
    };
    let by_mag_desc = |a: &(u128, f64), b: &(u128, f64)| b.1.abs().total_cmp(&a.1.abs());
    let mut sets = vec![take(support.clone())];
    // Another L_2-optimal set: equal magnitudes resolved towards larger indices.
    let mut v = support.clone();
    v.sort_by(|a, b| by_mag_desc(a, b).then(b.0.cmp(&a.0)));
    sets.push(take(v));
    let mut v = support.clone();
    v.sort_by_key(|e| e.0);
    sets.push(take(v));
    let blocks: Vec<usize> = support
        .iter()
        .map(|e| plan.to_block(e.0).map(|b| b.block))
        .collect::<Result<_>>()?;
    let mut v: Vec<((u128, f64), usize)> = support.iter().copied().zip(blocks).collect();
    v.sort_by(|a, b| a.1.cmp(&b.1).then(by_mag_desc(&a.0, &b.0)).then(a.0 .0.cmp(&b.0 .0)));
    sets.push(take(v.iter().map(|e| e.0).collect()));
    v.sort_by(|a, b| b.1.cmp(&a.1).then(by_mag_desc(&a.0, &b.0)).then(a.0 .0.cmp(&b.0 .0)));
    sets.push(take(v.iter().map(|e| e.0).collect()));
    for _ in 0..random {
        let picked = sample(rng, support.len(), m);
        let mut set: Vec<u128> = picked.into_iter().map(|i| support[i].0).collect();
        set.sort_unstable();
        sets.push(set);
    }
    let mut seen = std::collections::BTreeSet::new();
    sets.retain(|s| seen.insert(s.clone()));
    Ok(sets)
}

/// `‖f - P_A f‖_p`, i.e. the norm of the coefficients outside `A`.
fn complement_norms<S: OrthonormalSystem + ?Sized>(
    cfg: &ExperimentConfig,
    system: &S,
    coeffs: &CoefficientList,
    set: &[u128],
    unit: u64,
    tag: u128,
) -> Result<Vec<NormEstimate>> {
    let rest: Vec<(u128, f64)> = coeffs
        .entries()
        .iter()
        .copied()
        .filter(|e| set.binary_search(&e.0).is_err())
        .collect();
    lp_all(cfg, &system.synthesize(&rest)?, unit, tag)
}

/// `‖f - G_m f‖_p / min_A ‖f - P_A f‖_p` with `A` ranging over candidate
/// sets: the greedy set, other `L_2`-optimal sets, the partial-sum set,
/// block-ordered sets, random sets, and every set when the support is at most
/// `cfg.exhaustive_up_to`. Only `m` below the support size are evaluated.
pub fn almost_greedy_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let plan = cfg.plan_checked()?;
    let label = plan.label();
    let corpus = corpus_functions(&cfg.corpus, cfg.seed, &plan)?;
    let system = PsiSystem::new(&plan);
    let units = corpus
        .par_iter()
        .enumerate()
        .map(|(i, func)| -> Result<(Vec<ResultRecord>, usize, usize)> {
            let unit = derive_seed(cfg.seed, &[ALMOST_GREEDY_STREAM, i as u64]);
            let mut rng = rng_for(unit);
            let coeffs = &func.coeffs;
            let ordering = greedy_order(coeffs);
            let support = ordering.len();
            let mut rows = Vec::new();
            let (mut cases, mut agree) = (0, 0);
            for m in m_values(cfg, support).into_iter().filter(|&m| m < support) {
                let sets = candidate_sets(&plan, coeffs, &ordering, m, cfg.random_candidates, &mut rng)?;
                let mut tag = 0u128;
                let mut next_tag = || {
                    tag += 1;
                    ((m as u128) << 64) | tag
                };
                let greedy = complement_norms(cfg, &system, coeffs, &sets[0], unit, next_tag())?;
                let mut best = greedy.clone();
                let keep_min = |best: &mut Vec<NormEstimate>, new: Vec<NormEstimate>| {
                    for (b, e) in best.iter_mut().zip(new) {
                        if e.value < b.value {
                            *b = e;
                        }
                    }
                };
                for set in &sets[1..] {
                    keep_min(
                        &mut best,
                        complement_norms(cfg, &system, coeffs, set, unit, next_tag())?,
                    );
                }
                if support <= cfg.exhaustive_up_to {
                    let mut exhaustive = best.clone();
                    for combo in coeffs.support().map(|e| e.0).combinations(m) {
                        keep_min(
                            &mut exhaustive,
                            complement_norms(cfg, &system, coeffs, &combo, unit, next_tag())?,
                        );
                    }
                    cases += best.len();
                    agree += best.iter().zip(&exhaustive).filter(|(a, b)| a.value == b.value).count();
                    best = exhaustive;
                }
                for (e, b) in greedy.iter().zip(&best) {
                    rows.push(ResultRecord::ratio(
                        ALMOST_GREEDY_LABEL,
                        &label,
                        m as u128,
                        i as u64,
                        e,
                        b,
                        unit,
                    ));
                }
            }
            Ok((rows, cases, agree))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut records = Vec::new();
    let (mut exhaustive_cases, mut exhaustive_agreement) = (0, 0);
    for (rows, c, a) in units {
        records.extend(rows);
        exhaustive_cases += c;
        exhaustive_agreement += a;
    }
    let summary = AlmostGreedySummary {
        per_p: stats_by_p(&records, &cfg.p),
        per_function: sups_by_function(&records, ALMOST_GREEDY_LABEL, &corpus),
        exhaustive_cases,
        exhaustive_agreement,
    };
    Ok(report(
        ExperimentKind::AlmostGreedy,
        cfg,
        &plan,
        records,
        Summary::AlmostGreedy(summary),
    ))
}

/// The quasi-greedy sweep run twice on the same coefficient lists: once in
/// the rotated basis and once with `e_m = W_(m-1)`.
pub fn baseline_walsh_comparison(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let plan = cfg.plan_checked()?;
    let corpus = corpus_functions(&cfg.corpus, cfg.seed, &plan)?;
    let psi = PsiSystem::new(&plan);
    let walsh = WalshSystem::new(plan.dimension());
    let (psi_label, walsh_label) = (psi.label(), walsh.label());
    let units = corpus
        .par_iter()
        .enumerate()
        .map(|(i, func)| -> Result<Vec<ResultRecord>> {
            let unit = derive_seed(cfg.seed, &[BASELINE_STREAM, i as u64]);
            let a = greedy_unit(cfg, &psi, "walsh-baseline", &psi_label, i as u64, func, unit, false)?;
            let b = greedy_unit(cfg, &walsh, "walsh-baseline", &walsh_label, i as u64, func, unit, false)?;
            Ok(a.ratios.into_iter().chain(b.ratios).collect())
        })
        .collect::<Vec<_>>();
    let records = flatten(units)?;
    let split = |l: &str| -> Vec<ResultRecord> { records.iter().filter(|r| r.plan == l).cloned().collect() };
    let (psi_rows, walsh_rows) = (split(&psi_label), split(&walsh_label));
    let per_p = stats_by_p(&psi_rows, &cfg.p)
        .into_iter()
        .zip(stats_by_p(&walsh_rows, &cfg.p))
        .map(|(a, b)| BaselineConstants {
            p: a.p,
            psi: a.max,
            walsh: b.max,
        })
        .collect();
    let summary = BaselineSummary {
        per_p,
        psi: sups_by_function(&psi_rows, "walsh-baseline", &corpus),
        walsh: sups_by_function(&walsh_rows, "walsh-baseline", &corpus),
    };
    Ok(report(
        ExperimentKind::WalshBaseline,
        cfg,
        &plan,
        records,
        Summary::WalshBaseline(summary),
    ))
}

#[cfg(test)]
mod tests;
