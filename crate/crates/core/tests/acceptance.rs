//! Acceptance checks, one per numbered criterion. Runs without the libtest
//! harness so that every criterion prints a PASS/FAIL line.

// `!(x <= limit)` is deliberate: NaN must fail a check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use almost_greedy::basis::{psi_spectrum, BlockPlan, GrowthSchedule};
use almost_greedy::experiments::{
    rademacher_fourth_moment, rademacher_sum, run_experiment, write_records, ExperimentConfig, ExperimentKind, Summary,
    ALMOST_GREEDY_LABEL,
};
use almost_greedy::greedy::{greedy_order, parseval_tail, projection, CoefficientList, OrthonormalSystem, PsiSystem};
use almost_greedy::norms::{lp_dense, lp_even_spectral, lp_monte_carlo, sup_norm_dense};
use almost_greedy::olevskii::{check_orthogonality, row_abs_sum, row_abs_sum_closed_form, Accumulation};
use almost_greedy::walsh::{synthesize, Frequency, WalshSpectrum};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn config(name: &str) -> ExperimentConfig {
    ExperimentConfig::load(&data(name)).unwrap()
}

fn run(kind: ExperimentKind, cfg: &ExperimentConfig) -> Result<almost_greedy::experiments::ExperimentReport, String> {
    run_experiment(kind, cfg).map_err(|e| format!("{kind}: {e}"))
}

fn olevskii_orthogonality() -> Outcome {
    let start = Instant::now();
    let mut worst_float = 0.0f64;
    for k in 1..=8 {
        let exact = check_orthogonality(k, Accumulation::Exact).map_err(|e| e.to_string())?;
        ensure!(exact == 0.0, "k = {k}: exact deviation {exact}");
        let float = check_orthogonality(k, Accumulation::Float).map_err(|e| e.to_string())?;
        ensure!(float <= 1e-12, "k = {k}: float deviation {float}");
        worst_float = worst_float.max(float);
    }
    let took = start.elapsed();
    ensure!(took <= Duration::from_secs(10), "took {took:?}");
    Ok(format!("exact 0 for k = 1..8, float <= {worst_float:.1e}, {took:.2?}"))
}

fn row_sum_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for k in 1..=30u32 {
        let closed = row_abs_sum_closed_form(k);
        ensure!(closed <= 2.4143, "k = {k}: closed form {closed}");
        let n = 1u64 << k;
        let rows: Vec<u64> = if k <= 12 {
            (1..=n).collect()
        } else {
            let mut r = vec![1, n / 2, n / 2 + 1, n];
            r.extend((0..64).map(|_| rng.gen_range(1..=n)));
            r
        };
        for i in rows {
            let s = row_abs_sum(k, i).map_err(|e| e.to_string())?;
            ensure!(
                (s - closed).abs() <= 1e-12,
                "k = {k}, row {i}: {s} vs closed form {closed}"
            );
        }
    }
    let at30 = row_abs_sum_closed_form(30);
    let limit = 1.0 + 2f64.sqrt();
    ensure!((at30 - limit).abs() <= 1e-3, "k = 30: {at30}");
    Ok(format!("max over k <= 30 is {at30:.6}, 1 + sqrt 2 = {limit:.6}"))
}

fn small_plan() -> BlockPlan {
    BlockPlan::new(GrowthSchedule::new(vec![2, 4])).unwrap()
}

fn all_elements(plan: &BlockPlan) -> Vec<(usize, WalshSpectrum)> {
    (1..=plan.horizon())
        .flat_map(|k| (1..=plan.block_size(k)).map(move |i| (k, i)))
        .map(|(k, i)| (k, psi_spectrum(plan, k, i).unwrap()))
        .collect()
}

fn basis_orthonormality() -> Outcome {
    let plan = small_plan();
    let elems = all_elements(&plan);
    ensure!(elems.len() == 20, "{} elements", elems.len());
    let mut worst = 0.0f64;
    for (a, (_, x)) in elems.iter().enumerate() {
        for (b, (_, y)) in elems.iter().enumerate() {
            let expect = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((x.inner(y) - expect).abs());
        }
    }
    ensure!(worst <= 1e-12, "Gram deviation {worst}");
    Ok(format!("20 x 20 Gram matrix within {worst:.1e} of identity"))
}

fn uniform_boundedness() -> Outcome {
    let plan = small_plan();
    let depth = usize::try_from(plan.offset(plan.horizon())).unwrap();
    ensure!(depth == 18, "depth {depth}");
    let mut worst = 0.0f64;
    for (k, f) in all_elements(&plan) {
        let sup = sup_norm_dense(&f, depth).map_err(|e| e.to_string())?;
        let bound = row_abs_sum(plan.exponent(k), 1).unwrap();
        ensure!(sup <= 2.45, "block {k}: sup {sup}");
        ensure!(sup <= bound + 1e-12, "block {k}: sup {sup} above row sum {bound}");
        worst = worst.max(sup);
    }
    Ok(format!("largest sup norm {worst:.6} at depth 18"))
}

fn democracy() -> Outcome {
    let cfg = config("democracy.json");
    let max = cfg.thresholds.democracy_max.unwrap();
    let r = run(ExperimentKind::Democracy, &cfg)?;
    let mut n4 = 0;
    let (mut lo4, mut hi4, mut dev2) = (f64::INFINITY, 0.0f64, 0.0f64);
    for row in &r.records {
        ensure!(row.exact, "sampled value in {row:?}");
        if row.p == 4.0 {
            ensure!(
                row.value >= 1.0 - 1e-12 && row.value <= max,
                "ratio {} at size {}",
                row.value,
                row.size_or_m
            );
            lo4 = lo4.min(row.value);
            hi4 = hi4.max(row.value);
            n4 += 1;
        } else if row.p == 2.0 {
            dev2 = dev2.max((row.value - 1.0).abs());
        }
    }
    ensure!(n4 == 200 * 100, "{n4} rows at p = 4");
    ensure!(dev2 <= 1e-12, "p = 2 deviation {dev2}");
    Ok(format!(
        "p=4 ratios in [{lo4:.4}, {hi4:.4}] (limit {max}); p=2 within {dev2:.1e} of 1"
    ))
}

fn corpus_runs() -> Result<(ExperimentConfig, Summary, Summary), String> {
    let cfg = config("corpus.json");
    let q = run(ExperimentKind::QuasiGreedy, &cfg)?.summary;
    let p = run(ExperimentKind::PartialSum, &cfg)?.summary;
    Ok((cfg, q, p))
}

fn quasi_greedy(cfg: &ExperimentConfig, s: &Summary) -> Outcome {
    let Summary::QuasiGreedy(s) = s else { unreachable!() };
    let max = cfg.thresholds.quasi_greedy_max.unwrap();
    let funcs: Vec<_> = s.per_function.iter().filter(|f| f.p == 4.0).collect();
    ensure!(funcs.len() == 50, "{} functions", funcs.len());
    let worst = funcs.iter().map(|f| f.sup).fold(0.0, f64::max);
    ensure!(worst <= max, "sup ratio {worst} above {max}");
    ensure!(
        s.max_parseval_deviation <= 1e-12,
        "Parseval tail deviation {}",
        s.max_parseval_deviation
    );
    ensure!(
        s.max_terminal_residual <= 1e-6,
        "terminal residual {}",
        s.max_terminal_residual
    );
    Ok(format!(
        "p=4 constant {worst:.4} (limit {max}); tail deviation {:.1e}; terminal residual {:.1e}",
        s.max_parseval_deviation, s.max_terminal_residual
    ))
}

fn partial_sums(cfg: &ExperimentConfig, s: &Summary) -> Outcome {
    let Summary::PartialSum(s) = s else { unreachable!() };
    let max = cfg.thresholds.partial_sum_max.unwrap();
    ensure!(
        s.max_l2_excess <= 1e-12,
        "‖S_n f‖_2 exceeds ‖f‖_2 by {}",
        s.max_l2_excess
    );
    let at = |v: &[almost_greedy::experiments::RatioStats]| v.iter().find(|x| x.p == 4.0).unwrap().max;
    let (all, boundary, interior) = (at(&s.per_p), at(&s.boundary), at(&s.interior));
    ensure!(all <= max, "p=4 ratio {all} above frozen constant {max}");
    ensure!(
        boundary <= 2.0 * interior,
        "block-end ratio {boundary} vs interior {interior}"
    );
    Ok(format!(
        "L2 excess {:.1e}; p=4 max {all:.4} (frozen {max}); block ends {boundary:.4}",
        s.max_l2_excess
    ))
}

fn khintchine() -> Outcome {
    let cfg = config("khintchine.json");
    ensure!(cfg.trials == 200 && cfg.khintchine_terms == 16, "config drifted");
    let r = run(ExperimentKind::Khintchine, &cfg)?;
    let Summary::Khintchine(s) = &r.summary else {
        unreachable!()
    };
    let b4 = s.per_p.iter().find(|c| c.p == 4.0).unwrap().b_p;
    ensure!(b4 <= 3f64.powf(0.25) + 1e-12, "B_4 estimate {b4}");
    // Identity check, absolute, on coefficient vectors of the same shape.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = rng.gen_range(1..=16);
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dense = synthesize(&rademacher_sum(&a), n).unwrap();
        let moment = dense.abs_power_mean(4.0);
        worst = worst.max((moment - rademacher_fourth_moment(&a)).abs());
    }
    ensure!(worst <= 1e-12, "fourth-moment identity off by {worst}");
    ensure!(
        s.max_fourth_moment_error <= 1e-12,
        "experiment identity error {}",
        s.max_fourth_moment_error
    );
    Ok(format!(
        "B_4 estimate {b4:.6} <= 3^(1/4) = {:.6}; identity within {worst:.1e}",
        3f64.powf(0.25)
    ))
}

fn random_spectrum(rng: &mut ChaCha8Rng) -> WalshSpectrum {
    let depth = rng.gen_range(1..=12);
    let terms = rng.gen_range(1..=12);
    WalshSpectrum::from_terms((0..terms).map(|_| {
        (
            Frequency::from_u64(rng.gen_range(0..1u64 << depth)),
            rng.gen_range(-1.0..1.0),
        )
    }))
}

fn norm_engines() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let f = random_spectrum(&mut rng);
        for p in [2u32, 4] {
            let d = lp_dense(&f, f64::from(p)).unwrap().value;
            let e = lp_even_spectral(&f, p).unwrap().value;
            worst = worst.max((d - e).abs());
        }
    }
    ensure!(worst <= 1e-10, "dense vs spectral {worst}");
    let mut covered = 0;
    for seed in 0..100u64 {
        let f = random_spectrum(&mut rng);
        let truth = lp_dense(&f, 3.0).unwrap().value;
        if lp_monte_carlo(&f, 3.0, 4000, seed).unwrap().contains(truth) {
            covered += 1;
        }
    }
    ensure!(covered >= 90, "MC interval covered the truth {covered}/100 times");
    Ok(format!(
        "dense vs spectral within {worst:.1e}; MC coverage {covered}/100"
    ))
}

fn greedy_l2_optimality() -> Outcome {
    let plan = BlockPlan::desk();
    let system = PsiSystem::new(&plan);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut subsets = 0u64;
    for _ in 0..50 {
        let s = rng.gen_range(1..=10);
        let idx = rand::seq::index::sample(&mut rng, 276, s);
        // Coarse values make ties common, which exercises the tie rule.
        let entries = idx
            .into_iter()
            .map(|i| (i as u128 + 1, f64::from(rng.gen_range(-4i32..=4)) / 4.0 + 0.01))
            .collect();
        let coeffs = CoefficientList::new(entries).unwrap();
        let f = system.synthesize(coeffs.entries()).unwrap();
        let ordering = greedy_order(&coeffs);
        let support: Vec<u128> = coeffs.support().map(|e| e.0).collect();
        for m in 0..=support.len() {
            let greedy = parseval_tail(&coeffs, &ordering, m);
            let mut set = ordering.indices(&coeffs)[..m].to_vec();
            set.sort_unstable();
            let direct = f.sub(&projection(&system, &coeffs, &set).unwrap()).l2_norm();
            ensure!(
                (greedy - direct).abs() <= 1e-12,
                "greedy residual {direct} vs tail {greedy}"
            );
            for a in support.iter().copied().combinations(m) {
                let r = f.sub(&projection(&system, &coeffs, &a).unwrap()).l2_norm();
                ensure!(direct <= r + 1e-12, "set {a:?} beats greedy at m = {m}: {r} < {direct}");
                subsets += 1;
            }
        }
    }
    Ok(format!("greedy minimal against {subsets} subsets"))
}

fn csv_of(kind: ExperimentKind, cfg_path: &Path, threads: usize, out: &Path) -> Result<Vec<u8>, String> {
    let cfg = ExperimentConfig::load(cfg_path).map_err(|e| e.to_string())?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    let r = pool.install(|| run(kind, &cfg))?;
    let file = std::fs::File::create(out).map_err(|e| e.to_string())?;
    write_records(file, &r.records).map_err(|e| e.to_string())?;
    std::fs::read(out).map_err(|e| e.to_string())
}

fn reproducibility() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = data("reproducibility.json");
    let mut rows = 0;
    for kind in ExperimentKind::ALL {
        let a = csv_of(kind, &cfg, 1, &dir.path().join("a.csv"))?;
        let b = csv_of(kind, &cfg, 4, &dir.path().join("b.csv"))?;
        ensure!(a == b, "{kind}: outputs differ");
        ensure!(a.iter().filter(|&&c| c == b'\n').count() > 1, "{kind}: no rows");
        rows += a.iter().filter(|&&c| c == b'\n').count() - 1;
        if kind == ExperimentKind::AlmostGreedy {
            let text = String::from_utf8(a).unwrap();
            ensure!(
                text.contains(ALMOST_GREEDY_LABEL),
                "almost-greedy rows are not labelled"
            );
        }
    }
    Ok(format!("6 experiments, {rows} rows, identical on 1 and 4 threads"))
}

fn report(n: u32, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    let took = start.elapsed();
    match outcome {
        Ok(detail) => {
            println!("criterion {n:>2} {name}: PASS ({detail}) [{took:.1?}]");
            true
        }
        Err(why) => {
            println!("criterion {n:>2} {name}: FAIL ({why}) [{took:.1?}]");
            false
        }
    }
}

fn main() {
    let mut ok = true;
    ok &= report(1, "olevskii orthogonality", olevskii_orthogonality);
    ok &= report(2, "row-sum bound", row_sum_bound);
    ok &= report(3, "basis orthonormality", basis_orthonormality);
    ok &= report(4, "uniform boundedness", uniform_boundedness);
    ok &= report(5, "democracy", democracy);
    let corpus = corpus_runs();
    ok &= report(6, "quasi-greedy", || {
        let (cfg, q, _) = corpus.as_ref().map_err(Clone::clone)?;
        quasi_greedy(cfg, q)
    });
    ok &= report(7, "partial sums", || {
        let (cfg, _, p) = corpus.as_ref().map_err(Clone::clone)?;
        partial_sums(cfg, p)
    });
    ok &= report(8, "khintchine", khintchine);
    ok &= report(9, "norm-engine coherence", norm_engines);
    ok &= report(10, "greedy L2 optimality", greedy_l2_optimality);
    ok &= report(11, "reproducibility", reproducibility);
    if !ok {
        std::process::exit(1);
    }
}
