use super::*;
use crate::basis::PlanSpec;

fn small(seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(PlanSpec::Schedule { g: vec![2, 4] }, seed);
    cfg.trials = 5;
    cfg.sizes = vec![1, 3, 20];
    cfg.corpus = CorpusSpec {
        count: 6,
        generators: vec!["decay(1.0)".into(), "flat_block(2)".into(), "random_sparse(6)".into()],
    };
    cfg.khintchine_terms = 8;
    cfg
}

fn csv_bytes(r: &ExperimentReport) -> Vec<u8> {
    let mut buf = Vec::new();
    write_records(&mut buf, &r.records).unwrap();
    buf
}

#[test]
fn kind_names_roundtrip() {
    for k in ExperimentKind::ALL {
        assert_eq!(k.as_str().parse::<ExperimentKind>().unwrap(), k);
        assert_eq!(serde_json::to_value(k).unwrap(), k.as_str());
    }
    assert!("greedy".parse::<ExperimentKind>().is_err());
}

#[test]
fn democracy_at_two_is_one() {
    let r = democracy_experiment(&small(1)).unwrap();
    assert_eq!(r.records.len(), 3 * 5 * 2);
    for row in r.records.iter().filter(|r| r.p == 2.0) {
        assert!((row.value - 1.0).abs() <= 1e-12, "{row:?}");
        assert!(row.exact);
    }
    for row in r.records.iter().filter(|r| r.p == 4.0) {
        assert!(row.value >= 1.0 - 1e-12);
    }
}

#[test]
fn democracy_full_block_is_parseval() {
    // The full block 2 of g = (2, 4) is 16 indices, m = 5..=20.
    let plan = BlockPlan::new(crate::basis::GrowthSchedule::new(vec![2, 4])).unwrap();
    let set: Vec<u128> = (5..=20).collect();
    let f = sum_spectrum(&plan, &set).unwrap();
    assert!((f.l2_norm() - 4.0).abs() < 1e-12);
}

#[test]
fn democracy_rejects_oversized_sets() {
    let mut cfg = small(1);
    cfg.sizes = vec![21];
    assert!(matches!(democracy_experiment(&cfg), Err(Error::Config(_))));
}

#[test]
fn single_term_quasi_greedy_is_one() {
    let mut cfg = small(2);
    cfg.corpus = CorpusSpec {
        count: 2,
        generators: vec!["random_sparse(1)".into()],
    };
    let r = quasi_greedy_experiment(&cfg).unwrap();
    for row in r.records.iter().filter(|r| r.experiment == "quasigreedy") {
        assert!((row.value - 1.0).abs() < 1e-12);
    }
    let r = baseline_walsh_comparison(&cfg).unwrap();
    let Summary::WalshBaseline(s) = r.summary else { panic!() };
    for c in s.per_p {
        assert!((c.psi - 1.0).abs() < 1e-12 && (c.walsh - 1.0).abs() < 1e-12);
    }
}

#[test]
fn quasi_greedy_residuals_follow_parseval() {
    let r = quasi_greedy_experiment(&small(3)).unwrap();
    let Summary::QuasiGreedy(s) = &r.summary else { panic!() };
    assert!(s.max_parseval_deviation <= 1e-12);
    assert!(s.max_terminal_residual <= 1e-6);
    let two = s.per_p.iter().find(|x| x.p == 2.0).unwrap();
    assert!(two.max <= 1.0 + 1e-12);
}

#[test]
fn decreasing_coefficients_make_greedy_equal_partial_sums() {
    let mut cfg = small(4);
    cfg.corpus = CorpusSpec {
        count: 3,
        generators: vec!["decay(1.0)".into()],
    };
    let qg = quasi_greedy_experiment(&cfg).unwrap();
    let ps = partial_sum_experiment(&cfg).unwrap();
    let row = |rs: &[ResultRecord], e: &str, m: u128, t: u64, p: f64| {
        rs.iter()
            .find(|r| r.experiment == e && r.size_or_m == m && r.trial == t && r.p == p)
            .map(|r| r.value)
            .unwrap()
    };
    for t in 0..3 {
        for m in 1..=20 {
            let a = row(&qg.records, "quasigreedy", m, t, 4.0);
            let b = row(&ps.records, "partialsum", m, t, 4.0);
            assert!((a - b).abs() < 1e-12, "m = {m}");
        }
    }
}

#[test]
fn partial_sums_are_contractive_in_l2() {
    let r = partial_sum_experiment(&small(5)).unwrap();
    let Summary::PartialSum(s) = &r.summary else { panic!() };
    assert!(s.max_l2_excess <= 1e-12);
    assert!(s.max_terminal_deviation <= 1e-12);
    assert_eq!(r.records.len(), 6 * 20 * 2);
}

#[test]
fn khintchine_bounds() {
    let mut cfg = small(6);
    cfg.trials = 40;
    cfg.p = vec![2.0, 3.0, 4.0];
    let r = khintchine_experiment(&cfg).unwrap();
    let Summary::Khintchine(s) = &r.summary else { panic!() };
    assert!(s.max_fourth_moment_error <= 1e-12);
    for c in &s.per_p {
        if c.p == 2.0 {
            assert!((c.a_p - 1.0).abs() < 1e-12 && (c.b_p - 1.0).abs() < 1e-12);
        } else {
            assert!(c.a_p >= 1.0 / 3f64.sqrt() && c.b_p <= 3f64.powf(0.25) + 1e-12);
            assert!(c.a_p >= 1.0 - 1e-12);
        }
    }
}

#[test]
fn khintchine_single_term() {
    let f = rademacher_sum(&[-0.7]);
    for p in [1.5, 3.0, 4.0] {
        assert!((lp_dense(&f, p).unwrap().value - 0.7).abs() < 1e-15);
    }
    assert!((rademacher_fourth_moment(&[1.0, 1.0]) - 8.0).abs() < 1e-15);
}

#[test]
fn almost_greedy_at_two_is_one_and_exhaustive_agrees() {
    let mut cfg = small(7);
    cfg.corpus = CorpusSpec {
        count: 4,
        generators: vec!["random_sparse(7)".into()],
    };
    cfg.exhaustive_up_to = 10;
    let r = almost_greedy_experiment(&cfg).unwrap();
    let Summary::AlmostGreedy(s) = &r.summary else { panic!() };
    for row in &r.records {
        assert_eq!(row.experiment, ALMOST_GREEDY_LABEL);
        assert!(row.value >= 1.0 - 1e-12);
        if row.p == 2.0 {
            assert!((row.value - 1.0).abs() <= 1e-12);
        }
    }
    assert!(s.exhaustive_cases > 0);
}

#[test]
fn candidate_sets_start_with_greedy_and_are_distinct() {
    let plan = BlockPlan::desk();
    let coeffs = CoefficientList::new(vec![(1, 0.5), (3, -1.0), (7, 0.5), (30, 2.0)]).unwrap();
    let ordering = greedy_order(&coeffs);
    let sets = candidate_sets(&plan, &coeffs, &ordering, 2, 5, &mut rng_for(0)).unwrap();
    assert_eq!(sets[0], vec![3, 30]);
    let mut uniq = sets.clone();
    uniq.sort();
    uniq.dedup();
    assert_eq!(uniq.len(), sets.len());
    assert!(sets.iter().all(|s| s.len() == 2));
    // Partial-sum set and the tie-flipped greedy set.
    assert!(sets.contains(&vec![1, 3]));
}

#[test]
fn reruns_are_identical_across_thread_counts() {
    let cfg = small(8);
    for kind in ExperimentKind::ALL {
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| run_experiment(kind, &cfg)).unwrap();
        let b = four.install(|| run_experiment(kind, &cfg)).unwrap();
        assert_eq!(csv_bytes(&a), csv_bytes(&b), "{kind}");
        assert!(!a.records.is_empty(), "{kind}");
    }
}

#[test]
fn sampled_norms_carry_intervals() {
    let mut cfg = small(9);
    cfg.p = vec![3.0];
    cfg.mc_samples = 200;
    // g = (2, 5) reaches depth 34, too deep for dense synthesis, so odd p is sampled.
    cfg.plan = PlanSpec::Schedule { g: vec![2, 5] };
    cfg.sizes = vec![4];
    cfg.trials = 2;
    let r = democracy_experiment(&cfg).unwrap();
    for row in &r.records {
        assert_eq!(row.exact, row.ci_low.is_none());
        if !row.exact {
            assert!(row.ci_low.unwrap() <= row.value && row.value <= row.ci_high.unwrap());
        }
    }
}
