use seqcorrect_core::corrections::DfMode;
use seqcorrect_core::montecarlo::{table_scenarios, PivotKind, THREADS_ENV};
use seqcorrect_core::{
    simulate_scenario, wald_diagnostics, Case, DesignSpec, RngStream, Scenario, TableId,
    TrueParams, VarianceDivisor,
};

fn small() -> Scenario {
    let design = DesignSpec::sprt(10.0, 0.1, 5.0).unwrap();
    let params = TrueParams::new(0.6, 1.0, 1.0, 1.0, 0.8).unwrap();
    Scenario::new(design, params, Case::C3, 2000, 77)
}

// Everything touching the thread-count variable lives in this one test so
// parallel test threads never race on it.
#[test]
fn reports_do_not_depend_on_thread_count() {
    let sc = small();
    std::env::set_var(THREADS_ENV, "1");
    let one = simulate_scenario(&sc).unwrap();
    let diag_one = wald_diagnostics(&sc).unwrap();
    std::env::set_var(THREADS_ENV, "4");
    let four = simulate_scenario(&sc).unwrap();
    let diag_four = wald_diagnostics(&sc).unwrap();
    std::env::set_var(THREADS_ENV, "lots");
    assert!(simulate_scenario(&sc).is_err());
    std::env::remove_var(THREADS_ENV);
    let auto = simulate_scenario(&sc).unwrap();
    assert_eq!(one, four);
    assert_eq!(one, auto);
    assert_eq!(diag_one, diag_four);
}

#[test]
fn seed_changes_the_report() {
    let a = simulate_scenario(&small()).unwrap();
    let mut sc = small();
    sc.seed += 1;
    let b = simulate_scenario(&sc).unwrap();
    assert_ne!(a.expected_n, b.expected_n);
}

#[test]
fn trials_replay_from_their_stream() {
    let sc = small();
    let t1 = sc.design.run_trial(&sc.params, &mut RngStream::new(77, 5)).unwrap();
    let t2 = sc.design.run_trial(&sc.params, &mut RngStream::new(77, 5)).unwrap();
    let t3 = sc.design.run_trial(&sc.params, &mut RngStream::new(77, 6)).unwrap();
    assert_eq!(t1, t2);
    assert_ne!(t1.stats, t3.stats);
    assert!(t1.n >= sc.design.m0() && t1.n <= sc.design.m_max());
}

#[test]
fn tallies_are_consistent() {
    let rep = simulate_scenario(&small()).unwrap();
    assert_eq!(rep.pivots.len(), 3);
    for p in &rep.pivots {
        for l in &p.levels {
            assert!((l.lower + l.upper + l.coverage - 1.0).abs() < 1e-12);
            assert!(l.lower_count + l.upper_count <= rep.replicates);
        }
    }
    assert!(rep.power.is_none());
    // correcting for the selection bias moves coverage toward nominal
    let naive = rep.tally(PivotKind::Naive, 0.90).unwrap();
    let corr = rep.tally(PivotKind::Corrected(DfMode::StudentARho), 0.90).unwrap();
    assert!((corr.coverage - 0.90).abs() < (naive.coverage - 0.90).abs());
}

#[test]
fn divisor_is_table_specific() {
    for id in TableId::ALL {
        let expected = if id.case() == Case::C3 {
            VarianceDivisor::MaxLikelihood
        } else {
            VarianceDivisor::Unbiased
        };
        for sc in table_scenarios(id, 10, 1).unwrap() {
            assert_eq!(sc.variance_divisor, expected, "{id}");
        }
    }
}

#[test]
fn invalid_scenarios_are_rejected() {
    let mut sc = small();
    sc.replicates = 0;
    assert!(simulate_scenario(&sc).is_err());
    let mut sc = small();
    sc.levels = vec![1.5];
    assert!(simulate_scenario(&sc).is_err());
}
