use iceberg::effects::{minimal_fault_subset, FaultRecord, Outcome};
use iceberg::experiments::*;
use iceberg::stats::{wilson_interval, RatesReport, CSV_SCHEMA};
use proptest::prelude::*;

fn spec(kind: ExperimentKind, code: &str, p: Vec<f64>, shots: u64, rounds: u32) -> ExperimentSpec {
    let mut s = ExperimentSpec::new(kind, code, p);
    s.shots = shots;
    s.rounds = rounds;
    s.seed = 99;
    s
}

fn rates(s: &ExperimentSpec) -> Vec<RatesReport> {
    match run(s).unwrap() {
        ExperimentOutput::Rates(r) => r,
        other => panic!("unexpected output {other:?}"),
    }
}

#[test]
fn noiseless_experiments_report_zero_rates() {
    for kind in [ExperimentKind::RepeatedEc, ExperimentKind::TransversalCnot, ExperimentKind::TeleportedCnot] {
        let r = rates(&spec(kind, "c1224", vec![0.0], 2_000, 2));
        assert_eq!((r[0].accepted, r[0].logical_errors), (2_000, 0), "{kind}");
        assert_eq!((r[0].p_l, r[0].p_r), (0.0, 0.0));
    }
    let r = rates(&spec(ExperimentKind::IcebergDetection, "c422", vec![0.0], 1_000, 3));
    assert_eq!(r[0].accepted, 1_000);
}

#[test]
fn rates_are_per_round() {
    let one = rates(&spec(ExperimentKind::RepeatedEc, "c1224", vec![3e-3], 20_000, 1));
    let four = rates(&spec(ExperimentKind::RepeatedEc, "c1224", vec![3e-3], 20_000, 4));
    assert_eq!(four[0].rounds, 4);
    assert!((four[0].p_r - four[0].rejected() as f64 / (4.0 * 20_000.0)).abs() < 1e-15);
    assert!(four[0].rejected() > one[0].rejected());
}

#[test]
fn identical_specs_give_identical_csv() {
    let s = spec(ExperimentKind::RepeatedEc, "c1224", vec![2e-3, 4e-3], 10_000, 2);
    let a = RatesReport::to_csv(&rates(&s)).unwrap();
    let b = RatesReport::to_csv(&rates(&s)).unwrap();
    assert_eq!(a, b);
    assert!(a.starts_with(CSV_SCHEMA));
    assert_eq!(a.lines().count(), 4);
}

#[test]
fn code_capacity_rows_follow_the_grid() {
    let r = rates(&spec(ExperimentKind::CodeCapacity, "c2026", vec![0.01, 0.05, 0.1], 20_000, 1));
    assert_eq!(r.len(), 3);
    assert!(r[0].p_r < r[1].p_r && r[1].p_r < r[2].p_r);
    assert!(r.iter().all(|x| x.p_l_low <= x.p_l && x.p_l <= x.p_l_high));
}

#[test]
fn correlated_decoding_is_not_shipped() {
    let mut s = spec(ExperimentKind::RepeatedEc, "c1224", vec![1e-3], 10, 1);
    s.decoder = DecoderMode::CorrelatedExtension;
    assert!(run(&s).is_err());
}

#[test]
fn spec_files_parse() {
    let text = "[ec]\nkind = repeated-ec\ncode = c2026\np = 0.001\nshots = 5\n# trailing\n[cap]\nkind = code-capacity\ncode = c422\np = 0.01, 0.1\nfactory = one-stage\n";
    let s = parse_specs(text).unwrap();
    assert_eq!(s[0].descriptor(), "ec");
    assert_eq!(s[1].factory, Some(FactoryMode::OneStage));
    let j = parse_specs(r#"[{"kind": "factory-overhead", "code": "c3628", "p": [0.004], "factory": "two-stage"}]"#).unwrap();
    assert_eq!(j[0].factory, Some(FactoryMode::TwoStage));
    assert!(parse_specs("kind = warp-drive\ncode = c422\np = 0.1\n").is_err());
}

#[test]
fn budget_helpers() {
    let b = |l, a| postselection_budget(l, a).unwrap().round();
    assert_eq!((b(0.01, 0.05), b(0.01, 0.10)), (300.0, 230.0));
    assert!((b(0.01, 0.01) - 460.0).abs() <= 1.0);
    let n = max_operations(0.01, 0.05, 1e-8, 1e-4).unwrap();
    assert!((n - 0.05f64.ln().abs() / 1e-4).abs() < 1e-6);
    assert_eq!(max_operations(0.01, 0.05, 1e-6, 1e-9).unwrap(), 0.01 / 1e-6);
    assert_eq!(steady_state_estimate(0.1, 0.2, 0.3, 0.4, EcStyle::Knill).unwrap(), 0.1 + 0.3 + 0.4);
}

#[test]
fn exact_series_matches_counts() {
    let (_, c, cp) = exact_series("c3628", 5).unwrap();
    assert_eq!((c, cp), (54432, 23544));
}

#[test]
fn two_faults_suffice_out_of_three() {
    let program = repeated_ec_program(&source_for("c1224", None).unwrap(), 1).unwrap();
    let s = sampler_for(&program).unwrap();
    let faults = s.all_single_faults();
    let ok = |f| s.evaluate(&[f]) == Outcome::Ok;
    let singles: Vec<_> = faults.iter().copied().filter(|&f| ok(f)).step_by(7).take(60).collect();
    let mut found = None;
    'search: for (i, &a) in singles.iter().enumerate() {
        for &b in &singles[i + 1..] {
            let target = s.evaluate(&[a, b]);
            if !matches!(target, Outcome::Reject | Outcome::LogicalError) {
                continue;
            }
            for &c in &singles {
                if c == a || c == b {
                    continue;
                }
                if s.evaluate(&[a, b, c]) == target && s.evaluate(&[a, c]) != target && s.evaluate(&[b, c]) != target {
                    found = Some((a, b, c, target));
                    break 'search;
                }
            }
        }
    }
    let (a, b, c, target) = found.expect("a reproducing pair exists");
    let (sub, exact) = minimal_fault_subset(&s, &FaultRecord { faults: vec![c, a, b] }, target);
    assert!(exact);
    assert_eq!(sub.len(), 2);
    assert!(sub.contains(&a) && sub.contains(&b));
}

#[test]
fn histogram_orders_respect_distance() {
    let program = repeated_ec_program(&source_for("c1224", None).unwrap(), 2).unwrap();
    let h = fault_histogram_of(&program, "c1224", 6e-3, 40_000, 3, 300).unwrap();
    assert_eq!(h.logical.iter().take(2).sum::<u64>(), 0, "{h:?}");
    assert_eq!(h.rejection.iter().take(2).sum::<u64>(), 0, "{h:?}");
    assert!(h.rejection.iter().sum::<u64>() > 0);
    assert_eq!(FaultOrderHistogram::mode(&h.rejection), Some(2));
    assert!(h.to_json().contains("\"rejection\""));
}

#[test]
fn single_faults_have_order_one() {
    let program = repeated_ec_program(&source_for("c422", None).unwrap(), 1).unwrap();
    let s = sampler_for(&program).unwrap();
    let f = s.all_single_faults().into_iter().find(|&f| s.evaluate(&[f]) == Outcome::Reject).unwrap();
    let (sub, _) = minimal_fault_subset(&s, &FaultRecord { faults: vec![f] }, Outcome::Reject);
    assert_eq!(sub, vec![f]);
}

#[test]
fn cnot_rounds_cost_more_than_memory() {
    let p = vec![4e-3];
    let ec = rates(&spec(ExperimentKind::RepeatedEc, "c1224", p.clone(), 40_000, 3));
    let tr = rates(&spec(ExperimentKind::TransversalCnot, "c1224", p.clone(), 40_000, 3));
    let te = rates(&spec(ExperimentKind::TeleportedCnot, "c1224", p, 40_000, 3));
    assert!(tr[0].p_r > 1.8 * ec[0].p_r);
    assert!(te[0].p_r <= tr[0].p_r);
}

proptest! {
    #[test]
    fn wilson_contains_the_estimate(n in 1u64..100_000, frac in 0.0f64..=1.0) {
        let k = ((n as f64) * frac) as u64;
        let (lo, hi) = wilson_interval(k, n).unwrap();
        let p = k as f64 / n as f64;
        prop_assert!(lo <= p + 1e-12 && p <= hi + 1e-12);
        prop_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
    }

    #[test]
    fn budget_grows_as_the_floor_drops(l in 1e-4f64..0.5, a in 0.01f64..0.9, b in 0.01f64..0.9) {
        prop_assume!(a < b);
        prop_assert!(postselection_budget(l, a).unwrap() > postselection_budget(l, b).unwrap());
    }

    #[test]
    fn slopes_recover_exponents(e in 1.0f64..6.0, scale in 1e-8f64..1e-2) {
        let pts: Vec<(f64, f64)> = [2e-3, 3e-3, 4e-3].iter().map(|&x: &f64| (x, scale * x.powf(e))).collect();
        prop_assert!((log_log_slope(&pts).unwrap() - e).abs() < 1e-9);
    }
}
