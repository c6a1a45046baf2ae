use iceberg::experiments::{factory_overhead, FactoryMode};
use iceberg::factory::catalog;
use iceberg::gadgets::*;
use iceberg::synth::*;
use iceberg::{Error, LogicalAction};

fn check_gadgets(name: &str) {
    let src = Source::one_stage(name).unwrap();
    let k = src.code().k;
    assert!(verify_action(&src, 1, |a, b| Ok(vec![a.steane_ec(&b[0])?]), &LogicalAction::identity(k)).unwrap());
    assert!(verify_action(&src, 1, |a, b| Ok(vec![a.x_ec(&b[0])?]), &LogicalAction::identity(k)).unwrap());
    let tc = LogicalAction::transversal_cnot(k);
    assert!(verify_action(&src, 2, |a, b| {
        a.transversal_cnot(&b[0], &b[1]);
        Ok(b)
    }, &tc)
    .unwrap());
    assert!(verify_action(&src, 2, |a, b| {
        let (x, y) = a.teleported_cnot(&b[0], &b[1])?;
        Ok(vec![x, y])
    }, &tc)
    .unwrap());
}

#[test]
fn k2_gadgets_act_as_declared() {
    for name in ["c422", "c1224", "c2026"] {
        check_gadgets(name);
    }
}

#[test]
fn k4_gadgets_act_as_declared() {
    check_gadgets("c1644");
}

#[test]
fn wrong_expectations_are_caught() {
    let src = Source::one_stage("c1224").unwrap();
    let swapped = LogicalAction::cnot(4, 2, 0);
    assert!(!verify_action(&src, 2, |a, b| {
        a.transversal_cnot(&b[0], &b[1]);
        Ok(b)
    }, &swapped)
    .unwrap());
}

#[test]
fn targeted_schedules() {
    let src = Source::one_stage("c1224").unwrap();
    for (c, t) in [(0, 2), (1, 3), (0, 3), (2, 1), (0, 1), (3, 2)] {
        let s = targeted_cnot_schedule(src.code(), c, t).unwrap();
        let within = c / 2 == t / 2;
        assert_eq!(s.transversal_rounds(), if within { 0 } else { 2 }, "{c}->{t}");
        let want = LogicalAction::cnot(4, c, t);
        assert!(verify_action(&src, 2, |a, b| Ok(a.apply_schedule(&s, [b[0].clone(), b[1].clone()])?.to_vec()), &want)
            .unwrap());
    }
    let c1644 = catalog("c1644").unwrap();
    assert_eq!(targeted_cnot_schedule(&c1644, 0, 5).unwrap().transversal_rounds(), 4);
}

#[test]
fn schedule_errors() {
    let c = catalog("c1224").unwrap();
    assert!(matches!(targeted_cnot_schedule(&c, 1, 1), Err(Error::InvalidArgument(_))));
    assert!(matches!(targeted_cnot_schedule(&c, 0, 4), Err(Error::InvalidArgument(_))));
    let k4 = catalog("c642").unwrap();
    assert!(matches!(targeted_cnot_schedule(&k4, 0, 1), Err(Error::Synthesis(_))));
}

#[test]
fn preparations_produce_their_states() {
    for name in ["c422", "c642", "c1224", "c1644", "c2026"] {
        let src = Source::one_stage(name).unwrap();
        let code = src.code().clone();
        for plus in [0, all_plus(code.k), 1] {
            let f = verified_fragment(&src, plus).unwrap_or_else(|_| std::sync::Arc::new(build_fragment(&src, plus, &VerificationRecipe::default()).unwrap()));
            assert!(verify_preparation(&f, &code, plus).unwrap(), "{name} {plus}");
        }
        let bell = bell_fragment(&src).unwrap();
        assert!(verify_preparation(&bell, &bell_code(&code).unwrap(), all_plus(code.k)).unwrap(), "{name}");
    }
}

#[test]
fn verified_preparations_tolerate_single_faults() {
    for name in ["c1224", "c1644", "c2026"] {
        let src = Source::one_stage(name).unwrap();
        let code = src.code().clone();
        for plus in [0, all_plus(code.k)] {
            let f = verified_fragment(&src, plus).unwrap();
            let r = inject_faults(&f, &code, plus, true).unwrap();
            assert_eq!(r.order1_bad, 0, "{name}");
            assert!(r.order2_bad > 0, "{name}");
            assert!(r.order1_detected > 0);
        }
    }
}

#[test]
fn unverified_encoders_are_not_fault_tolerant() {
    let src = Source::one_stage("c2026").unwrap();
    let f = build_fragment(&src, 0, &VerificationRecipe::default()).unwrap();
    assert!(inject_faults(&f, src.code(), 0, false).unwrap().order1_bad > 0);
}

#[test]
fn two_stage_sources_reuse_catalog_codes() {
    for name in ["c3628", "c4848"] {
        let two = Source::two_stage(name).unwrap();
        assert!(two.is_two_stage());
        assert!(two.code().stabilizer_matrix().same_row_space(&catalog(name).unwrap().stabilizer_matrix()));
    }
    assert!(Source::two_stage("c2026").is_err());
}

#[test]
fn c2026_variants_differ_in_weight() {
    let src = Source::one_stage("c2026").unwrap();
    let (light, heavy) = recipe_variants(&src, 0).unwrap();
    assert!(light.circuit.cnot_count() < heavy.circuit.cnot_count());
    for f in [&light, &heavy] {
        assert_eq!(inject_faults(f, src.code(), 0, false).unwrap().order1_bad, 0);
    }
}

#[test]
fn noiseless_factories_always_accept() {
    for mode in [FactoryMode::OneStage, FactoryMode::TwoStage] {
        let r = factory_overhead("c3628", 0.0, mode, 0, 500, 1).unwrap();
        assert!(r.acceptance.iter().all(|&a| a == 1.0), "{r:?}");
        assert!((r.expected_cnots - r.attempt_cnots as f64).abs() < 1e-9, "{r:?}");
    }
}

#[test]
fn noisy_factories_cost_more_than_one_attempt() {
    let r = factory_overhead("c2026", 4e-3, FactoryMode::OneStage, 0, 5_000, 2).unwrap();
    assert!(r.acceptance[0] > 0.0 && r.acceptance[0] < 1.0);
    assert!(r.expected_cnots >= r.attempt_cnots as f64);
}

#[test]
fn detection_gadgets_exist_for_small_icebergs() {
    for name in ["c422", "c642"] {
        let g = iceberg_detect_gadget(name).unwrap();
        let n = catalog(name).unwrap().n;
        assert!(g.flags.0 < g.flags.1 && g.flags.1 <= n);
    }
    assert!(iceberg_detect_gadget("c1224").is_err());
}
