use iceberg::circuit::{inject_noise, Builder, Circuit, NoiseModel};
use iceberg::effects::{Fault, Outcome, SparseSampler};
use iceberg::experiments::{repeated_ec_program, source_for};
use iceberg::frame::DenseSampler;
use iceberg::parallel::with_workers;
use iceberg::program::Program;
use iceberg::synth::{verified_fragment, Source};
use iceberg::tableau::{simulate_stabilizer, Tableau};
use iceberg::{Letter, PauliString};
use proptest::prelude::*;
use std::sync::OnceLock;

fn ec_program(code: &str) -> Program {
    repeated_ec_program(&source_for(code, None).unwrap(), 3).unwrap()
}

fn c1224_sampler() -> &'static SparseSampler {
    static S: OnceLock<SparseSampler> = OnceLock::new();
    S.get_or_init(|| SparseSampler::new(&ec_program("c1224"), NoiseModel::new(4e-3).unwrap()).unwrap())
}

fn z_score(a: (u64, u64), b: (u64, u64)) -> f64 {
    let (pa, pb) = (a.0 as f64 / a.1 as f64, b.0 as f64 / b.1 as f64);
    let pool = (a.0 + b.0) as f64 / (a.1 + b.1) as f64;
    let se = (pool * (1.0 - pool) * (1.0 / a.1 as f64 + 1.0 / b.1 as f64)).sqrt();
    if se == 0.0 {
        0.0
    } else {
        (pa - pb).abs() / se
    }
}

#[test]
fn sparse_and_dense_samplers_agree() {
    let program = ec_program("c1224");
    let noise = NoiseModel::new(4e-3).unwrap();
    let shots = 150_000;
    let sparse = SparseSampler::new(&program, noise).unwrap().sample(shots, 3);
    let dense = DenseSampler::new(&program, noise).unwrap().sample(shots, 4);
    let rej = |s: &iceberg::effects::SampleSummary| (s.shots - s.accepted, s.shots);
    let err = |s: &iceberg::effects::SampleSummary| (s.errors, s.accepted);
    assert!(z_score(rej(&sparse), rej(&dense)) < 4.0, "{sparse:?} vs {dense:?}");
    assert!(z_score(err(&sparse), err(&dense)) < 4.0, "{sparse:?} vs {dense:?}");
    assert!(sparse.shots > sparse.accepted);
}

#[test]
fn zero_noise_accepts_everything() {
    for code in ["c422", "c1224", "c2026"] {
        let program = ec_program(code);
        let noise = NoiseModel::new(0.0).unwrap();
        let s = SparseSampler::new(&program, noise).unwrap().sample(5_000, 1);
        assert_eq!((s.accepted, s.errors), (5_000, 0), "{code}");
        let d = DenseSampler::new(&program, noise).unwrap().sample(5_000, 1);
        assert_eq!((d.accepted, d.errors), (5_000, 0), "{code}");
        assert!(inject_noise(&program.circuit.exec_order(), &program.circuit.groups, &noise).unwrap().is_empty());
    }
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let s = c1224_sampler();
    let a = with_workers(Some(1), || s.sample(40_000, 17));
    let b = with_workers(Some(3), || s.sample(40_000, 17));
    assert_eq!(a, b);
    assert_ne!(s.sample(40_000, 18), a);
}

#[test]
fn recorded_faults_replay_their_outcome() {
    let s = c1224_sampler();
    let summary = s.sample_with_records(30_000, 5, 200);
    assert!(!summary.records.is_empty());
    for (outcome, record) in &summary.records {
        assert_eq!(s.evaluate(&record.faults), *outcome);
    }
}

#[test]
fn cnot_copies_x_down_and_z_up() {
    let mut t = Tableau::new(2, 0);
    t.prep_z(0).unwrap();
    t.prep_z(1).unwrap();
    t.apply_pauli(&PauliString::single(2, 0, Letter::X));
    t.cnot(0, 1);
    assert!(t.measure_z(0).unwrap().constant());
    assert!(t.measure_z(1).unwrap().constant());

    let mut t = Tableau::new(2, 0);
    t.prep_x(0).unwrap();
    t.prep_x(1).unwrap();
    t.apply_pauli(&PauliString::single(2, 1, Letter::Z));
    t.cnot(0, 1);
    assert!(t.measure_x(0).unwrap().constant());
    assert!(t.measure_x(1).unwrap().constant());
}

#[test]
fn prepared_zeros_measure_zero() {
    let mut b = Builder::new();
    let q = b.alloc("q", 5);
    for &x in &q {
        b.prep_z(x);
    }
    let keys: Vec<_> = q.iter().map(|&x| b.meas_z(x)).collect();
    let run = simulate_stabilizer(&b.finish()).unwrap();
    assert!(keys.iter().all(|&k| run.outcome(k).is_constant() && !run.outcome(k).constant()));
}

#[test]
fn encoder_output_is_stabilized() {
    for code in ["c1224", "c2026"] {
        let src = Source::one_stage(code).unwrap();
        let f = verified_fragment(&src, 0).unwrap();
        assert!(iceberg::gadgets::verify_preparation(&f, src.code(), 0).unwrap(), "{code}");
    }
}

#[test]
fn depolarizing_draw_rate() {
    let n = NoiseModel::new(0.003).unwrap();
    assert!((n.depolarizing_draw_probability() - 0.0032).abs() < 1e-15);
    assert!(NoiseModel::new(-0.1).is_err());
}

#[test]
fn shipped_circuits_round_trip_as_text() {
    let f = verified_fragment(&Source::two_stage("c3628").unwrap(), 0).unwrap();
    for c in [&f.circuit, &ec_program("c2026").circuit] {
        let text = c.to_text();
        let back = Circuit::from_text(&text).unwrap();
        assert_eq!(back.to_text(), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fault_effects_are_linear(picks in proptest::collection::vec((any::<prop::sample::Index>(), 1u8..=15), 1..5),
                                twice in any::<prop::sample::Index>()) {
        let s = c1224_sampler();
        let all = s.all_single_faults();
        let faults: Vec<Fault> = picks.iter().map(|(i, _)| all[i.index(all.len())]).collect();
        let base = s.evaluate(&faults);
        let mut rev = faults.clone();
        rev.reverse();
        prop_assert_eq!(s.evaluate(&rev), base);
        let extra = all[twice.index(all.len())];
        let mut doubled = faults.clone();
        doubled.push(extra);
        doubled.push(extra);
        prop_assert_eq!(s.evaluate(&doubled), base);
    }

    #[test]
    fn single_faults_never_fail_logically(i in any::<prop::sample::Index>()) {
        let s = c1224_sampler();
        let all = s.all_single_faults();
        prop_assert_ne!(s.evaluate(&[all[i.index(all.len())]]), Outcome::LogicalError);
    }

    #[test]
    fn random_circuits_round_trip(ops in proptest::collection::vec((0u8..5, 0usize..6, 0usize..6), 1..40)) {
        let mut b = Builder::new();
        let q = b.alloc("q", 6);
        let mut keys = Vec::new();
        for (op, a, c) in ops {
            match op {
                0 => b.prep_z(q[a]),
                1 => b.prep_x(q[a]),
                2 if a != c => b.cnot(q[a], q[c]),
                3 => b.h(q[a]),
                _ => keys.push(b.meas_z(q[a])),
            }
        }
        if keys.len() >= 2 {
            b.abort_if(keys[..2].to_vec());
        }
        let c = b.finish();
        let text = c.to_text();
        prop_assert_eq!(Circuit::from_text(&text).unwrap().to_text(), text);
    }
}
