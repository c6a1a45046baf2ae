use iceberg::decoder::*;
use iceberg::factory::catalog;
use iceberg::PauliKind;
use proptest::prelude::*;

fn table(name: &str, kind: PauliKind) -> DecoderTable {
    DecoderTable::build(&catalog(name).unwrap(), kind, None).unwrap()
}

#[test]
fn c3628_leading_coefficients() {
    let (counts, c, cp) = exact_series_check(&table("c3628", PauliKind::X), 8, 5).unwrap();
    assert_eq!(c, 54432);
    assert_eq!(cp, 23544);
    assert!(counts.n_logical[..5].iter().all(|&x| x == 0));
    assert!(counts.n_reject[..4].iter().all(|&x| x == 0));
}

#[test]
fn c422_rejects_every_single_flip() {
    let counts = enumerate_fault_counts(&table("c422", PauliKind::X), 2).unwrap();
    assert_eq!(counts.n_reject[1], 4);
    assert_eq!(counts.n_logical[1], 0);
}

#[test]
fn low_weight_coefficients_vanish() {
    for (name, d) in [("c1224", 4), ("c1644", 4), ("c2026", 6), ("c3246", 6)] {
        for kind in [PauliKind::X, PauliKind::Z] {
            let counts = enumerate_fault_counts(&table(name, kind), d / 2 + 1).unwrap();
            assert!(counts.n_logical[..=d / 2].iter().all(|&x| x == 0), "{name}");
            assert!(counts.n_reject[..d.div_ceil(2)].iter().all(|&x| x == 0), "{name}");
            assert!(counts.n_logical[d / 2 + 1] > 0, "{name}");
        }
    }
}

#[test]
fn sampling_agrees_with_series() {
    let t = table("c1224", PauliKind::X);
    let counts = enumerate_fault_counts(&t, 12).unwrap();
    let p = 0.05;
    let (pl, pr) = series_rates(&counts, 12, p);
    let shots = 400_000;
    let r = code_capacity_sample(&t, p, shots, 5).unwrap();
    let sr = (pr * (1.0 - pr) / shots as f64).sqrt();
    let sl = (pl * (1.0 - pl) / r.accepted as f64).sqrt();
    assert!((r.p_r - pr).abs() < 4.0 * sr, "{} vs {pr}", r.p_r);
    assert!((r.p_l - pl).abs() < 4.0 * sl, "{} vs {pl}", r.p_l);
}

#[test]
fn zero_noise_is_silent() {
    let r = code_capacity_sample(&table("c2026", PauliKind::X), 0.0, 10_000, 1).unwrap();
    assert_eq!((r.accepted, r.logical_errors), (10_000, 0));
    assert!(code_capacity_sample(&table("c422", PauliKind::X), 1.5, 10, 1).is_err());
}

#[test]
fn sampling_is_seeded() {
    let t = table("c1644", PauliKind::Z);
    let a = code_capacity_sample(&t, 0.03, 50_000, 9).unwrap();
    let b = code_capacity_sample(&t, 0.03, 50_000, 9).unwrap();
    assert_eq!(a, b);
}

#[test]
fn table_serialization_is_stable() {
    let t = table("c1224", PauliKind::Z);
    assert_eq!(t.to_bytes(), table("c1224", PauliKind::Z).to_bytes());
    assert!(!t.rows().is_empty());
}

proptest! {
    #[test]
    fn corrects_below_half_distance(qs in proptest::collection::btree_set(0usize..20, 0..=2)) {
        let t = table("c2026", PauliKind::X);
        let e = qs.iter().fold(0u64, |a, &q| a | 1 << q);
        prop_assert_eq!(t.residual(e), Some(0));
    }

    #[test]
    fn weight_three_never_miscorrects(qs in proptest::collection::btree_set(0usize..20, 3)) {
        let t = table("c2026", PauliKind::Z);
        let e = qs.iter().fold(0u64, |a, &q| a | 1 << q);
        prop_assert!(matches!(t.residual(e), None | Some(0)));
    }

    #[test]
    fn corrections_clear_syndromes(e in 0u64..(1 << 12)) {
        let t = table("c1224", PauliKind::X);
        let (s, c) = t.syndrome_of(e);
        match t.decode(s) {
            Decoded::Correct { correction, class } => {
                let (s2, c2) = t.syndrome_of(correction);
                prop_assert_eq!(s2, s);
                prop_assert_eq!(c2, class);
                prop_assert_eq!(t.residual(e), Some(class ^ c));
            }
            Decoded::Reject => prop_assert_eq!(t.residual(e), None),
        }
    }
}
