use iceberg::factory::*;
use iceberg::pauli::{Letter, PauliString};
use iceberg::{BitMatrix, PauliKind, StabilizerCode};
use proptest::prelude::*;

const CONCATENATED: [(&str, usize); 6] =
    [("c1224", 2), ("c1644", 2), ("c2026", 3), ("c3246", 3), ("c3628", 4), ("c4848", 4)];

#[test]
fn catalog_distances_match_names() {
    for (name, d) in [
        ("c422", 2),
        ("c642", 2),
        ("c1224", 4),
        ("c1644", 4),
        ("c2026", 6),
        ("c3246", 6),
        ("c3628", 8),
        ("c4848", 8),
    ] {
        let c = catalog(name).unwrap();
        let (dx, dz) = c.css_distance().unwrap();
        assert_eq!((dx, dz), (d, d), "{name}");
    }
    assert_eq!(catalog("c513").unwrap().distance().unwrap(), 3);
    assert_eq!(catalog("c823").unwrap().distance().unwrap(), 3);
}

#[test]
fn concatenation_doubles_outer_distance() {
    for (name, outer_d) in CONCATENATED {
        let c = catalog(name).unwrap();
        let (dx, _) = c.css_distance().unwrap();
        assert_eq!(dx, 2 * outer_d, "{name}");
    }
}

#[test]
fn ququad_images_commute() {
    for src in [c513(), c823()] {
        let m = map_to_ququad(&src).unwrap();
        assert!(m.is_css());
        for p in src.generators() {
            for q in src.generators() {
                assert!(d_x(p).commutes(&d_z(q)).unwrap());
            }
        }
        assert_eq!((m.n, m.k), (2 * src.n, 2 * src.k));
    }
}

#[test]
fn method_one_builds_named_codes() {
    let c = concat_iceberg_m1(&c513()).unwrap();
    assert!(c.stabilizer_matrix().same_row_space(&catalog("c2026").unwrap().stabilizer_matrix()));
    let c = concat_iceberg_m1(&c823()).unwrap();
    assert_eq!((c.n, c.k, c.css_distance().unwrap().0), (32, 4, 6));
}

#[test]
fn concatenation_methods() {
    let same = |a: &StabilizerCode, b: &StabilizerCode| a.stabilizer_matrix().same_row_space(&b.stabilizer_matrix());
    assert!(same(&concat_iceberg_m1(&c422()).unwrap(), &concat_iceberg_m2(&c422()).unwrap()));
    let tower = catalog("c1224").unwrap();
    let (a, b) = (concat_iceberg_m1(&tower).unwrap(), concat_iceberg_m2(&tower).unwrap());
    assert!(!same(&a, &b));
    assert!(same(&b, &catalog("c4848").unwrap()));
}

#[test]
fn method_two_rejects_non_css_outer() {
    assert!(concat_iceberg_m2(&c513()).is_err());
}

#[test]
fn c1224_matches_three_ququad_tower() {
    let c = catalog("c1224").unwrap();
    let m2 = concat(&c312q4(), &c422()).unwrap();
    assert!(c.stabilizer_matrix().same_row_space(&m2.stabilizer_matrix()));
}

#[test]
fn paired_partitions_are_valid() {
    for src in [c513(), c823()] {
        let p = paired_support_partition(&src).unwrap().expect("GF(4)-linear codes pair up");
        assert!(p.is_valid());
        for (a, b) in &p.pairs {
            assert_eq!(a.support(), b.support());
            assert_eq!(a.mul(b).unwrap().support(), a.support());
        }
    }
    let lone = StabilizerCode::from_generators("lone", 4, vec![PauliString::parse("XXXX").unwrap()]).unwrap();
    assert!(paired_support_partition(&lone).unwrap().is_none());
}

#[test]
fn catalog_text_round_trip() {
    for name in ["c422", "c642", "c1224", "c2026", "c3628"] {
        let c = catalog(name).unwrap();
        let back = StabilizerCode::from_text(name, &c.to_text()).unwrap();
        assert_eq!(back.generators(), c.generators());
        assert_eq!(back.logical_x, c.logical_x);
        assert_eq!(back.logical_z, c.logical_z);
    }
}

#[test]
fn unknown_names_fail() {
    assert!(catalog("c999").is_err());
}

#[test]
fn block_permutations_act_symplectically() {
    let c = catalog("c1224").unwrap();
    let swap: Vec<usize> = (0..12).map(|q| (q + 4) % 12).collect();
    if c.is_automorphism(&swap).unwrap() {
        assert!(c.logical_action_of_permutation(&swap).unwrap().is_symplectic());
    }
    let id: Vec<usize> = (0..12).collect();
    assert_eq!(c.logical_action_of_permutation(&id).unwrap().matrix, BitMatrix::identity(4));
}

fn letter() -> impl Strategy<Value = Letter> {
    prop_oneof![Just(Letter::I), Just(Letter::X), Just(Letter::Y), Just(Letter::Z)]
}

fn pauli(n: usize) -> impl Strategy<Value = PauliString> {
    proptest::collection::vec(letter(), n).prop_map(move |ls| {
        let mut p = PauliString::identity(n);
        for (q, l) in ls.into_iter().enumerate() {
            p.set(q, l);
        }
        p
    })
}

proptest! {
    #[test]
    fn ququad_map_preserves_commutation(a in pauli(5), b in pauli(5)) {
        let c = a.commutes(&b).unwrap();
        prop_assert_eq!(d_x(&a).commutes(&d_z(&b)).unwrap(), c);
        prop_assert!(d_x(&a).commutes(&d_x(&b)).unwrap());
    }

    #[test]
    fn stabilizer_products_stay_in_group(mask in 1u32..(1 << 10)) {
        let c = catalog("c2026").unwrap();
        let mut p = PauliString::identity(c.n);
        for (i, g) in c.generators().iter().enumerate() {
            if mask >> (i % 32) & 1 == 1 {
                p = p.mul(g).unwrap();
            }
        }
        prop_assert!(c.in_stabilizer_group(&p));
    }

    #[test]
    fn logicals_commute_with_checks(name in prop::sample::select(vec!["c1224", "c1644", "c2026", "c3246"])) {
        let c = catalog(name).unwrap();
        for l in c.logical_x.iter().chain(&c.logical_z) {
            for g in c.generators() {
                prop_assert!(l.commutes(g).unwrap());
            }
            prop_assert!(!c.in_stabilizer_group(l));
        }
        prop_assert_eq!(c.checks(PauliKind::X).rank() + c.checks(PauliKind::Z).rank(), c.n - c.k);
    }
}
