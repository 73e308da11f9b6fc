use hwcore::ff_tower::{Fe, DEFAULT_CAP};
use hwcore::heisenberg::{HWGroup, HeisenbergGroup};
use hwcore::weight_datum::{validate_datum, OrbitSpec, WeightDatum};
use hwcore::weil_reps::Representation;

fn rep(q: u64, orbits: &[OrbitSpec], variant: u64) -> Representation {
    let sp = validate_datum(&WeightDatum::from_orbits(q, orbits).unwrap(), DEFAULT_CAP).unwrap();
    let hw = HWGroup::new(HeisenbergGroup::new(sp).unwrap(), DEFAULT_CAP).unwrap();
    Representation::new(hw, Fe::ONE, variant, DEFAULT_CAP).unwrap()
}

fn families() -> Vec<(u64, Vec<OrbitSpec>)> {
    vec![
        (2, vec![OrbitSpec::asymmetric(1, 1)]),
        (3, vec![OrbitSpec::asymmetric(1, 1)]),
        (2, vec![OrbitSpec::asymmetric(1, 2)]),
        (2, vec![OrbitSpec::symmetric(2, 1)]),
        (3, vec![OrbitSpec::symmetric(2, 1)]),
        (2, vec![OrbitSpec::symmetric(2, 2)]),
        (2, vec![OrbitSpec::asymmetric(2, 1)]),
        (2, vec![OrbitSpec::symmetric(4, 1)]),
        (4, vec![OrbitSpec::asymmetric(1, 1)]),
        (2, vec![OrbitSpec::symmetric(2, 1), OrbitSpec::asymmetric(1, 1)]),
    ]
}

#[test]
fn operators_are_multiplicative_and_irreducible() {
    for (q, orbits) in families() {
        let r = rep(q, &orbits, 0);
        let k = r.field();
        let n = r.hw.weil_order();
        for a in 0..n {
            assert!(r.power_is_identity(a), "q={q} {orbits:?} gamma={a}");
            for b in 0..n {
                assert!(r.is_multiplicative_on(a, b), "q={q} {orbits:?} {a} {b}");
            }
        }
        assert_eq!(r.norm_sum(DEFAULT_CAP).unwrap(), k.from_int(r.hw.order() as i64), "q={q} {orbits:?}");
        assert_eq!(r.support_violations(DEFAULT_CAP).unwrap(), 0);
    }
}

#[test]
fn mu0_variant_does_not_change_characters() {
    for (q, orbits) in families() {
        let a = rep(q, &orbits, 0);
        let b = rep(q, &orbits, 1);
        for h in a.hw.heis.elements(DEFAULT_CAP).unwrap() {
            for g in 0..a.hw.weil_order() {
                assert_eq!(a.character(&h, g), b.character(&h, g));
            }
        }
    }
}
