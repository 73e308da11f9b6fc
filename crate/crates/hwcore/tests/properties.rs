use hwcore::exp_sums::{build_torsor, gauss_sum, reduce_gauss_sum, torsor_count, GaussSumSpec};
use hwcore::ff_tower::{Canonical, Fe, DEFAULT_CAP};
use hwcore::heisenberg::{HElem, HWGroup, HeisenbergGroup};
use hwcore::weight_datum::{characteristic_index, validate_datum, OrbitSpec, PolarizationChoice, SymplecticSpace, WeightDatum};
use hwcore::weil_reps::Representation;
use proptest::prelude::*;

fn space(q: u64, orbits: &[OrbitSpec]) -> SymplecticSpace {
    validate_datum(&WeightDatum::from_orbits(q, orbits).unwrap(), DEFAULT_CAP).unwrap()
}

fn spaces() -> Vec<SymplecticSpace> {
    vec![
        space(2, &[OrbitSpec::asymmetric(1, 2)]),
        space(3, &[OrbitSpec::symmetric(2, 1)]),
        space(2, &[OrbitSpec::symmetric(2, 2)]),
        space(2, &[OrbitSpec::asymmetric(2, 1)]),
        space(2, &[OrbitSpec::symmetric(2, 1), OrbitSpec::asymmetric(1, 1)]),
    ]
}

fn point(sp: &SymplecticSpace, seed: u64) -> Vec<Fe> {
    let pts = sp.rational_points(DEFAULT_CAP).unwrap();
    pts[(seed % pts.len() as u64) as usize].clone()
}

fn canonical(q: u64, degree: u32, code: u64) -> Canonical {
    let (p, f) = hwcore::ff_tower::split_prime_power(q).unwrap();
    let len = (degree * f) as usize;
    let mut coords = vec![0u32; len];
    let mut c = code;
    for x in coords.iter_mut() {
        *x = (c % p) as u32;
        c /= p;
    }
    if coords.iter().all(|&x| x == 0) {
        coords[0] = 1;
    }
    Canonical { degree, coords }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pairing_is_alternating_and_lift_compatible(which in 0usize..5, a in any::<u64>(), b in any::<u64>()) {
        let sp = &spaces()[which];
        let (x, y) = (point(sp, a), point(sp, b));
        let f = &sp.model;
        prop_assert_eq!(f.add(sp.pairing(&x, &y), sp.pairing(&y, &x)), Fe::ZERO);
        prop_assert_eq!(sp.pairing(&x, &x), Fe::ZERO);
        let (u, w) = (sp.lift(&x), sp.lift(&y));
        prop_assert_eq!(sp.sigma_bar(&u), u.clone());
        prop_assert_eq!(sp.gram_bar(&u, &w), sp.pairing(&x, &y));
    }

    #[test]
    fn heisenberg_law(which in 0usize..5, a in any::<u64>(), b in any::<u64>(), c in any::<u64>(), z in any::<u64>()) {
        let sp = spaces()[which].clone();
        let h = HeisenbergGroup::new(sp.clone()).unwrap();
        let elems = h.elements(DEFAULT_CAP).unwrap();
        let pick = |s: u64| elems[(s % elems.len() as u64) as usize].clone();
        let (x, y, w) = (pick(a), pick(b), pick(c ^ z));
        let xy_w = h.mul(&h.mul(&x, &y).unwrap(), &w).unwrap();
        let x_yw = h.mul(&x, &h.mul(&y, &w).unwrap()).unwrap();
        prop_assert_eq!(xy_w, x_yw);
        prop_assert_eq!(h.mul(&x, &h.inverse(&x)).unwrap(), h.identity());
        let comm: HElem = h.commutator(&x, &y).unwrap();
        prop_assert_eq!(comm, h.central(h.commutator_pairing(&x, &y)));
    }

    #[test]
    fn weil_action_is_by_automorphisms(which in 0usize..5, a in any::<u64>(), b in any::<u64>(), g in any::<u64>()) {
        let sp = spaces()[which].clone();
        let hw = HWGroup::new(HeisenbergGroup::new(sp).unwrap(), DEFAULT_CAP).unwrap();
        let elems = hw.heis.elements(DEFAULT_CAP).unwrap();
        let x = elems[(a % elems.len() as u64) as usize].clone();
        let y = elems[(b % elems.len() as u64) as usize].clone();
        let g = (g % hw.weil_order() as u64) as usize;
        let lhs = hw.act(g, &hw.heis.mul(&x, &y).unwrap());
        let rhs = hw.heis.mul(&hw.act(g, &x), &hw.act(g, &y)).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn gauss_oracles_agree(q in prop::sample::select(vec![2u64, 3]), n in 1usize..=3, degs in prop::collection::vec(1u32..=2, 3), codes in prop::collection::vec(any::<u64>(), 3), d in 1u32..=2) {
        let spec = GaussSumSpec {
            q,
            a: (0..n).map(|i| canonical(q, d, codes[i])).collect(),
            degs: degs[..n].to_vec(),
            d,
        };
        prop_assert_eq!(gauss_sum(&spec, 1, DEFAULT_CAP).unwrap(), reduce_gauss_sum(&spec, 1, DEFAULT_CAP).unwrap());
    }
}

#[test]
fn rescaled_frames_keep_characters_and_counts() {
    let base = space(2, &[OrbitSpec::symmetric(2, 1)]);
    let mut spec = OrbitSpec::symmetric(2, 1);
    spec.scalars = Some(vec![canonical(2, 4, 2)]);
    let scaled = space(2, &[spec]);
    assert_ne!(base.basis.iter().map(|b| b.c).collect::<Vec<_>>(), scaled.basis.iter().map(|b| b.c).collect::<Vec<_>>());
    let ra = Representation::new(HWGroup::new(HeisenbergGroup::new(base.clone()).unwrap(), DEFAULT_CAP).unwrap(), Fe::ONE, 0, DEFAULT_CAP).unwrap();
    let rb = Representation::new(HWGroup::new(HeisenbergGroup::new(scaled.clone()).unwrap(), DEFAULT_CAP).unwrap(), Fe::ONE, 0, DEFAULT_CAP).unwrap();
    for g in 0..ra.hw.weil_order() {
        assert_eq!(ra.expected_trace(g), rb.expected_trace(g));
        assert_eq!(ra.character(&ra.hw.heis.identity(), g), rb.character(&rb.hw.heis.identity(), g));
    }
    // compare over the same fields k_{d0 t}
    let seq = |sp: &SymplecticSpace, d: u32| -> Vec<_> {
        let pol = characteristic_index(sp, &PolarizationChoice::Simple).unwrap();
        let ts = build_torsor(sp, &pol, Fe::ONE, DEFAULT_CAP).unwrap();
        assert_eq!(d % ts.d0, 0);
        (1..=3).map(|t| torsor_count(&ts, t * d / ts.d0, DEFAULT_CAP).unwrap().brute.unwrap()).collect()
    };
    assert_eq!(scaled.d0, 4);
    assert_eq!(seq(&base, 4), seq(&scaled, 4));
}
