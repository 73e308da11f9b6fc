//! Acceptance suite: one line per criterion, nonzero exit if any fails.
#![allow(clippy::type_complexity)]

use std::time::Instant;

use hwcore::cyclotomic::{Cyc, CycloField};
use hwcore::exp_sums::{
    build_torsor, extract_recurrence, fixed_locus_sequence, gauss_sum, reduce_gauss_sum, torsor_sequence, GaussSumSpec,
    RecurrenceCertificate, TorsorSpec,
};
use hwcore::ff_tower::{split_prime_power, Canonical, Fe, DEFAULT_CAP};
use hwcore::heisenberg::{HWGroup, HeisenbergGroup};
use hwcore::weight_datum::{
    characteristic_index, validate_datum, OrbitSpec, PolarizationChoice, SymplecticSpace, WeightDatum,
};
use hwcore::weil_reps::{parabolic_restriction_check, Representation};
use hwtool::suites::{default_len, isqrt, multiplicativity_pairs};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const CAP: u64 = DEFAULT_CAP;
const PURITY_TOL: f64 = 1e-9;
const SAMPLED_PAIRS: usize = 10_000;

type Outcome = Result<String, String>;

struct Datum {
    name: &'static str,
    q: u64,
    orbits: Vec<OrbitSpec>,
}

fn datum(name: &'static str, q: u64, orbits: Vec<OrbitSpec>) -> Datum {
    Datum { name, q, orbits }
}

fn six() -> Vec<Datum> {
    vec![
        datum("GL(1,F2)", 2, vec![OrbitSpec::asymmetric(1, 1)]),
        datum("GL(1,F3)", 3, vec![OrbitSpec::asymmetric(1, 1)]),
        datum("GL(2,F2)", 2, vec![OrbitSpec::asymmetric(1, 2)]),
        datum("U(1,F4/F2)", 2, vec![OrbitSpec::symmetric(2, 1)]),
        datum("U(1,F9/F3)", 3, vec![OrbitSpec::symmetric(2, 1)]),
        datum("U(2,F4/F2)", 2, vec![OrbitSpec::symmetric(2, 2)]),
    ]
}

fn space(q: u64, orbits: &[OrbitSpec]) -> Result<SymplecticSpace, String> {
    let w = WeightDatum::from_orbits(q, orbits).map_err(|e| e.to_string())?;
    validate_datum(&w, CAP).map_err(|e| e.to_string())
}

fn rep_of(sp: &SymplecticSpace, psi: Fe, variant: u64) -> Result<Representation, String> {
    let hw = HWGroup::new(HeisenbergGroup::new(sp.clone()).map_err(|e| e.to_string())?, CAP).map_err(|e| e.to_string())?;
    Representation::new(hw, psi, variant, CAP).map_err(|e| format!("{e:?}"))
}

fn rep(d: &Datum) -> Result<Representation, String> {
    rep_of(&space(d.q, &d.orbits)?, Fe::ONE, 0)
}

/// Criterion 1 on one representation: the normalized operators satisfy the
/// trace formula and the structural identities that pin them down.
fn traces_ok(r: &Representation) -> Result<usize, String> {
    let k = r.field();
    let id = r.hw.heis.identity();
    for g in 0..r.hw.weil_order() {
        let tr = r.character(&id, g);
        if tr != r.expected_trace(g) {
            return Err(format!("gamma {} trace {tr} expected {}", r.hw.weil_label(g), r.expected_trace(g)));
        }
        if !r.power_is_identity(g) {
            return Err(format!("gamma {}: T^ord != 1", r.hw.weil_label(g)));
        }
        if !r.intertwines(g, CAP).map_err(|e| e.to_string())? {
            return Err(format!("gamma {}: not an intertwiner", r.hw.weil_label(g)));
        }
        if let Some(m) = r.permutation_oracle(g) {
            if m.to_dense(k) != r.weil_operator(g).to_dense(k) {
                return Err(format!("gamma {}: differs from the permutation model", r.hw.weil_label(g)));
            }
        }
    }
    Ok(r.hw.weil_order())
}

fn multiplicative_ok(r: &Representation, pairs: &[(usize, usize)]) -> Result<usize, String> {
    for &(a, b) in pairs {
        if !r.is_multiplicative_on(a, b) {
            return Err(format!("T_a T_b != T_ab for {} {}", r.hw.weil_label(a), r.hw.weil_label(b)));
        }
    }
    Ok(pairs.len())
}

fn all_pairs(r: &Representation) -> Vec<(usize, usize)> {
    let n = r.hw.weil_order();
    (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect()
}

fn irreducible_ok(r: &Representation) -> Result<(), String> {
    let k = r.field();
    let s = r.norm_sum(CAP).map_err(|e| e.to_string())?;
    let want = k.from_bigint(r.hw.order().into());
    if s == want {
        Ok(())
    } else {
        Err(format!("sum |chi|^2 = {s}, |HW| = {want}"))
    }
}

fn support_ok(r: &Representation) -> Result<(), String> {
    match r.support_violations(CAP).map_err(|e| e.to_string())? {
        0 => Ok(()),
        n => Err(format!("{n} values off the support")),
    }
}

fn criterion1() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    for d in six() {
        let r = rep(&d).map_err(|e| format!("{}: {e}", d.name))?;
        let n = traces_ok(&r).map_err(|e| format!("{}: {e}", d.name))?;
        parts.push(format!("{} {n}", d.name));
    }
    let secs = start.elapsed().as_secs_f64();
    if secs > 300.0 {
        return Err(format!("took {secs:.1}s"));
    }
    Ok(format!("all Weil elements: {} ({secs:.1}s)", parts.join(", ")))
}

fn criterion2() -> Outcome {
    let mut parts = Vec::new();
    for d in six().into_iter().filter(|d| d.name.starts_with("U(")) {
        let r = rep(&d)?;
        let pairs = if d.name == "U(2,F4/F2)" {
            let mut rng = StdRng::seed_from_u64(2);
            let n = r.hw.weil_order();
            (0..SAMPLED_PAIRS).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect()
        } else {
            all_pairs(&r)
        };
        let n = multiplicative_ok(&r, &pairs).map_err(|e| format!("{}: {e}", d.name))?;
        parts.push(format!("{} {n} pairs", d.name));
    }
    Ok(parts.join(", "))
}

fn criterion3() -> Outcome {
    let mut parts = Vec::new();
    for d in six() {
        let r = rep(&d)?;
        irreducible_ok(&r).map_err(|e| format!("{}: {e}", d.name))?;
        parts.push(format!("{} |HW|={}", d.name, r.hw.order()));
    }
    Ok(parts.join(", "))
}

fn criterion4() -> Outcome {
    let mut reps: Vec<(Datum, Representation)> = six().into_iter().map(|d| rep(&d).map(|r| (d, r))).collect::<Result<_, _>>()?;
    reps.sort_by_key(|(_, r)| r.hw.order());
    let mut parts = Vec::new();
    for (d, r) in reps.iter().take(5) {
        support_ok(r).map_err(|e| format!("{}: {e}", d.name))?;
        parts.push(d.name);
    }
    Ok(format!("no support violations on {}", parts.join(", ")))
}

fn canonical(p: u32, f: u32, degree: u32, code: u64) -> Canonical {
    let mut coords = vec![0u32; (degree * f) as usize];
    let mut c = code;
    for x in coords.iter_mut() {
        *x = (c % p as u64) as u32;
        c /= p as u64;
    }
    Canonical { degree, coords }
}

fn criterion5() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(5);
    let mut compared = 0usize;
    for q in [2u64, 3] {
        let (p, f) = split_prime_power(q).map_err(|e| e.to_string())?;
        for n in 1..=4usize {
            let d = if (q as u128).pow(4 * n as u32) <= CAP as u128 { 2 } else { 1 };
            let field_size = q.pow(d);
            for mask in 0..(1u32 << n) {
                let degs: Vec<u32> = (0..n).map(|i| 1 + ((mask >> i) & 1)).collect();
                let mut vectors = vec![vec![1u64; n], (0..n).map(|i| 1 + (i as u64 % (field_size - 1))).collect()];
                vectors.push((0..n).map(|_| rng.gen_range(1..field_size)).collect());
                for codes in vectors {
                    let spec = GaussSumSpec { q, a: codes.iter().map(|&c| canonical(p as u32, f, d, c)).collect(), degs: degs.clone(), d };
                    for t in 1..=2 {
                        let b = gauss_sum(&spec, t, CAP).map_err(|e| format!("{spec:?} t={t}: {e}"))?;
                        let s = reduce_gauss_sum(&spec, t, CAP).map_err(|e| format!("{spec:?} t={t}: {e}"))?;
                        if b != s {
                            return Err(format!("{spec:?} t={t}: brute {b} structural {s}"));
                        }
                        compared += 1;
                    }
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if secs > 600.0 {
        return Err(format!("took {secs:.1}s"));
    }
    Ok(format!("{compared} exact comparisons ({secs:.1}s)"))
}

fn certificate(k: &CycloField, values: &[Cyc], scale: f64) -> Result<RecurrenceCertificate, String> {
    extract_recurrence(k, values, values.len() / 2, scale).map_err(|e| e.to_string())
}

fn criterion6() -> Outcome {
    let k = CycloField::for_char(2).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    for d1 in [1u32, 2] {
        let spec = GaussSumSpec { q: 2, a: vec![Canonical::one(1, 1)], degs: vec![d1], d: 1 };
        let mut values = Vec::new();
        for t in 1..=12 {
            let b = gauss_sum(&spec, t, CAP).map_err(|e| e.to_string())?;
            let s = reduce_gauss_sum(&spec, t, CAP).map_err(|e| e.to_string())?;
            if b != s {
                return Err(format!("d1={d1} t={t}: brute {b} structural {s}"));
            }
            values.push(b);
        }
        let abs = 2f64.sqrt();
        let cert = certificate(&k, &values, abs)?;
        let want = 2usize.pow(d1);
        if cert.degree() != want || !cert.is_pure(abs, PURITY_TOL) || cert.degree_is_lower_bound {
            return Err(format!("d1={d1}: degree {} (want {want}), purity defect {:e}", cert.degree(), cert.purity_defect(abs)));
        }
        parts.push(format!("d1={d1}: degree {} over {} terms, defect {:.1e}", cert.degree(), values.len(), cert.purity_defect(abs)));
    }
    Ok(parts.join("; "))
}

struct TorsorOutcome {
    cert: RecurrenceCertificate,
    compared: usize,
    terms: usize,
}

fn torsor_certificate(ts: &TorsorSpec) -> Result<TorsorOutcome, String> {
    let k = CycloField::for_char(ts.space.p()).map_err(|e| e.to_string())?;
    let root = isqrt(ts.space.size()) as u64;
    let seq = torsor_sequence(ts, default_len(root), CAP).map_err(|e| format!("{e:?}"))?;
    let compared = seq.iter().filter(|t| t.brute.is_some() && t.structural.is_some()).count();
    let values: Vec<Cyc> = seq.iter().filter_map(|t| t.value().cloned()).collect();
    let cert = certificate(&k, &values, ts.weight_abs())?;
    Ok(TorsorOutcome { cert, compared, terms: values.len() })
}

fn torsor_of(q: u64, orbits: &[OrbitSpec], pol: &PolarizationChoice) -> Result<TorsorSpec, String> {
    let sp = space(q, orbits)?;
    let pd = characteristic_index(&sp, pol).map_err(|e| e.to_string())?;
    build_torsor(&sp, &pd, Fe::ONE, CAP).map_err(|e| e.to_string())
}

fn criterion7() -> Outcome {
    let explicit = |v: &[&str]| PolarizationChoice::Explicit(v.iter().map(|s| s.to_string()).collect());
    let cases: Vec<(&str, u64, Vec<OrbitSpec>, PolarizationChoice)> = vec![
        ("U(1,F4/F2)", 2, vec![OrbitSpec::symmetric(2, 1)], PolarizationChoice::Simple),
        ("U(1,F9/F3)", 3, vec![OrbitSpec::symmetric(2, 1)], PolarizationChoice::Simple),
        ("GL(1,F4) over F2", 2, vec![OrbitSpec::asymmetric(2, 1)], explicit(&["0+0", "0-1"])),
        ("GL(1,F2)", 2, vec![OrbitSpec::asymmetric(1, 1)], PolarizationChoice::Simple),
    ];
    let mut parts = Vec::new();
    for (name, q, orbits, pol) in &cases {
        let ts = torsor_of(*q, orbits, pol)?;
        if ts.space.size() > 1 << 12 {
            return Err(format!("{name}: |V| too large"));
        }
        let out = torsor_certificate(&ts).map_err(|e| format!("{name}: {e}"))?;
        let want = isqrt(ts.space.size()) as usize;
        if out.cert.degree() != want || !out.cert.is_pure(ts.weight_abs(), PURITY_TOL) || out.compared == 0 || out.cert.degree_is_lower_bound {
            return Err(format!(
                "{name}: degree {} (want {want}), defect {:e}, {} oracle comparisons",
                out.cert.degree(),
                out.cert.purity_defect(ts.weight_abs()),
                out.compared
            ));
        }
        parts.push(format!("{name} deg {want} ({} terms, {} compared)", out.terms, out.compared));
    }
    let pairs: Vec<(&str, u64, Vec<OrbitSpec>, PolarizationChoice, PolarizationChoice)> = vec![
        ("U(1,F4/F2)", 2, vec![OrbitSpec::symmetric(2, 1)], explicit(&["0~0"]), explicit(&["0~1"])),
        ("GL(1,F4) over F2", 2, vec![OrbitSpec::asymmetric(2, 1)], explicit(&["0+0", "0-1"]), explicit(&["0+1", "0-0"])),
    ];
    for (name, q, orbits, a, b) in &pairs {
        let (ta, tb) = (torsor_of(*q, orbits, a)?, torsor_of(*q, orbits, b)?);
        if ta.pol.plus == tb.pol.plus {
            return Err(format!("{name}: polarizations coincide"));
        }
        let (ca, cb) = (torsor_certificate(&ta)?.cert, torsor_certificate(&tb)?.cert);
        let (ma, mb) = (ca.magnitudes(), cb.magnitudes());
        let same = ca.degree() == cb.degree() && ma.len() == mb.len() && ma.iter().zip(&mb).all(|(x, y)| ((x - y) / x).abs() <= PURITY_TOL);
        if !same {
            return Err(format!("{name}: certificates differ: {ma:?} vs {mb:?}"));
        }
        parts.push(format!("{name} two polarizations agree"));
    }
    Ok(parts.join(", "))
}

fn criterion8() -> Outcome {
    let sp = space(2, &[OrbitSpec::symmetric(2, 1), OrbitSpec::asymmetric(1, 1)])?;
    let r = rep_of(&sp, Fe::ONE, 0)?;
    // labels 0~0 0~1 1+0 1-0
    let grading = [0, 0, 1, -1];
    let rr = parabolic_restriction_check(&r, &grading, CAP).map_err(|e| e.to_string())?;
    let want = isqrt((sp.q() as u128).pow(rr.dim_u0)) as u64;
    if !rr.passed() || rr.expected_rank != want || rr.dim_u_plus == 0 {
        return Err(format!("{rr:?}"));
    }
    Ok(format!(
        "induced character matches on {} elements, dim kappa^u+ = {} = sqrt(|u0|)",
        rr.induced_checked, rr.projector_rank
    ))
}

fn criterion9() -> Outcome {
    let mut parts = Vec::new();
    for d in six().into_iter().filter(|d| d.name.starts_with("U(1")) {
        let ts = torsor_of(d.q, &d.orbits, &PolarizationChoice::Simple)?;
        let r = rep(&d)?;
        let hw = &r.hw;
        let k = r.field();
        let n = ts.cohomological_degree();
        let full_sign: i8 = if n % 2 == 0 { 1 } else { -1 };
        let base = (ts.space.q() as f64).powi(ts.d0 as i32);
        let mut checked = 0;
        for g in 0..hw.weil_order() {
            if hw.weil_order_of(g) % ts.space.p() as u64 == 0 {
                continue;
            }
            let fixed = (ts.space.q() as u128).pow(hw.fixed_dim_k(g));
            let deg = isqrt(fixed) as usize;
            let vals = fixed_locus_sequence(&ts, hw, g, default_len(deg as u64), CAP).map_err(|e| e.to_string())?;
            let cert = certificate(k, &vals, base)?;
            let m = cert.common_weight(base, PURITY_TOL).ok_or(format!("{}: {} not pure", d.name, hw.weil_label(g)))?;
            let parity: i8 = if m % 2 == 0 { 1 } else { -1 };
            let trace = r.character(&hw.heis.identity(), g);
            let trace_sign: i8 = if k.to_complex(&trace).re < 0.0 { -1 } else { 1 };
            let d_sign: i8 = if hw.d_gamma(g) % 2 == 0 { 1 } else { -1 };
            if cert.degree() != deg || parity != cert.sign || full_sign * cert.sign != d_sign || d_sign != trace_sign {
                return Err(format!(
                    "{} gamma {}: degree {} (want {deg}), sign {}, weight {m}, d_gamma {}, trace {trace}",
                    d.name,
                    hw.weil_label(g),
                    cert.degree(),
                    cert.sign,
                    hw.d_gamma(g)
                ));
            }
            checked += 1;
        }
        parts.push(format!("{} {checked} tame elements", d.name));
    }
    Ok(parts.join(", "))
}

fn criteria_1_to_4(r: &Representation) -> Result<(), String> {
    traces_ok(r)?;
    let pairs = multiplicativity_pairs(r.hw.weil_order(), SAMPLED_PAIRS, 10);
    multiplicative_ok(r, &pairs)?;
    irreducible_ok(r)?;
    support_ok(r)
}

fn same_traces(a: &Representation, b: &Representation) -> bool {
    let (ia, ib) = (a.hw.heis.identity(), b.hw.heis.identity());
    a.hw.weil_order() == b.hw.weil_order() && (0..a.hw.weil_order()).all(|g| a.character(&ia, g) == b.character(&ib, g))
}

fn criterion10() -> Outcome {
    let mut parts = Vec::new();
    // (a) a twisted psi
    let twists: Vec<(&str, u64, Vec<OrbitSpec>)> = vec![
        ("GL(1,F3)", 3, vec![OrbitSpec::asymmetric(1, 1)]),
        ("U(1,F9/F3)", 3, vec![OrbitSpec::symmetric(2, 1)]),
        ("GL(1,F4)", 4, vec![OrbitSpec::asymmetric(1, 1)]),
    ];
    for (name, q, orbits) in &twists {
        let sp = space(*q, orbits)?;
        let (p, f) = split_prime_power(*q).map_err(|e| e.to_string())?;
        let c = sp.model.embed(&canonical(p as u32, f, 1, 2)).map_err(|e| e.to_string())?;
        if c == Fe::ONE {
            return Err(format!("{name}: twist is trivial"));
        }
        let (a, b) = (rep_of(&sp, Fe::ONE, 0)?, rep_of(&sp, c, 0)?);
        criteria_1_to_4(&b).map_err(|e| format!("(a) {name}: {e}"))?;
        if !same_traces(&a, &b) {
            return Err(format!("(a) {name}: traces changed"));
        }
    }
    parts.push("(a) psi twist on GL(1,F3), U(1,F9/F3), GL(1,F4)");
    // (b) rescaled basis vectors
    let scaled: Vec<(&str, u64, OrbitSpec, Vec<Canonical>)> = vec![
        ("U(1,F4/F2)", 2, OrbitSpec::symmetric(2, 1), vec![canonical(2, 1, 4, 2)]),
        ("GL(1,F2)", 2, OrbitSpec::asymmetric(1, 1), vec![canonical(2, 1, 2, 2)]),
        ("GL(2,F2)", 2, OrbitSpec::asymmetric(1, 2), vec![canonical(2, 1, 2, 2), canonical(2, 1, 2, 3)]),
        ("U(1,F9/F3)", 3, OrbitSpec::symmetric(2, 1), vec![canonical(3, 1, 2, 4)]),
    ];
    for (name, q, base, sc) in scaled {
        let mut s = base.clone();
        s.scalars = Some(sc);
        let (sa, sb) = (space(q, &[base])?, space(q, &[s])?);
        if sa.basis.iter().map(|b| b.c).eq(sb.basis.iter().map(|b| b.c)) && sa.d0 == sb.d0 {
            return Err(format!("(b) {name}: rescaling did not change the twisting scalars"));
        }
        let (a, b) = (rep_of(&sa, Fe::ONE, 0)?, rep_of(&sb, Fe::ONE, 0)?);
        criteria_1_to_4(&b).map_err(|e| format!("(b) {name}: {e}"))?;
        if !same_traces(&a, &b) {
            return Err(format!("(b) {name}: traces changed"));
        }
    }
    parts.push("(b) rescaled scalars on U(1,F4/F2), GL(1,F2), GL(2,F2), U(1,F9/F3)");
    // (c) a different extension of psi to the Lagrangian
    for d in six().into_iter().filter(|d| d.name.starts_with("U(")) {
        let sp = space(d.q, &d.orbits)?;
        let (a, b) = (rep_of(&sp, Fe::ONE, 0)?, rep_of(&sp, Fe::ONE, 1)?);
        if a.heis_rep.mu0 == b.heis_rep.mu0 {
            return Err(format!("(c) {}: variant gives the same extension", d.name));
        }
        criteria_1_to_4(&b).map_err(|e| format!("(c) {}: {e}", d.name))?;
        for h in a.hw.heis.elements(CAP).map_err(|e| e.to_string())? {
            for g in 0..a.hw.weil_order() {
                if a.character(&h, g) != b.character(&h, g) {
                    return Err(format!("(c) {}: character differs", d.name));
                }
            }
        }
    }
    parts.push("(c) second extension on the unitary data");
    Ok(parts.join("; "))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 10] = [
        (1, "character formula", criterion1),
        (2, "multiplicativity", criterion2),
        (3, "irreducibility", criterion3),
        (4, "support", criterion4),
        (5, "Gauss sum oracle", criterion5),
        (6, "cohomology dimension", criterion6),
        (7, "torsor dimension", criterion7),
        (8, "restriction and induction", criterion8),
        (9, "tame fixed loci", criterion9),
        (10, "robustness", criterion10),
    ];
    let mut failed = 0;
    for (i, name, f) in criteria {
        let start = Instant::now();
        let out = f();
        let secs = start.elapsed().as_secs_f64();
        match out {
            Ok(msg) => println!("criterion {i:>2} PASS {name}: {msg} [{secs:.1}s]"),
            Err(msg) => {
                failed += 1;
                println!("criterion {i:>2} FAIL {name}: {msg} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
