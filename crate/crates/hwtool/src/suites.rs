//! The verification suites behind the command line.

use hwcore::cyclotomic::{Cyc, CycloField};
use hwcore::exp_sums::{
    build_torsor, extract_recurrence, fixed_locus_sequence, gauss_sum, reduce_gauss_sum, torsor_sequence, GaussSumSpec,
    RecurrenceCertificate, TorsorSpec,
};
use hwcore::ff_tower::Fe;
use hwcore::heisenberg::{HWGroup, HeisenbergGroup};
use hwcore::weight_datum::{
    characteristic_index, check_grading, validate_datum, OrbitKind, PolarizationData, SymplecticSpace,
};
use hwcore::weil_reps::{parabolic_restriction_check, Representation};
use hwcore::Error;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};

use crate::config::{ElementJson, RunConfig, Suite};
use crate::report::{cyc_json, round, sequence_json, Check, Report, Status};

/// Default number of terms for a sequence whose expected recurrence degree is `deg`.
pub fn default_len(deg: u64) -> u32 {
    (2 * deg + 4).min(64) as u32
}

/// Runs the selected suites; an empty selection gives an empty report.
pub fn run(config: &RunConfig, suites: &[Suite]) -> Report {
    let config_echo = serde_json::to_value(config).unwrap_or(Value::Null);
    let mut checks = Vec::new();
    if suites.is_empty() {
        return Report::new(config_echo, Value::Null, checks);
    }
    let sp = match config.datum().and_then(|w| validate_datum(&w, config.cap())) {
        Ok(sp) => sp,
        Err(e) => {
            checks.push(Check::from_error("validate", "datum", &e));
            return Report::new(config_echo, Value::Null, checks);
        }
    };
    let pol = characteristic_index(&sp, &config.polarization());
    let datum = datum_json(&sp, pol.as_ref().ok());
    if suites.contains(&Suite::Validate) {
        checks.extend(validate(config, &sp, &pol));
    }
    if suites.contains(&Suite::CharacterTable) {
        checks.extend(character_table(config, &sp));
    }
    if suites.contains(&Suite::GaussSum) || suites.contains(&Suite::TorsorCount) {
        match &pol {
            Ok(pol) => {
                let torsor = config.psi_scale(&sp.model).and_then(|c| build_torsor(&sp, pol, c, config.cap()));
                match torsor {
                    Ok(ts) => {
                        if suites.contains(&Suite::GaussSum) {
                            checks.extend(gauss_suite(config, &ts));
                        }
                        if suites.contains(&Suite::TorsorCount) {
                            checks.extend(torsor_suite(config, &ts));
                        }
                    }
                    Err(e) => checks.push(Check::from_error("torsor-count", "build", &e)),
                }
            }
            Err(e) => checks.push(Check::from_error("torsor-count", "polarization", e)),
        }
    }
    Report::new(config_echo, datum, checks)
}

/// Normalized echo of a validated datum.
pub fn datum_json(sp: &SymplecticSpace, pol: Option<&PolarizationData>) -> Value {
    let w = &sp.datum;
    let names = |v: &[usize]| -> Vec<&str> { v.iter().map(|&i| w.labels[i].as_str()).collect() };
    let orbits: Vec<Value> = sp
        .orbits
        .iter()
        .map(|o| {
            json!({
                "representative": o.rep_label,
                "type": match o.kind { OrbitKind::Asymmetric => "polarized", OrbitKind::Symmetric => "unitary" },
                "d": o.d,
                "multiplicity": o.m,
                "labels": names(&o.labels),
                "dim_k": o.dim_k(),
            })
        })
        .collect();
    let mut v = json!({
        "q": w.q,
        "labels": w.labels,
        "sigma": names(&w.sigma),
        "neg": names(&w.neg),
        "multiplicity": w.multiplicity,
        "orbits": orbits,
        "dim_k": sp.dim_k(),
        "size": sp.size().to_string(),
        "d0": sp.d0,
        "forms": w.forms.iter().map(|(k, v)| (k.clone(), v.iter().map(ElementJson::from).collect::<Vec<_>>())).collect::<std::collections::BTreeMap<_, _>>(),
        "scalars": w.scalars.iter().map(|(k, v)| (k.clone(), v.iter().map(ElementJson::from).collect::<Vec<_>>())).collect::<std::collections::BTreeMap<_, _>>(),
    });
    if let Some(p) = pol {
        v["polarization"] = polarization_json(sp, p);
    }
    v
}

pub fn polarization_json(sp: &SymplecticSpace, p: &PolarizationData) -> Value {
    let labels = |v: &[usize]| -> Vec<&str> { v.iter().map(|&i| sp.label(i)).collect() };
    let basis = |v: &[usize]| -> Vec<String> { v.iter().map(|&b| sp.basis_name(b)).collect() };
    json!({
        "plus": p.plus_labels(sp),
        "I0": labels(&p.i0),
        "I1": labels(&p.i1),
        "minus_I0": labels(&p.minus_i0),
        "Lambda0": basis(&p.lambda0),
        "Lambda1": basis(&p.lambda1),
        "n_lambda": p.n.iter().map(|(&b, &n)| (sp.basis_name(b), n)).collect::<std::collections::BTreeMap<_, _>>(),
        "beta": p.beta.iter().map(|(&b, &c)| (sp.basis_name(b), sp.basis_name(c))).collect::<std::collections::BTreeMap<_, _>>(),
        "cohomological_degree": p.cohomological_degree(),
    })
}

fn validate(config: &RunConfig, sp: &SymplecticSpace, pol: &hwcore::Result<PolarizationData>) -> Vec<Check> {
    let mut out = vec![Check::new("validate", "datum", Status::Pass, json!({"size": sp.size().to_string(), "d0": sp.d0}))];
    out.push(match pol {
        Ok(p) => Check::new("validate", "polarization", Status::Pass, polarization_json(sp, p)),
        Err(e) => Check::from_error("validate", "polarization", e),
    });
    if let Some(g) = &config.grading {
        out.push(match check_grading(sp, g) {
            Ok(()) => Check::new("validate", "grading", Status::Pass, json!(g)),
            Err(e) => Check::from_error("validate", "grading", &e),
        });
    }
    out
}

/// Builds the Heisenberg-Weil representation for `config`, twisted by `psi`.
pub fn representation(config: &RunConfig, sp: &SymplecticSpace, psi: Fe) -> hwcore::Result<Representation> {
    let hw = HWGroup::new(HeisenbergGroup::new(sp.clone())?, config.cap())?;
    Representation::new(hw, psi, config.mu0_variant, config.cap())
}

/// Pairs to check for multiplicativity: all of them, or a seeded sample.
pub fn multiplicativity_pairs(order: usize, samples: usize, seed: u64) -> Vec<(usize, usize)> {
    if order * order <= samples {
        return (0..order).flat_map(|a| (0..order).map(move |b| (a, b))).collect();
    }
    let mut rng = StdRng::seed_from_u64(seed);
    (0..samples).map(|_| (rng.gen_range(0..order), rng.gen_range(0..order))).collect()
}

/// Character suite checks for one representation; `tag` prefixes the check names.
pub fn character_checks(config: &RunConfig, rep: &Representation, tag: &str) -> Vec<Check> {
    let suite = "character-table";
    let k = rep.field();
    let hw = &rep.hw;
    let cap = config.cap();
    let mut out = Vec::new();
    let id = hw.heis.identity();
    for g in 0..hw.weil_order() {
        let tr = rep.character(&id, g);
        let expected = rep.expected_trace(g);
        let (sgn, d_gamma, _) = hw.sgn_and_dgamma(g);
        let power = rep.power_is_identity(g);
        let inter = match rep.intertwines(g, cap) {
            Ok(b) => b,
            Err(e) => {
                out.push(Check::from_error(suite, format!("{tag}gamma[{}]", hw.weil_label(g)), &e));
                continue;
            }
        };
        let perm = rep.permutation_oracle(g).map(|m| {
            let dense = m.to_dense(k);
            dense == rep.weil_operator(g).to_dense(k)
        });
        let ok = tr == expected && power && inter && perm.unwrap_or(true);
        out.push(Check::new(
            suite,
            format!("{tag}gamma[{}]", hw.weil_label(g)),
            Status::from_bool(ok),
            json!({
                "order": hw.weil_order_of(g),
                "d_gamma": d_gamma,
                "sgn": sgn,
                "dim_k_fixed": hw.fixed_dim_k(g),
                "trace": cyc_json(k, &tr),
                "expected": cyc_json(k, &expected),
                "power_is_identity": power,
                "intertwines": inter,
                "permutation_oracle": perm,
            }),
        ));
    }
    let pairs = multiplicativity_pairs(hw.weil_order(), config.samples(), 0);
    let bad: Vec<(String, String)> =
        pairs.iter().filter(|&&(a, b)| !rep.is_multiplicative_on(a, b)).map(|&(a, b)| (hw.weil_label(a), hw.weil_label(b))).take(8).collect();
    out.push(Check::new(
        suite,
        format!("{tag}multiplicativity"),
        Status::from_bool(bad.is_empty()),
        json!({"pairs_checked": pairs.len(), "group_order": hw.weil_order(), "failures": bad}),
    ));
    out.push(match rep.norm_sum(cap) {
        Ok(s) => {
            let want = k.from_bigint(hw.order().into());
            Check::new(
                suite,
                format!("{tag}irreducibility"),
                Status::from_bool(s == want),
                json!({"norm_sum": cyc_json(k, &s), "group_order": hw.order().to_string()}),
            )
        }
        Err(e) => Check::from_error(suite, format!("{tag}irreducibility"), &e),
    });
    out.push(match rep.support_violations(cap) {
        Ok(n) => Check::new(suite, format!("{tag}support"), Status::from_bool(n == 0), json!({"violations": n})),
        Err(e) => Check::from_error(suite, format!("{tag}support"), &e),
    });
    if let Some(g) = &config.grading {
        out.push(match parabolic_restriction_check(rep, g, cap) {
            Ok(r) => Check::new(
                suite,
                format!("{tag}restriction"),
                Status::from_bool(r.passed()),
                json!({
                    "dim_u0": r.dim_u0,
                    "dim_u_plus": r.dim_u_plus,
                    "induced_matches": r.induced_matches,
                    "induced_checked": r.induced_checked,
                    "projector_rank": r.projector_rank,
                    "expected_rank": r.expected_rank,
                    "fixed_traces_match": r.fixed_traces_match,
                    "fixed_checked": r.fixed_checked,
                }),
            ),
            Err(e) => Check::from_error(suite, format!("{tag}restriction"), &e),
        });
    }
    out
}

fn character_table(config: &RunConfig, sp: &SymplecticSpace) -> Vec<Check> {
    let suite = "character-table";
    let psi = match config.psi_scale(&sp.model) {
        Ok(c) => c,
        Err(e) => return vec![Check::from_error(suite, "psi", &e)],
    };
    let rep = match representation(config, sp, psi) {
        Ok(r) => r,
        Err(e) => return vec![Check::from_error(suite, "representation", &e)],
    };
    let mut out = vec![Check::new(suite, "representation", Status::Pass, json!({"dim": rep.dim(), "weil_order": rep.hw.weil_order()}))];
    out.extend(character_checks(config, &rep, ""));
    match config.psi_twist(&sp.model) {
        Ok(Some(c)) => match representation(config, sp, c) {
            Ok(r2) => {
                let mut checks = character_checks(config, &r2, "twisted.");
                let same = (0..rep.hw.weil_order()).all(|g| rep.character(&rep.hw.heis.identity(), g) == r2.character(&r2.hw.heis.identity(), g));
                checks.push(Check::new(suite, "twisted.same_traces", Status::from_bool(same), Value::Null));
                out.extend(checks);
            }
            Err(e) => out.push(Check::from_error(suite, "twisted.representation", &e)),
        },
        Ok(None) => {}
        Err(e) => out.push(Check::from_error(suite, "twisted.psi", &e)),
    }
    out
}

/// Gauss sum specs: those of the config, or the cycles of the torsor.
pub fn gauss_specs(config: &RunConfig, ts: &TorsorSpec) -> hwcore::Result<Vec<GaussSumSpec>> {
    if !config.gauss.is_empty() {
        return Ok(config
            .gauss
            .iter()
            .map(|g| GaussSumSpec { q: config.q, a: g.a.iter().map(Into::into).collect(), degs: g.degs.clone(), d: g.d })
            .collect());
    }
    let m = &ts.space.model;
    ts.cycles
        .iter()
        .map(|c| {
            Ok(GaussSumSpec {
                q: config.q,
                a: c.a.iter().map(|&x| m.to_canonical(x, ts.d0)).collect::<hwcore::Result<_>>()?,
                degs: c.degs.clone(),
                d: ts.d0,
            })
        })
        .collect()
}

/// What the eigenvalue moduli should be.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Weight {
    /// Every `|lambda|` equals this.
    Abs(f64),
    /// Every `|lambda|` equals `base^{m/2}` for one integer `m` with `(-1)^m` the sign.
    Common { base: f64 },
}

/// Certificate check against an expected degree, eigenvalue modulus and sign.
#[allow(clippy::too_many_arguments)]
pub fn certificate_check(
    suite: &str,
    name: String,
    k: &CycloField,
    ts: &[u32],
    values: &[Cyc],
    expected_degree: u64,
    weight: Weight,
    expected_sign: Option<i8>,
    tol: f64,
) -> Check {
    let seq = sequence_json(k, ts.iter().copied(), values);
    if (values.len() as u64) < 2 * expected_degree {
        return Check::new(suite, name, Status::Skipped, json!({"sequence": seq, "expected_degree": expected_degree}))
            .with_reason(format!("only {} terms; degree is a lower bound", values.len()));
    }
    let scale = match weight {
        Weight::Abs(a) => a,
        Weight::Common { base } => base,
    };
    match extract_recurrence(k, values, values.len() / 2, scale) {
        Ok(cert) => {
            let (pure, expected_abs, m) = match weight {
                Weight::Abs(a) => (cert.is_pure(a, tol), a, None),
                Weight::Common { base } => match cert.common_weight(base, tol) {
                    Some(m) => (i8::from(m % 2 == 0) * 2 - 1 == cert.sign, base.powf(m as f64 / 2.0), Some(m)),
                    None => (false, f64::NAN, None),
                },
            };
            let ok = cert.degree() as u64 == expected_degree && pure && expected_sign.is_none_or(|s| s == cert.sign);
            let mut data = certificate_json(k, &cert, seq, expected_degree, expected_abs, expected_sign);
            data["weight"] = json!(m);
            Check::new(suite, name, Status::from_bool(ok), data)
        }
        Err(e) => Check::from_error(suite, name, &e),
    }
}

pub fn certificate_json(
    k: &CycloField,
    cert: &RecurrenceCertificate,
    seq: Value,
    expected_degree: u64,
    expected_abs: f64,
    expected_sign: Option<i8>,
) -> Value {
    json!({
        "sequence": seq,
        "minimal_recurrence": cert.minimal.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "minimal_degree": cert.minimal_degree(),
        "degree": cert.degree(),
        "sign": cert.sign,
        "elementary": cert.elementary.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "root_magnitudes": cert.magnitudes().into_iter().map(round).collect::<Vec<_>>(),
        "purity_defect": if expected_abs.is_finite() { json!(round(cert.purity_defect(expected_abs))) } else { Value::Null },
        "degree_is_lower_bound": cert.degree_is_lower_bound,
        "expected_degree": expected_degree,
        "expected_abs": if expected_abs.is_finite() { json!(round(expected_abs)) } else { Value::Null },
        "expected_sign": expected_sign,
        "field_n": k.n(),
    })
}

fn gauss_suite(config: &RunConfig, ts: &TorsorSpec) -> Vec<Check> {
    let suite = "gauss-sum";
    let specs = match gauss_specs(config, ts) {
        Ok(s) => s,
        Err(e) => return vec![Check::from_error(suite, "specs", &e)],
    };
    let k = match CycloField::for_char(ts.space.p()) {
        Ok(k) => k,
        Err(e) => return vec![Check::from_error(suite, "field", &e)],
    };
    let cap = config.cap();
    let mut out = Vec::new();
    for (i, spec) in specs.iter().enumerate() {
        let dsum: u32 = spec.degs.iter().sum();
        let expected = config.q.saturating_pow(dsum);
        let t_min = config.t_min.unwrap_or(1);
        let t_max = config.t_max.unwrap_or(default_len(expected).max(12));
        let (mut ts_used, mut values, mut rows, mut mismatch) = (Vec::new(), Vec::new(), Vec::new(), None);
        let mut err = None;
        for t in t_min..=t_max {
            let s = reduce_gauss_sum(spec, t, cap);
            let b = gauss_sum(spec, t, cap);
            match (&b, &s) {
                (Ok(b), Ok(s)) if b != s => mismatch = Some((t, b.to_string(), s.to_string())),
                _ => {}
            }
            for r in [&b, &s] {
                if let Err(e) = r {
                    if !matches!(e, Error::BoundExceeded { .. }) {
                        err = Some(e.clone());
                    }
                }
            }
            rows.push(json!({"t": t, "brute": b.as_ref().ok().map(|x| x.to_string()), "structural": s.as_ref().ok().map(|x| x.to_string())}));
            match s {
                Ok(v) => {
                    ts_used.push(t);
                    values.push(v);
                }
                Err(_) => break,
            }
        }
        let name = format!("S[{i}]");
        let data = json!({"q": spec.q, "d": spec.d, "degs": spec.degs, "a": spec.a.iter().map(ElementJson::from).collect::<Vec<_>>(), "terms": rows});
        if let Some(e) = err {
            out.push(Check::from_error(suite, format!("{name}.oracle"), &e));
            continue;
        }
        let compared = rows.iter().filter(|r| !r["brute"].is_null() && !r["structural"].is_null()).count();
        out.push(match mismatch {
            Some((t, b, s)) => Check::new(suite, format!("{name}.oracle"), Status::Fail, json!({"t": t, "brute": b, "structural": s, "spec": data}))
                .with_reason("brute force and reduction disagree"),
            None if compared == 0 => Check::new(suite, format!("{name}.oracle"), Status::Skipped, data).with_reason("brute force over the cap for every t"),
            None => Check::new(suite, format!("{name}.oracle"), Status::Pass, data),
        });
        if t_min == 1 {
            let abs = (config.q as f64).powf(spec.d as f64 * spec.a.len() as f64 / 2.0);
            let sign = if spec.a.len() % 2 == 0 { 1 } else { -1 };
            out.push(certificate_check(
                suite,
                format!("{name}.certificate"),
                &k,
                &ts_used,
                &values,
                expected,
                Weight::Abs(abs),
                Some(sign),
                config.tolerance(),
            ));
        }
    }
    out
}

/// Torsor checks for a prebuilt torsor; exposed so fixtures can corrupt it.
pub fn torsor_suite(config: &RunConfig, ts: &TorsorSpec) -> Vec<Check> {
    let suite = "torsor-count";
    let cap = config.cap();
    let tol = config.tolerance();
    let mut out = Vec::new();
    let k = match CycloField::for_char(ts.space.p()) {
        Ok(k) => k,
        Err(e) => return vec![Check::from_error(suite, "field", &e)],
    };
    let size = ts.space.size();
    let root = isqrt(size);
    let len = config.t_max.unwrap_or(default_len(root as u64));
    let n = ts.cohomological_degree();
    let full_sign: i8 = if n.is_multiple_of(2) { 1 } else { -1 };
    let seq = match torsor_sequence(ts, len, cap) {
        Ok(s) => s,
        Err(e) => return vec![Check::from_error(suite, "oracle", &e)],
    };
    let compared = seq.iter().filter(|t| t.brute.is_some() && t.structural.is_some()).count();
    let rows: Vec<Value> = seq
        .iter()
        .map(|t| json!({"t": t.t, "brute": t.brute.as_ref().map(|x| x.to_string()), "structural": t.structural.as_ref().map(|x| x.to_string())}))
        .collect();
    let oracle = Check::new(suite, "oracle", if compared > 0 { Status::Pass } else { Status::Skipped }, json!({"terms": rows, "compared": compared}));
    out.push(if compared > 0 { oracle } else { oracle.with_reason("no t had both oracles under the cap") });
    let ts_used: Vec<u32> = seq.iter().map(|t| t.t).collect();
    let values: Vec<Cyc> = seq.iter().filter_map(|t| t.value().cloned()).collect();
    let bound_ok = values.iter().zip(&ts_used).all(|(v, &t)| {
        let b = (size as f64).sqrt() * (ts.space.q() as f64).powf(ts.d0 as f64 * t as f64 * n as f64 / 2.0);
        k.complex_abs(v) <= b * (1.0 + tol)
    });
    out.push(Check::new(suite, "magnitude", Status::from_bool(bound_ok), json!({"terms": values.len()})));
    out.push(certificate_check(suite, "certificate".into(), &k, &ts_used, &values, root as u64, Weight::Abs(ts.weight_abs()), Some(full_sign), tol));

    let hw = match HeisenbergGroup::new(ts.space.clone()).and_then(|h| HWGroup::new(h, cap)) {
        Ok(hw) => hw,
        Err(e) => {
            out.push(Check::from_error(suite, "fixed", &e));
            return out;
        }
    };
    let p = ts.space.p() as u64;
    for g in 0..hw.weil_order() {
        if hw.weil_order_of(g) % p == 0 {
            continue;
        }
        let name = format!("fixed[{}]", hw.weil_label(g));
        let fixed_size = (ts.space.q() as u128).pow(hw.fixed_dim_k(g));
        let deg = isqrt(fixed_size) as u64;
        let d_gamma = hw.d_gamma(g);
        let sign_gamma: i8 = if d_gamma % 2 == 0 { 1 } else { -1 };
        let flen = config.t_max.unwrap_or(default_len(deg));
        match fixed_locus_sequence(ts, &hw, g, flen, cap) {
            Ok(vals) => {
                let tt: Vec<u32> = (1..=vals.len() as u32).collect();
                // (-1)^n (-1)^m = (-1)^{d_gamma}
                let want = sign_gamma * full_sign;
                let base = (ts.space.q() as f64).powi(ts.d0 as i32);
                let mut c = certificate_check(suite, name, &k, &tt, &vals, deg, Weight::Common { base }, Some(want), tol);
                c.data["d_gamma"] = json!(d_gamma);
                c.data["trace_sign"] = json!(sign_gamma);
                out.push(c);
            }
            Err(e) => out.push(Check::from_error(suite, name, &e)),
        }
    }
    out
}

pub fn isqrt(n: u128) -> u128 {
    let mut r = (n as f64).sqrt() as u128;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}
