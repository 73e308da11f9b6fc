//! Weight data and the symplectic spaces they describe.
//!
//! A [`WeightDatum`] is a finite set `S` of labels with a permutation
//! `sigma` (Frobenius) and a fixed point free involution `s -> -s` commuting
//! with it, together with a multiplicity per label. Validation produces a
//! [`SymplecticSpace`]: an adapted basis `v_lambda` of the extended space,
//! the semilinear Frobenius `sigma(v_lambda) = c_{sigma lambda} v_{sigma lambda}`,
//! the Gram data, and for every `Gal x {+-1}` orbit a rational frame.
//!
//! Rational vectors are written in orbit coordinates. An asymmetric orbit
//! `C = Gal s + Gal(-s)` contributes `2m` coordinates `(a, a*)` in `k_s`,
//! with `<(a,a*), (b,b*)> = Tr_{k_s/k}(a.b* - b.a*)`. A symmetric orbit
//! contributes `m` coordinates `a` in `k_s` with the diagonal skew-Hermitian
//! form `B(a, b) = sum_j beta_j a_j b_j^{q^{d/2}}` and `<a, b> = Tr B(a, b)`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::ff_tower::{gcd, lcm, split_prime_power, Canonical, ClosureModel, Fe};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OrbitKind {
    /// `-s` is not Galois conjugate to `s`; the Weil factor is `GL`.
    Asymmetric,
    /// `-s = sigma^{d/2}(s)`; the Weil factor is a unitary group.
    Symmetric,
}

/// One orbit of a datum given in the compact form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitSpec {
    pub kind: OrbitKind,
    pub d: u32,
    pub multiplicity: u32,
    /// Diagonal of the skew-Hermitian form (symmetric orbits only).
    pub form: Option<Vec<Canonical>>,
    /// Rescaling of the positive side basis vectors, in `(position, copy)`
    /// order; the dual vectors are rescaled inversely.
    pub scalars: Option<Vec<Canonical>>,
}

impl OrbitSpec {
    pub fn asymmetric(d: u32, multiplicity: u32) -> Self {
        OrbitSpec { kind: OrbitKind::Asymmetric, d, multiplicity, form: None, scalars: None }
    }

    pub fn symmetric(d: u32, multiplicity: u32) -> Self {
        OrbitSpec { kind: OrbitKind::Symmetric, d, multiplicity, form: None, scalars: None }
    }
}

/// A weight set with Frobenius, negation and multiplicities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightDatum {
    pub q: u64,
    pub labels: Vec<String>,
    pub sigma: Vec<usize>,
    pub neg: Vec<usize>,
    pub multiplicity: Vec<u32>,
    /// Skew-Hermitian diagonals keyed by the representative label.
    pub forms: BTreeMap<String, Vec<Canonical>>,
    /// Rescaling scalars keyed by the representative label.
    pub scalars: BTreeMap<String, Vec<Canonical>>,
}

impl WeightDatum {
    /// Labels `o+i`, `o-i` for asymmetric orbits and `o~i` for symmetric
    /// ones, where `o` is the position of the orbit in `orbits`.
    pub fn from_orbits(q: u64, orbits: &[OrbitSpec]) -> Result<Self> {
        let mut w = WeightDatum {
            q,
            labels: Vec::new(),
            sigma: Vec::new(),
            neg: Vec::new(),
            multiplicity: Vec::new(),
            forms: BTreeMap::new(),
            scalars: BTreeMap::new(),
        };
        for (o, spec) in orbits.iter().enumerate() {
            let d = spec.d as usize;
            if d == 0 {
                return Err(Error::InvalidDatum(format!("orbit {o} has d = 0")));
            }
            let base = w.labels.len();
            let rep = match spec.kind {
                OrbitKind::Asymmetric => {
                    for i in 0..d {
                        w.labels.push(format!("{o}+{i}"));
                    }
                    for i in 0..d {
                        w.labels.push(format!("{o}-{i}"));
                    }
                    for side in 0..2 {
                        for i in 0..d {
                            w.sigma.push(base + side * d + (i + 1) % d);
                            w.neg.push(base + (1 - side) * d + i);
                        }
                    }
                    w.multiplicity.extend(core::iter::repeat_n(spec.multiplicity, 2 * d));
                    if spec.form.is_some() {
                        return Err(Error::InvalidDatum(format!(
                            "orbit {o}: a skew-Hermitian form needs a symmetric orbit"
                        )));
                    }
                    format!("{o}+0")
                }
                OrbitKind::Symmetric => {
                    if !d.is_multiple_of(2) {
                        return Err(Error::InvalidDatum(format!("symmetric orbit {o} has odd d = {d}")));
                    }
                    for i in 0..d {
                        w.labels.push(format!("{o}~{i}"));
                        w.sigma.push(base + (i + 1) % d);
                        w.neg.push(base + (i + d / 2) % d);
                    }
                    w.multiplicity.extend(core::iter::repeat_n(spec.multiplicity, d));
                    format!("{o}~0")
                }
            };
            if let Some(f) = &spec.form {
                w.forms.insert(rep.clone(), f.clone());
            }
            if let Some(s) = &spec.scalars {
                w.scalars.insert(rep, s.clone());
            }
        }
        Ok(w)
    }

    /// A datum given by explicit label lists; `sigma[i]` and `neg[i]` name
    /// the images of `labels[i]`.
    pub fn from_explicit(
        q: u64,
        labels: &[String],
        sigma: &[String],
        neg: &[String],
        multiplicity: &[u32],
    ) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::InvalidDatum(format!("duplicate label {l}")));
            }
        }
        let look = |names: &[String], what: &str| -> Result<Vec<usize>> {
            if names.len() != labels.len() {
                return Err(Error::InvalidDatum(format!("{what} has {} entries, expected {}", names.len(), labels.len())));
            }
            names
                .iter()
                .map(|n| index.get(n).copied().ok_or_else(|| Error::InvalidDatum(format!("{what}: unknown label {n}"))))
                .collect()
        };
        if multiplicity.len() != labels.len() {
            return Err(Error::InvalidDatum("multiplicity length differs from the label count".into()));
        }
        Ok(WeightDatum {
            q,
            labels: labels.to_vec(),
            sigma: look(sigma, "sigma")?,
            neg: look(neg, "neg")?,
            multiplicity: multiplicity.to_vec(),
            forms: BTreeMap::new(),
            scalars: BTreeMap::new(),
        })
    }

    pub fn label_index(&self, name: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == name)
    }
}

/// Which side of its orbit a basis vector lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Side {
    /// The Galois orbit of the representative (the whole orbit if symmetric).
    Plus,
    /// The Galois orbit of minus the representative.
    Minus,
}

/// A basis vector `v_lambda` of the extended space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisVector {
    pub label: usize,
    pub orbit: usize,
    pub side: Side,
    pub pos: u32,
    pub copy: u32,
    /// `sigma(lambda)`.
    pub sigma: usize,
    /// `sigma^{-1}(lambda)`.
    pub sigma_inv: usize,
    /// `-lambda`: the vector dual to `v_lambda`.
    pub neg: usize,
    /// `<v_lambda, v_{-lambda}>`, either `1` or `-1`.
    pub gram: i8,
    /// `c_lambda` with `sigma(v_{sigma^{-1} lambda}) = c_lambda v_lambda`.
    pub c: Fe,
    /// `F_lambda` with `sigma^pos(e_copy) = F_lambda v_lambda`, where `e_copy`
    /// is the rational frame vector of this side.
    pub frame: Fe,
}

/// A `Gal x {+-1}` orbit of `S` with its rational data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitClass {
    pub kind: OrbitKind,
    pub rep: usize,
    pub rep_label: String,
    pub d: u32,
    pub m: u32,
    pub labels: Vec<usize>,
    pub basis_offset: usize,
    pub coord_offset: usize,
    /// Diagonal of `B` in the rational frame (symmetric orbits).
    pub form: Vec<Fe>,
    /// Frame scalars: `e_j = rho_j v_{(+,0,j)}` spans `V^s`.
    pub rho: Vec<Fe>,
}

impl OrbitClass {
    /// `|C| * m`, the `k`-dimension of `V^C`.
    pub fn dim_k(&self) -> u32 {
        match self.kind {
            OrbitKind::Asymmetric => 2 * self.d * self.m,
            OrbitKind::Symmetric => self.d * self.m,
        }
    }

    /// Number of rational coordinates (elements of `k_s`).
    pub fn coord_len(&self) -> usize {
        match self.kind {
            OrbitKind::Asymmetric => 2 * self.m as usize,
            OrbitKind::Symmetric => self.m as usize,
        }
    }

    pub fn basis_len(&self) -> usize {
        self.dim_k() as usize
    }
}

/// A validated weight datum: adapted basis, orbit classes and rational frames.
#[derive(Clone, Debug)]
pub struct SymplecticSpace {
    pub model: ClosureModel,
    pub datum: WeightDatum,
    pub orbits: Vec<OrbitClass>,
    pub basis: Vec<BasisVector>,
    /// Least multiple of every `d_s` over which all structure constants are rational.
    pub d0: u32,
}

fn canonical_index(c: &Canonical, p: u32) -> u64 {
    c.coords.iter().rev().fold(0u64, |acc, &x| acc * p as u64 + (x % p) as u64)
}

fn canonical_from_index(mut idx: u64, degree: u32, f: u32, p: u32) -> Canonical {
    let mut coords = Vec::with_capacity((degree * f) as usize);
    for _ in 0..degree * f {
        coords.push((idx % p as u64) as u32);
        idx /= p as u64;
    }
    Canonical { degree, coords }
}

/// The least nonzero `xi` of `k_d` (in canonical order) with `Tr_{k_d/k_{d/2}}(xi) = 0`.
pub fn default_xi(model: &ClosureModel, d: u32) -> Result<Canonical> {
    let (p, f) = (model.p(), model.f());
    let size = model.q().pow(d);
    for idx in 1..size {
        let c = canonical_from_index(idx, d, f, p);
        let x = model.embed(&c)?;
        if model.add(x, model.frobenius(x, (d / 2) as i64)).is_zero() {
            return Ok(c);
        }
    }
    Err(Error::DegenerateForm(format!("no trace zero element in degree {d}")))
}

struct Classes {
    members: Vec<Vec<usize>>,
    reps: Vec<usize>,
}

fn check_permutations(w: &WeightDatum) -> Result<()> {
    let n = w.labels.len();
    if w.sigma.len() != n || w.neg.len() != n || w.multiplicity.len() != n {
        return Err(Error::InvalidDatum("sigma, neg and multiplicity must cover every label".into()));
    }
    if n == 0 {
        return Err(Error::InvalidDatum("empty weight set".into()));
    }
    let mut seen = vec![false; n];
    for &s in &w.sigma {
        if s >= n || core::mem::replace(&mut seen[s], true) {
            return Err(Error::InvalidDatum("sigma is not a permutation".into()));
        }
    }
    for s in 0..n {
        let t = w.neg[s];
        if t >= n || w.neg[t] != s {
            return Err(Error::InvalidDatum(format!("negation is not an involution at {}", w.labels[s])));
        }
        if t == s {
            return Err(Error::NotGenuine(w.labels[s].clone()));
        }
        if w.sigma[w.neg[s]] != w.neg[w.sigma[s]] {
            return Err(Error::InvalidDatum(format!("sigma does not commute with negation at {}", w.labels[s])));
        }
    }
    Ok(())
}

fn sigma_orbit(w: &WeightDatum, s: usize) -> Vec<usize> {
    let mut out = vec![s];
    let mut t = w.sigma[s];
    while t != s {
        out.push(t);
        t = w.sigma[t];
    }
    out
}

fn classes(w: &WeightDatum) -> Result<Classes> {
    let n = w.labels.len();
    let mut class_of = vec![usize::MAX; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    for s in 0..n {
        if class_of[s] != usize::MAX {
            continue;
        }
        let mut c = sigma_orbit(w, s);
        if !c.contains(&w.neg[s]) {
            c.extend(sigma_orbit(w, w.neg[s]));
        }
        for &t in &c {
            class_of[t] = members.len();
        }
        members.push(c);
    }
    for c in &members {
        let m = w.multiplicity[c[0]];
        if m == 0 || c.iter().any(|&t| w.multiplicity[t] != m) {
            return Err(Error::InconsistentMultiplicity(w.labels[c[0]].clone()));
        }
    }
    let mut order: Vec<(String, Vec<usize>)> = members
        .into_iter()
        .map(|mut c| {
            c.sort_by(|&a, &b| w.labels[a].cmp(&w.labels[b]));
            (w.labels[c[0]].clone(), c)
        })
        .collect();
    order.sort();
    let reps = order.iter().map(|(_, c)| c[0]).collect();
    Ok(Classes { members: order.into_iter().map(|(_, c)| c).collect(), reps })
}

/// Solutions `r` of `r^{q^d - 1} = y` in `model`, least index first.
fn hilbert90_root(model: &ClosureModel, y: Fe, d: u32) -> Option<Fe> {
    let a = y.log()? as u64;
    let m = model.order() as u64 - 1;
    let e = model.q().pow(d) - 1;
    if m == 0 {
        return Some(Fe::ONE);
    }
    if !m.is_multiple_of(e) || !a.is_multiple_of(e) {
        return None;
    }
    let step = m / e;
    let b0 = (a / e) % step;
    (0..e).map(|k| model.from_log(b0 + k * step)).min_by_key(|&r| model.index(r))
}

/// Checks a datum and builds its adapted basis inside one model of the
/// algebraic closure whose size is at most `cap`.
pub fn validate_datum(datum: &WeightDatum, cap: u64) -> Result<SymplecticSpace> {
    let (p, _) = split_prime_power(datum.q)?;
    check_permutations(datum)?;
    let cl = classes(datum)?;
    for key in datum.forms.keys().chain(datum.scalars.keys()) {
        if !cl.reps.iter().any(|&r| &datum.labels[r] == key) {
            return Err(Error::InvalidDatum(format!("{key} is not an orbit representative")));
        }
    }

    struct Shape {
        kind: OrbitKind,
        d: u32,
        m: u32,
        side_labels: [Vec<usize>; 2],
    }
    let mut shapes = Vec::new();
    for (members, &s) in cl.members.iter().zip(&cl.reps) {
        let plus = sigma_orbit(datum, s);
        let d = plus.len() as u32;
        let m = datum.multiplicity[s];
        let neg_s = datum.neg[s];
        let (kind, minus) = match plus.iter().position(|&t| t == neg_s) {
            Some(h) => {
                if !d.is_multiple_of(2) || 2 * h as u32 != d {
                    return Err(Error::InvalidDatum(format!(
                        "orbit of {}: -s = sigma^{h}(s) with d = {d}",
                        datum.labels[s]
                    )));
                }
                (OrbitKind::Symmetric, Vec::new())
            }
            None => (OrbitKind::Asymmetric, sigma_orbit(datum, neg_s)),
        };
        debug_assert_eq!(plus.len() + minus.len(), members.len());
        shapes.push(Shape { kind, d, m, side_labels: [plus, minus] });
    }

    // first pass: a model large enough for the given constants
    let mut d1 = 1u64;
    for (sh, &r) in shapes.iter().zip(&cl.reps) {
        d1 = lcm(d1, sh.d as u64);
        let key = &datum.labels[r];
        if let Some(form) = datum.forms.get(key) {
            if sh.kind != OrbitKind::Symmetric {
                return Err(Error::InvalidDatum(format!("{key}: form given for an asymmetric orbit")));
            }
            if form.len() != sh.m as usize {
                return Err(Error::InvalidDatum(format!("{key}: form needs {} entries", sh.m)));
            }
            for c in form {
                if c.degree == 0 || sh.d % c.degree != 0 {
                    return Err(Error::DegreeMismatch(format!("{key}: form entry of degree {} not in k_{}", c.degree, sh.d)));
                }
            }
        }
        if let Some(sc) = datum.scalars.get(key) {
            let need = match sh.kind {
                OrbitKind::Asymmetric => sh.d * sh.m,
                OrbitKind::Symmetric => sh.d / 2 * sh.m,
            };
            if sc.len() != need as usize {
                return Err(Error::InvalidDatum(format!("{key}: {need} rescaling scalars expected")));
            }
            for c in sc {
                if c.degree == 0 {
                    return Err(Error::DegreeMismatch(format!("{key}: scalar of degree 0")));
                }
                d1 = lcm(d1, c.degree as u64);
            }
        }
    }
    let d1 = d1 as u32;
    let m1 = ClosureModel::new(p, datum.q, d1, cap)?;

    // c-scalars in the first model, per orbit as [side][pos][copy]
    let mut cs: Vec<[Vec<Vec<Fe>>; 2]> = Vec::new();
    for (sh, &r) in shapes.iter().zip(&cl.reps) {
        let key = &datum.labels[r];
        let (d, m) = (sh.d as usize, sh.m as usize);
        let mut c = [vec![vec![Fe::ONE; m]; d], vec![vec![Fe::ONE; m]; d]];
        if sh.kind == OrbitKind::Symmetric {
            let h = d / 2;
            let xs: Vec<Fe> = match datum.forms.get(key) {
                Some(form) => form.iter().map(|x| m1.embed(x)).collect::<Result<_>>()?,
                None => {
                    let xi = m1.embed(&default_xi(&m1, sh.d)?)?;
                    vec![xi; m]
                }
            };
            for (j, &x) in xs.iter().enumerate() {
                if x.is_zero() || !m1.add(x, m1.frobenius(x, h as i64)).is_zero() {
                    return Err(Error::DegenerateForm(key.clone()));
                }
                c[0][h][j] = x;
                c[0][0][j] = m1.neg(m1.inv(x)?);
            }
        }
        if let Some(sc) = datum.scalars.get(key) {
            let rs: Vec<Fe> = sc.iter().map(|x| m1.embed(x)).collect::<Result<_>>()?;
            if rs.iter().any(|x| x.is_zero()) {
                return Err(Error::DegenerateForm(format!("{key}: zero rescaling scalar")));
            }
            // r[lambda] for every basis vector of the orbit; the dual side gets 1/r
            let positive = match sh.kind {
                OrbitKind::Asymmetric => d,
                OrbitKind::Symmetric => d / 2,
            };
            let mut rr = [vec![vec![Fe::ONE; m]; d], vec![vec![Fe::ONE; m]; d]];
            for i in 0..positive {
                for j in 0..m {
                    let x = rs[i * m + j];
                    let xinv = m1.inv(x)?;
                    match sh.kind {
                        OrbitKind::Asymmetric => {
                            rr[0][i][j] = x;
                            rr[1][i][j] = xinv;
                        }
                        OrbitKind::Symmetric => {
                            rr[0][i][j] = x;
                            rr[0][i + d / 2][j] = xinv;
                        }
                    }
                }
            }
            let sides = if sh.kind == OrbitKind::Asymmetric { 2 } else { 1 };
            for side in 0..sides {
                let old = c[side].clone();
                for i in 0..d {
                    let prev = (i + d - 1) % d;
                    for j in 0..m {
                        // v'_lambda = r_lambda v_lambda
                        let num = m1.mul(m1.frobenius(rr[side][prev][j], 1), old[i][j]);
                        c[side][i][j] = m1.div(num, rr[side][i][j])?;
                    }
                }
            }
        }
        cs.push(c);
    }

    // the frame scalars may need a larger field
    let chain = |model: &ClosureModel, c: &[Vec<Fe>], j: usize| -> Vec<Fe> {
        let mut k = vec![Fe::ONE];
        for ci in c.iter().skip(1) {
            let prev = *k.last().unwrap();
            k.push(model.mul(model.frobenius(prev, 1), ci[j]));
        }
        k
    };
    let mut big = d1 as u64;
    for (sh, c) in shapes.iter().zip(&cs) {
        for j in 0..sh.m as usize {
            let k = chain(&m1, &c[0], j);
            let total = m1.mul(m1.frobenius(*k.last().unwrap(), 1), c[0][0][j]);
            let y = m1.inv(total)?;
            let nrm = m1.norm(y, d1, sh.d)?;
            let o = m1.mult_order(nrm);
            big = lcm(big, d1 as u64 * o);
        }
    }
    if big > u32::MAX as u64 {
        return Err(Error::BoundExceeded { what: "frame field degree".into(), needed: big as u128, cap });
    }
    let model = if big as u32 == d1 { m1.clone() } else { ClosureModel::new(p, datum.q, big as u32, cap)? };
    let tr = |x: Fe| -> Fe {
        if big as u32 == d1 {
            x
        } else {
            model.transport(&m1, x).expect("transport into a larger model")
        }
    };

    let mut orbits = Vec::new();
    let mut basis: Vec<BasisVector> = Vec::new();
    let mut coord_offset = 0;
    let mut label_basis: BTreeMap<(usize, u32), usize> = BTreeMap::new();
    let mut d0 = 1u64;
    for (o, ((sh, c), &r)) in shapes.iter().zip(&cs).zip(&cl.reps).enumerate() {
        let (d, m) = (sh.d as usize, sh.m as usize);
        d0 = lcm(d0, d as u64);
        let c: [Vec<Vec<Fe>>; 2] = [
            c[0].iter().map(|row| row.iter().map(|&x| tr(x)).collect()).collect(),
            c[1].iter().map(|row| row.iter().map(|&x| tr(x)).collect()).collect(),
        ];
        let mut rho = Vec::new();
        let mut kap = [Vec::new(), Vec::new()];
        for j in 0..m {
            for side in 0..2 {
                kap[side].push(chain(&model, &c[side], j));
            }
            let k = &kap[0][j];
            let total = model.mul(model.frobenius(*k.last().unwrap(), 1), c[0][0][j]);
            let y = model.inv(total)?;
            let r = hilbert90_root(&model, y, sh.d).ok_or_else(|| Error::DegenerateForm(datum.labels[r].clone()))?;
            rho.push(r);
        }
        let mut form = Vec::new();
        if sh.kind == OrbitKind::Symmetric {
            let h = d / 2;
            for j in 0..m {
                let rj = rho[j];
                let b = model.mul(model.mul(rj, model.frobenius(rj, h as i64)), kap[0][j][h]);
                if b.is_zero() || !model.add(b, model.frobenius(b, h as i64)).is_zero() {
                    return Err(Error::DegenerateForm(datum.labels[r].clone()));
                }
                form.push(b);
            }
        }
        let basis_offset = basis.len();
        let sides: &[Side] = match sh.kind {
            OrbitKind::Asymmetric => &[Side::Plus, Side::Minus],
            OrbitKind::Symmetric => &[Side::Plus],
        };
        for (si, &side) in sides.iter().enumerate() {
            for i in 0..d {
                for j in 0..m {
                    let label = sh.side_labels[si][i];
                    let rj = if side == Side::Plus { rho[j] } else { model.inv(rho[j])? };
                    let frame = model.mul(model.frobenius(rj, i as i64), kap[si][j][i]);
                    let gram = match sh.kind {
                        OrbitKind::Asymmetric => {
                            if side == Side::Plus {
                                1
                            } else {
                                -1
                            }
                        }
                        OrbitKind::Symmetric => {
                            if i < d / 2 {
                                1
                            } else {
                                -1
                            }
                        }
                    };
                    label_basis.insert((label, j as u32), basis.len());
                    basis.push(BasisVector {
                        label,
                        orbit: o,
                        side,
                        pos: i as u32,
                        copy: j as u32,
                        sigma: 0,
                        sigma_inv: 0,
                        neg: 0,
                        gram,
                        c: c[si][i][j],
                        frame,
                    });
                }
            }
        }
        orbits.push(OrbitClass {
            kind: sh.kind,
            rep: r,
            rep_label: datum.labels[r].clone(),
            d: sh.d,
            m: sh.m,
            labels: cl.members[o].clone(),
            basis_offset,
            coord_offset,
            form,
            rho,
        });
        coord_offset += orbits.last().unwrap().coord_len();
    }
    for b in 0..basis.len() {
        let (l, j) = (basis[b].label, basis[b].copy);
        let s = label_basis[&(datum.sigma[l], j)];
        basis[b].sigma = s;
        basis[s].sigma_inv = b;
        basis[b].neg = label_basis[&(datum.neg[l], j)];
    }
    for bv in &basis {
        for x in [bv.c, bv.frame] {
            d0 = lcm(d0, model.degree_of(x) as u64);
        }
    }
    for o in &orbits {
        for &x in o.rho.iter().chain(&o.form) {
            d0 = lcm(d0, model.degree_of(x) as u64);
        }
    }
    let sp = SymplecticSpace { model, datum: datum.clone(), orbits, basis, d0: d0 as u32 };
    sp.check_structure()?;
    Ok(sp)
}

/// Orbit class listing, in representative order.
pub fn classify_orbits(sp: &SymplecticSpace) -> &[OrbitClass] {
    &sp.orbits
}

impl SymplecticSpace {
    pub fn p(&self) -> u32 {
        self.model.p()
    }

    pub fn q(&self) -> u64 {
        self.model.q()
    }

    /// `dim_k V`.
    pub fn dim_k(&self) -> u32 {
        self.orbits.iter().map(|o| o.dim_k()).sum()
    }

    /// `|V(k)|` as an exact integer.
    pub fn size(&self) -> u128 {
        (self.q() as u128).pow(self.dim_k())
    }

    /// Number of rational coordinates.
    pub fn coord_len(&self) -> usize {
        self.orbits.iter().map(|o| o.coord_len()).sum()
    }

    pub fn label(&self, s: usize) -> &str {
        &self.datum.labels[s]
    }

    /// `label#copy`, the name of a basis vector.
    pub fn basis_name(&self, b: usize) -> String {
        let v = &self.basis[b];
        format!("{}#{}", self.datum.labels[v.label], v.copy)
    }

    pub fn zero(&self) -> Vec<Fe> {
        vec![Fe::ZERO; self.coord_len()]
    }

    pub fn add(&self, x: &[Fe], y: &[Fe]) -> Vec<Fe> {
        x.iter().zip(y).map(|(&a, &b)| self.model.add(a, b)).collect()
    }

    pub fn neg(&self, x: &[Fe]) -> Vec<Fe> {
        x.iter().map(|&a| self.model.neg(a)).collect()
    }

    pub fn sub(&self, x: &[Fe], y: &[Fe]) -> Vec<Fe> {
        x.iter().zip(y).map(|(&a, &b)| self.model.sub(a, b)).collect()
    }

    /// Multiplication by an element of `k`.
    pub fn scale(&self, c: Fe, x: &[Fe]) -> Vec<Fe> {
        x.iter().map(|&a| self.model.mul(c, a)).collect()
    }

    /// `B(a, b)` on one orbit: the dual pairing `a.b*` of the two halves of
    /// an asymmetric orbit, the skew-Hermitian form of a symmetric one.
    pub fn orbit_form(&self, o: usize, a: &[Fe], b: &[Fe]) -> Fe {
        let oc = &self.orbits[o];
        let f = &self.model;
        let m = oc.m as usize;
        let mut acc = Fe::ZERO;
        match oc.kind {
            OrbitKind::Asymmetric => {
                for j in 0..m {
                    acc = f.add(acc, f.mul(a[j], b[m + j]));
                }
            }
            OrbitKind::Symmetric => {
                let h = (oc.d / 2) as i64;
                for j in 0..m {
                    acc = f.add(acc, f.mul(oc.form[j], f.mul(a[j], f.frobenius(b[j], h))));
                }
            }
        }
        acc
    }

    pub fn orbit_slice<'a>(&self, o: usize, x: &'a [Fe]) -> &'a [Fe] {
        let oc = &self.orbits[o];
        &x[oc.coord_offset..oc.coord_offset + oc.coord_len()]
    }

    /// `<x, y>` on `V(k)`.
    pub fn pairing(&self, x: &[Fe], y: &[Fe]) -> Fe {
        let f = &self.model;
        let mut acc = Fe::ZERO;
        for (o, oc) in self.orbits.iter().enumerate() {
            let (a, b) = (self.orbit_slice(o, x), self.orbit_slice(o, y));
            let v = match oc.kind {
                OrbitKind::Asymmetric => f.sub(self.orbit_form(o, a, b), self.orbit_form(o, b, a)),
                OrbitKind::Symmetric => self.orbit_form(o, a, b),
            };
            acc = f.add(acc, f.trace(v, oc.d, 1).expect("orbit values lie in k_s"));
        }
        acc
    }

    /// Coordinates `u_lambda` of a rational vector in the adapted basis.
    pub fn lift(&self, x: &[Fe]) -> Vec<Fe> {
        let f = &self.model;
        self.basis
            .iter()
            .map(|b| {
                let oc = &self.orbits[b.orbit];
                let idx = oc.coord_offset
                    + b.copy as usize
                    + if b.side == Side::Minus { oc.m as usize } else { 0 };
                f.mul(f.frobenius(x[idx], b.pos as i64), b.frame)
            })
            .collect()
    }

    /// `<u, w>` on the extended space.
    pub fn gram_bar(&self, u: &[Fe], w: &[Fe]) -> Fe {
        let f = &self.model;
        let mut acc = Fe::ZERO;
        for (l, b) in self.basis.iter().enumerate() {
            let t = f.mul(u[l], w[b.neg]);
            acc = if b.gram > 0 { f.add(acc, t) } else { f.sub(acc, t) };
        }
        acc
    }

    /// The semilinear Frobenius on the extended space.
    pub fn sigma_bar(&self, u: &[Fe]) -> Vec<Fe> {
        let f = &self.model;
        self.basis.iter().map(|b| f.mul(b.c, f.frobenius(u[b.sigma_inv], 1))).collect()
    }

    fn check_structure(&self) -> Result<()> {
        let f = &self.model;
        for (l, b) in self.basis.iter().enumerate() {
            let nb = &self.basis[b.neg];
            if nb.neg != l || nb.gram != -b.gram || self.datum.neg[b.label] != nb.label {
                return Err(Error::DegenerateForm(self.basis_name(l)));
            }
            // <sigma v, sigma v*> = sigma <v, v*>
            let s = &self.basis[b.sigma];
            let prod = f.mul(s.c, self.basis[s.neg].c);
            let lhs = if s.gram > 0 { prod } else { f.neg(prod) };
            let rhs = f.from_int(b.gram as i64);
            if lhs != rhs {
                return Err(Error::DegenerateForm(self.basis_name(l)));
            }
        }
        Ok(())
    }

    /// A subspace made of whole orbits, sharing the model and the frames.
    pub fn restrict(&self, orbit_ids: &[usize]) -> Result<SymplecticSpace> {
        let mut keep: Vec<usize> = orbit_ids.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if keep.iter().any(|&o| o >= self.orbits.len()) || keep.is_empty() {
            return Err(Error::InvalidDatum("orbit selection out of range".into()));
        }
        let labels_kept: BTreeSet<usize> = keep.iter().flat_map(|&o| self.orbits[o].labels.iter().copied()).collect();
        let old_to_new: BTreeMap<usize, usize> = labels_kept.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        let w = &self.datum;
        let map = |l: usize| old_to_new[&l];
        let datum = WeightDatum {
            q: w.q,
            labels: labels_kept.iter().map(|&l| w.labels[l].clone()).collect(),
            sigma: labels_kept.iter().map(|&l| map(w.sigma[l])).collect(),
            neg: labels_kept.iter().map(|&l| map(w.neg[l])).collect(),
            multiplicity: labels_kept.iter().map(|&l| w.multiplicity[l]).collect(),
            forms: w.forms.iter().filter(|(k, _)| keep.iter().any(|&o| &self.orbits[o].rep_label == *k)).map(|(k, v)| (k.clone(), v.clone())).collect(),
            scalars: w.scalars.iter().filter(|(k, _)| keep.iter().any(|&o| &self.orbits[o].rep_label == *k)).map(|(k, v)| (k.clone(), v.clone())).collect(),
        };
        let mut orbits = Vec::new();
        let mut basis = Vec::new();
        let mut basis_map = BTreeMap::new();
        let mut coord_offset = 0;
        for &o in &keep {
            let oc = &self.orbits[o];
            let mut noc = oc.clone();
            noc.rep = map(oc.rep);
            noc.labels = oc.labels.iter().map(|&l| map(l)).collect();
            noc.basis_offset = basis.len();
            noc.coord_offset = coord_offset;
            coord_offset += noc.coord_len();
            for b in oc.basis_offset..oc.basis_offset + oc.basis_len() {
                basis_map.insert(b, basis.len());
                let mut nb = self.basis[b].clone();
                nb.orbit = orbits.len();
                nb.label = map(nb.label);
                basis.push(nb);
            }
            orbits.push(noc);
        }
        for nb in basis.iter_mut() {
            nb.sigma = basis_map[&nb.sigma];
            nb.sigma_inv = basis_map[&nb.sigma_inv];
            nb.neg = basis_map[&nb.neg];
        }
        let mut d0 = 1u64;
        for oc in &orbits {
            d0 = lcm(d0, oc.d as u64);
        }
        for bv in &basis {
            for x in [bv.c, bv.frame] {
                d0 = lcm(d0, self.model.degree_of(x) as u64);
            }
        }
        for oc in &orbits {
            for &x in oc.rho.iter().chain(&oc.form) {
                d0 = lcm(d0, self.model.degree_of(x) as u64);
            }
        }
        Ok(SymplecticSpace { model: self.model.clone(), datum, orbits, basis, d0: d0 as u32 })
    }

    /// All vectors of `k_e^n`, enumerated in mixed radix order over
    /// `model.subfield_elements(e)`.
    fn product_space(&self, blocks: &[u32], cap: u64, what: &str) -> Result<Vec<Vec<Fe>>> {
        let mut total: u128 = 1;
        for &e in blocks {
            total = total.saturating_mul((self.q() as u128).pow(e));
        }
        if total > cap as u128 {
            return Err(Error::BoundExceeded { what: what.to_string(), needed: total, cap });
        }
        let elems: Vec<Vec<Fe>> = blocks.iter().map(|&e| self.model.subfield_elements(e)).collect();
        let mut out = Vec::with_capacity(total as usize);
        let mut idx = vec![0usize; blocks.len()];
        loop {
            out.push(idx.iter().zip(&elems).map(|(&i, el)| el[i]).collect());
            let mut k = 0;
            loop {
                if k == idx.len() {
                    return Ok(out);
                }
                idx[k] += 1;
                if idx[k] < elems[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    /// Every vector of `V(k)`, in a fixed order starting with zero.
    pub fn rational_points(&self, cap: u64) -> Result<Vec<Vec<Fe>>> {
        let blocks: Vec<u32> = self.orbits.iter().flat_map(|o| core::iter::repeat_n(o.d, o.coord_len())).collect();
        self.product_space(&blocks, cap, "rational points of V")
    }

    /// Every vector of `V^s = k_s^m` for one orbit.
    pub fn orbit_points(&self, o: usize, cap: u64) -> Result<Vec<Vec<Fe>>> {
        let oc = &self.orbits[o];
        self.product_space(&vec![oc.d; oc.m as usize], cap, "points of V^s")
    }

    /// `F_p` basis of `V(k)` as rational vectors.
    pub fn fp_basis(&self) -> Vec<Vec<Fe>> {
        let f = &self.model;
        let mut out = Vec::new();
        for oc in &self.orbits {
            // F_p basis of k_s: g^i for the field generator of k_s
            let units = f.subfield_units(oc.d);
            let mut span = crate::linalg::FpSpan::new(f.p());
            let mut fb = Vec::new();
            for &u in &units {
                if span.insert(&f.coordinates(u)) {
                    fb.push(u);
                }
                if span.dim() == (f.f() * oc.d) as usize {
                    break;
                }
            }
            for c in 0..oc.coord_len() {
                for &u in &fb {
                    let mut v = self.zero();
                    v[oc.coord_offset + c] = u;
                    out.push(v);
                }
            }
        }
        out
    }

    /// Mixed radix index of a rational vector in [`SymplecticSpace::rational_points`] order.
    pub fn point_index(&self, x: &[Fe]) -> usize {
        let f = &self.model;
        let mut idx = 0usize;
        let mut mult = 1usize;
        for oc in &self.orbits {
            let size = f.q().pow(oc.d) as usize;
            let step = (f.order() as usize - 1) / (size - 1);
            for &a in &x[oc.coord_offset..oc.coord_offset + oc.coord_len()] {
                let i = match a.log() {
                    None => 0,
                    Some(l) => l as usize / step + 1,
                };
                idx += i * mult;
                mult *= size;
            }
        }
        idx
    }
}

/// Selection of points for [`enumerate_points`].
#[derive(Clone, Copy, Debug)]
pub enum PointSet<'a> {
    /// `V(k)` in rational coordinates.
    Whole,
    /// `V^s` over `k_s` for one orbit.
    Orbit(usize),
    /// The rational form of `sum_{s in I_0} V^{-s}`, in adapted coordinates.
    MinusI0(&'a PolarizationData),
}

pub fn enumerate_points(sp: &SymplecticSpace, set: PointSet<'_>, cap: u64) -> Result<Vec<Vec<Fe>>> {
    match set {
        PointSet::Whole => sp.rational_points(cap),
        PointSet::Orbit(o) => sp.orbit_points(o, cap),
        PointSet::MinusI0(pol) => {
            // rational vectors supported on the sides in -I_0
            let mut free = Vec::new();
            for (o, oc) in sp.orbits.iter().enumerate() {
                if oc.kind != OrbitKind::Asymmetric {
                    continue;
                }
                for (side, first) in [(Side::Plus, oc.basis_offset), (Side::Minus, oc.basis_offset + oc.basis_len() / 2)] {
                    let label = sp.basis[first].label;
                    if pol.minus_i0.contains(&label) {
                        let start = oc.coord_offset + if side == Side::Minus { oc.m as usize } else { 0 };
                        for j in 0..oc.m as usize {
                            free.push((o, start + j));
                        }
                    }
                }
            }
            let blocks: Vec<u32> = free.iter().map(|&(o, _)| sp.orbits[o].d).collect();
            let pts = sp.product_space(&blocks, cap, "points of V^{-I_0}")?;
            Ok(pts
                .into_iter()
                .map(|vals| {
                    let mut x = sp.zero();
                    for (&(_, c), v) in free.iter().zip(vals) {
                        x[c] = v;
                    }
                    sp.lift(&x)
                })
                .collect())
        }
    }
}

/// Choice of `S^+`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PolarizationChoice {
    /// Per orbit: `Gal s` against `Gal(-s)`, or the first half of a symmetric orbit.
    Simple,
    /// Explicit list of the labels in `S^+`.
    Explicit(Vec<String>),
}

/// A polarization and its characteristic index set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolarizationData {
    /// Membership in `S^+`, per label.
    pub plus: Vec<bool>,
    pub i0: Vec<usize>,
    pub i1: Vec<usize>,
    /// Labels of `-I_0`.
    pub minus_i0: Vec<usize>,
    pub lambda0: Vec<usize>,
    pub lambda1: Vec<usize>,
    /// `n_lambda` for `lambda` in `Lambda_1`.
    pub n: BTreeMap<usize, u32>,
    /// `beta_lambda` for `lambda` in `Lambda_1`.
    pub beta: BTreeMap<usize, usize>,
}

impl PolarizationData {
    pub fn plus_labels<'a>(&self, sp: &'a SymplecticSpace) -> Vec<&'a str> {
        (0..self.plus.len()).filter(|&s| self.plus[s]).map(|s| sp.label(s)).collect()
    }

    /// `2 |Lambda_0| + |Lambda_1|`, the degree of the nonvanishing cohomology.
    pub fn cohomological_degree(&self) -> u32 {
        (2 * self.lambda0.len() + self.lambda1.len()) as u32
    }
}

pub fn characteristic_index(sp: &SymplecticSpace, choice: &PolarizationChoice) -> Result<PolarizationData> {
    let w = &sp.datum;
    let n = w.labels.len();
    let mut plus = vec![false; n];
    match choice {
        PolarizationChoice::Simple => {
            for oc in &sp.orbits {
                let mut t = oc.rep;
                let steps = match oc.kind {
                    OrbitKind::Asymmetric => oc.d,
                    OrbitKind::Symmetric => oc.d / 2,
                };
                for _ in 0..steps {
                    plus[t] = true;
                    t = w.sigma[t];
                }
            }
        }
        PolarizationChoice::Explicit(names) => {
            for name in names {
                let s = w.label_index(name).ok_or_else(|| Error::NotAPolarization(format!("unknown label {name}")))?;
                plus[s] = true;
            }
        }
    }
    for s in 0..n {
        if plus[s] == plus[w.neg[s]] {
            return Err(Error::NotAPolarization(format!(
                "exactly one of {} and its negative must be positive",
                w.labels[s]
            )));
        }
    }
    let mut i0 = Vec::new();
    let mut i1 = Vec::new();
    for s in 0..n {
        if !plus[s] {
            continue;
        }
        if sigma_orbit(w, s).iter().all(|&t| plus[t]) {
            i0.push(s);
        }
        // s in sigma(S^-)
        let pre = (0..n).find(|&t| w.sigma[t] == s).expect("sigma is a permutation");
        if !plus[pre] {
            i1.push(s);
        }
    }
    let minus_i0: Vec<usize> = i0.iter().map(|&s| w.neg[s]).collect();
    let lambda0: Vec<usize> = (0..sp.basis.len()).filter(|&b| i0.contains(&sp.basis[b].label)).collect();
    let lambda1: Vec<usize> = (0..sp.basis.len()).filter(|&b| i1.contains(&sp.basis[b].label)).collect();
    let plus_b = |b: usize| plus[sp.basis[b].label];
    let mut nmap = BTreeMap::new();
    let mut beta = BTreeMap::new();
    for &l in &lambda1 {
        // walk sigma^{-k}(lambda) through S^- until the predecessor is in S^+
        let mut k = 1u32;
        let mut t = sp.basis[l].sigma_inv;
        loop {
            if plus_b(t) {
                return Err(Error::InvalidDatum("characteristic index walk left S^-".into()));
            }
            let pre = sp.basis[t].sigma_inv;
            if plus_b(pre) {
                break;
            }
            t = pre;
            k += 1;
        }
        nmap.insert(l, k);
        beta.insert(l, sp.basis[t].neg);
    }
    let pd = PolarizationData { plus, i0, i1, minus_i0, lambda0, lambda1, n: nmap, beta };
    check_polarization(sp, &pd)?;
    Ok(pd)
}

fn check_polarization(sp: &SymplecticSpace, pd: &PolarizationData) -> Result<()> {
    let bad = |msg: &str| Err(Error::InvalidDatum(format!("polarization invariant: {msg}")));
    let l1: BTreeSet<usize> = pd.lambda1.iter().copied().collect();
    let images: BTreeSet<usize> = pd.beta.values().copied().collect();
    if images != l1 {
        return bad("beta is not a permutation of Lambda_1");
    }
    let plus_b = |b: usize| pd.plus[sp.basis[b].label];
    for &l in &pd.lambda1 {
        let n = pd.n[&l];
        let mut t = l;
        for k in 1..=n {
            t = sp.basis[t].sigma_inv;
            if plus_b(t) {
                return bad("sigma^{-k}(s) must be negative for 1 <= k <= n");
            }
            if k == n && !plus_b(sp.basis[t].sigma_inv) {
                return bad("sigma^{-n}(s) must lie in sigma(S^+)");
            }
        }
    }
    let l0: BTreeSet<usize> = pd.lambda0.iter().copied().collect();
    let outside = (0..sp.basis.len()).filter(|b| !l0.contains(b) && !l0.contains(&sp.basis[*b].neg)).count();
    let total: u32 = pd.n.values().sum();
    if 2 * total as usize != outside {
        return bad("sum of n_lambda is not half the complement of Lambda_0 and -Lambda_0");
    }
    Ok(())
}

/// An integer weight per label, used to split `V = u^- + u^0 + u^+`.
pub fn check_grading(sp: &SymplecticSpace, grading: &[i64]) -> Result<()> {
    let w = &sp.datum;
    if grading.len() != w.labels.len() {
        return Err(Error::BadGrading("one weight per label expected".into()));
    }
    for s in 0..w.labels.len() {
        if grading[w.sigma[s]] != grading[s] {
            return Err(Error::BadGrading(format!("not Galois invariant at {}", w.labels[s])));
        }
        if grading[w.neg[s]] != -grading[s] {
            return Err(Error::BadGrading(format!("not odd under negation at {}", w.labels[s])));
        }
    }
    Ok(())
}

/// `gcd` of the orbit degrees; exposed for reports.
pub fn degree_gcd(sp: &SymplecticSpace) -> u64 {
    sp.orbits.iter().fold(0, |g, o| gcd(g, o.d as u64))
}

/// Canonical name of an element of `k_e` (for reports): its coordinate index.
pub fn canonical_code(c: &Canonical, p: u32) -> u64 {
    canonical_index(c, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff_tower::DEFAULT_CAP;

    fn space(q: u64, orbits: &[OrbitSpec]) -> SymplecticSpace {
        validate_datum(&WeightDatum::from_orbits(q, orbits).unwrap(), DEFAULT_CAP).unwrap()
    }

    #[test]
    fn dual_pair() {
        let sp = space(2, &[OrbitSpec::asymmetric(1, 1)]);
        assert_eq!(sp.dim_k(), 2);
        assert_eq!(sp.basis.len(), 2);
        let x = vec![Fe::ONE, Fe::ZERO];
        let y = vec![Fe::ZERO, Fe::ONE];
        assert_eq!(sp.pairing(&x, &y), Fe::ONE);
        assert_eq!(sp.pairing(&x, &x), Fe::ZERO);
    }

    #[test]
    fn unitary_line_over_f4() {
        let sp = space(2, &[OrbitSpec::symmetric(2, 1)]);
        let o = &sp.orbits[0];
        assert_eq!(o.form, vec![Fe::ONE]);
        assert_eq!(sp.dim_k(), 2);
        assert_eq!(sp.d0, 2);
        // B(v, v) = xi, Tr xi = 0
        let v = vec![Fe::ONE];
        let b = sp.orbit_form(0, &v, &v);
        assert_eq!(sp.model.relative_trace(b, 2).unwrap(), Fe::ZERO);
    }

    #[test]
    fn self_negative_label_rejected() {
        let labels: Vec<String> = ["a", "b"].iter().map(|s| s.to_string()).collect();
        let w = WeightDatum::from_explicit(2, &labels, &labels, &labels, &[1, 1]).unwrap();
        assert!(matches!(validate_datum(&w, DEFAULT_CAP), Err(Error::NotGenuine(_))));
    }

    #[test]
    fn lift_respects_pairing_and_frobenius() {
        for (q, spec) in [
            (3, OrbitSpec::symmetric(2, 2)),
            (2, OrbitSpec::asymmetric(2, 1)),
            (2, OrbitSpec::symmetric(4, 1)),
        ] {
            let sp = space(q, &[spec]);
            let pts = sp.rational_points(DEFAULT_CAP).unwrap();
            for x in pts.iter().take(40) {
                let u = sp.lift(x);
                assert_eq!(sp.sigma_bar(&u), u);
                for y in pts.iter().skip(3).take(20) {
                    assert_eq!(sp.gram_bar(&u, &sp.lift(y)), sp.pairing(x, y));
                }
            }
        }
    }

    #[test]
    fn characteristic_index_examples() {
        let sp = space(2, &[OrbitSpec::symmetric(2, 1)]);
        let pd = characteristic_index(&sp, &PolarizationChoice::Simple).unwrap();
        assert_eq!(pd.lambda1, vec![0]);
        assert_eq!(pd.n[&0], 1);
        assert_eq!(pd.beta[&0], 0);

        let sp = space(2, &[OrbitSpec::asymmetric(2, 1)]);
        let pd = characteristic_index(&sp, &PolarizationChoice::Simple).unwrap();
        assert!(pd.i1.is_empty());
        assert_eq!(pd.i0.len(), 2);
        let pd = characteristic_index(&sp, &PolarizationChoice::Explicit(vec!["0+0".into(), "0-1".into()])).unwrap();
        assert!(pd.i0.is_empty());
        assert_eq!(pd.lambda1.len(), 2);
        assert!(pd.n.values().all(|&n| n == 1));
        let (a, b) = (pd.lambda1[0], pd.lambda1[1]);
        assert_eq!(pd.beta[&a], b);
        assert_eq!(pd.beta[&b], a);
    }
}
