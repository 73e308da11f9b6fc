//! Gauss sums, point counts of Lang torsors, and recurrence certificates.
//!
//! `S_d(a; d)(t) = sum_{x in k_{dt}^n} psi_{dt}(sum_i a_i x_i x_{i+1}^{q^{d_i}})` with
//! `x_{n+1} = x_1`. The structural evaluation removes two variables at a
//! time: summing over `x_n` gives `q^{dt}` on the locus
//! `x_{n-1} = -a_{n-1}^{-1} a_n^{q^{d_{n-1}}} x_1^{q^{d_{n-1} + d_n}}` and zero elsewhere.
//!
//! The torsor of a polarization is the set of `v` in the extended space with
//! `sigma(v) - v` supported on the characteristic index set `I`. Over
//! `k_{d0 t}` its points are parametrized by free coordinates on
//! `Lambda_0 + Lambda_1` and a rational point of `V^{-I_0}`; the other
//! coordinates follow from `u_lambda = c_lambda u_{sigma^{-1} lambda}^q`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::One;

use crate::cyclotomic::{Cyc, CycloField, Psi};
use crate::error::{Error, Result};
use crate::ff_tower::{lcm, split_prime_power, Canonical, ClosureModel, Fe};
use crate::heisenberg::{HWGroup, WeilIndex};
use crate::poly::{complex_roots, squarefree_decomposition, to_complex, CPoly};
use crate::weight_datum::{enumerate_points, OrbitKind, PointSet, PolarizationData, Side, SymplecticSpace};

/// A Gauss sum in `n` cyclically coupled variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaussSumSpec {
    pub q: u64,
    /// Coefficients in `k_d`.
    pub a: Vec<Canonical>,
    /// Exponent degrees `d_i >= 1`.
    pub degs: Vec<u32>,
    /// Working degree.
    pub d: u32,
}

impl GaussSumSpec {
    fn check(&self) -> Result<()> {
        if self.a.is_empty() || self.a.len() != self.degs.len() {
            return Err(Error::InvalidDatum("one exponent degree per coefficient".into()));
        }
        if self.d == 0 || self.degs.contains(&0) {
            return Err(Error::DegreeMismatch("degrees must be positive".into()));
        }
        for c in &self.a {
            if c.degree == 0 || !self.d.is_multiple_of(c.degree) {
                return Err(Error::DegreeMismatch("coefficient outside k_d".into()));
            }
            if c.coords.iter().all(|&x| x == 0) {
                return Err(Error::AllCoefficientsNonzero);
            }
        }
        Ok(())
    }

    /// Coefficients placed in `F_{q^{dt}}` through the model of `k_d`.
    fn setup(&self, t: u32, cap: u64) -> Result<(ClosureModel, Vec<Fe>)> {
        self.check()?;
        let (p, _) = split_prime_power(self.q)?;
        let base = ClosureModel::new(p, self.q, self.d, cap)?;
        let a: Vec<Fe> = self.a.iter().map(|c| base.embed(c)).collect::<Result<_>>()?;
        let top = ClosureModel::new(p, self.q, self.d * t, cap)?;
        let a = a.iter().map(|&x| top.transport(&base, x)).collect::<Result<_>>()?;
        Ok((top, a))
    }
}

fn psi_for(model: &ClosureModel, field: &CycloField, scale: Option<Fe>) -> Result<Psi> {
    Psi::new(field, model, scale.unwrap_or(Fe::ONE))
}

/// Brute force over `k_dd^n`.
pub fn gauss_sum_in(model: &ClosureModel, psi: &Psi, a: &[Fe], degs: &[u32], dd: u32, cap: u64) -> Result<Cyc> {
    let field = CycloField::for_char(model.p())?;
    let n = a.len();
    let size = (model.q() as u128).pow(dd);
    let total = size.checked_pow(n as u32).unwrap_or(u128::MAX);
    if total > cap as u128 {
        return Err(Error::BoundExceeded { what: "Gauss sum points".into(), needed: total, cap });
    }
    let elems = model.subfield_elements(dd);
    let mut hist = vec![0i64; field.n() as usize];
    let mut idx = vec![0usize; n];
    loop {
        let mut f = Fe::ZERO;
        for i in 0..n {
            let x = elems[idx[i]];
            let y = model.frobenius(elems[idx[(i + 1) % n]], degs[i] as i64);
            f = model.add(f, model.mul(a[i], model.mul(x, y)));
        }
        hist[psi.exponent(model, f, dd)? as usize] += 1;
        let mut k = 0;
        loop {
            if k == n {
                return Ok(field.from_histogram(&hist));
            }
            idx[k] += 1;
            if idx[k] < elems.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Structural evaluation by repeated elimination of the last two variables.
pub fn reduce_gauss_sum_in(model: &ClosureModel, psi: &Psi, a: &[Fe], degs: &[u32], dd: u32, cap: u64) -> Result<Cyc> {
    let field = CycloField::for_char(model.p())?;
    let qd = BigInt::from(model.q()).pow(dd);
    let mut factor = BigInt::one();
    let mut a = a.to_vec();
    let mut degs = degs.to_vec();
    while a.len() >= 3 {
        let n = a.len();
        let (a2, a1, a0) = (a[n - 3], a[n - 2], a[n - 1]);
        let (d2, d1) = (degs[n - 3], degs[n - 2]);
        let new_a = model.neg(model.mul(
            model.mul(a2, model.frobenius(model.inv(a1)?, d2 as i64)),
            model.frobenius(a0, (d2 + d1) as i64),
        ));
        let new_d = degs[n - 3] + degs[n - 2] + degs[n - 1];
        a.truncate(n - 3);
        degs.truncate(n - 3);
        a.push(new_a);
        degs.push(new_d);
        factor *= &qd;
    }
    let size = (model.q() as u128).pow(dd);
    if size > cap as u128 {
        return Err(Error::BoundExceeded { what: "Gauss sum base case".into(), needed: size, cap });
    }
    let elems = model.subfield_elements(dd);
    let base = if a.len() == 2 {
        // x1 = -a1^{-1} a2^{q^{d1}} x1^{q^{d1 + d2}}
        let c = model.neg(model.mul(model.inv(a[0])?, model.frobenius(a[1], degs[0] as i64)));
        let e = (degs[0] + degs[1]) as i64;
        let count = elems.iter().filter(|&&x| x == model.mul(c, model.frobenius(x, e))).count();
        field.from_bigint(&qd * BigInt::from(count))
    } else {
        let mut hist = vec![0i64; field.n() as usize];
        for &x in &elems {
            let f = model.mul(a[0], model.mul(x, model.frobenius(x, degs[0] as i64)));
            hist[psi.exponent(model, f, dd)? as usize] += 1;
        }
        field.from_histogram(&hist)
    };
    Ok(field.mul(&base, &field.from_bigint(factor)))
}

/// Brute-force `S_d(a; d)(t)` with the standard character.
pub fn gauss_sum(spec: &GaussSumSpec, t: u32, cap: u64) -> Result<Cyc> {
    spec.check()?;
    let total = (spec.q as u128).checked_pow(spec.d * t * spec.a.len() as u32).unwrap_or(u128::MAX);
    if total > cap as u128 {
        return Err(Error::BoundExceeded { what: "Gauss sum points".into(), needed: total, cap });
    }
    let (model, a) = spec.setup(t, cap)?;
    let field = CycloField::for_char(model.p())?;
    gauss_sum_in(&model, &psi_for(&model, &field, None)?, &a, &spec.degs, spec.d * t, cap)
}

/// Structural `S_d(a; d)(t)`; agrees with [`gauss_sum`] exactly.
pub fn reduce_gauss_sum(spec: &GaussSumSpec, t: u32, cap: u64) -> Result<Cyc> {
    let (model, a) = spec.setup(t, cap)?;
    let field = CycloField::for_char(model.p())?;
    reduce_gauss_sum_in(&model, &psi_for(&model, &field, None)?, &a, &spec.degs, spec.d * t, cap)
}

/// One cycle of `lambda -> beta_lambda` with its Gauss sum data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaussCycle {
    /// Basis indices `lambda, beta(lambda), beta^2(lambda), ...`.
    pub basis: Vec<usize>,
    /// `a_lambda`, in the model of the space.
    pub a: Vec<Fe>,
    /// `n_lambda`.
    pub degs: Vec<u32>,
}

/// The torsor of a polarization together with its derived Gauss sums.
#[derive(Clone, Debug)]
pub struct TorsorSpec {
    pub space: SymplecticSpace,
    pub pol: PolarizationData,
    pub cycles: Vec<GaussCycle>,
    /// Working degree: the space and its structure constants are defined over `k_{d0}`.
    pub d0: u32,
    /// Lifted points of `V^{-I_0}`, in adapted coordinates.
    pub minus_i0: Vec<Vec<Fe>>,
    /// Twist of `psi`, an element of `k` in the model of the space.
    pub psi_scale: Fe,
}

impl TorsorSpec {
    /// `2 |Lambda_0| + |Lambda_1|`.
    pub fn cohomological_degree(&self) -> u32 {
        self.pol.cohomological_degree()
    }

    /// `q^{d0 n / 2}`, the expected absolute value of every eigenvalue.
    pub fn weight_abs(&self) -> f64 {
        (self.space.q() as f64).powf(self.d0 as f64 * self.cohomological_degree() as f64 / 2.0)
    }

    /// Number of points over `k_{d0 t}`.
    pub fn point_count(&self, t: u32) -> u128 {
        let free = (self.pol.lambda0.len() + self.pol.lambda1.len()) as u32;
        (self.minus_i0.len() as u128).saturating_mul((self.space.q() as u128).saturating_pow(self.d0 * t * free))
    }

    /// The polynomial `f` as a coefficient map: `lambda -> (a_lambda, beta_lambda, n_lambda)`.
    pub fn polynomial(&self) -> BTreeMap<usize, (Fe, usize, u32)> {
        let mut out = BTreeMap::new();
        for c in &self.cycles {
            let k = c.basis.len();
            for i in 0..k {
                out.insert(c.basis[i], (c.a[i], c.basis[(i + 1) % k], c.degs[i]));
            }
        }
        out
    }
}

pub fn build_torsor(sp: &SymplecticSpace, pol: &PolarizationData, psi_scale: Fe, cap: u64) -> Result<TorsorSpec> {
    let f = &sp.model;
    let mut cycles = Vec::new();
    let mut seen = vec![false; sp.basis.len()];
    for &start in &pol.lambda1 {
        if seen[start] {
            continue;
        }
        let mut cyc = GaussCycle { basis: Vec::new(), a: Vec::new(), degs: Vec::new() };
        let mut mu = start;
        while !seen[mu] {
            seen[mu] = true;
            let n = pol.n[&mu];
            // a_mu = g_{-mu} prod_{k < n} c_{nu_k}^{q^k}, nu_k = sigma^{-k}(-mu)
            let neg = sp.basis[mu].neg;
            let mut a = f.from_int(sp.basis[neg].gram as i64);
            let mut nu = neg;
            for k in 0..n {
                a = f.mul(a, f.frobenius(sp.basis[nu].c, k as i64));
                nu = sp.basis[nu].sigma_inv;
            }
            cyc.basis.push(mu);
            cyc.a.push(a);
            cyc.degs.push(n);
            mu = pol.beta[&mu];
        }
        cycles.push(cyc);
    }
    let minus_i0 = enumerate_points(sp, PointSet::MinusI0(pol), cap)?;
    Ok(TorsorSpec { space: sp.clone(), pol: pol.clone(), cycles, d0: sp.d0, minus_i0, psi_scale })
}

/// The model, character and transported constants used at one `t`.
struct Level {
    model: ClosureModel,
    psi: Psi,
    dd: u32,
    c: Vec<Fe>,
    gram: Vec<Fe>,
}

impl TorsorSpec {
    fn level(&self, t: u32, cap: u64) -> Result<Level> {
        let sp = &self.space;
        let dd = self.d0 * t;
        let top = lcm(sp.model.degree() as u64, dd as u64) as u32;
        let model = if top == sp.model.degree() {
            sp.model.clone()
        } else {
            let (p, _) = split_prime_power(sp.q())?;
            ClosureModel::new(p, sp.q(), top, cap)?
        };
        let tr = |x: Fe| -> Result<Fe> {
            if top == sp.model.degree() {
                Ok(x)
            } else {
                model.transport(&sp.model, x)
            }
        };
        let field = CycloField::for_char(model.p())?;
        let psi = Psi::new(&field, &model, tr(self.psi_scale)?)?;
        let c = sp.basis.iter().map(|b| tr(b.c)).collect::<Result<_>>()?;
        let gram = sp.basis.iter().map(|b| model.from_int(b.gram as i64)).collect();
        Ok(Level { model, psi, dd, c, gram })
    }

    fn transport_all(&self, lv: &Level, v: &[Fe]) -> Result<Vec<Fe>> {
        if lv.model.degree() == self.space.model.degree() {
            return Ok(v.to_vec());
        }
        v.iter().map(|&x| lv.model.transport(&self.space.model, x)).collect()
    }

    /// Calls `visit(u, f(u))` for every point of the torsor over `k_{d0 t}`.
    fn for_each_point(&self, t: u32, cap: u64, lv: &Level, mut visit: impl FnMut(&[Fe], Fe)) -> Result<()> {
        let sp = &self.space;
        let m = &lv.model;
        let total = self.point_count(t);
        if total > cap as u128 {
            return Err(Error::BoundExceeded { what: "torsor points".into(), needed: total, cap });
        }
        let free: Vec<usize> = self.pol.lambda0.iter().chain(&self.pol.lambda1).copied().collect();
        let in_i: Vec<bool> = (0..sp.basis.len()).map(|b| self.pol.i0.contains(&sp.basis[b].label) || self.pol.i1.contains(&sp.basis[b].label)).collect();
        let in_minus_i0: Vec<bool> = (0..sp.basis.len()).map(|b| self.pol.minus_i0.contains(&sp.basis[b].label)).collect();
        let elems = m.subfield_elements(lv.dd);
        let bases: Vec<Vec<Fe>> = self.minus_i0.iter().map(|v| self.transport_all(lv, v)).collect::<Result<_>>()?;
        let mut idx = vec![0usize; free.len()];
        for base in &bases {
            idx.iter_mut().for_each(|i| *i = 0);
            loop {
                let mut u = base.clone();
                for (&b, &i) in free.iter().zip(&idx) {
                    u[b] = elems[i];
                }
                for &l in &self.pol.lambda1 {
                    let mut nu = sp.basis[l].sigma;
                    while !in_i[nu] && !in_minus_i0[nu] {
                        u[nu] = m.mul(lv.c[nu], m.frobenius(u[sp.basis[nu].sigma_inv], 1));
                        nu = sp.basis[nu].sigma;
                    }
                }
                // sigma(v) - v lies in U_I
                for b in 0..u.len() {
                    if !in_i[b] {
                        let s = m.mul(lv.c[b], m.frobenius(u[sp.basis[b].sigma_inv], 1));
                        if s != u[b] {
                            return Err(Error::InvalidDatum("torsor point fails its defining equation".into()));
                        }
                    }
                }
                let mut fv = Fe::ZERO;
                for &mu in &self.pol.lambda1 {
                    let neg = sp.basis[mu].neg;
                    let s = m.mul(lv.c[neg], m.frobenius(u[sp.basis[neg].sigma_inv], 1));
                    fv = m.add(fv, m.mul(lv.gram[neg], m.mul(s, u[mu])));
                }
                visit(&u, fv);
                let mut k = 0;
                loop {
                    if k == idx.len() {
                        break;
                    }
                    idx[k] += 1;
                    if idx[k] < elems.len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == idx.len() {
                    break;
                }
            }
        }
        Ok(())
    }

    /// Brute-force `sum psi(f(x))` over the torsor points over `k_{d0 t}`.
    pub fn count_brute(&self, t: u32, cap: u64) -> Result<Cyc> {
        self.count_fixed_brute(None, t, cap)
    }

    /// The same sum restricted to the points fixed by a Weil element.
    pub fn count_fixed_brute(&self, gamma: Option<(&HWGroup, WeilIndex)>, t: u32, cap: u64) -> Result<Cyc> {
        let lv = self.level(t, cap)?;
        let field = CycloField::for_char(lv.model.p())?;
        let action = match gamma {
            None => None,
            Some((hw, g)) => Some(self.extended_action(hw, g, &lv)?),
        };
        let mut hist = vec![0i64; field.n() as usize];
        let mut err = None;
        self.for_each_point(t, cap, &lv, |u, fv| {
            if let Some(act) = &action {
                if apply_blocks(&lv.model, act, u) != u {
                    return;
                }
            }
            match lv.psi.exponent(&lv.model, fv, lv.dd) {
                Ok(e) => hist[e as usize] += 1,
                Err(e) => err = Some(e),
            }
        })?;
        if let Some(e) = err {
            return Err(e);
        }
        Ok(field.from_histogram(&hist))
    }

    /// `|V^{-I_0}| q^{d0 t |Lambda_0|} prod_C S(C)`.
    pub fn count_structural(&self, t: u32, cap: u64) -> Result<Cyc> {
        let lv = self.level(t, cap)?;
        let field = CycloField::for_char(lv.model.p())?;
        let mut acc = field.from_bigint(
            BigInt::from(self.minus_i0.len()) * BigInt::from(self.space.q()).pow(lv.dd * self.pol.lambda0.len() as u32),
        );
        for c in &self.cycles {
            let a: Vec<Fe> = self.transport_all(&lv, &c.a)?;
            let s = reduce_gauss_sum_in(&lv.model, &lv.psi, &a, &c.degs, lv.dd, cap)?;
            acc = field.mul(&acc, &s);
        }
        Ok(acc)
    }

    /// Block matrices of `gamma` on the extended space: per basis index the
    /// row `(columns, entries)`.
    fn extended_action(&self, hw: &HWGroup, g: WeilIndex, lv: &Level) -> Result<Vec<Vec<(usize, Fe)>>> {
        let rows = extended_rows(&self.space, hw, g)?;
        rows.into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|(c, x)| {
                        let y = if lv.model.degree() == self.space.model.degree() {
                            x
                        } else {
                            lv.model.transport(&self.space.model, x)?
                        };
                        Ok((c, y))
                    })
                    .collect()
            })
            .collect()
    }
}

fn apply_blocks(m: &ClosureModel, rows: &[Vec<(usize, Fe)>], u: &[Fe]) -> Vec<Fe> {
    rows.iter().map(|r| r.iter().fold(Fe::ZERO, |acc, &(c, x)| m.add(acc, m.mul(x, u[c])))).collect()
}

/// `gamma` on the extended space: on the block of position `i` it is
/// `D_i sigma^i(g) D_i^{-1}`, `D_i` the frame scalars, with `g^{-T}` on the
/// dual half of a polarized orbit.
pub fn extended_rows(sp: &SymplecticSpace, hw: &HWGroup, g: WeilIndex) -> Result<Vec<Vec<(usize, Fe)>>> {
    let f = &sp.model;
    let parts = hw.parts(g);
    let mut rows = vec![Vec::new(); sp.basis.len()];
    for (o, oc) in sp.orbits.iter().enumerate() {
        let w = &hw.factors[o];
        let m = oc.m as usize;
        for b in oc.basis_offset..oc.basis_offset + oc.basis_len() {
            let bv = &sp.basis[b];
            let mat = if bv.side == Side::Minus { &w.dual[parts[o]] } else { &w.elements[parts[o]] };
            let j = bv.copy as usize;
            let first = b - j;
            for l in 0..m {
                let x = f.frobenius(mat[j][l], bv.pos as i64);
                if x.is_zero() {
                    continue;
                }
                let ratio = f.div(bv.frame, sp.basis[first + l].frame)?;
                rows[b].push((first + l, f.mul(x, ratio)));
            }
        }
        debug_assert!(oc.kind == OrbitKind::Symmetric || oc.basis_len() == 2 * oc.d as usize * m);
    }
    Ok(rows)
}

/// `gamma` applied to an extended vector.
pub fn extended_apply(sp: &SymplecticSpace, hw: &HWGroup, g: WeilIndex, u: &[Fe]) -> Result<Vec<Fe>> {
    Ok(apply_blocks(&sp.model, &extended_rows(sp, hw, g)?, u))
}

/// One term of a torsor sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorsorTerm {
    pub t: u32,
    pub brute: Option<Cyc>,
    pub structural: Option<Cyc>,
}

impl TorsorTerm {
    pub fn value(&self) -> Option<&Cyc> {
        self.structural.as_ref().or(self.brute.as_ref())
    }
}

/// Both oracles at one `t`; fails with `OracleMismatch` if they disagree.
pub fn torsor_count(ts: &TorsorSpec, t: u32, cap: u64) -> Result<TorsorTerm> {
    let skip = |r: Result<Cyc>| match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::BoundExceeded { .. }) => Ok(None),
        Err(e) => Err(e),
    };
    let brute = skip(ts.count_brute(t, cap))?;
    let structural = skip(ts.count_structural(t, cap))?;
    if let (Some(b), Some(s)) = (&brute, &structural) {
        if b != s {
            return Err(Error::OracleMismatch { t, brute: alloc::format!("{b}"), structural: alloc::format!("{s}") });
        }
    }
    Ok(TorsorTerm { t, brute, structural })
}

/// Terms `t = 1, 2, ...` up to `len`, stopping at the first `t` where neither
/// oracle fits under the cap.
pub fn torsor_sequence(ts: &TorsorSpec, len: u32, cap: u64) -> Result<Vec<TorsorTerm>> {
    let mut out = Vec::new();
    for t in 1..=len {
        let term = torsor_count(ts, t, cap)?;
        if term.value().is_none() {
            break;
        }
        out.push(term);
    }
    Ok(out)
}

/// Fixed-locus sums for a Weil element of order prime to `p`.
pub fn fixed_locus_count(ts: &TorsorSpec, hw: &HWGroup, g: WeilIndex, t: u32, cap: u64) -> Result<Cyc> {
    let ord = hw.weil_order_of(g);
    if ord.is_multiple_of(ts.space.p() as u64) {
        return Err(Error::OrderDivisibleByP(ord));
    }
    if g == hw.weil_identity() {
        return torsor_count(ts, t, cap)?.value().cloned().ok_or(Error::BoundExceeded {
            what: "torsor points".into(),
            needed: ts.point_count(t),
            cap,
        });
    }
    ts.count_fixed_brute(Some((hw, g)), t, cap)
}

pub fn fixed_locus_sequence(ts: &TorsorSpec, hw: &HWGroup, g: WeilIndex, len: u32, cap: u64) -> Result<Vec<Cyc>> {
    let mut out = Vec::new();
    for t in 1..=len {
        match fixed_locus_count(ts, hw, g, t, cap) {
            Ok(v) => out.push(v),
            Err(Error::BoundExceeded { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// A recurrence certificate for a sequence `S_1, S_2, ...`.
#[derive(Clone, Debug)]
pub struct RecurrenceCertificate {
    pub sums: Vec<Cyc>,
    /// `c_1..c_m` with `S_{t+m} = sum_i c_i S_{t+m-i}`.
    pub minimal: Vec<Cyc>,
    /// `+1` or `-1`: `S_t = sign * sum_i lambda_i^t`.
    pub sign: i8,
    /// `e_0 = 1, e_1, ..., e_D`: the eigenvalue multiset has `prod (1 - lambda T) = sum (-1)^k e_k T^k`.
    pub elementary: Vec<Cyc>,
    /// Eigenvalues with multiplicities.
    pub roots: Vec<(Complex64, usize)>,
    /// Fewer than `2 D` terms were available.
    pub degree_is_lower_bound: bool,
}

impl RecurrenceCertificate {
    pub fn minimal_degree(&self) -> usize {
        self.minimal.len()
    }

    /// Size of the eigenvalue multiset.
    pub fn degree(&self) -> usize {
        self.elementary.len() - 1
    }

    /// Absolute values of the eigenvalues, with multiplicity, sorted.
    pub fn magnitudes(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.roots.iter().flat_map(|&(z, m)| core::iter::repeat_n(z.norm(), m)).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
        v
    }

    /// Largest relative deviation of `|lambda|` from `expected`.
    pub fn purity_defect(&self, expected: f64) -> f64 {
        self.roots.iter().map(|(z, _)| ((z.norm() - expected) / expected).abs()).fold(0.0, f64::max)
    }

    pub fn is_pure(&self, expected: f64, tolerance: f64) -> bool {
        self.purity_defect(expected) <= tolerance
    }

    /// The integer `m` with `|lambda| = base^{m/2}` for every eigenvalue, if there is one.
    pub fn common_weight(&self, base: f64, tolerance: f64) -> Option<u32> {
        let (z, _) = self.roots.first()?;
        let m = (2.0 * z.norm().ln() / base.ln()).round();
        if m < 0.0 {
            return None;
        }
        let expected = base.powf(m / 2.0);
        self.is_pure(expected, tolerance).then_some(m as u32)
    }
}

fn minimal_recurrence(k: &CycloField, s: &[Cyc], max_degree: usize) -> Option<Vec<Cyc>> {
    let n = s.len();
    for m in 0..=max_degree {
        if 2 * m > n {
            break;
        }
        if m == 0 {
            if s.iter().all(|x| x.is_zero()) {
                return Some(Vec::new());
            }
            continue;
        }
        let rows: Vec<Vec<Cyc>> = (0..n - m).map(|t| (1..=m).map(|i| s[t + m - i].clone()).collect()).collect();
        let rhs: Vec<Cyc> = (0..n - m).map(|t| s[t + m].clone()).collect();
        if let Some(c) = crate::linalg::solve(k, &rows, &rhs) {
            return Some(c);
        }
    }
    None
}

/// Elementary symmetric functions from power sums, up to the length of `p`.
fn newton(k: &CycloField, p: &[Cyc]) -> Vec<Cyc> {
    let mut e = vec![k.one()];
    for j in 1..=p.len() {
        let mut acc = k.zero();
        for i in 1..=j {
            let term = k.mul(&e[j - i], &p[i - 1]);
            acc = if i % 2 == 1 { k.add(&acc, &term) } else { k.sub(&acc, &term) };
        }
        let inv = k.from_ratio(BigInt::one(), BigInt::from(j)).expect("nonzero");
        e.push(k.mul(&acc, &inv));
    }
    e
}

fn trimmed(mut e: Vec<Cyc>) -> Vec<Cyc> {
    while e.len() > 1 && e.last().is_some_and(|x| x.is_zero()) {
        e.pop();
    }
    e
}

/// Minimal recurrence and eigenvalue multiset of `S_1, S_2, ...`. `scale`
/// is the expected eigenvalue modulus, used to condition the root finder.
pub fn extract_recurrence(k: &CycloField, sums: &[Cyc], max_degree: usize, scale: f64) -> Result<RecurrenceCertificate> {
    let minimal = minimal_recurrence(k, sums, max_degree).ok_or(Error::NoRecurrenceWithinBound(max_degree))?;
    let plus = trimmed(newton(k, sums));
    let neg: Vec<Cyc> = sums.iter().map(|x| k.neg(x)).collect();
    let minus = trimmed(newton(k, &neg));
    let (sign, elementary) = if minus.len() < plus.len() { (-1, minus) } else { (1, plus) };
    let d = elementary.len() - 1;
    let degree_is_lower_bound = sums.len() < 2 * d.max(1);
    // x^D - e_1 x^{D-1} + e_2 x^{D-2} - ...
    let mut poly: CPoly = (0..=d).map(|j| if (d - j) % 2 == 0 { elementary[d - j].clone() } else { k.neg(&elementary[d - j]) }).collect();
    crate::poly::trim(&mut poly);
    let mut roots = Vec::new();
    for (i, factor) in squarefree_decomposition(k, &poly).iter().enumerate() {
        if factor.len() <= 1 {
            continue;
        }
        for z in complex_roots(&to_complex(k, factor), scale) {
            roots.push((z, i + 1));
        }
    }
    Ok(RecurrenceCertificate { sums: sums.to_vec(), minimal, sign, elementary, roots, degree_is_lower_bound })
}

/// Rough check that a value has small modulus: `|x| <= bound (1 + tol)`.
pub fn within_modulus(k: &CycloField, x: &Cyc, bound: f64, tol: f64) -> bool {
    k.complex_abs(x) <= bound * (1.0 + tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff_tower::DEFAULT_CAP;
    use crate::heisenberg::HeisenbergGroup;
    use crate::weight_datum::{characteristic_index, default_xi, validate_datum, OrbitSpec, PolarizationChoice, WeightDatum};

    fn one(q: u64) -> Canonical {
        let (_, f) = split_prime_power(q).unwrap();
        Canonical::one(1, f)
    }

    #[test]
    fn cube_over_f2() {
        let spec = GaussSumSpec { q: 2, a: vec![one(2)], degs: vec![1], d: 1 };
        let k = CycloField::for_char(2).unwrap();
        let vals: Vec<Cyc> = (1..=6).map(|t| gauss_sum(&spec, t, DEFAULT_CAP).unwrap()).collect();
        let ints: Vec<i64> = vals.iter().map(|x| x.as_i64().unwrap()).collect();
        assert_eq!(ints, vec![0, 4, 0, -8, 0, 16]);
        for t in 1..=6 {
            assert_eq!(reduce_gauss_sum(&spec, t, DEFAULT_CAP).unwrap(), vals[t as usize - 1]);
        }
        let cert = extract_recurrence(&k, &vals, 3, 2f64.sqrt()).unwrap();
        assert_eq!(cert.minimal_degree(), 2);
        assert_eq!(cert.degree(), 2);
        assert_eq!(cert.sign, -1);
        assert!(cert.is_pure(2f64.sqrt(), 1e-9));
    }

    #[test]
    fn unitary_line_has_minus_xi() {
        for q in [2u64, 3] {
            let sp = validate_datum(&WeightDatum::from_orbits(q, &[OrbitSpec::symmetric(2, 1)]).unwrap(), DEFAULT_CAP).unwrap();
            let pol = characteristic_index(&sp, &PolarizationChoice::Simple).unwrap();
            let ts = build_torsor(&sp, &pol, Fe::ONE, DEFAULT_CAP).unwrap();
            let xi = sp.model.embed(&default_xi(&sp.model, 2).unwrap()).unwrap();
            assert_eq!(ts.cycles.len(), 1);
            assert_eq!(ts.cycles[0].degs, vec![1]);
            assert_eq!(ts.cycles[0].a, vec![sp.model.neg(xi)]);
        }
    }

    #[test]
    fn three_variables_reduce_to_one() {
        let d = 1u32;
        let model = ClosureModel::new(3, 3, 6, DEFAULT_CAP).unwrap();
        let field = CycloField::for_char(3).unwrap();
        let psi = Psi::standard(&field, &model).unwrap();
        let a = [model.from_int(1), model.from_int(2), model.from_int(2)];
        let degs = [1, 2, 1];
        for t in 1..=2 {
            let dd = d * t;
            let full = gauss_sum_in(&model, &psi, &a, &degs, dd, DEFAULT_CAP).unwrap();
            let a1 = model.neg(model.mul(model.mul(a[0], model.frobenius(model.inv(a[1]).unwrap(), 1)), model.frobenius(a[2], 3)));
            let one = gauss_sum_in(&model, &psi, &[a1], &[4], dd, DEFAULT_CAP).unwrap();
            assert_eq!(full, field.mul_int(&one, 3i64.pow(dd)));
        }
    }

    #[test]
    fn zero_coefficient_rejected() {
        let spec = GaussSumSpec { q: 2, a: vec![Canonical { degree: 1, coords: vec![0] }], degs: vec![1], d: 1 };
        assert_eq!(gauss_sum(&spec, 1, DEFAULT_CAP), Err(Error::AllCoefficientsNonzero));
    }

    #[test]
    fn geometric_and_constant() {
        let k = CycloField::for_char(3).unwrap();
        let c: Vec<Cyc> = (0..6).map(|_| k.from_int(5)).collect();
        let cert = extract_recurrence(&k, &c, 3, 1.0).unwrap();
        assert_eq!(cert.minimal_degree(), 1);
        assert_eq!(cert.degree(), 5);
        let g: Vec<Cyc> = (1..=6).map(|t| k.from_int(3i64.pow(t))).collect();
        let cert = extract_recurrence(&k, &g, 3, 3.0).unwrap();
        assert_eq!(cert.degree(), 1);
        assert!(cert.is_pure(3.0, 1e-9));
        assert_eq!(cert.common_weight(3.0, 1e-9), Some(2));
        assert_eq!(cert.common_weight(9.0, 1e-9), Some(1));
        assert_eq!(cert.common_weight(2.0, 1e-9), None);
    }

    #[test]
    fn unitary_torsor() {
        let sp = validate_datum(&WeightDatum::from_orbits(2, &[OrbitSpec::symmetric(2, 1)]).unwrap(), DEFAULT_CAP).unwrap();
        let pol = characteristic_index(&sp, &PolarizationChoice::Simple).unwrap();
        let ts = build_torsor(&sp, &pol, Fe::ONE, DEFAULT_CAP).unwrap();
        assert_eq!(ts.cycles.len(), 1);
        let seq = torsor_sequence(&ts, 6, DEFAULT_CAP).unwrap();
        let k = CycloField::for_char(2).unwrap();
        let vals: Vec<Cyc> = seq.iter().map(|t| t.value().unwrap().clone()).collect();
        assert!(seq.iter().all(|t| t.brute.is_some() && t.structural.is_some()));
        let cert = extract_recurrence(&k, &vals, 3, ts.weight_abs()).unwrap();
        assert_eq!(cert.degree(), 2);
        assert_eq!(cert.sign, -1);
        assert!(cert.is_pure(ts.weight_abs(), 1e-9));

        let hw = HWGroup::new(HeisenbergGroup::new(sp.clone()).unwrap(), DEFAULT_CAP).unwrap();
        let e = hw.weil_identity();
        for g in 0..3 {
            let x: Vec<Fe> = vec![sp.model.from_index(1)];
            let lifted = sp.lift(&x);
            assert_eq!(extended_apply(&sp, &hw, g, &lifted).unwrap(), sp.lift(&hw.act_v(g, &x)));
            let fixed = fixed_locus_sequence(&ts, &hw, g, 4, DEFAULT_CAP).unwrap();
            if g == e {
                assert_eq!(fixed, vals[..4].to_vec());
            } else {
                assert!(fixed.iter().all(|v| *v == k.one()));
            }
        }
    }

    #[test]
    fn polarized_torsor_has_i0_factor() {
        let sp = validate_datum(&WeightDatum::from_orbits(2, &[OrbitSpec::asymmetric(1, 1)]).unwrap(), DEFAULT_CAP).unwrap();
        let pol = characteristic_index(&sp, &PolarizationChoice::Simple).unwrap();
        let ts = build_torsor(&sp, &pol, Fe::ONE, DEFAULT_CAP).unwrap();
        for t in 1..=4 {
            let term = torsor_count(&ts, t, DEFAULT_CAP).unwrap();
            assert_eq!(term.brute.unwrap().as_i64(), Some(2 * 2i64.pow(t)));
        }
    }
}

