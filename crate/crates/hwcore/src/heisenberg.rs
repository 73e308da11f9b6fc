//! Finite Heisenberg groups of symplectic spaces and their Weil factors.
//!
//! An element is a pair `(c, v)` with `c` in `k` and `v` a rational vector
//! in orbit coordinates. The law is `(c, v)(c', v') = (c + c' + beta(v, v'), v + v')`
//! where `beta = sum_C beta_C` and
//!
//! - on a polarized orbit, `beta_C((a, a*), (b, b*)) = Tr_{k_s/k}(a . b*)`;
//! - on a unitary orbit, `beta_C(a, b) = z0(a) + z0(b) + T(a, b) - z0(a + b)`,
//!   with `T(a, b) = sum_{i < d/2} B(a, b)^{q^i}` and `z0(v)` the solution of
//!   `z^q - z = -B(v, v)` in `k_s` of least coordinate index.
//!
//! The unitary coordinate is `z = c + z0(v)`, so `(z, v)` satisfies the
//! Artin-Schreier constraint and multiplies by `z + z' + T(v, v')`.
//! In both cases `beta(x, y) - beta(y, x) = <x, y>`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::ff_tower::Fe;
use crate::linalg::{ff_det, ff_fixed_dim, ff_frobenius, ff_identity, ff_inverse, ff_mul, ff_transpose, FfMat};
use crate::weight_datum::{OrbitKind, SymplecticSpace};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HElem {
    pub c: Fe,
    pub v: Vec<Fe>,
}

#[derive(Clone, Debug)]
pub struct HeisenbergGroup {
    pub space: SymplecticSpace,
    /// Per unitary orbit: `B(v, v)` (by coordinate index) to the section value.
    sections: Vec<BTreeMap<u32, Fe>>,
}

impl HeisenbergGroup {
    pub fn new(space: SymplecticSpace) -> Result<Self> {
        let f = &space.model;
        let mut sections = Vec::new();
        for oc in &space.orbits {
            let mut map = BTreeMap::new();
            if oc.kind == OrbitKind::Symmetric {
                let mut elems = f.subfield_elements(oc.d);
                elems.sort_by_key(|&z| f.index(z));
                for z in elems {
                    // -B(v, v) = z^q - z, so B(v, v) = z - z^q
                    let w = f.sub(z, f.frobenius(z, 1));
                    map.entry(f.index(w)).or_insert(z);
                }
            }
            sections.push(map);
        }
        Ok(HeisenbergGroup { space, sections })
    }

    /// `q |V(k)|`.
    pub fn order(&self) -> u128 {
        self.space.q() as u128 * self.space.size()
    }

    pub fn identity(&self) -> HElem {
        HElem { c: Fe::ZERO, v: self.space.zero() }
    }

    pub fn central(&self, c: Fe) -> HElem {
        HElem { c, v: self.space.zero() }
    }

    fn check(&self, g: &HElem) -> Result<()> {
        if g.v.len() != self.space.coord_len() {
            return Err(Error::MixedGroups);
        }
        Ok(())
    }

    /// The section `z0` on one unitary orbit.
    pub fn z0(&self, o: usize, a: &[Fe]) -> Fe {
        let f = &self.space.model;
        let w = self.space.orbit_form(o, a, a);
        *self.sections[o].get(&f.index(w)).expect("B(v, v) has trace zero")
    }

    /// The unitary central coordinate `z = c + sum_C z0(v_C)` of an element.
    pub fn unitary_coordinate(&self, g: &HElem) -> Fe {
        let f = &self.space.model;
        let mut z = g.c;
        for (o, oc) in self.space.orbits.iter().enumerate() {
            if oc.kind == OrbitKind::Symmetric {
                z = f.add(z, self.z0(o, self.space.orbit_slice(o, &g.v)));
            }
        }
        z
    }

    pub fn orbit_beta(&self, o: usize, a: &[Fe], b: &[Fe]) -> Fe {
        let sp = &self.space;
        let f = &sp.model;
        let oc = &sp.orbits[o];
        match oc.kind {
            OrbitKind::Asymmetric => f.relative_trace(sp.orbit_form(o, a, b), oc.d).expect("k_s value"),
            OrbitKind::Symmetric => {
                let bab = sp.orbit_form(o, a, b);
                let mut t = Fe::ZERO;
                for i in 0..oc.d / 2 {
                    t = f.add(t, f.frobenius(bab, i as i64));
                }
                let sum: Vec<Fe> = a.iter().zip(b).map(|(&x, &y)| f.add(x, y)).collect();
                let v = f.add(f.add(self.z0(o, a), self.z0(o, b)), t);
                f.sub(v, self.z0(o, &sum))
            }
        }
    }

    /// The cocycle `beta(x, y)` in `k`.
    pub fn beta(&self, x: &[Fe], y: &[Fe]) -> Fe {
        let f = &self.space.model;
        (0..self.space.orbits.len()).fold(Fe::ZERO, |acc, o| {
            f.add(acc, self.orbit_beta(o, self.space.orbit_slice(o, x), self.space.orbit_slice(o, y)))
        })
    }

    pub fn mul(&self, g: &HElem, h: &HElem) -> Result<HElem> {
        self.check(g)?;
        self.check(h)?;
        let f = &self.space.model;
        Ok(HElem { c: f.add(f.add(g.c, h.c), self.beta(&g.v, &h.v)), v: self.space.add(&g.v, &h.v) })
    }

    pub fn inverse(&self, g: &HElem) -> HElem {
        let f = &self.space.model;
        let nv = self.space.neg(&g.v);
        HElem { c: f.neg(f.add(g.c, self.beta(&g.v, &nv))), v: nv }
    }

    /// `g h g^{-1} h^{-1}`.
    pub fn commutator(&self, g: &HElem, h: &HElem) -> Result<HElem> {
        let gh = self.mul(g, h)?;
        let hg = self.mul(h, g)?;
        self.mul(&gh, &self.inverse(&hg))
    }

    /// Central value of `[g, h]`, which is `<g, h>` on the images in `V`.
    pub fn commutator_pairing(&self, g: &HElem, h: &HElem) -> Fe {
        let f = &self.space.model;
        f.sub(self.beta(&g.v, &h.v), self.beta(&h.v, &g.v))
    }

    /// All elements, central coordinate varying fastest.
    pub fn elements(&self, cap: u64) -> Result<Vec<HElem>> {
        let n = self.order();
        if n > cap as u128 {
            return Err(Error::BoundExceeded { what: "Heisenberg group".into(), needed: n, cap });
        }
        let ks = self.space.model.subfield_elements(1);
        let mut out = Vec::with_capacity(n as usize);
        for v in self.space.rational_points(cap)? {
            for &c in &ks {
                out.push(HElem { c, v: v.clone() });
            }
        }
        Ok(out)
    }
}

/// One Weil factor `M_C`: `GL_m(k_s)` or the unitary group of the form on `k_s^m`.
#[derive(Clone, Debug)]
pub struct WeilFactor {
    pub orbit: usize,
    pub kind: OrbitKind,
    pub d: u32,
    pub m: u32,
    pub elements: Vec<FfMat>,
    /// `g^{-T}`, used on the dual half of an asymmetric orbit.
    pub dual: Vec<FfMat>,
    lookup: BTreeMap<Vec<u32>, usize>,
}

/// A Weil element together with its fixed space data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeilInfo {
    pub index: usize,
    /// `dim_{k_s} (V^s)^gamma`.
    pub fixed_ks: u32,
    /// `dim_k (V^C)^gamma`.
    pub fixed_k: u32,
}

impl WeilFactor {
    fn key(&self, sp: &SymplecticSpace, g: &FfMat) -> Vec<u32> {
        g.iter().flatten().map(|&x| sp.model.index(x)).collect()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn index_of(&self, sp: &SymplecticSpace, g: &FfMat) -> Option<usize> {
        self.lookup.get(&self.key(sp, g)).copied()
    }

    pub fn identity_index(&self) -> usize {
        self.elements.iter().position(|g| *g == ff_identity(self.m as usize)).expect("identity is enumerated")
    }
}

fn all_matrices(sp: &SymplecticSpace, d: u32, m: usize, cap: u64) -> Result<Vec<FfMat>> {
    let elems = sp.model.subfield_elements(d);
    let cells = m * m;
    let total = (elems.len() as u128).pow(cells as u32);
    if total > cap as u128 {
        return Err(Error::BoundExceeded { what: "matrices of a Weil factor".into(), needed: total, cap });
    }
    let mut out = Vec::with_capacity(total as usize);
    let mut idx = vec![0usize; cells];
    loop {
        out.push((0..m).map(|i| (0..m).map(|j| elems[idx[i * m + j]]).collect()).collect());
        let mut k = 0;
        loop {
            if k == cells {
                return Ok(out);
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

/// Enumerates the Weil factor of orbit `o`.
pub fn weil_factor(sp: &SymplecticSpace, o: usize, cap: u64) -> Result<WeilFactor> {
    let f = &sp.model;
    let oc = &sp.orbits[o];
    let m = oc.m as usize;
    let mut elements = Vec::new();
    for g in all_matrices(sp, oc.d, m, cap)? {
        if ff_det(f, &g).is_zero() {
            continue;
        }
        if oc.kind == OrbitKind::Symmetric {
            // g^T diag(beta) sigma^h(g) = diag(beta)
            let h = (oc.d / 2) as i64;
            let gt = ff_transpose(&g);
            let dg: FfMat = (0..m).map(|i| gt[i].iter().enumerate().map(|(j, &x)| f.mul(x, oc.form[j])).collect()).collect();
            let lhs = ff_mul(f, &dg, &ff_frobenius(f, &g, h));
            let ok = (0..m).all(|i| (0..m).all(|j| lhs[i][j] == if i == j { oc.form[i] } else { Fe::ZERO }));
            if !ok {
                continue;
            }
        }
        elements.push(g);
    }
    let dual = elements.iter().map(|g| ff_transpose(&ff_inverse(f, g).expect("invertible"))).collect();
    let mut wf = WeilFactor { orbit: o, kind: oc.kind, d: oc.d, m: oc.m, elements, dual, lookup: BTreeMap::new() };
    for (i, g) in wf.elements.iter().enumerate() {
        let k = wf.key(sp, g);
        wf.lookup.insert(k, i);
    }
    Ok(wf)
}

/// The extended Heisenberg-Weil group `H x| prod_C M_C`.
#[derive(Clone, Debug)]
pub struct HWGroup {
    pub heis: HeisenbergGroup,
    pub factors: Vec<WeilFactor>,
}

/// Weil elements are numbered in mixed radix over the factors, first factor fastest.
pub type WeilIndex = usize;

impl HWGroup {
    pub fn new(heis: HeisenbergGroup, cap: u64) -> Result<Self> {
        let mut factors = Vec::new();
        let mut total: u128 = 1;
        for o in 0..heis.space.orbits.len() {
            let wf = weil_factor(&heis.space, o, cap)?;
            total *= wf.len() as u128;
            if total > cap as u128 {
                return Err(Error::BoundExceeded { what: "Weil group".into(), needed: total, cap });
            }
            factors.push(wf);
        }
        Ok(HWGroup { heis, factors })
    }

    pub fn space(&self) -> &SymplecticSpace {
        &self.heis.space
    }

    pub fn weil_order(&self) -> usize {
        self.factors.iter().map(|w| w.len()).product()
    }

    /// `|H| |M|`.
    pub fn order(&self) -> u128 {
        self.heis.order() * self.weil_order() as u128
    }

    pub fn parts(&self, g: WeilIndex) -> Vec<usize> {
        let mut g = g;
        self.factors
            .iter()
            .map(|w| {
                let i = g % w.len();
                g /= w.len();
                i
            })
            .collect()
    }

    pub fn from_parts(&self, parts: &[usize]) -> WeilIndex {
        let mut idx = 0;
        for (w, &i) in self.factors.iter().zip(parts).rev() {
            idx = idx * w.len() + i;
        }
        idx
    }

    pub fn weil_identity(&self) -> WeilIndex {
        let parts: Vec<usize> = self.factors.iter().map(|w| w.identity_index()).collect();
        self.from_parts(&parts)
    }

    pub fn weil_mul(&self, a: WeilIndex, b: WeilIndex) -> WeilIndex {
        let sp = self.space();
        let parts: Vec<usize> = self
            .parts(a)
            .iter()
            .zip(self.parts(b))
            .zip(&self.factors)
            .map(|((&i, j), w)| {
                let prod = ff_mul(&sp.model, &w.elements[i], &w.elements[j]);
                w.index_of(sp, &prod).expect("Weil factor is closed")
            })
            .collect();
        self.from_parts(&parts)
    }

    pub fn weil_inverse(&self, a: WeilIndex) -> WeilIndex {
        let sp = self.space();
        let parts: Vec<usize> = self
            .parts(a)
            .iter()
            .zip(&self.factors)
            .map(|(&i, w)| {
                let inv = ff_inverse(&sp.model, &w.elements[i]).expect("invertible");
                w.index_of(sp, &inv).expect("Weil factor is closed")
            })
            .collect();
        self.from_parts(&parts)
    }

    pub fn weil_order_of(&self, a: WeilIndex) -> u64 {
        let e = self.weil_identity();
        let mut x = a;
        let mut n = 1;
        while x != e {
            x = self.weil_mul(x, a);
            n += 1;
        }
        n
    }

    /// `gamma` applied to a rational vector.
    pub fn act_v(&self, g: WeilIndex, v: &[Fe]) -> Vec<Fe> {
        let sp = self.space();
        let f = &sp.model;
        let mut out = v.to_vec();
        for (w, i) in self.factors.iter().zip(self.parts(g)) {
            let oc = &sp.orbits[w.orbit];
            let m = oc.m as usize;
            let off = oc.coord_offset;
            let apply = |mat: &FfMat, src: &[Fe], dst: &mut [Fe]| {
                for r in 0..m {
                    dst[r] = (0..m).fold(Fe::ZERO, |acc, c| f.add(acc, f.mul(mat[r][c], src[c])));
                }
            };
            apply(&w.elements[i], &v[off..off + m], &mut out[off..off + m]);
            if oc.kind == OrbitKind::Asymmetric {
                apply(&w.dual[i], &v[off + m..off + 2 * m], &mut out[off + m..off + 2 * m]);
            }
        }
        out
    }

    /// `gamma` applied to a Heisenberg element.
    pub fn act(&self, g: WeilIndex, h: &HElem) -> HElem {
        let sp = self.space();
        let f = &sp.model;
        let v = self.act_v(g, &h.v);
        let mut c = h.c;
        for (o, oc) in sp.orbits.iter().enumerate() {
            if oc.kind == OrbitKind::Symmetric {
                let before = self.heis.z0(o, sp.orbit_slice(o, &h.v));
                let after = self.heis.z0(o, sp.orbit_slice(o, &v));
                c = f.add(c, f.sub(before, after));
            }
        }
        HElem { c, v }
    }

    /// `(h1, g1)(h2, g2) = (h1 g1(h2), g1 g2)`.
    pub fn hw_mul(&self, x: &(HElem, WeilIndex), y: &(HElem, WeilIndex)) -> Result<(HElem, WeilIndex)> {
        let h = self.heis.mul(&x.0, &self.act(x.1, &y.0))?;
        Ok((h, self.weil_mul(x.1, y.1)))
    }

    pub fn weil_elements(&self, o: usize) -> Vec<WeilInfo> {
        let sp = self.space();
        let w = &self.factors[o];
        (0..w.len())
            .map(|i| {
                let fixed_ks = ff_fixed_dim(&sp.model, &w.elements[i]) as u32;
                let fixed_k = match w.kind {
                    OrbitKind::Asymmetric => 2 * w.d * fixed_ks,
                    OrbitKind::Symmetric => w.d * fixed_ks,
                };
                WeilInfo { index: i, fixed_ks, fixed_k }
            })
            .collect()
    }

    /// `dim_k V^gamma`.
    pub fn fixed_dim_k(&self, g: WeilIndex) -> u32 {
        let sp = self.space();
        self.factors
            .iter()
            .zip(self.parts(g))
            .map(|(w, i)| {
                let fixed = ff_fixed_dim(&sp.model, &w.elements[i]) as u32;
                match w.kind {
                    OrbitKind::Asymmetric => 2 * w.d * fixed,
                    OrbitKind::Symmetric => w.d * fixed,
                }
            })
            .sum()
    }

    /// Sum over unitary orbits of the `k_s`-codimension of the fixed space.
    pub fn d_gamma(&self, g: WeilIndex) -> u32 {
        let sp = self.space();
        self.factors
            .iter()
            .zip(self.parts(g))
            .filter(|(w, _)| w.kind == OrbitKind::Symmetric)
            .map(|(w, i)| w.m - ff_fixed_dim(&sp.model, &w.elements[i]) as u32)
            .sum()
    }

    /// `prod_C sgn_C(gamma)` and whether the sign character is trivial (`p = 2`).
    pub fn sgn(&self, g: WeilIndex) -> (i8, bool) {
        let sp = self.space();
        let f = &sp.model;
        if sp.p() == 2 {
            return (1, true);
        }
        let mut s = 1i8;
        for (w, i) in self.factors.iter().zip(self.parts(g)) {
            let det = ff_det(f, &w.elements[i]);
            let q = sp.q();
            let e = match w.kind {
                OrbitKind::Asymmetric => (q.pow(w.d) - 1) / 2,
                OrbitKind::Symmetric => q.pow(w.d / 2).div_ceil(2),
            };
            let v = f.pow(det, e as i64).expect("unit");
            if v != Fe::ONE {
                s = -s;
            }
        }
        (s, false)
    }

    /// `(sgn, d_gamma)`.
    pub fn sgn_and_dgamma(&self, g: WeilIndex) -> (i8, u32, bool) {
        let (s, trivial) = self.sgn(g);
        (s, self.d_gamma(g), trivial)
    }

    /// A readable name: per orbit the matrix entries as canonical codes.
    pub fn weil_label(&self, g: WeilIndex) -> String {
        let sp = self.space();
        let mut parts = Vec::new();
        for (w, i) in self.factors.iter().zip(self.parts(g)) {
            let rows: Vec<String> = w.elements[i]
                .iter()
                .map(|r| {
                    let cells: Vec<String> = r
                        .iter()
                        .map(|&x| {
                            let c = sp.model.to_canonical(x, w.d).expect("entry in k_s");
                            format!("{}", crate::weight_datum::canonical_code(&c, sp.p()))
                        })
                        .collect();
                    cells.join(",")
                })
                .collect();
            parts.push(format!("{}:[{}]", sp.orbits[w.orbit].rep_label, rows.join(";")));
        }
        parts.join(" ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff_tower::DEFAULT_CAP;
    use crate::weight_datum::{validate_datum, OrbitSpec, WeightDatum};

    fn hw(q: u64, orbits: &[OrbitSpec]) -> HWGroup {
        let sp = validate_datum(&WeightDatum::from_orbits(q, orbits).unwrap(), DEFAULT_CAP).unwrap();
        HWGroup::new(HeisenbergGroup::new(sp).unwrap(), DEFAULT_CAP).unwrap()
    }

    #[test]
    fn polarized_commutator() {
        let g = hw(2, &[OrbitSpec::asymmetric(1, 1)]);
        let h = &g.heis;
        let x = HElem { c: Fe::ZERO, v: vec![Fe::ONE, Fe::ZERO] };
        let y = HElem { c: Fe::ZERO, v: vec![Fe::ZERO, Fe::ONE] };
        assert_eq!(h.commutator(&x, &y).unwrap(), h.central(Fe::ONE));
        assert_eq!(h.commutator_pairing(&x, &x), Fe::ZERO);
        assert_eq!(h.order(), 8);
    }

    #[test]
    fn group_orders() {
        let cases: [(u64, OrbitSpec, usize); 5] = [
            (2, OrbitSpec::asymmetric(1, 1), 1),
            (3, OrbitSpec::asymmetric(1, 1), 2),
            (2, OrbitSpec::asymmetric(1, 2), 6),
            (2, OrbitSpec::symmetric(2, 1), 3),
            (3, OrbitSpec::symmetric(2, 1), 4),
        ];
        for (q, o, n) in cases {
            assert_eq!(hw(q, &[o]).weil_order(), n);
        }
        assert_eq!(hw(2, &[OrbitSpec::symmetric(2, 2)]).weil_order(), 18);
    }

    #[test]
    fn unitary_law_and_action() {
        for q in [2u64, 3] {
            let g = hw(q, &[OrbitSpec::symmetric(2, 1)]);
            let h = &g.heis;
            let f = &h.space.model;
            let els = h.elements(DEFAULT_CAP).unwrap();
            for x in &els {
                let z = h.unitary_coordinate(x);
                let b = h.space.orbit_form(0, &x.v, &x.v);
                assert_eq!(f.sub(f.frobenius(z, 1), z), f.neg(b));
                for y in &els {
                    let xy = h.mul(x, y).unwrap();
                    assert!(f.in_subfield(xy.c, 1));
                    assert_eq!(h.commutator_pairing(x, y), h.space.pairing(&x.v, &y.v));
                    for gi in 0..g.weil_order() {
                        assert_eq!(g.act(gi, &xy), h.mul(&g.act(gi, x), &g.act(gi, y)).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn signs() {
        let g = hw(3, &[OrbitSpec::asymmetric(1, 1)]);
        let e = g.weil_identity();
        let minus = (0..2).find(|&i| i != e).unwrap();
        assert_eq!(g.sgn_and_dgamma(minus), (-1, 0, false));
        let g = hw(3, &[OrbitSpec::symmetric(2, 1)]);
        let gens: Vec<usize> = (0..4).filter(|&i| g.weil_order_of(i) == 4).collect();
        assert_eq!(gens.len(), 2);
        for i in gens {
            assert_eq!(g.sgn_and_dgamma(i), (-1, 1, false));
        }
    }
}
