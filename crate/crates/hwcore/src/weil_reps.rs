//! The Heisenberg representation and its extension to the Heisenberg-Weil group.
//!
//! The Heisenberg representation is induced from the abelian subgroup
//! `k x L`, where `L` is an `F_p`-Lagrangian for `Tr_{k/F_p}(c <x, y>)`
//! (`c` the twist of `psi`), through the character `(z, l) -> psi(z) mu0(l)`.
//! `mu0` is a solution of `mu0(l + l') = mu0(l) mu0(l') psi(-beta(l, l'))`.
//! On a polarized orbit `L` is the `a` half and `mu0 = 1`; on a unitary
//! orbit `L` comes from a symplectic Gram-Schmidt pass over an `F_p` basis.
//! The basis `e_r` is indexed by a complement `R` and
//!
//! `pi(c, v) e_r = psi(c + beta(v, r) - beta(r', l)) mu0(l) e_{r'}`, where `v + r = r' + l`.
//!
//! The operator `T_gamma` spans the solutions of `T pi(h) = pi(gamma h) T`.
//! Each such equation has two terms, so the solution space is computed
//! exactly by a union-find over matrix entries labelled with roots of unity.
//! `T_gamma` is scaled so that its trace is `(-1)^{d_gamma} q^{dim V^gamma / 2}`.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::cyclotomic::{Cyc, CycloField, Psi};
use crate::error::{Error, Result};
use crate::ff_tower::Fe;
use crate::heisenberg::{HElem, HWGroup, HeisenbergGroup, WeilIndex};
use crate::linalg::{CMat, Monomial};
use crate::weight_datum::{check_grading, OrbitKind, SymplecticSpace};

/// The Heisenberg representation in the induced model.
#[derive(Clone, Debug)]
pub struct HeisenbergRep {
    pub field: CycloField,
    pub psi: Psi,
    pub variant: u64,
    /// `F_p` basis of the Lagrangian `L`.
    pub lagrangian: Vec<Vec<Fe>>,
    /// `F_p` basis of the complement `R`.
    pub complement: Vec<Vec<Fe>>,
    /// Points of `R`, mixed radix over `complement`; the basis of the representation.
    pub r_points: Vec<Vec<Fe>>,
    pub l_points: Vec<Vec<Fe>>,
    /// `mu0` on `l_points`, as exponents of `zeta_n`.
    pub mu0: Vec<u32>,
    /// For each point of `V` (in `rational_points` order), its `(r, l)` split.
    decomp: Vec<(u32, u32)>,
}

fn omega(h: &HeisenbergGroup, psi: &Psi, x: &[Fe], y: &[Fe]) -> u32 {
    let f = &h.space.model;
    f.trace_to_prime(f.mul(psi.scale, h.space.pairing(x, y)), 1).expect("pairing lies in k")
}

fn fp_combination(sp: &SymplecticSpace, basis: &[Vec<Fe>], digits: &[u32]) -> Vec<Fe> {
    let f = &sp.model;
    let mut acc = sp.zero();
    for (b, &k) in basis.iter().zip(digits) {
        if k != 0 {
            acc = sp.add(&acc, &sp.scale(f.from_int(k as i64), b));
        }
    }
    acc
}

fn span_points(sp: &SymplecticSpace, basis: &[Vec<Fe>]) -> Vec<Vec<Fe>> {
    let p = sp.p();
    let n = (p as usize).pow(basis.len() as u32);
    let mut out = Vec::with_capacity(n);
    let mut digits = vec![0u32; basis.len()];
    for _ in 0..n {
        out.push(fp_combination(sp, basis, &digits));
        for d in digits.iter_mut() {
            *d += 1;
            if *d < p {
                break;
            }
            *d = 0;
        }
    }
    out
}

/// Splits the `F_p` basis of every orbit into a Lagrangian and a complement.
fn lagrangian_split(h: &HeisenbergGroup, psi: &Psi) -> Result<(Vec<Vec<Fe>>, Vec<Vec<Fe>>)> {
    let sp = &h.space;
    let p = sp.p() as i64;
    let f = &sp.model;
    let all = sp.fp_basis();
    let mut lag = Vec::new();
    let mut comp = Vec::new();
    for (o, oc) in sp.orbits.iter().enumerate() {
        let lo = oc.coord_offset;
        let mine: Vec<Vec<Fe>> = all
            .iter()
            .filter(|v| v.iter().enumerate().any(|(i, x)| !x.is_zero() && i >= lo && i < lo + oc.coord_len()))
            .cloned()
            .collect();
        match oc.kind {
            OrbitKind::Asymmetric => {
                let m = oc.m as usize;
                for v in mine {
                    let on_a = v[lo..lo + m].iter().any(|x| !x.is_zero());
                    if on_a {
                        lag.push(v);
                    } else {
                        comp.push(v);
                    }
                }
            }
            OrbitKind::Symmetric => {
                let mut rest = mine;
                while !rest.is_empty() {
                    let e = rest.remove(0);
                    let Some(pos) = rest.iter().position(|w| omega(h, psi, &e, w) != 0) else {
                        return Err(Error::NoLagrangian(o));
                    };
                    let fv = rest.remove(pos);
                    let a = omega(h, psi, &e, &fv) as i64;
                    let a_inv = crate::ff_tower::modpow(a as u64, (p - 2) as u64, p as u64) as i64;
                    for w in rest.iter_mut() {
                        let beta = omega(h, psi, w, &e) as i64 * a_inv % p;
                        let alpha = (p - omega(h, psi, w, &fv) as i64 % p) * a_inv % p;
                        let mut nw = sp.add(w, &sp.scale(f.from_int(alpha), &e));
                        nw = sp.add(&nw, &sp.scale(f.from_int(beta), &fv));
                        *w = nw;
                    }
                    lag.push(e);
                    comp.push(fv);
                }
            }
        }
    }
    Ok((lag, comp))
}

impl HeisenbergRep {
    /// Builds the representation with central character `psi`; `variant`
    /// selects, digit by digit in base `p`, the root used for `mu0` on each
    /// basis vector of `L`.
    pub fn new(h: &HeisenbergGroup, psi_scale: Fe, variant: u64, cap: u64) -> Result<Self> {
        let sp = &h.space;
        let f = &sp.model;
        let field = CycloField::for_char(sp.p())?;
        let psi = Psi::new(&field, f, psi_scale)?;
        let n = field.n();
        let p = sp.p();
        let size = sp.size();
        if size > cap as u128 {
            return Err(Error::BoundExceeded { what: "points of V".into(), needed: size, cap });
        }
        let (lagrangian, complement) = lagrangian_split(h, &psi)?;
        let l_points = span_points(sp, &lagrangian);
        let r_points = span_points(sp, &complement);
        if (l_points.len() * r_points.len()) as u128 != size {
            return Err(Error::NoLagrangian(0));
        }
        let pe = |x: Fe| psi.exponent(f, x, 1).expect("value in k");

        // mu0 on the basis of L
        let mut root = Vec::new();
        let mut v = variant;
        for b in &lagrangian {
            let mut t = 0u32;
            let mut kb = sp.zero();
            for _ in 1..p {
                kb = sp.add(&kb, b);
                t = (t + pe(h.beta(&kb, b))) % n;
            }
            let e0 = (0..n / p).find(|&e| (p * e) % n == t).ok_or(Error::NoLagrangian(0))?;
            let j = (v % p as u64) as u32;
            v /= p as u64;
            root.push((e0 + j * (n / p)) % n);
        }
        let mut mu0 = vec![0u32; l_points.len()];
        for idx in 1..l_points.len() {
            let mut i = 0;
            let mut w = 1;
            while (idx / w) % p as usize == 0 {
                i += 1;
                w *= p as usize;
            }
            let prev = idx - w;
            mu0[idx] = (mu0[prev] + root[i] + n - pe(h.beta(&l_points[prev], &lagrangian[i]))) % n;
        }

        let mut decomp = vec![(u32::MAX, u32::MAX); size as usize];
        for (ri, r) in r_points.iter().enumerate() {
            for (li, l) in l_points.iter().enumerate() {
                let idx = sp.point_index(&sp.add(r, l));
                decomp[idx] = (ri as u32, li as u32);
            }
        }
        if decomp.iter().any(|&(r, _)| r == u32::MAX) {
            return Err(Error::NoLagrangian(0));
        }
        let rep = HeisenbergRep { field, psi, variant, lagrangian, complement, r_points, l_points, mu0, decomp };
        rep.check_mu0(h)?;
        Ok(rep)
    }

    fn l_sum(&self, p: u32, a: usize, b: usize) -> usize {
        let (mut a, mut b) = (a, b);
        let mut out = 0;
        let mut w = 1;
        for _ in 0..self.lagrangian.len() {
            out += ((a % p as usize + b % p as usize) % p as usize) * w;
            a /= p as usize;
            b /= p as usize;
            w *= p as usize;
        }
        out
    }

    fn check_mu0(&self, h: &HeisenbergGroup) -> Result<()> {
        let f = &h.space.model;
        let n = self.field.n();
        let p = h.space.p();
        for a in 0..self.l_points.len() {
            for b in 0..self.l_points.len() {
                let s = self.l_sum(p, a, b);
                let e = self.psi.exponent(f, h.beta(&self.l_points[a], &self.l_points[b]), 1)?;
                if (self.mu0[a] + self.mu0[b] + n - e) % n != self.mu0[s] {
                    return Err(Error::NoLagrangian(0));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.r_points.len()
    }

    /// `(r, l)` with `v = r + l`, as indices.
    pub fn split(&self, sp: &SymplecticSpace, v: &[Fe]) -> (usize, usize) {
        let (r, l) = self.decomp[sp.point_index(v)];
        (r as usize, l as usize)
    }

    pub fn matrix(&self, h: &HeisenbergGroup, g: &HElem) -> Monomial {
        let sp = &h.space;
        let f = &sp.model;
        let n = self.field.n();
        let mut target = Vec::with_capacity(self.dim());
        let mut exp = Vec::with_capacity(self.dim());
        for r in &self.r_points {
            let w = sp.add(&g.v, r);
            let (ri, li) = self.split(sp, &w);
            let c = f.sub(f.add(g.c, h.beta(&g.v, r)), h.beta(&self.r_points[ri], &self.l_points[li]));
            target.push(ri);
            exp.push((self.psi.exponent(f, c, 1).expect("value in k") + self.mu0[li]) % n);
        }
        Monomial { n, target, exp }
    }
}

/// `build_heisenberg_rep` with the standard character and the first `mu0`.
pub fn build_heisenberg_rep(h: &HeisenbergGroup, cap: u64) -> Result<HeisenbergRep> {
    HeisenbergRep::new(h, Fe::ONE, 0, cap)
}

/// `T_gamma = scale * P`, where `P` has entries that are zero or powers of `zeta_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeilOperator {
    pub scale: Cyc,
    pub dim: usize,
    /// Row-major exponents, `None` for a zero entry.
    pub pattern: Vec<Option<u32>>,
}

impl WeilOperator {
    pub fn entry(&self, i: usize, j: usize) -> Option<u32> {
        self.pattern[i * self.dim + j]
    }

    pub fn to_dense(&self, k: &CycloField) -> CMat {
        let mut m = CMat::zeros(k, self.dim, self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                if let Some(e) = self.entry(i, j) {
                    m.set(i, j, k.mul_zeta(&self.scale, e as i64));
                }
            }
        }
        m
    }

    /// `tr(M * T)` for a monomial `M`.
    pub fn trace_after(&self, k: &CycloField, m: &Monomial) -> Cyc {
        let mut hist = vec![0i64; k.n() as usize];
        for j in 0..self.dim {
            if let Some(e) = self.entry(j, m.target[j]) {
                hist[((e + m.exp[j]) % k.n()) as usize] += 1;
            }
        }
        k.mul(&self.scale, &k.from_histogram(&hist))
    }
}

struct RootUnionFind {
    n: u32,
    parent: Vec<usize>,
    /// `T[x] = zeta^off[x] T[parent[x]]`.
    off: Vec<u32>,
    bad: Vec<bool>,
}

impl RootUnionFind {
    fn new(size: usize, n: u32) -> Self {
        RootUnionFind { n, parent: (0..size).collect(), off: vec![0; size], bad: vec![false; size] }
    }

    fn find(&mut self, x: usize) -> (usize, u32) {
        let mut path = Vec::new();
        let mut y = x;
        while self.parent[y] != y {
            path.push(y);
            y = self.parent[y];
        }
        let root = y;
        // compress from the top down
        for &z in path.iter().rev() {
            let p = self.parent[z];
            if p != root {
                self.off[z] = (self.off[z] + self.off[p]) % self.n;
            }
            self.parent[z] = root;
        }
        (root, self.off[x])
    }

    /// Records `T[u] = zeta^k T[w]`.
    fn relate(&mut self, u: usize, w: usize, k: u32) {
        let (ru, a) = self.find(u);
        let (rw, b) = self.find(w);
        if ru == rw {
            if a != (k + b) % self.n {
                self.bad[ru] = true;
            }
            return;
        }
        self.parent[ru] = rw;
        self.off[ru] = (k + b + 2 * self.n - a) % self.n;
        self.bad[rw] = self.bad[rw] || self.bad[ru];
    }
}

/// The Heisenberg-Weil representation `rho(h, gamma) = pi(h) T_gamma`.
#[derive(Clone, Debug)]
pub struct Representation {
    pub hw: HWGroup,
    pub heis_rep: HeisenbergRep,
    pub ops: Vec<WeilOperator>,
}

impl Representation {
    pub fn new(hw: HWGroup, psi_scale: Fe, variant: u64, cap: u64) -> Result<Self> {
        let heis_rep = HeisenbergRep::new(&hw.heis, psi_scale, variant, cap)?;
        let mut rep = Representation { hw, heis_rep, ops: Vec::new() };
        let gens: Vec<HElem> = rep.hw.space().fp_basis().into_iter().map(|v| HElem { c: Fe::ZERO, v }).collect();
        let gen_mats: Vec<Monomial> = gens.iter().map(|g| rep.pi(g)).collect();
        let mut ops = Vec::with_capacity(rep.hw.weil_order());
        for g in 0..rep.hw.weil_order() {
            ops.push(rep.solve_operator(g, &gens, &gen_mats)?);
        }
        rep.ops = ops;
        Ok(rep)
    }

    pub fn field(&self) -> &CycloField {
        &self.heis_rep.field
    }

    pub fn space(&self) -> &SymplecticSpace {
        self.hw.space()
    }

    pub fn dim(&self) -> usize {
        self.heis_rep.dim()
    }

    pub fn pi(&self, h: &HElem) -> Monomial {
        self.heis_rep.matrix(&self.hw.heis, h)
    }

    /// The expected trace `(-1)^{d_gamma} q^{dim_k V^gamma / 2}`.
    pub fn expected_trace(&self, g: WeilIndex) -> Cyc {
        let k = self.field();
        let v = (self.space().q() as i64).pow(self.hw.fixed_dim_k(g) / 2);
        k.from_int(if self.hw.d_gamma(g).is_multiple_of(2) { v } else { -v })
    }

    fn solve_operator(&self, g: WeilIndex, gens: &[HElem], gen_mats: &[Monomial]) -> Result<WeilOperator> {
        let k = self.field();
        let n = k.n();
        let dim = self.dim();
        let mut uf = RootUnionFind::new(dim * dim, n);
        for (h, m) in gens.iter().zip(gen_mats) {
            let m2 = self.pi(&self.hw.act(g, h));
            let mut inv_target = vec![0usize; dim];
            for (s, &t) in m2.target.iter().enumerate() {
                inv_target[t] = s;
            }
            // T[i][t(j)] zeta^{e(j)} = zeta^{e'(s)} T[s][j], t'(s) = i
            for i in 0..dim {
                let s = inv_target[i];
                for j in 0..dim {
                    let kk = (m2.exp[s] + n - m.exp[j]) % n;
                    uf.relate(i * dim + m.target[j], s * dim + j, kk);
                }
            }
        }
        let mut good = BTreeSet::new();
        let mut resolved = Vec::with_capacity(dim * dim);
        for x in 0..dim * dim {
            let (r, e) = uf.find(x);
            if !uf.bad[r] {
                good.insert(r);
            }
            resolved.push((r, e));
        }
        if good.len() != 1 {
            return Err(Error::SchurFailure(good.len()));
        }
        let root = *good.iter().next().unwrap();
        let pattern: Vec<Option<u32>> = resolved.iter().map(|&(r, e)| if r == root { Some(e) } else { None }).collect();
        let mut hist = vec![0i64; n as usize];
        for i in 0..dim {
            if let Some(e) = pattern[i * dim + i] {
                hist[e as usize] += 1;
            }
        }
        let tr0 = k.from_histogram(&hist);
        if tr0.is_zero() {
            return Err(Error::ZeroTrace);
        }
        let scale = k.div(&self.expected_trace(g), &tr0)?;
        Ok(WeilOperator { scale, dim, pattern })
    }

    pub fn weil_operator(&self, g: WeilIndex) -> &WeilOperator {
        &self.ops[g]
    }

    /// `tr(pi(h) T_gamma)`.
    pub fn character(&self, h: &HElem, g: WeilIndex) -> Cyc {
        self.ops[g].trace_after(self.field(), &self.pi(h))
    }

    /// Sum of `|chi|^2` over all of `HW`, computed exactly.
    pub fn norm_sum(&self, cap: u64) -> Result<Cyc> {
        let k = self.field();
        let sp = self.space();
        let total = self.hw.order();
        if total > cap as u128 {
            return Err(Error::BoundExceeded { what: "Heisenberg-Weil group".into(), needed: total, cap });
        }
        let mut acc = k.zero();
        for v in sp.rational_points(cap)? {
            let h = HElem { c: Fe::ZERO, v };
            let m = self.pi(&h);
            for g in 0..self.hw.weil_order() {
                let x = self.ops[g].trace_after(k, &m);
                acc = k.add(&acc, &k.mul(&x, &k.conj(&x)));
            }
        }
        // |chi| does not depend on the central coordinate
        Ok(k.mul_int(&acc, sp.q() as i64))
    }

    /// `T_a T_b = T_{ab}`, compared entrywise.
    pub fn is_multiplicative_on(&self, a: WeilIndex, b: WeilIndex) -> bool {
        let k = self.field();
        let ab = self.hw.weil_mul(a, b);
        let (ta, tb, tab) = (&self.ops[a], &self.ops[b], &self.ops[ab]);
        let dim = self.dim();
        let ratio = match k.div(&k.mul(&ta.scale, &tb.scale), &tab.scale) {
            Ok(r) => r,
            Err(_) => return false,
        };
        for i in 0..dim {
            for j in 0..dim {
                let mut hist = vec![0i64; k.n() as usize];
                for l in 0..dim {
                    if let (Some(x), Some(y)) = (ta.entry(i, l), tb.entry(l, j)) {
                        hist[((x + y) % k.n()) as usize] += 1;
                    }
                }
                let lhs = k.mul(&ratio, &k.from_histogram(&hist));
                let rhs = match tab.entry(i, j) {
                    Some(e) => k.zeta_pow(e as i64),
                    None => k.zero(),
                };
                if lhs != rhs {
                    return false;
                }
            }
        }
        true
    }

    /// `T_gamma pi(0, v) = pi(gamma (0, v)) T_gamma` for every `v`.
    pub fn intertwines(&self, g: WeilIndex, cap: u64) -> Result<bool> {
        let n = self.field().n();
        let t = &self.ops[g];
        let dim = self.dim();
        for v in self.space().rational_points(cap)? {
            let h = HElem { c: Fe::ZERO, v };
            let m = self.pi(&h);
            let m2 = self.pi(&self.hw.act(g, &h));
            let mut inv_target = vec![0usize; dim];
            for (s, &tt) in m2.target.iter().enumerate() {
                inv_target[tt] = s;
            }
            for i in 0..dim {
                let s = inv_target[i];
                for j in 0..dim {
                    let lhs = t.entry(i, m.target[j]).map(|e| (e + m.exp[j]) % n);
                    let rhs = t.entry(s, j).map(|e| (e + m2.exp[s]) % n);
                    if lhs != rhs {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// `T_gamma^{ord(gamma)} = 1`.
    pub fn power_is_identity(&self, g: WeilIndex) -> bool {
        let k = self.field();
        let ord = self.hw.weil_order_of(g);
        self.ops[g].to_dense(k).pow(k, ord).is_identity()
    }

    /// On data whose orbits are all polarized, `T_gamma` is the permutation
    /// `e_{r*} -> e_{gamma r*}` of the dual half.
    pub fn permutation_oracle(&self, g: WeilIndex) -> Option<Monomial> {
        let sp = self.space();
        if sp.orbits.iter().any(|o| o.kind != OrbitKind::Asymmetric) {
            return None;
        }
        let target = self
            .heis_rep
            .r_points
            .iter()
            .map(|r| {
                let (ri, li) = self.heis_rep.split(sp, &self.hw.act_v(g, r));
                debug_assert_eq!(li, 0);
                ri
            })
            .collect();
        Some(Monomial { n: self.field().n(), target, exp: vec![0; self.dim()] })
    }

    /// Elements of `Im(gamma - 1)`, as point indices.
    pub fn image_of_gamma_minus_one(&self, g: WeilIndex, cap: u64) -> Result<BTreeSet<usize>> {
        let sp = self.space();
        Ok(sp.rational_points(cap)?.iter().map(|x| sp.point_index(&sp.sub(&self.hw.act_v(g, x), x))).collect())
    }

    /// `chi(h gamma) != 0` only if the image of `h` lies in `Im(gamma - 1)`.
    /// Returns the number of violations.
    pub fn support_violations(&self, cap: u64) -> Result<usize> {
        let sp = self.space();
        let pts = sp.rational_points(cap)?;
        let mats: Vec<Monomial> = pts.iter().map(|v| self.pi(&HElem { c: Fe::ZERO, v: v.clone() })).collect();
        let mut bad = 0;
        for g in 0..self.hw.weil_order() {
            let img = self.image_of_gamma_minus_one(g, cap)?;
            for (i, m) in mats.iter().enumerate() {
                if !img.contains(&i) && !self.ops[g].trace_after(self.field(), m).is_zero() {
                    bad += 1;
                }
            }
        }
        Ok(bad)
    }
}

/// `sum |chi|^2` over a list of character values, times a multiplicity.
pub fn norm_sum_of(k: &CycloField, values: &[Cyc]) -> Cyc {
    values.iter().fold(k.zero(), |acc, x| k.add(&acc, &k.mul(x, &k.conj(x))))
}

/// Outcome of the parabolic restriction check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RestrictionReport {
    pub dim_u0: u32,
    pub dim_u_plus: u32,
    pub induced_matches: bool,
    pub induced_checked: usize,
    pub projector_rank: usize,
    pub expected_rank: u64,
    pub fixed_traces_match: bool,
    pub fixed_checked: usize,
}

impl RestrictionReport {
    pub fn passed(&self) -> bool {
        self.induced_matches && self.fixed_traces_match && self.projector_rank as u64 == self.expected_rank
    }
}

/// Splits `V = u^- + u^0 + u^+` by an integer grading of the labels and
/// compares the representation with the one induced from the inflation of
/// the representation of the `u^0` datum.
pub fn parabolic_restriction_check(rep: &Representation, grading: &[i64], cap: u64) -> Result<RestrictionReport> {
    let sp = rep.space();
    let f = &sp.model;
    let k = rep.field();
    check_grading(sp, grading)?;
    let mut zero_orbits = Vec::new();
    // coordinate positions in u^+ and u^-
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for (o, oc) in sp.orbits.iter().enumerate() {
        let w = grading[oc.rep];
        if w == 0 {
            zero_orbits.push(o);
            continue;
        }
        if oc.kind == OrbitKind::Symmetric {
            return Err(Error::BadGrading(format!("orbit of {} is unitary but has weight {w}", oc.rep_label)));
        }
        let m = oc.m as usize;
        let a: Vec<(usize, u32)> = (0..m).map(|j| (oc.coord_offset + j, oc.d)).collect();
        let b: Vec<(usize, u32)> = (0..m).map(|j| (oc.coord_offset + m + j, oc.d)).collect();
        // the `a` half carries the weight of the representative
        if w > 0 {
            plus.extend(a);
            minus.extend(b);
        } else {
            plus.extend(b);
            minus.extend(a);
        }
    }
    let dim_k = |pos: &[(usize, u32)]| pos.iter().map(|&(_, d)| d).sum::<u32>();
    let points_on = |pos: &[(usize, u32)]| -> Result<Vec<Vec<Fe>>> {
        let mut out = vec![sp.zero()];
        for &(i, d) in pos {
            let elems = f.subfield_elements(d);
            let mut next = Vec::with_capacity(out.len() * elems.len());
            for v in &out {
                for &x in &elems {
                    let mut w = v.clone();
                    w[i] = x;
                    next.push(w);
                }
            }
            if next.len() as u64 > cap {
                return Err(Error::BoundExceeded { what: "graded pieces of V".into(), needed: next.len() as u128, cap });
            }
            out = next;
        }
        Ok(out)
    };
    let u_plus = points_on(&plus)?;
    let u_minus = points_on(&minus)?;

    // the u^0 representation, or psi alone when u^0 = 0
    let sub = if zero_orbits.is_empty() {
        None
    } else {
        let sp0 = sp.restrict(&zero_orbits)?;
        let hw0 = HWGroup::new(HeisenbergGroup::new(sp0)?, cap)?;
        Some(Representation::new(hw0, rep.heis_rep.psi.scale, 0, cap)?)
    };
    let dim_u0: u32 = zero_orbits.iter().map(|&o| sp.orbits[o].dim_k()).sum();
    let in_k = |v: &[Fe]| minus.iter().all(|&(i, _)| v[i].is_zero());
    let chi0 = |h: &HElem, g: WeilIndex| -> Cyc {
        match &sub {
            None => rep.heis_rep.psi.eval(k, f, h.c, 1).expect("central value in k"),
            Some(r0) => {
                let sp0 = r0.space();
                let v0: Vec<Fe> = zero_orbits.iter().flat_map(|&o| sp.orbit_slice(o, &h.v).to_vec()).collect();
                let parts = rep.hw.parts(g);
                let parts0: Vec<usize> = zero_orbits
                    .iter()
                    .zip(&r0.hw.factors)
                    .map(|(&o, w0)| w0.index_of(sp0, &rep.hw.factors[o].elements[parts[o]]).expect("same factor"))
                    .collect();
                r0.character(&HElem { c: h.c, v: v0 }, r0.hw.from_parts(&parts0))
            }
        }
    };

    // (a) induced character
    let mut induced_matches = true;
    let mut induced_checked = 0;
    let central = f.subfield_elements(1);
    for v in sp.rational_points(cap)? {
        for &c in &central {
            let h = HElem { c, v: v.clone() };
            for g in 0..rep.hw.weil_order() {
                let mut ind = k.zero();
                for u in &u_minus {
                    let uu = (HElem { c: Fe::ZERO, v: u.clone() }, rep.hw.weil_identity());
                    let ui = (rep.hw.heis.inverse(&uu.0), uu.1);
                    let x = rep.hw.hw_mul(&rep.hw.hw_mul(&ui, &(h.clone(), g))?, &uu)?;
                    if in_k(&x.0.v) {
                        ind = k.add(&ind, &chi0(&x.0, x.1));
                    }
                }
                induced_checked += 1;
                if ind != rep.character(&h, g) {
                    induced_matches = false;
                }
            }
        }
    }

    // (b) the u^+ invariants
    let dim = rep.dim();
    let mut proj = CMat::zeros(k, dim, dim);
    for u in &u_plus {
        let m = rep.pi(&HElem { c: Fe::ZERO, v: u.clone() });
        for j in 0..dim {
            let t = m.target[j];
            let cur = proj.get(t, j).clone();
            proj.set(t, j, k.add(&cur, &k.zeta_pow(m.exp[j] as i64)));
        }
    }
    let inv = k.from_ratio((1).into(), (u_plus.len() as i64).into())?;
    proj = proj.scale(k, &inv);
    let projector_rank = proj.rank(k);
    let expected_rank = sp.q().pow(dim_u0 / 2);
    let mut fixed_traces_match = true;
    let mut fixed_checked = 0;
    for v in sp.rational_points(cap)? {
        if !in_k(&v) {
            continue;
        }
        for &c in &central {
            let h = HElem { c, v: v.clone() };
            let m = rep.pi(&h);
            for g in 0..rep.hw.weil_order() {
                let rho = m.mul_dense(k, &rep.ops[g].to_dense(k));
                let tr = proj.mul(k, &rho).trace(k);
                fixed_checked += 1;
                if tr != chi0(&h, g) {
                    fixed_traces_match = false;
                }
            }
        }
    }
    Ok(RestrictionReport {
        dim_u0,
        dim_u_plus: dim_k(&plus),
        induced_matches,
        induced_checked,
        projector_rank,
        expected_rank,
        fixed_traces_match,
        fixed_checked,
    })
}

/// A short name for a point of `V`: its coordinates as canonical codes.
pub fn vector_label(sp: &SymplecticSpace, v: &[Fe]) -> String {
    let mut parts = Vec::new();
    for oc in &sp.orbits {
        for &x in &v[oc.coord_offset..oc.coord_offset + oc.coord_len()] {
            let c = sp.model.to_canonical(x, oc.d).expect("coordinate in k_s");
            parts.push(format!("{}", crate::weight_datum::canonical_code(&c, sp.p())));
        }
    }
    format!("({})", parts.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff_tower::DEFAULT_CAP;
    use crate::weight_datum::{validate_datum, OrbitSpec, WeightDatum};

    fn rep(q: u64, orbits: &[OrbitSpec]) -> Representation {
        let sp = validate_datum(&WeightDatum::from_orbits(q, orbits).unwrap(), DEFAULT_CAP).unwrap();
        let hw = HWGroup::new(HeisenbergGroup::new(sp).unwrap(), DEFAULT_CAP).unwrap();
        Representation::new(hw, Fe::ONE, 0, DEFAULT_CAP).unwrap()
    }

    #[test]
    fn dual_pair_over_f2() {
        let r = rep(2, &[OrbitSpec::asymmetric(1, 1)]);
        let k = r.field();
        assert_eq!(r.dim(), 2);
        let z = r.hw.heis.central(Fe::ONE);
        let m = r.pi(&z);
        assert_eq!(m.to_dense(k), CMat::identity(k, 2).scale(k, &k.from_int(-1)));
        assert_eq!(r.norm_sum(DEFAULT_CAP).unwrap(), k.from_int(8));
    }

    #[test]
    fn unitary_line_characters() {
        let r = rep(2, &[OrbitSpec::symmetric(2, 1)]);
        let k = r.field();
        assert_eq!(r.dim(), 2);
        let e = r.hw.weil_identity();
        for g in 0..3 {
            let tr = r.character(&r.hw.heis.identity(), g);
            assert_eq!(tr, k.from_int(if g == e { 2 } else { -1 }));
            assert!(r.power_is_identity(g));
            assert!(r.intertwines(g, DEFAULT_CAP).unwrap());
            for b in 0..3 {
                assert!(r.is_multiplicative_on(g, b));
            }
        }
        assert_eq!(r.norm_sum(DEFAULT_CAP).unwrap(), k.from_int(24));
        assert_eq!(r.support_violations(DEFAULT_CAP).unwrap(), 0);
    }

    #[test]
    fn gl1_f3_minus_one() {
        let r = rep(3, &[OrbitSpec::asymmetric(1, 1)]);
        let k = r.field();
        let e = r.hw.weil_identity();
        let g = 1 - e;
        assert_eq!(r.character(&r.hw.heis.identity(), g), k.one());
        let oracle = r.permutation_oracle(g).unwrap();
        assert_eq!(oracle.to_dense(k), r.ops[g].to_dense(k));
    }

    #[test]
    fn doubled_character_fails_norm_test() {
        let r = rep(2, &[OrbitSpec::symmetric(2, 1)]);
        let k = r.field();
        let mut vals = Vec::new();
        for h in r.hw.heis.elements(DEFAULT_CAP).unwrap() {
            for g in 0..r.hw.weil_order() {
                vals.push(k.mul_int(&r.character(&h, g), 2));
            }
        }
        assert_eq!(norm_sum_of(k, &vals), k.from_int(4 * 24));
    }

    #[test]
    fn restriction_to_levi() {
        let r = rep(2, &[OrbitSpec::symmetric(2, 1), OrbitSpec::asymmetric(1, 1)]);
        let sp = r.space();
        let mut grading = vec![0i64; sp.datum.labels.len()];
        grading[sp.datum.label_index("1+0").unwrap()] = 1;
        grading[sp.datum.label_index("1-0").unwrap()] = -1;
        let rep0 = parabolic_restriction_check(&r, &grading, DEFAULT_CAP).unwrap();
        assert!(rep0.passed(), "{rep0:?}");
        assert_eq!(rep0.projector_rank, 2);
        let zero = vec![0i64; grading.len()];
        assert!(parabolic_restriction_check(&r, &zero, DEFAULT_CAP).unwrap().passed());
    }
}
