//! One fixed model of `F_{q^D}` together with all of its subfields.
//!
//! Elements are stored as discrete logarithms with respect to a primitive
//! element, so multiplication and Frobenius are integer operations and
//! addition goes through a Zech table. Every subfield `k_e` (`e | D`) lives
//! inside the same table, which makes the subfield lattice automatically
//! compatible.
//!
//! The defining polynomial of every degree is the least monic irreducible
//! polynomial over `F_p`, where polynomials are ordered by the integer
//! `c_0 + c_1 p + ... + c_{n-1} p^{n-1}` of their non-leading coefficients.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Default bound on the size of any enumerated set.
pub const DEFAULT_CAP: u64 = 1 << 20;

/// Hard limit on the size of a field table, whatever the configured cap.
pub const TABLE_LIMIT: u64 = 1 << 26;

const ZERO_LOG: u32 = u32::MAX;

/// An element of a [`ClosureModel`], stored as a discrete logarithm.
///
/// Equality is field equality. The derived ordering is by logarithm and has
/// no arithmetic meaning; use [`ClosureModel::index`] for coordinate order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fe(u32);

impl Fe {
    pub const ZERO: Fe = Fe(ZERO_LOG);
    pub const ONE: Fe = Fe(0);

    pub fn is_zero(self) -> bool {
        self.0 == ZERO_LOG
    }

    /// The discrete logarithm, `None` for zero.
    pub fn log(self) -> Option<u32> {
        if self.is_zero() {
            None
        } else {
            Some(self.0)
        }
    }
}

/// A subfield element written in the power basis of its own defining
/// polynomial. This is the model independent way to name field elements.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Canonical {
    /// Degree `e` of the subfield `k_e` over `k`.
    pub degree: u32,
    /// Coordinates over `F_p`, length `f * e` where `q = p^f`.
    pub coords: Vec<u32>,
}

impl Canonical {
    pub fn one(degree: u32, f: u32) -> Self {
        let mut coords = vec![0; (degree * f) as usize];
        coords[0] = 1;
        Canonical { degree, coords }
    }
}

#[derive(Clone, Debug)]
struct Subfield {
    poly: Vec<u32>,
    // powers of the chosen root of `poly`, 1, r, r^2, ...
    powers: Vec<Fe>,
}

/// The field `F_{q^D}` with Frobenius `x -> x^q` and its subfield lattice.
#[derive(Clone, Debug)]
pub struct ClosureModel {
    p: u32,
    f: u32,
    q: u64,
    degree: u32,
    order: u32,
    modulus: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
    zech: Vec<u32>,
    neg_one: u32,
    q_pows: Vec<u64>,
    p_pows: Vec<u64>,
    basis_trace: Vec<u32>,
    subfields: BTreeMap<u32, Subfield>,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn divisors(n: u32) -> Vec<u32> {
    (1..=n).filter(|d| n.is_multiple_of(*d)).collect()
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Splits `q = p^f`; `p` must be prime.
pub fn prime_power(p: u64, q: u64) -> Result<u32> {
    if !is_prime(p) {
        return Err(Error::NonPrimeP(p));
    }
    let mut f = 0;
    let mut r = q;
    while r > 1 && r.is_multiple_of(p) {
        r /= p;
        f += 1;
    }
    if r != 1 || f == 0 {
        return Err(Error::NotPrimePower { p, q });
    }
    Ok(f)
}

/// Finds the prime `p` and exponent `f` with `q = p^f`.
pub fn split_prime_power(q: u64) -> Result<(u64, u32)> {
    let fs = prime_factors(q);
    if fs.len() != 1 {
        return Err(Error::NotPrimePower { p: fs.first().copied().unwrap_or(q), q });
    }
    let p = fs[0];
    Ok((p, prime_power(p, q)?))
}

fn checked_pow(base: u64, exp: u32) -> u128 {
    let mut r: u128 = 1;
    for _ in 0..exp {
        r = r.saturating_mul(base as u128);
    }
    r
}

// Polynomials over F_p, coefficients from low to high degree.
pub(crate) mod fp {
    use alloc::vec;
    use alloc::vec::Vec;

    pub fn trim(a: &mut Vec<u32>) {
        while a.last() == Some(&0) {
            a.pop();
        }
    }

    pub fn inv_mod(a: u32, p: u32) -> u32 {
        let mut r = 1u64;
        let mut b = a as u64 % p as u64;
        let mut e = p - 2;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p as u64;
            }
            b = b * b % p as u64;
            e >>= 1;
        }
        r as u32
    }

    /// Remainder of `a` modulo the monic or non-monic nonzero `m`.
    pub fn rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        let mut r = a.to_vec();
        trim(&mut r);
        let mut m = m.to_vec();
        trim(&mut m);
        let n = m.len() - 1;
        let lead_inv = inv_mod(m[n], p) as u64;
        while r.len() > n {
            let top = r.len() - 1;
            let c = r[top] as u64 * lead_inv % p as u64;
            if c != 0 {
                for j in 0..=n {
                    let idx = top - n + j;
                    r[idx] = ((r[idx] as u64 + (p as u64 - c) * m[j] as u64) % p as u64) as u32;
                }
            }
            r.pop();
            trim(&mut r);
        }
        r
    }

    pub fn mulmod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut prod = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p as u64;
            }
        }
        let prod: Vec<u32> = prod.into_iter().map(|c| c as u32).collect();
        rem(&prod, m, p)
    }

    pub fn powmod(base: &[u32], mut e: u64, m: &[u32], p: u32) -> Vec<u32> {
        let mut result = rem(&[1], m, p);
        let mut b = rem(base, m, p);
        while e > 0 {
            if e & 1 == 1 {
                result = mulmod(&result, &b, m, p);
            }
            b = mulmod(&b, &b, m, p);
            e >>= 1;
        }
        result
    }

    pub fn sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let n = a.len().max(b.len());
        let mut r = vec![0; n];
        for (i, slot) in r.iter_mut().enumerate() {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            *slot = (x + p - y) % p;
        }
        trim(&mut r);
        r
    }

    pub fn gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let mut a = a.to_vec();
        let mut b = b.to_vec();
        trim(&mut a);
        trim(&mut b);
        while !b.is_empty() {
            let r = rem(&a, &b, p);
            a = b;
            b = r;
        }
        a
    }

    /// `x^{p^k} mod m`.
    pub fn x_pow_p_k(k: u32, m: &[u32], p: u32) -> Vec<u32> {
        let mut y = rem(&[0, 1], m, p);
        for _ in 0..k {
            y = powmod(&y, p as u64, m, p);
        }
        y
    }

    pub fn is_irreducible(f: &[u32], p: u32) -> bool {
        let n = (f.len() - 1) as u32;
        if n == 1 {
            return true;
        }
        let x = [0u32, 1];
        let full = x_pow_p_k(n, f, p);
        if !sub(&full, &rem(&x, f, p), p).is_empty() {
            return false;
        }
        for r in super::prime_factors(n as u64) {
            let y = x_pow_p_k(n / r as u32, f, p);
            let g = gcd(&sub(&y, &x, p), f, p);
            if g.len() != 1 {
                return false;
            }
        }
        true
    }

    /// The least monic irreducible polynomial of degree `n` over `F_p`.
    pub fn least_irreducible(n: u32, p: u32) -> Vec<u32> {
        let total = (p as u64).pow(n);
        for code in 0..total {
            let mut c = code;
            let mut coeffs = Vec::with_capacity(n as usize + 1);
            for _ in 0..n {
                coeffs.push((c % p as u64) as u32);
                c /= p as u64;
            }
            coeffs.push(1);
            if n > 1 && coeffs[0] == 0 {
                continue;
            }
            if is_irreducible(&coeffs, p) {
                return coeffs;
            }
        }
        unreachable!("irreducible polynomials exist in every degree")
    }
}

/// Solves `A x = b` over `F_p` where `A` is given by columns. Returns one
/// solution if the system is consistent.
pub(crate) fn solve_mod_p(cols: &[Vec<u32>], b: &[u32], p: u32) -> Option<Vec<u32>> {
    let rows = b.len();
    let ncols = cols.len();
    let pm = p as u64;
    let mut m: Vec<Vec<u32>> = (0..rows)
        .map(|i| {
            let mut row: Vec<u32> = cols.iter().map(|c| c[i]).collect();
            row.push(b[i]);
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(piv) = (r..rows).find(|&i| m[i][c] != 0) else { continue };
        m.swap(r, piv);
        let inv = fp::inv_mod(m[r][c], p) as u64;
        for x in m[r].iter_mut() {
            *x = (*x as u64 * inv % pm) as u32;
        }
        for i in 0..rows {
            if i != r && m[i][c] != 0 {
                let factor = m[i][c] as u64;
                for j in 0..=ncols {
                    m[i][j] = ((m[i][j] as u64 + (pm - factor) * m[r][j] as u64) % pm) as u32;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if m[r..].iter().any(|row| row[ncols] != 0) {
        return None;
    }
    let mut x = vec![0; ncols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = m[i][ncols];
    }
    Some(x)
}

impl ClosureModel {
    /// Builds `F_{q^D}` where `q = p^f`. Fails if `q^D` exceeds `cap`.
    pub fn new(p: u64, q: u64, degree: u32, cap: u64) -> Result<Self> {
        let f = prime_power(p, q)?;
        if degree == 0 {
            return Err(Error::DegreeMismatch("top degree must be positive".to_string()));
        }
        let size = checked_pow(q, degree);
        if size > cap as u128 || size > TABLE_LIMIT as u128 {
            return Err(Error::BoundExceeded {
                what: format!("field F_{{{q}^{degree}}}"),
                needed: size,
                cap: cap.min(TABLE_LIMIT),
            });
        }
        let p32 = p as u32;
        let order = size as u32;
        let n = f * degree;
        let modulus = fp::least_irreducible(n, p32);
        let m = (order - 1) as u64;

        // least primitive element in coordinate order
        let factors = prime_factors(m);
        let to_digits = |mut idx: u32| -> Vec<u32> {
            let mut d = Vec::with_capacity(n as usize);
            for _ in 0..n {
                d.push(idx % p32);
                idx /= p32;
            }
            d
        };
        let mut generator = Vec::new();
        for idx in 1..order {
            let g = to_digits(idx);
            let mut ok = true;
            for &r in &factors {
                let y = fp::powmod(&g, m / r, &modulus, p32);
                if y == [1] {
                    ok = false;
                    break;
                }
            }
            if m == 0 || ok {
                generator = g;
                break;
            }
        }
        if order == 2 {
            generator = vec![1];
        }

        // multiplication-by-generator as an F_p-linear map
        let cols: Vec<Vec<u32>> = (0..n)
            .map(|j| {
                let mut xj = vec![0; j as usize + 1];
                xj[j as usize] = 1;
                let mut c = fp::mulmod(&generator, &xj, &modulus, p32);
                c.resize(n as usize, 0);
                c
            })
            .collect();
        let mut exp = vec![0u32; m as usize];
        let mut log = vec![ZERO_LOG; order as usize];
        if p32 == 2 {
            let masks: Vec<u32> = cols
                .iter()
                .map(|c| c.iter().enumerate().fold(0u32, |acc, (i, &b)| acc | (b << i)))
                .collect();
            let mut state: u32 = 1;
            for e in 0..m as usize {
                exp[e] = state;
                log[state as usize] = e as u32;
                let mut next = 0;
                let mut s = state;
                while s != 0 {
                    let j = s.trailing_zeros();
                    next ^= masks[j as usize];
                    s &= s - 1;
                }
                state = next;
            }
        } else {
            let mut state = vec![0u32; n as usize];
            state[0] = 1;
            let mut pw = vec![1u32; n as usize];
            for i in 1..n as usize {
                pw[i] = pw[i - 1] * p32;
            }
            let mut next = vec![0u32; n as usize];
            for e in 0..m as usize {
                let idx: u32 = state.iter().zip(&pw).map(|(d, w)| d * w).sum();
                exp[e] = idx;
                log[idx as usize] = e as u32;
                next.iter_mut().for_each(|x| *x = 0);
                for (j, &sj) in state.iter().enumerate() {
                    if sj == 0 {
                        continue;
                    }
                    for (i, slot) in next.iter_mut().enumerate() {
                        *slot += sj * cols[j][i];
                    }
                }
                for (s, x) in state.iter_mut().zip(&next) {
                    *s = x % p32;
                }
            }
        }
        let mut zech = vec![ZERO_LOG; m as usize];
        for (e, slot) in zech.iter_mut().enumerate() {
            let idx = exp[e];
            let d0 = idx % p32;
            let idx1 = idx - d0 + (d0 + 1) % p32;
            *slot = log[idx1 as usize];
        }
        let neg_one = if p32 == 2 { 0 } else { (m / 2) as u32 };
        let q_pows = (0..degree).map(|i| modpow(q % m.max(1), i as u64, m.max(1))).collect();
        let p_pows = (0..n).map(|i| modpow(p % m.max(1), i as u64, m.max(1))).collect();

        let mut model = ClosureModel {
            p: p32,
            f,
            q,
            degree,
            order,
            modulus,
            exp,
            log,
            zech,
            neg_one,
            q_pows,
            p_pows,
            basis_trace: Vec::new(),
            subfields: BTreeMap::new(),
        };
        model.basis_trace = (0..n)
            .map(|i| {
                let mut d = vec![0; i as usize + 1];
                d[i as usize] = 1;
                let x = model.from_coords(&d);
                let t = model.trace_loop(x, n);
                model.index(t)
            })
            .collect();
        for e in divisors(degree) {
            let poly = fp::least_irreducible(f * e, p32);
            let root = if e == degree {
                model.from_coords(&[0, 1])
            } else {
                let mut best: Option<(u32, Fe)> = None;
                for x in model.subfield_elements(e) {
                    if model.eval_fp_poly(&poly, x).is_zero() {
                        let idx = model.index(x);
                        if best.is_none_or(|(b, _)| idx < b) {
                            best = Some((idx, x));
                        }
                    }
                }
                best.expect("subfield contains a root of its defining polynomial").1
            };
            let mut powers = Vec::with_capacity((f * e) as usize);
            let mut acc = Fe::ONE;
            for _ in 0..f * e {
                powers.push(acc);
                acc = model.mul(acc, root);
            }
            model.subfields.insert(e, Subfield { poly, powers });
        }
        Ok(model)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// `q = p^f`, the size of the base field `k`.
    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn f(&self) -> u32 {
        self.f
    }

    /// Top degree `D` over `k`.
    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// `q^D`.
    pub fn order(&self) -> u32 {
        self.order
    }

    /// The defining polynomial of the top field, low coefficients first.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// Defining polynomial of the subfield of degree `e`.
    pub fn subfield_poly(&self, e: u32) -> Option<&[u32]> {
        self.subfields.get(&e).map(|s| s.poly.as_slice())
    }

    fn m(&self) -> u32 {
        self.order - 1
    }

    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        let m = self.m();
        let d = if b.0 >= a.0 { b.0 - a.0 } else { b.0 + m - a.0 };
        let z = self.zech[d as usize];
        if z == ZERO_LOG {
            Fe::ZERO
        } else {
            let s = a.0 + z;
            Fe(if s >= m { s - m } else { s })
        }
    }

    pub fn neg(&self, a: Fe) -> Fe {
        if a.is_zero() || self.p == 2 {
            return a;
        }
        let s = a.0 + self.neg_one;
        let m = self.m();
        Fe(if s >= m { s - m } else { s })
    }

    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a.is_zero() || b.is_zero() {
            return Fe::ZERO;
        }
        let s = a.0 + b.0;
        let m = self.m();
        Fe(if s >= m { s - m } else { s })
    }

    pub fn inv(&self, a: Fe) -> Result<Fe> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Fe(if a.0 == 0 { 0 } else { self.m() - a.0 }))
    }

    pub fn div(&self, a: Fe, b: Fe) -> Result<Fe> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^e`; negative exponents need `a != 0`.
    pub fn pow(&self, a: Fe, e: i64) -> Result<Fe> {
        if a.is_zero() {
            return match e {
                0 => Ok(Fe::ONE),
                e if e > 0 => Ok(Fe::ZERO),
                _ => Err(Error::DivisionByZero),
            };
        }
        let m = self.m() as i128;
        let r = (a.0 as i128 * (e as i128).rem_euclid(m)).rem_euclid(m);
        Ok(Fe(r as u32))
    }

    /// `x^{q^i}`; `i` may be negative.
    pub fn frobenius(&self, x: Fe, i: i64) -> Fe {
        if x.is_zero() {
            return x;
        }
        let i = i.rem_euclid(self.degree as i64) as usize;
        let m = self.m() as u64;
        Fe(((x.0 as u64 * self.q_pows[i]) % m.max(1)) as u32)
    }

    /// `x^{p^i}` for `0 <= i < f D`.
    fn frob_p(&self, x: Fe, i: u32) -> Fe {
        if x.is_zero() {
            return x;
        }
        let m = self.m() as u64;
        Fe(((x.0 as u64 * self.p_pows[i as usize]) % m.max(1)) as u32)
    }

    /// The element `n * 1` of the prime field.
    pub fn from_int(&self, n: i64) -> Fe {
        let r = n.rem_euclid(self.p as i64) as usize;
        Fe(self.log[r])
    }

    /// Position of `x` in coordinate order: `sum c_i p^i`.
    pub fn index(&self, x: Fe) -> u32 {
        if x.is_zero() {
            0
        } else {
            self.exp[x.0 as usize]
        }
    }

    pub fn from_index(&self, idx: u32) -> Fe {
        Fe(self.log[idx as usize])
    }

    /// Coordinates over `F_p` in the polynomial basis of the top field.
    pub fn coordinates(&self, x: Fe) -> Vec<u32> {
        let mut idx = self.index(x);
        let n = self.f * self.degree;
        let mut d = Vec::with_capacity(n as usize);
        for _ in 0..n {
            d.push(idx % self.p);
            idx /= self.p;
        }
        d
    }

    pub fn from_coords(&self, coords: &[u32]) -> Fe {
        let n = (self.f * self.degree) as usize;
        let reduced = fp::rem(coords, &self.modulus, self.p);
        let mut idx = 0u32;
        for i in (0..n).rev() {
            idx = idx * self.p + reduced.get(i).copied().unwrap_or(0);
        }
        self.from_index(idx)
    }

    /// Whether `x` lies in the subfield `k_e`. `e` must divide `D`.
    pub fn in_subfield(&self, x: Fe, e: u32) -> bool {
        if x.is_zero() {
            return true;
        }
        if !self.degree.is_multiple_of(e) {
            return false;
        }
        let step = self.m() / (self.q.pow(e) as u32 - 1);
        x.0.is_multiple_of(step)
    }

    /// The least `e | D` with `x` in `k_e`.
    pub fn degree_of(&self, x: Fe) -> u32 {
        divisors(self.degree).into_iter().find(|&e| self.in_subfield(x, e)).unwrap_or(self.degree)
    }

    fn check_in(&self, x: Fe, e: u32) -> Result<()> {
        if !self.degree.is_multiple_of(e) {
            return Err(Error::DegreeMismatch(format!("{e} does not divide {}", self.degree)));
        }
        if !self.in_subfield(x, e) {
            return Err(Error::DegreeMismatch(format!("element not in the degree {e} subfield")));
        }
        Ok(())
    }

    /// All elements of `k_e`: zero first, then powers of a generator.
    pub fn subfield_elements(&self, e: u32) -> Vec<Fe> {
        assert!(self.degree.is_multiple_of(e), "subfield degree must divide the top degree");
        let size = self.q.pow(e) as u32;
        let step = self.m() / (size - 1);
        let mut v = Vec::with_capacity(size as usize);
        v.push(Fe::ZERO);
        for j in 0..size - 1 {
            v.push(Fe(j * step));
        }
        v
    }

    /// Nonzero elements of `k_e`.
    pub fn subfield_units(&self, e: u32) -> Vec<Fe> {
        let mut v = self.subfield_elements(e);
        v.remove(0);
        v
    }

    /// `Tr_{k_e/k_d}(x)` for `x` in `k_e`, `d | e`.
    pub fn trace(&self, x: Fe, e: u32, d: u32) -> Result<Fe> {
        self.check_in(x, e)?;
        if !e.is_multiple_of(d) {
            return Err(Error::DegreeMismatch(format!("{d} does not divide {e}")));
        }
        let mut acc = Fe::ZERO;
        for i in 0..e / d {
            acc = self.add(acc, self.frobenius(x, (i * d) as i64));
        }
        Ok(acc)
    }

    /// `N_{k_e/k_d}(x)` for `x` in `k_e`, `d | e`.
    pub fn norm(&self, x: Fe, e: u32, d: u32) -> Result<Fe> {
        self.check_in(x, e)?;
        if !e.is_multiple_of(d) {
            return Err(Error::DegreeMismatch(format!("{d} does not divide {e}")));
        }
        let mut acc = Fe::ONE;
        for i in 0..e / d {
            acc = self.mul(acc, self.frobenius(x, (i * d) as i64));
        }
        Ok(acc)
    }

    /// `Tr_{k_d/k}(x)`.
    pub fn relative_trace(&self, x: Fe, d: u32) -> Result<Fe> {
        self.trace(x, d, 1)
    }

    /// `N_{k_d/k}(x)`.
    pub fn relative_norm(&self, x: Fe, d: u32) -> Result<Fe> {
        self.norm(x, d, 1)
    }

    fn trace_loop(&self, x: Fe, abs_deg: u32) -> Fe {
        let mut acc = Fe::ZERO;
        for i in 0..abs_deg {
            acc = self.add(acc, self.frob_p(x, i));
        }
        acc
    }

    fn abs_trace_top(&self, x: Fe) -> u32 {
        let mut idx = self.index(x);
        let mut acc = 0u32;
        let mut i = 0;
        while idx > 0 {
            acc += (idx % self.p) * self.basis_trace[i];
            idx /= self.p;
            i += 1;
        }
        acc % self.p
    }

    /// `Tr_{k_e/F_p}(x)` as an integer in `0..p`.
    pub fn trace_to_prime(&self, x: Fe, e: u32) -> Result<u32> {
        self.check_in(x, e)?;
        let ratio = self.degree / e;
        if !ratio.is_multiple_of(self.p) {
            let t = self.abs_trace_top(x) as u64;
            let inv = fp::inv_mod(ratio % self.p, self.p) as u64;
            Ok((t * inv % self.p as u64) as u32)
        } else {
            Ok(self.index(self.trace_loop(x, self.f * e)))
        }
    }

    /// Evaluates a polynomial with `F_p` coefficients at `x`.
    pub fn eval_fp_poly(&self, poly: &[u32], x: Fe) -> Fe {
        let mut acc = Fe::ZERO;
        for &c in poly.iter().rev() {
            acc = self.add(self.mul(acc, x), self.from_int(c as i64));
        }
        acc
    }

    /// Image of a canonical element of `k_e` in this model.
    pub fn embed(&self, c: &Canonical) -> Result<Fe> {
        let sub = self.subfields.get(&c.degree).ok_or_else(|| {
            Error::DegreeMismatch(format!("{} does not divide {}", c.degree, self.degree))
        })?;
        if c.coords.len() > sub.powers.len() {
            return Err(Error::DegreeMismatch(format!(
                "{} coordinates for a subfield of absolute degree {}",
                c.coords.len(),
                sub.powers.len()
            )));
        }
        let mut acc = Fe::ZERO;
        for (&ci, &rj) in c.coords.iter().zip(&sub.powers) {
            if ci % self.p != 0 {
                acc = self.add(acc, self.mul(self.from_int(ci as i64), rj));
            }
        }
        Ok(acc)
    }

    /// Inverse of [`ClosureModel::embed`] on `k_e`.
    pub fn to_canonical(&self, x: Fe, e: u32) -> Result<Canonical> {
        self.check_in(x, e)?;
        let sub = &self.subfields[&e];
        let cols: Vec<Vec<u32>> = sub.powers.iter().map(|&r| self.coordinates(r)).collect();
        let coords = solve_mod_p(&cols, &self.coordinates(x), self.p)
            .expect("subfield elements are combinations of the root powers");
        Ok(Canonical { degree: e, coords })
    }

    /// Moves `x` from `other` into `self` through the canonical form of
    /// `other`'s top field. Consistent for all elements of `other`.
    pub fn transport(&self, other: &ClosureModel, x: Fe) -> Result<Fe> {
        let c = other.to_canonical(x, other.degree)?;
        self.embed(&c)
    }

    /// The least element of an iterator in coordinate order.
    pub fn least<I: IntoIterator<Item = Fe>>(&self, it: I) -> Option<Fe> {
        it.into_iter().min_by_key(|&x| self.index(x))
    }

    /// `g^e` for the fixed primitive element `g`.
    pub fn from_log(&self, e: u64) -> Fe {
        Fe((e % self.m().max(1) as u64) as u32)
    }

    /// Multiplicative order of a nonzero element.
    pub fn mult_order(&self, x: Fe) -> u64 {
        let m = self.m() as u64;
        if x.is_zero() {
            return 0;
        }
        m / gcd(m, x.0 as u64)
    }
}

pub(crate) fn modpow(base: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut r = 1u128;
    let mut b = (base % m) as u128;
    let m = m as u128;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r as u64
}
