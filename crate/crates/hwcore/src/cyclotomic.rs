//! Exact arithmetic in `Q(zeta_n)` for `n` a prime power.
//!
//! Values of additive characters of a field of characteristic `p` are
//! `p`-th roots of unity, but the Heisenberg representations in
//! characteristic 2 need a fourth root of unity (the Heisenberg group of a
//! unitary line over `F_4/F_2` is the quaternion group). The coefficient
//! field is therefore `Q(zeta_p)` for odd `p` and `Q(zeta_4) = Q(i)` for
//! `p = 2`; see [`CycloField::for_char`].
//!
//! Elements are stored in the power basis `1, zeta, ..., zeta^{phi(n)-1}`
//! with big-integer numerators over a shared positive denominator, always
//! in lowest terms, so equality is structural.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::ff_tower::{is_prime, ClosureModel, Fe};

/// An element of `Q(zeta_n)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Cyc {
    n: u32,
    num: Vec<BigInt>,
    den: BigInt,
}

/// The field `Q(zeta_n)`, `n = p^e`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycloField {
    n: u32,
    p: u32,
    phi: usize,
}

impl CycloField {
    pub fn new(n: u32) -> Result<Self> {
        let fs = crate::ff_tower::prime_factors(n as u64);
        if fs.len() != 1 {
            return Err(Error::NotPrimePower { p: 0, q: n as u64 });
        }
        let p = fs[0] as u32;
        let phi = (n - n / p) as usize;
        Ok(CycloField { n, p, phi })
    }

    /// The coefficient field used for characteristic `p`.
    pub fn for_char(p: u32) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::NonPrimeP(p as u64));
        }
        Self::new(if p == 2 { 4 } else { p })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.phi
    }

    pub fn zero(&self) -> Cyc {
        Cyc { n: self.n, num: vec![BigInt::zero(); self.phi], den: BigInt::one() }
    }

    pub fn one(&self) -> Cyc {
        self.from_int(1)
    }

    pub fn from_int(&self, v: i64) -> Cyc {
        let mut c = self.zero();
        c.num[0] = BigInt::from(v);
        c
    }

    pub fn from_bigint(&self, v: BigInt) -> Cyc {
        let mut c = self.zero();
        c.num[0] = v;
        c
    }

    pub fn from_ratio(&self, num: BigInt, den: BigInt) -> Result<Cyc> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let mut c = self.zero();
        c.num[0] = num;
        c.den = den;
        Ok(self.normalize(c))
    }

    /// Builds an element from power-basis coordinates and a denominator.
    pub fn from_parts(&self, num: Vec<BigInt>, den: BigInt) -> Result<Cyc> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let mut full = vec![BigInt::zero(); self.n as usize];
        for (i, v) in num.into_iter().enumerate() {
            full[i % self.n as usize] += v;
        }
        Ok(self.normalize(self.reduce(full, den)))
    }

    /// `zeta^k`.
    pub fn zeta_pow(&self, k: i64) -> Cyc {
        let k = k.rem_euclid(self.n as i64) as usize;
        let mut full = vec![BigInt::zero(); self.n as usize];
        full[k] = BigInt::one();
        self.reduce(full, BigInt::one())
    }

    /// `sum_k counts[k] zeta^k` for a histogram indexed modulo `n`.
    pub fn from_histogram(&self, counts: &[i64]) -> Cyc {
        let mut full = vec![BigInt::zero(); self.n as usize];
        for (k, &c) in counts.iter().enumerate() {
            full[k % self.n as usize] += c;
        }
        self.normalize(self.reduce(full, BigInt::one()))
    }

    // Reduces a vector of length n (coefficients of x^0..x^{n-1}) modulo
    // Phi_n. With m = n/p, x^{(p-1)m} = -(1 + x^m + ... + x^{(p-2)m}).
    fn reduce(&self, mut full: Vec<BigInt>, den: BigInt) -> Cyc {
        let n = self.n as usize;
        let m = n / self.p as usize;
        for r in 0..m {
            let idx = self.phi + r;
            if idx >= n {
                break;
            }
            let c = core::mem::take(&mut full[idx]);
            if c.is_zero() {
                continue;
            }
            for j in 0..(self.p as usize - 1) {
                full[j * m + r] -= &c;
            }
        }
        full.truncate(self.phi);
        Cyc { n: self.n, num: full, den }
    }

    fn normalize(&self, mut c: Cyc) -> Cyc {
        if c.den.is_negative() {
            c.den = -c.den;
            for v in c.num.iter_mut() {
                *v = -core::mem::take(v);
            }
        }
        if c.num.iter().all(|v| v.is_zero()) {
            c.den = BigInt::one();
            return c;
        }
        if c.den.is_one() {
            return c;
        }
        let mut g = c.den.clone();
        for v in &c.num {
            if g.is_one() {
                break;
            }
            g = g.gcd(v);
        }
        if !g.is_one() {
            c.den /= &g;
            for v in c.num.iter_mut() {
                *v /= &g;
            }
        }
        c
    }

    fn check(&self, a: &Cyc) -> Result<()> {
        if a.n != self.n {
            return Err(Error::MixedModuli(a.n, self.n));
        }
        Ok(())
    }

    pub fn add(&self, a: &Cyc, b: &Cyc) -> Cyc {
        debug_assert!(a.n == self.n && b.n == self.n);
        if a.den == b.den {
            let num = a.num.iter().zip(&b.num).map(|(x, y)| x + y).collect();
            return self.normalize(Cyc { n: self.n, num, den: a.den.clone() });
        }
        let num = a.num.iter().zip(&b.num).map(|(x, y)| x * &b.den + y * &a.den).collect();
        self.normalize(Cyc { n: self.n, num, den: &a.den * &b.den })
    }

    pub fn neg(&self, a: &Cyc) -> Cyc {
        Cyc { n: a.n, num: a.num.iter().map(|x| -x).collect(), den: a.den.clone() }
    }

    pub fn sub(&self, a: &Cyc, b: &Cyc) -> Cyc {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &Cyc, b: &Cyc) -> Cyc {
        debug_assert!(a.n == self.n && b.n == self.n);
        if a.is_zero() || b.is_zero() {
            return self.zero();
        }
        let n = self.n as usize;
        let mut full = vec![BigInt::zero(); n];
        for (i, x) in a.num.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.num.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                full[(i + j) % n] += x * y;
            }
        }
        self.normalize(self.reduce(full, &a.den * &b.den))
    }

    /// Checked arithmetic that rejects values from a different field.
    pub fn try_mul(&self, a: &Cyc, b: &Cyc) -> Result<Cyc> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.mul(a, b))
    }

    pub fn try_add(&self, a: &Cyc, b: &Cyc) -> Result<Cyc> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.add(a, b))
    }

    pub fn mul_int(&self, a: &Cyc, k: i64) -> Cyc {
        let k = BigInt::from(k);
        self.normalize(Cyc { n: a.n, num: a.num.iter().map(|x| x * &k).collect(), den: a.den.clone() })
    }

    /// Multiplication by `zeta^k`, cheaper than a general product.
    pub fn mul_zeta(&self, a: &Cyc, k: i64) -> Cyc {
        let n = self.n as usize;
        let k = k.rem_euclid(n as i64) as usize;
        if k == 0 {
            return a.clone();
        }
        let mut full = vec![BigInt::zero(); n];
        for (i, x) in a.num.iter().enumerate() {
            full[(i + k) % n] = x.clone();
        }
        self.reduce(full, a.den.clone())
    }

    /// Galois conjugation `zeta -> zeta^j`, `j` prime to `n`.
    pub fn conjugate(&self, a: &Cyc, j: i64) -> Cyc {
        let n = self.n as usize;
        let j = j.rem_euclid(n as i64) as usize;
        debug_assert!(crate::ff_tower::gcd(j as u64, n as u64) == 1);
        let mut full = vec![BigInt::zero(); n];
        for (i, x) in a.num.iter().enumerate() {
            full[(i * j) % n] += x;
        }
        self.reduce(full, a.den.clone())
    }

    /// Complex conjugation.
    pub fn conj(&self, a: &Cyc) -> Cyc {
        self.conjugate(a, -1)
    }

    /// The units `j` of `Z/n`.
    fn units(&self) -> impl Iterator<Item = i64> + '_ {
        (1..self.n as i64).filter(move |&j| j % self.p as i64 != 0)
    }

    /// `N(a) = prod_j sigma_j(a)`, a rational number returned as `(num, den)`.
    pub fn norm(&self, a: &Cyc) -> (BigInt, BigInt) {
        let mut acc = self.one();
        for j in self.units() {
            acc = self.mul(&acc, &self.conjugate(a, j));
        }
        debug_assert!(acc.num[1..].iter().all(|x| x.is_zero()));
        (acc.num[0].clone(), acc.den.clone())
    }

    pub fn inv(&self, a: &Cyc) -> Result<Cyc> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let mut others = self.one();
        for j in self.units().filter(|&j| j != 1) {
            others = self.mul(&others, &self.conjugate(a, j));
        }
        let total = self.mul(a, &others);
        let (nn, nd) = (total.num[0].clone(), total.den.clone());
        let scaled = Cyc {
            n: self.n,
            num: others.num.iter().map(|x| x * &nd).collect(),
            den: &others.den * &nn,
        };
        Ok(self.normalize(scaled))
    }

    pub fn div(&self, a: &Cyc, b: &Cyc) -> Result<Cyc> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    /// Integer power, negative exponents allowed for nonzero `a`.
    pub fn pow(&self, a: &Cyc, e: i64) -> Result<Cyc> {
        let mut base = if e < 0 { self.inv(a)? } else { a.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        Ok(acc)
    }

    /// Image under `zeta -> exp(2 pi i / n)`.
    pub fn to_complex(&self, a: &Cyc) -> Complex64 {
        let den = big_to_f64(&a.den);
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, x) in a.num.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            let angle = 2.0 * core::f64::consts::PI * k as f64 / self.n as f64;
            let (s, c) = (libm_sin(angle), libm_cos(angle));
            acc += Complex64::new(c, s) * (big_to_f64(x) / den);
        }
        acc
    }

    /// `|a|` under the standard complex embedding. For rational `|a|^2`
    /// the result comes from an exact square and is exact up to one
    /// rounding.
    pub fn complex_abs(&self, a: &Cyc) -> f64 {
        let sq = self.mul(a, &self.conj(a));
        match sq.as_rational() {
            Some((n, d)) => libm_sqrt(big_to_f64(&n) / big_to_f64(&d)),
            None => self.to_complex(a).norm(),
        }
    }

    /// Reduction modulo a prime `l = 1 (mod n)`, sending `zeta` to the least
    /// primitive `n`-th root of unity mod `l`. `None` if `l` divides the
    /// denominator.
    pub fn reduce_mod(&self, a: &Cyc, l: u64) -> Option<u64> {
        if l % self.n as u64 != 1 || !is_prime(l) {
            return None;
        }
        let root = (2..l).find_map(|g| {
            let w = crate::ff_tower::modpow(g, (l - 1) / self.n as u64, l);
            let primitive = crate::ff_tower::modpow(w, (self.n / self.p) as u64, l) != 1;
            primitive.then_some(w)
        })?;
        let lb = BigInt::from(l);
        let den = a.den.mod_floor(&lb).to_u64()?;
        if den == 0 {
            return None;
        }
        let mut acc = 0u128;
        let mut w = 1u128;
        for x in &a.num {
            let c = x.mod_floor(&lb).to_u64().unwrap_or(0) as u128;
            acc = (acc + c * w) % l as u128;
            w = w * root as u128 % l as u128;
        }
        let inv = crate::ff_tower::modpow(den, l - 2, l) as u128;
        Some((acc * inv % l as u128) as u64)
    }
}

fn libm_sin(x: f64) -> f64 {
    num_traits::float::Float::sin(x)
}

fn libm_cos(x: f64) -> f64 {
    num_traits::float::Float::cos(x)
}

fn libm_sqrt(x: f64) -> f64 {
    num_traits::float::Float::sqrt(x)
}

pub(crate) fn big_to_f64(x: &BigInt) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

impl Cyc {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(|x| x.is_zero())
    }

    /// Numerators in the power basis.
    pub fn numerators(&self) -> &[BigInt] {
        &self.num
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    /// `Some((num, den))` if the value is rational.
    pub fn as_rational(&self) -> Option<(BigInt, BigInt)> {
        if self.num[1..].iter().all(|x| x.is_zero()) {
            Some((self.num[0].clone(), self.den.clone()))
        } else {
            None
        }
    }

    /// `Some(v)` if the value is an integer fitting in `i64`.
    pub fn as_i64(&self) -> Option<i64> {
        let (n, d) = self.as_rational()?;
        if d.is_one() {
            n.to_i64()
        } else {
            None
        }
    }

    /// Coordinates as strings, `"a/b"` for non-integers.
    pub fn coordinate_strings(&self) -> Vec<String> {
        self.num
            .iter()
            .map(|x| {
                if self.den.is_one() {
                    format!("{x}")
                } else {
                    let g = x.gcd(&self.den);
                    let (a, b) = if g.is_zero() { (x.clone(), self.den.clone()) } else { (x / &g, &self.den / &g) };
                    if b.is_one() {
                        format!("{a}")
                    } else {
                        format!("{a}/{b}")
                    }
                }
            })
            .collect()
    }
}

impl fmt::Debug for Cyc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Cyc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some((n, d)) = self.as_rational() {
            return if d.is_one() { write!(f, "{n}") } else { write!(f, "{n}/{d}") };
        }
        let mut first = true;
        for (k, x) in self.num.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{x}")?,
                1 => write!(f, "{x}*z")?,
                _ => write!(f, "{x}*z^{k}")?,
            }
        }
        if !self.den.is_one() {
            write!(f, " (/{})", self.den)?;
        }
        write!(f, " [n={}]", self.n)
    }
}

/// The additive character `psi_c(x) = exp(2 pi i Tr_{k/F_p}(c x) / p)` of
/// `k`, extended to `k_d` through `Tr_{k_d/k}`. Values are returned as
/// exponents of `zeta_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Psi {
    /// The twist `c`, a nonzero element of `k` in the model at hand.
    pub scale: Fe,
    step: u32,
    n: u32,
}

impl Psi {
    pub fn new(field: &CycloField, model: &ClosureModel, scale: Fe) -> Result<Self> {
        if scale.is_zero() || !model.in_subfield(scale, 1) {
            return Err(Error::DegreeMismatch("psi twist must be a unit of k".into()));
        }
        if field.p != model.p() {
            return Err(Error::MixedModuli(field.n, model.p()));
        }
        Ok(Psi { scale, step: field.n / field.p, n: field.n })
    }

    pub fn standard(field: &CycloField, model: &ClosureModel) -> Result<Self> {
        Self::new(field, model, Fe::ONE)
    }

    /// Exponent `e` with `psi_d(x) = zeta_n^e`, for `x` in `k_d`.
    pub fn exponent(&self, model: &ClosureModel, x: Fe, d: u32) -> Result<u32> {
        let t = model.trace_to_prime(model.mul(self.scale, x), d)?;
        Ok(t * self.step % self.n)
    }

    /// `psi_d(x)` as a cyclotomic number.
    pub fn eval(&self, field: &CycloField, model: &ClosureModel, x: Fe, d: u32) -> Result<Cyc> {
        Ok(field.zeta_pow(self.exponent(model, x, d)? as i64))
    }

    /// The same character moved to another model (the scale lies in `k`).
    pub fn rebase(&self, from: &ClosureModel, to: &ClosureModel) -> Result<Self> {
        let scale = to.embed(&from.to_canonical(self.scale, 1)?)?;
        Ok(Psi { scale, ..*self })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomic_relation() {
        for n in [3u32, 4, 5, 7, 9] {
            let k = CycloField::new(n).unwrap();
            let mut acc = k.zero();
            for i in 0..n {
                acc = k.add(&acc, &k.zeta_pow(i as i64));
            }
            assert!(acc.is_zero(), "n = {n}");
        }
    }

    #[test]
    fn p3_product() {
        let k = CycloField::new(3).unwrap();
        let a = k.add(&k.one(), &k.zeta_pow(1));
        let b = k.add(&k.one(), &k.zeta_pow(2));
        assert_eq!(k.mul(&a, &b), k.one());
    }

    #[test]
    fn inverse_and_abs() {
        let k = CycloField::new(5).unwrap();
        let a = k.add(&k.from_int(3), &k.mul_int(&k.zeta_pow(2), -2));
        let ai = k.inv(&a).unwrap();
        assert_eq!(k.mul(&a, &ai), k.one());
        let two = CycloField::for_char(2).unwrap();
        let x = two.sub(&two.one(), &two.zeta_pow(2));
        assert!((two.complex_abs(&x) - 2.0).abs() < 1e-15);
        assert!((k.complex_abs(&k.zeta_pow(3)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mixed_moduli_rejected() {
        let a = CycloField::new(3).unwrap();
        let b = CycloField::new(5).unwrap();
        assert!(matches!(a.try_mul(&a.one(), &b.one()), Err(Error::MixedModuli(5, 3))));
    }
}
