//! Polynomials over `Q(zeta_n)` and numerical roots of their complex images.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::cyclotomic::{Cyc, CycloField};

/// Coefficients, constant term first, without trailing zeros.
pub type CPoly = Vec<Cyc>;

pub fn trim(p: &mut CPoly) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

pub fn degree(p: &CPoly) -> Option<usize> {
    if p.is_empty() {
        None
    } else {
        Some(p.len() - 1)
    }
}

pub fn sub(k: &CycloField, a: &CPoly, b: &CPoly) -> CPoly {
    let n = a.len().max(b.len());
    let mut out: CPoly = (0..n)
        .map(|i| match (a.get(i), b.get(i)) {
            (Some(x), Some(y)) => k.sub(x, y),
            (Some(x), None) => x.clone(),
            (None, Some(y)) => k.neg(y),
            (None, None) => k.zero(),
        })
        .collect();
    trim(&mut out);
    out
}

pub fn mul(k: &CycloField, a: &CPoly, b: &CPoly) -> CPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![k.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = k.add(&out[i + j], &k.mul(x, y));
        }
    }
    trim(&mut out);
    out
}

pub fn derivative(k: &CycloField, a: &CPoly) -> CPoly {
    let mut out: CPoly = a.iter().enumerate().skip(1).map(|(i, c)| k.mul_int(c, i as i64)).collect();
    trim(&mut out);
    out
}

pub fn monic(k: &CycloField, a: &CPoly) -> CPoly {
    match a.last() {
        None => Vec::new(),
        Some(lc) => {
            let inv = k.inv(lc).expect("leading coefficient is nonzero");
            a.iter().map(|c| k.mul(c, &inv)).collect()
        }
    }
}

/// Quotient and remainder.
pub fn divrem(k: &CycloField, a: &CPoly, b: &CPoly) -> (CPoly, CPoly) {
    assert!(!b.is_empty(), "division by the zero polynomial");
    let mut r = a.clone();
    trim(&mut r);
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let inv = k.inv(b.last().unwrap()).expect("nonzero leading coefficient");
    let mut q = vec![k.zero(); r.len() - b.len() + 1];
    while r.len() >= b.len() && !r.is_empty() {
        let shift = r.len() - b.len();
        let c = k.mul(r.last().unwrap(), &inv);
        for (i, bi) in b.iter().enumerate() {
            r[shift + i] = k.sub(&r[shift + i], &k.mul(&c, bi));
        }
        q[shift] = c;
        trim(&mut r);
    }
    trim(&mut q);
    (q, r)
}

pub fn gcd(k: &CycloField, a: &CPoly, b: &CPoly) -> CPoly {
    let (mut x, mut y) = (a.clone(), b.clone());
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let r = divrem(k, &x, &y).1;
        x = y;
        y = r;
    }
    monic(k, &x)
}

/// Squarefree decomposition `a = c * prod_i f_i^i` (Yun). Entry `i - 1` of
/// the result is the monic squarefree `f_i`; trailing constant factors are
/// dropped.
pub fn squarefree_decomposition(k: &CycloField, a: &CPoly) -> Vec<CPoly> {
    let mut out = Vec::new();
    if degree(a).unwrap_or(0) == 0 {
        return out;
    }
    let da = derivative(k, a);
    let g = gcd(k, a, &da);
    let mut b = divrem(k, a, &g).0;
    let mut c = divrem(k, &da, &g).0;
    let mut d = sub(k, &c, &derivative(k, &b));
    while degree(&b).unwrap_or(0) > 0 {
        let f = gcd(k, &b, &d);
        b = divrem(k, &b, &f).0;
        c = divrem(k, &d, &f).0;
        d = sub(k, &c, &derivative(k, &b));
        out.push(monic(k, &f));
    }
    while out.last().is_some_and(|f| f.len() <= 1) {
        out.pop();
    }
    out
}

pub fn to_complex(k: &CycloField, a: &CPoly) -> Vec<Complex64> {
    a.iter().map(|c| k.to_complex(c)).collect()
}

fn horner(p: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut v = Complex64::new(0.0, 0.0);
    let mut d = Complex64::new(0.0, 0.0);
    for c in p.iter().rev() {
        d = d * z + v;
        v = v * z + c;
    }
    (v, d)
}

/// Roots of a complex polynomial by simultaneous Aberth iteration followed
/// by Newton polishing. `scale` should approximate the root modulus; the
/// polynomial is rescaled so that the roots lie near the unit circle.
pub fn complex_roots(p: &[Complex64], scale: f64) -> Vec<Complex64> {
    let n = p.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    let s = if scale > 0.0 && scale.is_finite() { scale } else { 1.0 };
    // q(y) = p(s y) / (lc s^n)
    let lc = p[n];
    let q: Vec<Complex64> = p.iter().enumerate().map(|(i, c)| c * s.powi(i as i32) / (lc * s.powi(n as i32))).collect();
    let mut z: Vec<Complex64> = (0..n)
        .map(|i| {
            let angle = 2.0 * core::f64::consts::PI * (i as f64 + 0.25) / n as f64 + 0.4;
            Complex64::from_polar(1.0 + 0.01 * i as f64, angle)
        })
        .collect();
    for _ in 0..500 {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let (v, d) = horner(&q, z[i]);
            if v.norm() == 0.0 {
                continue;
            }
            let ratio = v / d;
            let mut sum = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    sum += Complex64::new(1.0, 0.0) / (z[i] - z[j]);
                }
            }
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * sum);
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm());
            }
        }
        if max_step < 1e-15 {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..5 {
            let (v, d) = horner(&q, *zi);
            if d.norm() == 0.0 {
                break;
            }
            let step = v / d;
            if !step.is_finite() {
                break;
            }
            *zi -= step;
        }
    }
    z.into_iter().map(|y| y * s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(k: &CycloField, v: &[i64]) -> CPoly {
        v.iter().map(|&x| k.from_int(x)).collect()
    }

    #[test]
    fn yun_on_repeated_roots() {
        let k = CycloField::new(3).unwrap();
        // (x - 1)^2 (x + 2)^3
        let lin = ints(&k, &[-1, 1]);
        let a = mul(&k, &lin, &lin);
        let b = ints(&k, &[2, 1]);
        let b3 = mul(&k, &b, &mul(&k, &b, &b));
        let f = mul(&k, &a, &b3);
        let sq = squarefree_decomposition(&k, &f);
        assert_eq!(sq.len(), 3);
        assert_eq!(sq[0], ints(&k, &[1]));
        assert_eq!(sq[1], ints(&k, &[-1, 1]));
        assert_eq!(sq[2], ints(&k, &[2, 1]));
    }

    #[test]
    fn roots_of_x2_plus_2() {
        let p = vec![Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        let r = complex_roots(&p, 2f64.sqrt());
        for z in r {
            assert!((z.norm() - 2f64.sqrt()).abs() < 1e-12);
            assert!(z.re.abs() < 1e-12);
        }
    }
}
