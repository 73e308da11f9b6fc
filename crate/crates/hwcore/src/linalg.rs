//! Exact linear algebra: dense matrices over `Q(zeta_n)`, monomial matrices
//! with root-of-unity entries, matrices over a finite field model and
//! incremental `F_p` spans.

use alloc::vec;
use alloc::vec::Vec;

use crate::cyclotomic::{Cyc, CycloField};
use crate::error::{Error, Result};
use crate::ff_tower::{ClosureModel, Fe};

/// Dense row-major matrix over `Q(zeta_n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Cyc>,
}

impl CMat {
    pub fn zeros(k: &CycloField, rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![k.zero(); rows * cols] }
    }

    pub fn identity(k: &CycloField, n: usize) -> Self {
        let mut m = Self::zeros(k, n, n);
        for i in 0..n {
            m.data[i * n + i] = k.one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Cyc>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let data: Vec<Cyc> = rows.into_iter().flatten().collect();
        assert_eq!(data.len(), r * c, "ragged rows");
        CMat { rows: r, cols: c, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Cyc {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Cyc) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul(&self, k: &CycloField, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows);
        let mut out = CMat::zeros(k, self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(l, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * other.cols + j;
                    out.data[idx] = k.add(&out.data[idx], &k.mul(a, b));
                }
            }
        }
        out
    }

    pub fn scale(&self, k: &CycloField, s: &Cyc) -> CMat {
        CMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| k.mul(x, s)).collect() }
    }

    pub fn add(&self, k: &CycloField, other: &CMat) -> CMat {
        assert!(self.rows == other.rows && self.cols == other.cols);
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| k.add(a, b)).collect(),
        }
    }

    pub fn trace(&self, k: &CycloField) -> Cyc {
        let mut acc = k.zero();
        for i in 0..self.rows.min(self.cols) {
            acc = k.add(&acc, self.get(i, i));
        }
        acc
    }

    pub fn is_identity(&self) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for i in 0..self.rows {
            for j in 0..self.cols {
                let x = self.get(i, j);
                let ok = if i == j { x.as_i64() == Some(1) } else { x.is_zero() };
                if !ok {
                    return false;
                }
            }
        }
        true
    }

    pub fn pow(&self, k: &CycloField, mut e: u64) -> CMat {
        let mut acc = CMat::identity(k, self.rows);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(k, &base);
            }
            base = base.mul(k, &base);
            e >>= 1;
        }
        acc
    }

    /// Rank by exact elimination.
    pub fn rank(&self, k: &CycloField) -> usize {
        let rows: Vec<Vec<Cyc>> = (0..self.rows).map(|i| self.data[i * self.cols..(i + 1) * self.cols].to_vec()).collect();
        echelon(k, rows, self.cols).1.len()
    }
}

/// Reduced row echelon form. Returns the nonzero rows and the pivot
/// columns.
fn echelon(k: &CycloField, mut rows: Vec<Vec<Cyc>>, ncols: usize) -> (Vec<Vec<Cyc>>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(pr) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, pr);
        let inv = k.inv(&rows[r][c]).expect("pivot is nonzero");
        rows[r] = rows[r].iter().map(|x| k.mul(x, &inv)).collect();
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row).skip(c) {
                if !p.is_zero() {
                    *x = k.sub(x, &k.mul(&f, p));
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    (rows, pivots)
}

/// Basis of `{x : A x = 0}` for the system given by `rows` (each of length
/// `ncols`).
pub fn nullspace(k: &CycloField, rows: Vec<Vec<Cyc>>, ncols: usize) -> Vec<Vec<Cyc>> {
    let (red, pivots) = echelon(k, rows, ncols);
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut x = vec![k.zero(); ncols];
        x[free] = k.one();
        for (row, &pc) in red.iter().zip(&pivots) {
            x[pc] = k.neg(&row[free]);
        }
        basis.push(x);
    }
    basis
}

/// Some solution of `A x = b`, or `None` if the system is inconsistent.
/// Free variables are set to zero.
pub fn solve(k: &CycloField, a: &[Vec<Cyc>], b: &[Cyc]) -> Option<Vec<Cyc>> {
    let ncols = a.first().map_or(0, |r| r.len());
    let rows: Vec<Vec<Cyc>> = a
        .iter()
        .zip(b)
        .map(|(r, x)| {
            let mut r = r.clone();
            r.push(x.clone());
            r
        })
        .collect();
    let (red, pivots) = echelon(k, rows, ncols + 1);
    if pivots.last() == Some(&ncols) {
        return None;
    }
    let mut x = vec![k.zero(); ncols];
    for (row, &pc) in red.iter().zip(&pivots) {
        x[pc] = row[ncols].clone();
    }
    Some(x)
}

/// A monomial matrix whose nonzero entries are powers of `zeta_n`: column
/// `j` has the single entry `zeta^exp[j]` in row `target[j]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial {
    pub n: u32,
    pub target: Vec<usize>,
    pub exp: Vec<u32>,
}

impl Monomial {
    pub fn identity(n: u32, dim: usize) -> Self {
        Monomial { n, target: (0..dim).collect(), exp: vec![0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.target.len()
    }

    /// `self * other`.
    pub fn compose(&self, other: &Monomial) -> Monomial {
        let target = other.target.iter().map(|&t| self.target[t]).collect();
        let exp = other.exp.iter().zip(&other.target).map(|(&e, &t)| (e + self.exp[t]) % self.n).collect();
        Monomial { n: self.n, target, exp }
    }

    pub fn to_dense(&self, k: &CycloField) -> CMat {
        let d = self.dim();
        let mut m = CMat::zeros(k, d, d);
        for j in 0..d {
            m.set(self.target[j], j, k.zeta_pow(self.exp[j] as i64));
        }
        m
    }

    /// `self * m` for dense `m`.
    pub fn mul_dense(&self, k: &CycloField, m: &CMat) -> CMat {
        let mut out = CMat::zeros(k, m.rows(), m.cols());
        for j in 0..self.dim() {
            let r = self.target[j];
            for c in 0..m.cols() {
                out.set(r, c, k.mul_zeta(m.get(j, c), self.exp[j] as i64));
            }
        }
        out
    }

    /// `m * self` for dense `m`.
    pub fn dense_mul(&self, k: &CycloField, m: &CMat) -> CMat {
        let mut out = CMat::zeros(k, m.rows(), m.cols());
        for j in 0..self.dim() {
            let t = self.target[j];
            for r in 0..m.rows() {
                out.set(r, j, k.mul_zeta(m.get(r, t), self.exp[j] as i64));
            }
        }
        out
    }

    /// `tr(self * m)`.
    pub fn trace_with(&self, k: &CycloField, m: &CMat) -> Cyc {
        let mut hist = vec![0i64; self.n as usize];
        let mut acc = k.zero();
        let mut exact_units = true;
        for j in 0..self.dim() {
            let x = m.get(j, self.target[j]);
            if x.is_zero() {
                continue;
            }
            match x.as_i64() {
                Some(v) if exact_units => hist[self.exp[j] as usize] += v,
                _ => {
                    exact_units = false;
                    acc = k.add(&acc, &k.mul_zeta(x, self.exp[j] as i64));
                }
            }
        }
        k.add(&acc, &k.from_histogram(&hist))
    }
}

/// Square matrices over a finite field model.
pub type FfMat = Vec<Vec<Fe>>;

pub fn ff_identity(m: usize) -> FfMat {
    (0..m).map(|i| (0..m).map(|j| if i == j { Fe::ONE } else { Fe::ZERO }).collect()).collect()
}

pub fn ff_mul(f: &ClosureModel, a: &FfMat, b: &FfMat) -> FfMat {
    let n = a.len();
    let p = b.first().map_or(0, |r| r.len());
    let mut out = vec![vec![Fe::ZERO; p]; n];
    for i in 0..n {
        for (l, bl) in b.iter().enumerate() {
            let x = a[i][l];
            if x.is_zero() {
                continue;
            }
            for j in 0..p {
                out[i][j] = f.add(out[i][j], f.mul(x, bl[j]));
            }
        }
    }
    out
}

pub fn ff_apply(f: &ClosureModel, a: &FfMat, v: &[Fe]) -> Vec<Fe> {
    a.iter()
        .map(|row| row.iter().zip(v).fold(Fe::ZERO, |acc, (&x, &y)| f.add(acc, f.mul(x, y))))
        .collect()
}

pub fn ff_transpose(a: &FfMat) -> FfMat {
    let n = a.len();
    let m = a.first().map_or(0, |r| r.len());
    (0..m).map(|j| (0..n).map(|i| a[i][j]).collect()).collect()
}

/// Entrywise `x -> x^{q^i}`.
pub fn ff_frobenius(f: &ClosureModel, a: &FfMat, i: i64) -> FfMat {
    a.iter().map(|r| r.iter().map(|&x| f.frobenius(x, i)).collect()).collect()
}

/// Row echelon form in place; returns the rank and the determinant of the
/// leading square part (meaningful for square input).
fn ff_echelon(f: &ClosureModel, a: &mut FfMat) -> (usize, Fe) {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut det = Fe::ONE;
    let mut r = 0;
    for c in 0..cols {
        let Some(pr) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            det = Fe::ZERO;
            continue;
        };
        if pr != r {
            a.swap(pr, r);
            det = f.neg(det);
        }
        let piv = a[r][c];
        det = f.mul(det, piv);
        let inv = f.inv(piv).expect("nonzero pivot");
        for x in a[r].iter_mut() {
            *x = f.mul(*x, inv);
        }
        let prow = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let fac = row[c];
            for (x, &pv) in row.iter_mut().zip(&prow) {
                *x = f.sub(*x, f.mul(fac, pv));
            }
        }
        r += 1;
        if r == rows {
            break;
        }
    }
    if r < rows.min(cols) || rows != cols {
        det = if rows == cols { Fe::ZERO } else { det };
    }
    (r, det)
}

pub fn ff_rank(f: &ClosureModel, a: &FfMat) -> usize {
    ff_echelon(f, &mut a.clone()).0
}

pub fn ff_det(f: &ClosureModel, a: &FfMat) -> Fe {
    if a.is_empty() {
        return Fe::ONE;
    }
    let (r, det) = ff_echelon(f, &mut a.clone());
    if r < a.len() {
        Fe::ZERO
    } else {
        det
    }
}

pub fn ff_inverse(f: &ClosureModel, a: &FfMat) -> Result<FfMat> {
    let n = a.len();
    let mut aug: FfMat = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Fe::ONE } else { Fe::ZERO }));
            r
        })
        .collect();
    let (_, _) = ff_echelon(f, &mut aug);
    for (i, row) in aug.iter().enumerate() {
        if row[i] != Fe::ONE || row[..n].iter().enumerate().any(|(j, x)| j != i && !x.is_zero()) {
            return Err(Error::DivisionByZero);
        }
    }
    Ok(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// `dim ker(g - 1)`.
pub fn ff_fixed_dim(f: &ClosureModel, g: &FfMat) -> usize {
    let n = g.len();
    let mut m = g.clone();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = f.sub(row[i], Fe::ONE);
    }
    n - ff_rank(f, &m)
}

/// An `F_p`-subspace of `F_p^n` kept in reduced echelon form.
#[derive(Clone, Debug)]
pub struct FpSpan {
    p: u32,
    rows: Vec<(usize, Vec<u32>)>,
}

impl FpSpan {
    pub fn new(p: u32) -> Self {
        FpSpan { p, rows: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` against the span; the result is zero iff `v` is inside.
    pub fn reduce(&self, v: &[u32]) -> Vec<u32> {
        let p = self.p;
        let mut v = v.to_vec();
        for (piv, row) in &self.rows {
            let c = v[*piv];
            if c != 0 {
                for (x, &r) in v.iter_mut().zip(row) {
                    *x = (*x + (p - c) * r) % p;
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[u32]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }

    /// Adds `v`; returns `false` if it was already in the span.
    pub fn insert(&mut self, v: &[u32]) -> bool {
        let p = self.p;
        let mut r = self.reduce(v);
        let Some(piv) = r.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = crate::ff_tower::fp::inv_mod(r[piv], p);
        for x in r.iter_mut() {
            *x = *x * inv % p;
        }
        for (_, row) in self.rows.iter_mut() {
            let c = row[piv];
            if c != 0 {
                for (x, &y) in row.iter_mut().zip(&r) {
                    *x = (*x + (p - c) * y) % p;
                }
            }
        }
        self.rows.push((piv, r));
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nullspace_of_rank_one() {
        let k = CycloField::new(3).unwrap();
        let z = k.zeta_pow(1);
        let rows = vec![vec![k.one(), k.neg(&z)], vec![k.mul(&z, &z), k.neg(&k.mul(&z, &k.mul(&z, &z)))]];
        let ns = nullspace(&k, rows, 2);
        assert_eq!(ns.len(), 1);
        assert_eq!(ns[0][0], z);
        assert_eq!(ns[0][1], k.one());
    }

    #[test]
    fn monomial_products_match_dense() {
        let k = CycloField::new(4).unwrap();
        let a = Monomial { n: 4, target: vec![1, 2, 0], exp: vec![1, 0, 3] };
        let b = Monomial { n: 4, target: vec![2, 0, 1], exp: vec![2, 2, 1] };
        let dense = a.to_dense(&k).mul(&k, &b.to_dense(&k));
        assert_eq!(a.compose(&b).to_dense(&k), dense);
        let m = b.to_dense(&k);
        assert_eq!(a.mul_dense(&k, &m), dense);
        assert_eq!(b.dense_mul(&k, &a.to_dense(&k)), dense);
        assert_eq!(a.trace_with(&k, &m), dense.trace(&k));
    }

    #[test]
    fn finite_field_inverse() {
        let f = ClosureModel::new(3, 3, 2, 1 << 20).unwrap();
        let x = f.from_coords(&[0, 1]);
        let g = vec![vec![x, Fe::ONE], vec![Fe::ONE, Fe::ZERO]];
        let gi = ff_inverse(&f, &g).unwrap();
        assert_eq!(ff_mul(&f, &g, &gi), ff_identity(2));
        assert_eq!(ff_det(&f, &g), f.neg(Fe::ONE));
        assert_eq!(ff_fixed_dim(&f, &ff_identity(2)), 2);
    }

    #[test]
    fn fp_span() {
        let mut s = FpSpan::new(3);
        assert!(s.insert(&[1, 2, 0]));
        assert!(s.insert(&[0, 1, 1]));
        assert!(!s.insert(&[1, 0, 1]));
        assert!(s.contains(&[2, 1, 0]));
        assert_eq!(s.dim(), 2);
    }
}
