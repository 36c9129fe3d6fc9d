//! Row-major dense kernels shared by the real and complex code paths.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + Send
    + Sync
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    fn modulus(self) -> f64;
    fn is_finite(self) -> bool;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// `c = a * b` with `a` n×m and `b` m×p.
pub fn matmul<T: Scalar>(a: &[T], b: &[T], n: usize, m: usize, p: usize) -> Vec<T> {
    let mut c = vec![T::zero(); n * p];
    for i in 0..n {
        let out = &mut c[i * p..(i + 1) * p];
        for k in 0..m {
            let aik = a[i * m + k];
            if aik == T::zero() {
                continue;
            }
            let brow = &b[k * p..(k + 1) * p];
            for (o, &bkj) in out.iter_mut().zip(brow) {
                *o += aik * bkj;
            }
        }
    }
    c
}

pub fn mat_vec<T: Scalar>(a: &[T], v: &[T], n: usize, m: usize, out: &mut [T]) {
    for (i, o) in out.iter_mut().enumerate().take(n) {
        let row = &a[i * m..(i + 1) * m];
        let mut acc = T::zero();
        for (&x, &y) in row.iter().zip(v) {
            acc += x * y;
        }
        *o = acc;
    }
}

pub fn norm_one<T: Scalar>(a: &[T], n: usize, m: usize) -> f64 {
    let mut cols = vec![0.0; m];
    for i in 0..n {
        for (c, x) in cols.iter_mut().zip(&a[i * m..(i + 1) * m]) {
            *c += x.modulus();
        }
    }
    cols.into_iter().fold(0.0, f64::max)
}

/// LU factorization with partial pivoting, stored in place.
pub struct Lu<T> {
    n: usize,
    lu: Vec<T>,
    piv: Vec<usize>,
}

impl<T: Scalar> Lu<T> {
    pub fn factor(mut a: Vec<T>, n: usize) -> Result<Self> {
        let mut piv: Vec<usize> = (0..n).collect();
        let scale = a.iter().fold(0.0f64, |m, x| m.max(x.modulus()));
        for k in 0..n {
            let (mut p, mut best) = (k, a[k * n + k].modulus());
            for i in k + 1..n {
                let v = a[i * n + k].modulus();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || best <= scale * 1e-300 {
                return Err(Error::Singular);
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                piv.swap(k, p);
            }
            let pivot = a[k * n + k];
            let (upper, lower) = a.split_at_mut((k + 1) * n);
            let krow = &upper[k * n..(k + 1) * n];
            for i in 0..n - k - 1 {
                let row = &mut lower[i * n..(i + 1) * n];
                let l = row[k] / pivot;
                row[k] = l;
                if l == T::zero() {
                    continue;
                }
                for j in k + 1..n {
                    row[j] -= l * krow[j];
                }
            }
        }
        Ok(Lu { n, lu: a, piv })
    }

    /// Solves `A X = B` for a row-major n×p right-hand side.
    pub fn solve(&self, b: &[T], p: usize) -> Vec<T> {
        let n = self.n;
        let mut x = vec![T::zero(); n * p];
        for (i, &pi) in self.piv.iter().enumerate() {
            x[i * p..(i + 1) * p].copy_from_slice(&b[pi * p..(pi + 1) * p]);
        }
        for i in 0..n {
            let (done, rest) = x.split_at_mut(i * p);
            let xi = &mut rest[..p];
            for k in 0..i {
                let l = self.lu[i * n + k];
                if l == T::zero() {
                    continue;
                }
                for (d, &s) in xi.iter_mut().zip(&done[k * p..(k + 1) * p]) {
                    *d -= l * s;
                }
            }
        }
        for i in (0..n).rev() {
            let (head, tail) = x.split_at_mut((i + 1) * p);
            let xi = &mut head[i * p..];
            for k in i + 1..n {
                let u = self.lu[i * n + k];
                if u == T::zero() {
                    continue;
                }
                let xk = &tail[(k - i - 1) * p..(k - i) * p];
                for (d, &s) in xi.iter_mut().zip(xk) {
                    *d -= u * s;
                }
            }
            let d = self.lu[i * n + i];
            for v in xi.iter_mut() {
                *v = *v / d;
            }
        }
        x
    }

    pub fn inverse(&self) -> Vec<T> {
        let n = self.n;
        let mut eye = vec![T::zero(); n * n];
        for i in 0..n {
            eye[i * n + i] = T::one();
        }
        self.solve(&eye, n)
    }
}
