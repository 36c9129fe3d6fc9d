//! Balancing, Householder-free Hessenberg reduction by stabilized elementary
//! similarity transforms, and Francis double-shift QR on the Hessenberg form.
//! Indices inside the kernels are 1-based over an (n+1)² buffer.

use num_complex::Complex64;

use super::scalar::Lu;
use super::Spectrum;
use crate::error::{Error, Result};

const MAX_ITS: usize = 60;

struct Buf {
    n: usize,
    a: Vec<f64>,
}

impl Buf {
    fn from_row_major(m: &[f64], n: usize) -> Self {
        let mut a = vec![0.0; (n + 1) * (n + 1)];
        for i in 0..n {
            a[(i + 1) * (n + 1) + 1..(i + 2) * (n + 1)].copy_from_slice(&m[i * n..(i + 1) * n]);
        }
        Buf { n, a }
    }

    #[inline(always)]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * (self.n + 1) + j]
    }

    #[inline(always)]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * (self.n + 1) + j] = v;
    }

    #[inline(always)]
    fn sub(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * (self.n + 1) + j] -= v;
    }
}

fn balance(b: &mut Buf) {
    const RADIX: f64 = 2.0;
    let sqrdx = RADIX * RADIX;
    let n = b.n;
    let mut done = false;
    while !done {
        done = true;
        for i in 1..=n {
            let (mut r, mut c) = (0.0, 0.0);
            for j in (1..=n).filter(|&j| j != i) {
                c += b.at(j, i).abs();
                r += b.at(i, j).abs();
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= sqrdx;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let ginv = 1.0 / f;
                for j in 1..=n {
                    let v = b.at(i, j) * ginv;
                    b.set(i, j, v);
                }
                for j in 1..=n {
                    let v = b.at(j, i) * f;
                    b.set(j, i, v);
                }
            }
        }
    }
}

fn hessenberg(b: &mut Buf) {
    let n = b.n;
    let w = n + 1;
    let mut mult = vec![0.0; n + 1];
    for m in 2..n {
        let mut x: f64 = 0.0;
        let mut piv = m;
        for j in m..=n {
            if b.at(j, m - 1).abs() > x.abs() {
                x = b.at(j, m - 1);
                piv = j;
            }
        }
        if piv != m {
            for j in m - 1..=n {
                b.a.swap(piv * w + j, m * w + j);
            }
            for j in 1..=n {
                b.a.swap(j * w + piv, j * w + m);
            }
        }
        if x == 0.0 {
            continue;
        }
        // row operations first, then the column-m update row by row
        for i in m + 1..=n {
            let mut y = b.at(i, m - 1);
            mult[i] = 0.0;
            if y != 0.0 {
                y /= x;
                mult[i] = y;
                b.set(i, m - 1, 0.0);
                let (head, tail) = b.a.split_at_mut(i * w);
                let mrow = &head[m * w + m..m * w + w];
                for (t, &s) in tail[m..w].iter_mut().zip(mrow) {
                    *t -= y * s;
                }
            }
        }
        for j in 1..=n {
            let row = &mut b.a[j * w..(j + 1) * w];
            let mut acc = 0.0;
            for i in m + 1..=n {
                acc += mult[i] * row[i];
            }
            row[m] += acc;
        }
    }
}

/// Eigenvalues of an upper Hessenberg matrix. On failure returns the number of
/// eigenvalues found so far, the rest left as NaN.
fn hqr(b: &mut Buf, wr: &mut [f64], wi: &mut [f64]) -> std::result::Result<(), usize> {
    let n = b.n;
    let mut anorm = 0.0;
    for i in 1..=n {
        for j in i.saturating_sub(1).max(1)..=n {
            anorm += b.at(i, j).abs();
        }
    }
    let mut nn = n;
    let mut t = 0.0;
    let mut found = 0;
    while nn >= 1 {
        let mut its = 0;
        loop {
            let mut l = nn;
            while l >= 2 {
                let mut s = b.at(l - 1, l - 1).abs() + b.at(l, l).abs();
                if s == 0.0 {
                    s = anorm;
                }
                if b.at(l, l - 1).abs() + s == s {
                    b.set(l, l - 1, 0.0);
                    break;
                }
                l -= 1;
            }
            let mut x = b.at(nn, nn);
            if l == nn {
                wr[nn] = x + t;
                wi[nn] = 0.0;
                nn -= 1;
                found += 1;
                break;
            }
            let mut y = b.at(nn - 1, nn - 1);
            let mut w = b.at(nn, nn - 1) * b.at(nn - 1, nn);
            if l == nn - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let mut z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    z = p + z.copysign(p);
                    wr[nn - 1] = x + z;
                    wr[nn] = x + z;
                    if z != 0.0 {
                        wr[nn] = x - w / z;
                    }
                    wi[nn - 1] = 0.0;
                    wi[nn] = 0.0;
                } else {
                    wr[nn - 1] = x + p;
                    wr[nn] = x + p;
                    wi[nn - 1] = -z;
                    wi[nn] = z;
                }
                nn -= 2;
                found += 2;
                break;
            }
            if its >= MAX_ITS {
                return Err(found);
            }
            if its > 0 && its % 10 == 0 {
                t += x;
                for i in 1..=nn {
                    b.sub(i, i, x);
                }
                let s = b.at(nn, nn - 1).abs() + b.at(nn - 1, nn - 2).abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;

            let mut m = nn - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = b.at(m, m);
                r = x - z;
                let s0 = y - z;
                p = (r * s0 - w) / b.at(m + 1, m) + b.at(m, m + 1);
                q = b.at(m + 1, m + 1) - z - r - s0;
                r = b.at(m + 2, m + 1);
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = b.at(m, m - 1).abs() * (q.abs() + r.abs());
                let v = p.abs() * (b.at(m - 1, m - 1).abs() + z.abs() + b.at(m + 1, m + 1).abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nn {
                b.set(i, i - 2, 0.0);
                if i != m + 2 {
                    b.set(i, i - 3, 0.0);
                }
            }
            let mut xs = 0.0;
            for k in m..nn {
                if k != m {
                    p = b.at(k, k - 1);
                    q = b.at(k + 1, k - 1);
                    r = 0.0;
                    if k != nn - 1 {
                        r = b.at(k + 2, k - 1);
                    }
                    xs = p.abs() + q.abs() + r.abs();
                    if xs != 0.0 {
                        p /= xs;
                        q /= xs;
                        r /= xs;
                    }
                }
                let s = (p * p + q * q + r * r).sqrt().copysign(p);
                if s == 0.0 {
                    continue;
                }
                if k == m {
                    if l != m {
                        let v = -b.at(k, k - 1);
                        b.set(k, k - 1, v);
                    }
                } else {
                    b.set(k, k - 1, -s * xs);
                }
                p += s;
                let xx = p / s;
                let yy = q / s;
                let zz = r / s;
                q /= p;
                r /= p;
                for j in k..=nn {
                    let mut pp = b.at(k, j) + q * b.at(k + 1, j);
                    if k != nn - 1 {
                        pp += r * b.at(k + 2, j);
                        b.sub(k + 2, j, pp * zz);
                    }
                    b.sub(k + 1, j, pp * yy);
                    b.sub(k, j, pp * xx);
                }
                let mmin = nn.min(k + 3);
                for i in l..=mmin {
                    let mut pp = xx * b.at(i, k) + yy * b.at(i, k + 1);
                    if k != nn - 1 {
                        pp += zz * b.at(i, k + 2);
                        b.sub(i, k + 2, pp * r);
                    }
                    b.sub(i, k + 1, pp * q);
                    b.sub(i, k, pp);
                }
            }
            if l + 1 >= nn {
                break;
            }
        }
    }
    Ok(())
}

pub(crate) fn eigenvalues_nonsymmetric(m: &[f64], n: usize) -> Result<Spectrum> {
    if n == 0 {
        return Ok(Spectrum::new(Vec::new()));
    }
    let mut b = Buf::from_row_major(m, n);
    balance(&mut b);
    hessenberg(&mut b);
    let mut wr = vec![f64::NAN; n + 1];
    let mut wi = vec![f64::NAN; n + 1];
    let outcome = hqr(&mut b, &mut wr, &mut wi);
    let values: Vec<Complex64> = (1..=n).map(|i| Complex64::new(wr[i], wi[i])).collect();
    match outcome {
        Ok(()) => Ok(Spectrum::new(values)),
        Err(found) => Err(Error::NoConvergence {
            converged: found,
            total: n,
            partial: Box::new(Spectrum::new(values)),
        }),
    }
}

/// Cyclic Jacobi for a symmetric row-major matrix. Returns eigenvalues
/// ascending and the matching eigenvectors as columns of a row-major matrix.
pub fn symmetric_eigen(m: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = m.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        let total: f64 = a.iter().map(|x| x * x).sum();
        if off <= 1e-30 * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let vals = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vecs = vec![0.0; n * n];
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vecs[k * n + new] = v[k * n + old];
        }
    }
    (vals, vecs)
}

/// `‖m w − λ w‖ / ‖w‖` for an eigenvector `w` recovered by inverse iteration.
pub fn eigenpair_residual(m: &super::DenseMatrix, lambda: Complex64) -> Result<f64> {
    let n = m.require_square()?;
    let scale = m.norm_one().max(1.0);
    let shift = lambda + Complex64::new(1e-10 * scale, 1e-10 * scale);
    let shifted: Vec<Complex64> = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            let d = if i == j { shift } else { Complex64::new(0.0, 0.0) };
            Complex64::new(m.data()[k], 0.0) - d
        })
        .collect();
    let lu = Lu::factor(shifted, n)?;
    let mut w: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + 0.1 * i as f64, 0.3 - 0.07 * i as f64))
        .collect();
    for _ in 0..3 {
        w = lu.solve(&w, 1);
        let nrm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !nrm.is_finite() || nrm == 0.0 {
            return Err(Error::NonFinite("inverse iteration"));
        }
        for z in w.iter_mut() {
            *z /= nrm;
        }
    }
    let mut res = 0.0;
    for i in 0..n {
        let mut acc = -lambda * w[i];
        for j in 0..n {
            acc += m[(i, j)] * w[j];
        }
        res += acc.norm_sqr();
    }
    Ok(res.sqrt())
}
