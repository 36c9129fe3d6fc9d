//! Lagrange and Newton forms over the eigenvalues of `M11ᵀ`.

use num_complex::Complex64;

use super::ReducedData;
use crate::error::{Error, Result};
use crate::linalg::{expm_raw, Spectrum};

/// Minimum relative node separation for the divided-difference recursion.
pub const RECURSION_GAP: f64 = 1e-4;

/// Nodes sorted by real part descending, then imaginary part ascending.
pub fn newton_nodes(s: &Spectrum) -> Spectrum {
    s.sorted()
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// `out = (M − λ) w` for real `M`.
fn shifted_apply(m: &[f64], n: usize, w: &[Complex64], lambda: Complex64, out: &mut [Complex64]) {
    for i in 0..n {
        let row = &m[i * n..(i + 1) * n];
        let mut acc = -lambda * w[i];
        for (&mij, wj) in row.iter().zip(w) {
            acc += mij * wj;
        }
        out[i] = acc;
    }
}

fn cdot(u: &[f64], w: &[Complex64]) -> Complex64 {
    u.iter().zip(w).map(|(&a, b)| a * b).sum()
}

pub(super) fn lagrange_weights(
    r: &ReducedData,
    nodes: &[Complex64],
    u: &[f64],
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let n = r.dim();
    let m = r.m11t.data();
    let mut g = Vec::with_capacity(nodes.len());
    let mut f = Vec::with_capacity(nodes.len());
    let mut tmp = vec![zero(); n];
    for (j, &lj) in nodes.iter().enumerate() {
        let mut w: Vec<Complex64> = r.avec.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        for (k, &lk) in nodes.iter().enumerate() {
            if k == j {
                continue;
            }
            shifted_apply(m, n, &w, lk, &mut tmp);
            let d = lj - lk;
            for (wi, ti) in w.iter_mut().zip(&tmp) {
                *wi = ti / d;
            }
        }
        if w.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite("Lagrange basis"));
        }
        g.push(cdot(&r.bvec, &w));
        f.push(cdot(u, &w));
    }
    Ok((g, f))
}

pub(super) fn newton_weights(
    r: &ReducedData,
    nodes: &[Complex64],
    u: &[f64],
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let n = r.dim();
    let m = r.m11t.data();
    let mut w: Vec<Complex64> = r.avec.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let mut tmp = vec![zero(); n];
    let mut g = Vec::with_capacity(nodes.len());
    let mut f = Vec::with_capacity(nodes.len());
    for j in 0..nodes.len() {
        if j > 0 {
            shifted_apply(m, n, &w, nodes[j - 1], &mut tmp);
            std::mem::swap(&mut w, &mut tmp);
        }
        g.push(cdot(&r.bvec, &w));
        f.push(cdot(u, &w));
    }
    Ok((g, f))
}

/// `e[λ_1], e[λ_1, λ_2], …` of `z ↦ e^{tz}`.
///
/// Uses the difference-quotient recursion when the nodes are well separated
/// and otherwise reads the first row of `exp(t Z)`, `Z` bidiagonal with the
/// nodes on the diagonal and ones above it, which stays exact through
/// confluent nodes.
pub fn divided_differences(nodes: &[Complex64], t: f64) -> Result<Vec<Complex64>> {
    let scale = nodes.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let mut min_gap = f64::INFINITY;
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            min_gap = min_gap.min((nodes[i] - nodes[j]).norm());
        }
    }
    if min_gap >= RECURSION_GAP * scale {
        Ok(divided_differences_recursive(nodes, t))
    } else {
        divided_differences_bidiagonal(nodes, t)
    }
}

pub fn divided_differences_recursive(nodes: &[Complex64], t: f64) -> Vec<Complex64> {
    let n = nodes.len();
    let mut d: Vec<Complex64> = nodes.iter().map(|z| (z * t).exp()).collect();
    for k in 1..n {
        for i in (k..n).rev() {
            d[i] = (d[i] - d[i - 1]) / (nodes[i] - nodes[i - k]);
        }
    }
    d
}

pub fn divided_differences_bidiagonal(nodes: &[Complex64], t: f64) -> Result<Vec<Complex64>> {
    let n = nodes.len();
    let mut z = vec![zero(); n * n];
    for i in 0..n {
        z[i * n + i] = nodes[i] * t;
        if i + 1 < n {
            z[i * n + i + 1] = Complex64::new(t, 0.0);
        }
    }
    let e = expm_raw(&z, n)?;
    Ok(e[..n].to_vec())
}
