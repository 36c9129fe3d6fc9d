//! A-priori error bound for the truncated Faber memory kernel.

use num_complex::Complex64;

use super::EllipseMap;
use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, DenseMatrix};

/// Constants of `R(t, n) = K (q/(n+1))^n (e^{tβ} − e^{t(E+n)}) / (β − E − n)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundParams {
    /// Level `q ≥ γ` with the field of values inside the `|ψ⁻¹| ≤ q` region.
    pub q: f64,
    pub k: f64,
    /// Growth rate of the full propagator, `‖e^{sA}‖ ≤ e^{sβ}`.
    pub beta: f64,
}

impl BoundParams {
    /// `q` for a set of field-of-values boundary points.
    pub fn level_enclosing(map: &EllipseMap, points: &[Complex64]) -> f64 {
        points
            .iter()
            .map(|&z| map.psi_inv(z).norm())
            .fold(map.capacity, f64::max)
    }

    /// `K = ‖P‖ C6 W` with `‖P‖ = W = 1`, `C6 = 2 max(C4 C3, C5 C3*)`.
    pub fn proof_constant(q: f64, norm_a: f64, norm_ma: f64, c4: f64, c5: f64) -> f64 {
        let common = 8.0 * std::f64::consts::E * q * (1.0 + 1.0 / (8.0 * q));
        let c3 = common * norm_a;
        let c3s = common * norm_ma;
        2.0 * (c4 * c3).max(c5 * c3s)
    }
}

/// `R(t, n)`; requires `n ≥ 4q`.
pub fn convergence_bound(map: &EllipseMap, params: &BoundParams, t: f64, n: usize) -> Result<f64> {
    let nf = n as f64;
    if nf < 4.0 * params.q {
        return Err(Error::InvalidArgument(format!(
            "bound holds for n >= 4q = {:.3}, got n = {n}",
            4.0 * params.q
        )));
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("time must be >= 0, got {t}")));
    }
    let e = 1.0 + map.psi_at_capacity();
    let delta = e + nf - params.beta;
    // (e^{tβ} − e^{t(E+n)})/(β − E − n) = e^{tβ} (e^{tδ} − 1)/δ
    let time_factor = if delta == 0.0 {
        t * (t * params.beta).exp()
    } else {
        (t * params.beta).exp() * (t * delta).exp_m1() / delta
    };
    let lead = (nf * (params.q / (nf + 1.0)).ln()).exp();
    Ok(params.k * lead * time_factor)
}

/// Largest eigenvalue of the symmetric part.
pub fn log_norm(m: &DenseMatrix) -> Result<f64> {
    let n = m.require_square()?;
    let sym: Vec<f64> = (0..n * n)
        .map(|k| 0.5 * (m[(k / n, k % n)] + m[(k % n, k / n)]))
        .collect();
    let (vals, _) = symmetric_eigen(&sym, n);
    Ok(vals.last().copied().unwrap_or(0.0))
}

/// Boundary points of `{z^H m z : ‖z‖ = 1}` from the extremal eigenvectors
/// of the Hermitian part of `e^{iθ} m`, for `samples` equispaced angles.
pub fn field_of_values_boundary(m: &DenseMatrix, samples: usize) -> Result<Vec<Complex64>> {
    let n = m.require_square()?;
    let mut out = Vec::with_capacity(samples);
    let n2 = 2 * n;
    for s in 0..samples {
        let th = 2.0 * std::f64::consts::PI * s as f64 / samples as f64;
        let (c, sn) = (th.cos(), th.sin());
        // H = (e^{iθ}m + e^{−iθ}mᵀ)/2 = Hr + i Hi, embedded as [[Hr, −Hi], [Hi, Hr]]
        let mut emb = vec![0.0; n2 * n2];
        for i in 0..n {
            for j in 0..n {
                let hr = 0.5 * c * (m[(i, j)] + m[(j, i)]);
                let hi = 0.5 * sn * (m[(i, j)] - m[(j, i)]);
                emb[i * n2 + j] = hr;
                emb[(i + n) * n2 + j + n] = hr;
                emb[i * n2 + j + n] = -hi;
                emb[(i + n) * n2 + j] = hi;
            }
        }
        let (_, vecs) = symmetric_eigen(&emb, n2);
        let top = n2 - 1;
        let z: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(vecs[i * n2 + top], vecs[(i + n) * n2 + top]))
            .collect();
        let norm2: f64 = z.iter().map(|x| x.norm_sqr()).sum();
        let mut rq = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let mut row = Complex64::new(0.0, 0.0);
            for j in 0..n {
                row += m[(i, j)] * z[j];
            }
            rq += z[i].conj() * row;
        }
        out.push(rq / norm2);
    }
    Ok(out)
}
