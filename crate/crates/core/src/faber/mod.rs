//! Faber polynomials for the two-term exterior map `ψ(w) = w + c0 + c1/w`,
//! whose level curves are ellipses, and the Faber series of `exp(t m)`.

mod bessel;
mod bound;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{scalar, DenseMatrix, Spectrum};

pub use bessel::{bessel_j, bessel_j_all};
pub use bound::{convergence_bound, field_of_values_boundary, log_norm, BoundParams};

/// Below this `|c1|` the temporal modes switch to the Taylor limit.
pub const TAYLOR_BRANCH: f64 = 1e-10;
/// Default relative inflation applied by [`fit_ellipse`].
pub const DEFAULT_PADDING: f64 = 0.1;
/// A degenerate semi-axis is raised to this fraction of `max(1, other)`.
pub const AXIS_FLOOR: f64 = 1e-3;

const SERIES_LIMIT: f64 = 12.0;

/// Parameters of `ψ(w) = w + c0 + c1/w` together with the ellipse it maps
/// `|w| = capacity` onto.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EllipseMap {
    pub c0: f64,
    pub c1: f64,
    pub capacity: f64,
    pub semi_real: f64,
    pub semi_imag: f64,
}

impl EllipseMap {
    /// Ellipse centered at `c0` with semi-axes `alpha` (real) and `beta` (imaginary).
    pub fn from_axes(c0: f64, alpha: f64, beta: f64) -> Result<Self> {
        if !(c0.is_finite() && alpha.is_finite() && beta.is_finite()) {
            return Err(Error::NonFinite("ellipse parameters"));
        }
        if alpha < 0.0 || beta < 0.0 || alpha + beta <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "semi-axes must be non-negative with positive sum, got ({alpha}, {beta})"
            )));
        }
        Ok(EllipseMap {
            c0,
            c1: (alpha * alpha - beta * beta) / 4.0,
            capacity: (alpha + beta) / 2.0,
            semi_real: alpha,
            semi_imag: beta,
        })
    }

    /// Map from its Laurent coefficients; needs `|c1| ≤ capacity²`.
    pub fn from_laurent(c0: f64, c1: f64, capacity: f64) -> Result<Self> {
        if capacity <= 0.0 || c1.abs() > capacity * capacity * (1.0 + 1e-14) {
            return Err(Error::InvalidArgument(format!(
                "capacity {capacity} incompatible with c1 = {c1}"
            )));
        }
        let alpha = (capacity + c1 / capacity).max(0.0);
        let beta = (capacity - c1 / capacity).max(0.0);
        let mut m = Self::from_axes(c0, alpha, beta)?;
        m.c1 = c1;
        Ok(m)
    }

    pub fn psi(&self, w: Complex64) -> Complex64 {
        w + self.c0 + self.c1 / w
    }

    /// Exterior branch of `ψ⁻¹` (the root of larger modulus).
    pub fn psi_inv(&self, z: Complex64) -> Complex64 {
        let u = z - self.c0;
        let disc = (u * u - 4.0 * self.c1).sqrt();
        let (r1, r2) = ((u + disc) / 2.0, (u - disc) / 2.0);
        if r1.norm() >= r2.norm() {
            r1
        } else {
            r2
        }
    }

    /// `ψ(capacity)`, the rightmost point of the ellipse.
    pub fn psi_at_capacity(&self) -> f64 {
        self.c0 + self.capacity + self.c1 / self.capacity
    }

    /// Closed-ellipse membership with relative slack `tol`.
    pub fn contains(&self, z: Complex64, tol: f64) -> bool {
        let dx = z.re - self.c0;
        let dy = z.im;
        let part = |d: f64, axis: f64| {
            if axis > 0.0 {
                (d / axis).powi(2)
            } else if d.abs() <= tol {
                0.0
            } else {
                f64::INFINITY
            }
        };
        part(dx, self.semi_real) + part(dy, self.semi_imag) <= 1.0 + tol
    }
}

/// Ellipse around a spectrum.
///
/// Starts from the bounding box (center at the real midpoint, semi-axes the
/// half-extents), floors a degenerate axis, grows both axes by a common factor
/// until every eigenvalue is inside, then inflates by `1 + padding`.
pub fn fit_ellipse(spectrum: &Spectrum, padding: f64) -> Result<EllipseMap> {
    if spectrum.is_empty() {
        return Err(Error::InvalidArgument("cannot fit an ellipse to an empty spectrum".into()));
    }
    if !(padding >= 0.0) {
        return Err(Error::InvalidArgument(format!("padding must be >= 0, got {padding}")));
    }
    let hull = crate::linalg::SpectralHull::of(spectrum)?;
    let c0 = 0.5 * (hull.re_min + hull.re_max);
    let mut alpha = 0.5 * (hull.re_max - hull.re_min);
    let mut beta = hull.im_max;
    let floor_a = AXIS_FLOOR * beta.max(1.0);
    let floor_b = AXIS_FLOOR * alpha.max(1.0);
    alpha = alpha.max(floor_a);
    beta = beta.max(floor_b);

    let worst = spectrum
        .iter()
        .map(|z| ((z.re - c0) / alpha).powi(2) + (z.im / beta).powi(2))
        .fold(0.0, f64::max);
    let grow = worst.sqrt().max(1.0) * (1.0 + padding);
    EllipseMap::from_axes(c0, alpha * grow, beta * grow)
}

/// [`fit_ellipse`], widened to the circumscribed disk (`c1 = 0`) when the
/// real semi-axis dominates, so the temporal modes stay in the supported
/// `c1 ≤ 0` range.
pub fn fit_faber_map(spectrum: &Spectrum, padding: f64) -> Result<EllipseMap> {
    let m = fit_ellipse(spectrum, padding)?;
    if m.c1 > 0.0 {
        let mut disk = EllipseMap::from_axes(m.c0, m.semi_real, m.semi_real)?;
        disk.c1 = 0.0;
        Ok(disk)
    } else {
        Ok(m)
    }
}

/// Temporal Faber modes `a_0(t) … a_n(t)` of `exp(t z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FaberCoeffs {
    pub order: usize,
    pub t: f64,
    pub values: Vec<f64>,
}

/// `a_j(t) = e^{t c0} J_j(2t√(−c1)) / √(−c1)^j`, or `e^{t c0} t^j / j!` when `|c1|`
/// is below [`TAYLOR_BRANCH`].
pub fn faber_modes(map: &EllipseMap, t: f64, n: usize) -> Result<FaberCoeffs> {
    let mut values = vec![0.0; n + 1];
    faber_modes_into(map, t, &mut values)?;
    Ok(FaberCoeffs { order: n, t, values })
}

/// Fills `out[j] = a_j(t)` for `j < out.len()`.
pub fn faber_modes_into(map: &EllipseMap, t: f64, out: &mut [f64]) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("time must be finite and >= 0, got {t}")));
    }
    if map.c1 > TAYLOR_BRANCH {
        return Err(Error::Unsupported(format!(
            "c1 = {} > 0 needs modified Bessel functions",
            map.c1
        )));
    }
    let Some(n) = out.len().checked_sub(1) else {
        return Ok(());
    };
    let growth = (t * map.c0).exp();
    if map.c1.abs() < TAYLOR_BRANCH {
        let mut term = growth;
        for (j, o) in out.iter_mut().enumerate() {
            if j > 0 {
                term *= t / j as f64;
            }
            *o = term;
        }
        return Ok(());
    }
    let s = (-map.c1).sqrt();
    let x = 2.0 * t * s;
    if x < SERIES_LIMIT {
        // Σ_k (−1)^k t^{j+2k} (−c1)^k / (k! (j+k)!), no division by s^j
        let u = t * t * (-map.c1);
        let mut lead = growth;
        for (j, o) in out.iter_mut().enumerate() {
            if j > 0 {
                lead *= t / j as f64;
            }
            let mut term = 1.0;
            let mut sum = 1.0;
            for k in 1..200 {
                term *= -u / (k as f64 * (j + k) as f64);
                sum += term;
                if term.abs() < 1e-17 * sum.abs() {
                    break;
                }
            }
            *o = lead * sum;
        }
    } else {
        let js = bessel_j_all(n, x);
        let mut scale = growth;
        for (j, o) in out.iter_mut().enumerate() {
            *o = js[j] * scale;
            scale /= s;
        }
    }
    Ok(())
}

/// `F_0(m)v … F_n(m)v` with one product per step:
/// `F_1 = (m − c0)`, `F_2 = (m − c0)F_1 − 2c1`, `F_j = (m − c0)F_{j−1} − c1 F_{j−2}`.
pub fn faber_recurrence_apply(map: &EllipseMap, m: &DenseMatrix, v: &[f64], n: usize) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(n + 1);
    faber_recurrence_for_each(map, m, v, n, |_, fv| out.push(fv.to_vec()))?;
    Ok(out)
}

pub(crate) fn faber_recurrence_for_each(
    map: &EllipseMap,
    m: &DenseMatrix,
    v: &[f64],
    n: usize,
    mut visit: impl FnMut(usize, &[f64]),
) -> Result<()> {
    let dim = m.require_square()?;
    if v.len() != dim {
        return Err(Error::DimensionMismatch(format!(
            "{dim}x{dim} matrix, vector of length {}",
            v.len()
        )));
    }
    let mut prev: Vec<f64> = v.to_vec();
    visit(0, &prev);
    if n == 0 {
        return Ok(());
    }
    let mut cur = vec![0.0; dim];
    scalar::mat_vec(m.data(), &prev, dim, dim, &mut cur);
    for (c, p) in cur.iter_mut().zip(&prev) {
        *c -= map.c0 * p;
    }
    visit(1, &cur);
    let mut next = vec![0.0; dim];
    for j in 2..=n {
        let k = if j == 2 { 2.0 * map.c1 } else { map.c1 };
        scalar::mat_vec(m.data(), &cur, dim, dim, &mut next);
        for ((x, c), p) in next.iter_mut().zip(&cur).zip(&prev) {
            *x -= map.c0 * c + k * p;
        }
        visit(j, &next);
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(())
}

/// Scalar Faber polynomials `F_0(z) … F_n(z)`.
pub fn faber_polys(map: &EllipseMap, z: Complex64, n: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(Complex64::new(1.0, 0.0));
    if n == 0 {
        return out;
    }
    let u = z - map.c0;
    out.push(u);
    for j in 2..=n {
        let k = if j == 2 { 2.0 * map.c1 } else { map.c1 };
        let next = u * out[j - 1] - k * out[j - 2];
        out.push(next);
    }
    out
}

/// `Σ_{j≤order} a_j(t) F_j(m) v`.
pub fn expm_faber(map: &EllipseMap, m: &DenseMatrix, t: f64, v: &[f64], order: usize) -> Result<Vec<f64>> {
    let modes = faber_modes(map, t, order)?;
    let mut acc = vec![0.0; v.len()];
    faber_recurrence_for_each(map, m, v, order, |j, fv| {
        let a = modes.values[j];
        for (o, x) in acc.iter_mut().zip(fv) {
            *o += a * x;
        }
    })?;
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigenvalues, expm_apply};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ellipse_fits() {
        let m = fit_ellipse(&Spectrum::new(vec![c(0.0, 1.0), c(0.0, -1.0)]), 0.0).unwrap();
        assert_eq!(m.c0, 0.0);
        assert!((m.semi_imag - 1.0).abs() < 1e-15);
        assert!((m.semi_real - AXIS_FLOOR).abs() < 1e-15);
        assert!(m.c1 < 0.0);

        let m = fit_ellipse(&Spectrum::new(vec![c(1.0, 0.0), c(3.0, 0.0)]), 0.0).unwrap();
        assert_eq!(m.c0, 2.0);
        assert!((m.semi_imag - AXIS_FLOOR).abs() < 1e-15);
        assert!(m.c1 > 0.0);

        assert!(fit_ellipse(&Spectrum::new(vec![]), 0.1).is_err());

        let d = fit_faber_map(&Spectrum::new(vec![c(1.0, 0.0), c(3.0, 0.5)]), 0.0).unwrap();
        assert_eq!(d.c1, 0.0);
        assert_eq!(d.semi_real, d.semi_imag);
        assert!(d.contains(c(3.0, 0.5), 1e-12));
    }

    #[test]
    fn fitted_ellipse_contains_corner_eigenvalues() {
        let s = Spectrum::new(vec![c(-1.0, 2.0), c(-1.0, -2.0), c(1.0, 2.0), c(1.0, -2.0)]);
        for pad in [0.0, 0.1] {
            let m = fit_ellipse(&s, pad).unwrap();
            assert!(s.iter().all(|z| m.contains(*z, 1e-12)));
        }
    }

    #[test]
    fn map_sends_capacity_circle_onto_ellipse() {
        let m = EllipseMap::from_axes(0.5, 1.0, 3.0).unwrap();
        for k in 0..16 {
            let th = k as f64 * 0.4;
            let z = m.psi(Complex64::from_polar(m.capacity, th));
            assert!((z.re - 0.5 - th.cos()).abs() < 1e-14);
            assert!((z.im - 3.0 * th.sin()).abs() < 1e-14);
            let w = m.psi_inv(c(4.0 * th.cos(), 7.0 * th.sin()));
            assert!(w.norm() >= m.capacity);
        }
        assert!((m.psi_at_capacity() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn modes_at_zero_time() {
        let m = EllipseMap::from_axes(0.3, 0.5, 2.0).unwrap();
        let a = faber_modes(&m, 0.0, 6).unwrap();
        assert_eq!(a.values, [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn taylor_limit_modes() {
        let m = EllipseMap::from_laurent(0.0, -1e-12, 1.0).unwrap();
        let a = faber_modes(&m, 2.0, 10).unwrap();
        let mut expect = 1.0;
        for j in 0..=10 {
            if j > 0 {
                expect *= 2.0 / j as f64;
            }
            assert!((a.values[j] - expect).abs() < 1e-12 * expect.max(1.0));
        }
    }

    #[test]
    fn unit_ellipse_modes_are_bessel_values() {
        let m = EllipseMap::from_laurent(0.0, -1.0, 1.0).unwrap();
        let a = faber_modes(&m, 1.0, 8).unwrap();
        assert!((a.values[0] - 0.223_890_779_141_235_7).abs() < 1e-14);
        for j in 0..=8 {
            assert!((a.values[j] - bessel_j(j, 2.0)).abs() < 1e-14);
        }
        let a = faber_modes(&m, 9.0, 30).unwrap();
        for j in 0..=30 {
            assert!((a.values[j] - bessel_j(j, 18.0)).abs() < 1e-13);
        }
    }

    #[test]
    fn positive_c1_is_rejected() {
        let m = EllipseMap::from_axes(0.0, 3.0, 1.0).unwrap();
        assert!(matches!(faber_modes(&m, 1.0, 3), Err(Error::Unsupported(_))));
    }

    #[test]
    fn recurrence_first_terms() {
        let m = EllipseMap::from_laurent(0.0, -1.0, 1.0).unwrap();
        let a = DenseMatrix::from_rows(&[vec![2.0]]).unwrap();
        let f = faber_recurrence_apply(&m, &a, &[1.0], 3).unwrap();
        assert_eq!(f[0], [1.0]);
        assert_eq!(f[1], [2.0]);
        assert_eq!(f[2], [6.0]);

        let shifted = EllipseMap::from_axes(0.7, 1.0, 2.0).unwrap();
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![-3.0, 0.5]]).unwrap();
        let v = [0.4, -1.0];
        let f = faber_recurrence_apply(&shifted, &a, &v, 1).unwrap();
        let mv = a.mat_vec(&v).unwrap();
        assert_eq!(f[1], [mv[0] - 0.7 * v[0], mv[1] - 0.7 * v[1]]);
    }

    #[test]
    fn faber_rotation() {
        let r = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap();
        let map = fit_ellipse(&eigenvalues(&r).unwrap(), DEFAULT_PADDING).unwrap();
        let y = expm_faber(&map, &r, 1.0, &[1.0, 0.0], 30).unwrap();
        assert!((y[0] - 1f64.cos()).abs() < 1e-8);
        assert!((y[1] + 1f64.sin()).abs() < 1e-8);

        let z = DenseMatrix::zeros(2, 2);
        let map0 = EllipseMap::from_laurent(0.0, -1e-13, 1.0).unwrap();
        assert_eq!(expm_faber(&map0, &z, 3.0, &[2.0, 5.0], 0).unwrap(), [2.0, 5.0]);
    }

    #[test]
    fn faber_error_falls_fast_with_order() {
        let a = DenseMatrix::from_rows(&[
            vec![-0.2, 1.0, 0.3, 0.0],
            vec![-1.0, -0.1, 0.0, 0.5],
            vec![0.0, -0.4, -0.3, 1.2],
            vec![0.1, 0.0, -1.1, 0.0],
        ])
        .unwrap();
        let v = [1.0, 0.5, -0.5, 0.2];
        let map = fit_ellipse(&eigenvalues(&a).unwrap(), DEFAULT_PADDING).unwrap();
        let exact = expm_apply(&a, 2.0, &v).unwrap();
        let errs: Vec<f64> = [4, 8, 12, 16]
            .iter()
            .map(|&n| {
                let y = expm_faber(&map, &a, 2.0, &v, n).unwrap();
                y.iter().zip(&exact).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
            })
            .collect();
        for w in errs.windows(2) {
            assert!(w[1] < 0.2 * w[0], "{errs:?}");
        }
    }
}
