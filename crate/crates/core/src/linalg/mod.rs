//! Dense real matrices, the exponential, and nonsymmetric eigenvalues.

mod eigen;
mod expm;
pub mod scalar;

use std::fmt;
use std::ops::Index;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use eigen::{eigenpair_residual, symmetric_eigen};
pub use expm::expm as expm_raw;

/// Row-major real matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            writeln!(f, "  {:?}", &row[..self.cols.min(8)])?;
        }
        Ok(())
    }
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![1.0; n])
    }

    pub fn diag(d: &[f64]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n, n);
        for (i, &x) in d.iter().enumerate() {
            m.data[i * n + i] = x;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::new(r, c, rows.concat())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.data[i * self.cols + j]).collect()
    }

    pub(crate) fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    pub fn transpose(&self) -> Self {
        let mut out = vec![0.0; self.data.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        DenseMatrix {
            rows: self.cols,
            cols: self.rows,
            data: out,
        }
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = scalar::matmul(&self.data, &other.data, self.rows, self.cols, other.cols);
        DenseMatrix::new(self.rows, other.cols, data)
    }

    pub fn scale(&self, s: f64) -> Result<DenseMatrix> {
        DenseMatrix::new(self.rows, self.cols, self.data.iter().map(|x| x * s).collect())
    }

    pub fn add(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &DenseMatrix, f: impl Fn(f64, f64) -> f64) -> Result<DenseMatrix> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        DenseMatrix::new(self.rows, self.cols, data)
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn norm_one(&self) -> f64 {
        scalar::norm_one(&self.data, self.rows, self.cols)
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Drops row `i` and column `j`.
    pub fn minor(&self, i: usize, j: usize) -> DenseMatrix {
        let mut data = Vec::with_capacity((self.rows - 1) * (self.cols - 1));
        for r in (0..self.rows).filter(|&r| r != i) {
            for c in (0..self.cols).filter(|&c| c != j) {
                data.push(self.data[r * self.cols + c]);
            }
        }
        DenseMatrix {
            rows: self.rows - 1,
            cols: self.cols - 1,
            data,
        }
    }

    /// `P A Pᵀ` where `perm[new] = old`.
    pub fn permute_symmetric(&self, perm: &[usize]) -> Result<DenseMatrix> {
        let n = self.require_square()?;
        if perm.len() != n {
            return Err(Error::DimensionMismatch("permutation length".into()));
        }
        DenseMatrix::from_fn(n, n, |i, j| self[(perm[i], perm[j])])
    }

    pub fn mat_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        mat_vec(self, v)
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

/// Eigenvalues with multiplicity.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub values: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(values: Vec<Complex64>) -> Self {
        Spectrum { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Complex64> {
        self.values.iter()
    }

    pub fn radius(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_real(&self) -> f64 {
        self.values.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sum(&self) -> Complex64 {
        self.values.iter().sum()
    }

    /// True when every non-real eigenvalue has a partner within `tol` of its conjugate.
    pub fn is_conjugate_closed(&self, tol: f64) -> bool {
        let mut used = vec![false; self.values.len()];
        for (i, z) in self.values.iter().enumerate() {
            if used[i] || z.im.abs() <= tol {
                continue;
            }
            let partner = (0..self.values.len())
                .filter(|&j| j != i && !used[j])
                .find(|&j| (self.values[j] - z.conj()).norm() <= tol);
            match partner {
                Some(j) => {
                    used[i] = true;
                    used[j] = true;
                }
                None => return false,
            }
        }
        true
    }

    /// Sorted by real part descending, then imaginary part ascending.
    pub fn sorted(&self) -> Spectrum {
        let mut v = self.values.clone();
        v.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
        Spectrum { values: v }
    }
}

/// Axis-aligned box around a spectrum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralHull {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl SpectralHull {
    /// The imaginary extent is symmetrized, matching the conjugate symmetry
    /// of a real matrix.
    pub fn of(spectrum: &Spectrum) -> Result<SpectralHull> {
        if spectrum.is_empty() {
            return Err(Error::InvalidArgument("empty spectrum".into()));
        }
        let mut h = SpectralHull {
            re_min: f64::INFINITY,
            re_max: f64::NEG_INFINITY,
            im_min: 0.0,
            im_max: 0.0,
        };
        for z in spectrum.iter() {
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::NonFinite("spectrum"));
            }
            h.re_min = h.re_min.min(z.re);
            h.re_max = h.re_max.max(z.re);
            h.im_max = h.im_max.max(z.im.abs());
        }
        h.im_min = -h.im_max;
        Ok(h)
    }

    pub fn contains(&self, z: Complex64, slack: f64) -> bool {
        z.re >= self.re_min - slack
            && z.re <= self.re_max + slack
            && z.im >= self.im_min - slack
            && z.im <= self.im_max + slack
    }
}

pub fn mat_vec(m: &DenseMatrix, v: &[f64]) -> Result<Vec<f64>> {
    if m.cols != v.len() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix times vector of length {}",
            m.rows,
            m.cols,
            v.len()
        )));
    }
    let mut out = vec![0.0; m.rows];
    scalar::mat_vec(&m.data, v, m.rows, m.cols, &mut out);
    Ok(out)
}

/// `Σ_j coeffs[j] m^j v` by Horner's rule.
pub fn poly_apply(m: &DenseMatrix, coeffs: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let n = m.require_square()?;
    if v.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{n}x{n} matrix, vector of length {}",
            v.len()
        )));
    }
    let Some((&last, rest)) = coeffs.split_last() else {
        return Ok(vec![0.0; n]);
    };
    let mut acc: Vec<f64> = v.iter().map(|x| last * x).collect();
    let mut tmp = vec![0.0; n];
    for &c in rest.iter().rev() {
        scalar::mat_vec(&m.data, &acc, n, n, &mut tmp);
        for ((a, &t), &x) in acc.iter_mut().zip(&tmp).zip(v) {
            *a = t + c * x;
        }
    }
    Ok(acc)
}

/// `exp(t m)` as a matrix.
pub fn expm(m: &DenseMatrix, t: f64) -> Result<DenseMatrix> {
    let n = m.require_square()?;
    if !t.is_finite() {
        return Err(Error::NonFinite("time"));
    }
    let scaled: Vec<f64> = m.data.iter().map(|x| x * t).collect();
    let data = expm::expm(&scaled, n)?;
    DenseMatrix::new(n, n, data)
}

pub fn expm_apply(m: &DenseMatrix, t: f64, v: &[f64]) -> Result<Vec<f64>> {
    let n = m.require_square()?;
    if v.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{n}x{n} matrix, vector of length {}",
            v.len()
        )));
    }
    if t == 0.0 {
        return Ok(v.to_vec());
    }
    mat_vec(&expm(m, t)?, v)
}

pub fn eigenvalues(m: &DenseMatrix) -> Result<Spectrum> {
    let n = m.require_square()?;
    eigen::eigenvalues_nonsymmetric(&m.data, n)
}

pub fn spectral_hull(m: &DenseMatrix) -> Result<SpectralHull> {
    SpectralHull::of(&eigenvalues(m)?)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
