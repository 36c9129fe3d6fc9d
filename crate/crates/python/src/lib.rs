//! Python bindings. Matrices cross the boundary as lists of rows, spectra as
//! lists of complex numbers.

use mzfaber::faber::{self, EllipseMap};
use mzfaber::gle::{self, GleProblem, SolverConfig};
use mzfaber::kernels::{self, Family, ReducedData, StatsKind};
use mzfaber::linalg::{self, DenseMatrix, Spectrum};
use mzfaber::models::{self, Boundary};
use mzfaber::oracles;
use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: mzfaber::Error) -> PyErr {
    use mzfaber::Error as E;
    match e {
        E::InvalidArgument(_) | E::DimensionMismatch(_) | E::NotSquare { .. } | E::Parse(_) | E::NonFinite(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyArithmeticError::new_err(e.to_string()),
    }
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<DenseMatrix> {
    DenseMatrix::from_rows(&rows).map_err(to_py)
}

fn rows(m: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

fn stats(name: &str) -> PyResult<StatsKind> {
    match name {
        "chorin" => Ok(StatsKind::ChorinInitial),
        "berne" => Ok(StatsKind::BerneEquilibriumQuadratic),
        other => Err(PyValueError::new_err(format!("unknown statistics `{other}`, use \"chorin\" or \"berne\""))),
    }
}

/// Linear system `dx/dt = A x` with the initial statistics used by the projection.
#[pyclass(name = "SystemSpec", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySystem {
    inner: kernels::SystemSpec,
}

#[pymethods]
impl PySystem {
    #[new]
    #[pyo3(signature = (a, init_mean, stats = "chorin"))]
    fn new(a: Vec<Vec<f64>>, init_mean: Vec<f64>, stats: &str) -> PyResult<Self> {
        let inner = kernels::SystemSpec::new(matrix(a)?, init_mean, self::stats(stats)?).map_err(to_py)?;
        Ok(PySystem { inner })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn matrix(&self) -> Vec<Vec<f64>> {
        rows(&self.inner.a)
    }

    #[getter]
    fn init_mean(&self) -> Vec<f64> {
        self.inner.init_mean.clone()
    }

    /// Reduction onto the 1-based coordinate `observable`.
    fn reduce(&self, observable: usize) -> PyResult<PyReduced> {
        Ok(PyReduced { inner: kernels::reduce(&self.inner, observable).map_err(to_py)? })
    }

    fn __repr__(&self) -> String {
        format!("SystemSpec(dim={}, stats={:?})", self.inner.dim(), self.inner.stats_kind)
    }
}

#[pyclass(name = "ReducedData", frozen)]
struct PyReduced {
    inner: ReducedData,
}

#[pymethods]
impl PyReduced {
    #[getter]
    fn a(&self) -> f64 {
        self.inner.a
    }

    #[getter]
    fn b(&self) -> f64 {
        self.inner.b
    }

    #[getter]
    fn x1_mean(&self) -> f64 {
        self.inner.x1_mean
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn avec(&self) -> Vec<f64> {
        self.inner.avec.clone()
    }

    #[getter]
    fn bvec(&self) -> Vec<f64> {
        self.inner.bvec.clone()
    }

    #[getter]
    fn m11(&self) -> Vec<Vec<f64>> {
        rows(&self.inner.m11)
    }

    /// Eigenvalues of `M11ᵀ`.
    fn spectrum(&self) -> PyResult<Vec<Complex64>> {
        Ok(linalg::eigenvalues(&self.inner.m11t).map_err(to_py)?.values)
    }

    /// `(g(t), f(t))` from the matrix exponential.
    fn exact_kernel(&self, t: f64) -> PyResult<(f64, f64)> {
        self.inner.exact_kernel(t).map_err(to_py)
    }

    #[pyo3(signature = (family, order, map = None))]
    fn kernel(&self, family: &str, order: usize, map: Option<&PyMap>) -> PyResult<PyKernel> {
        let family = Family::parse(family).map_err(to_py)?;
        let k = kernels::KernelExpansion::build(family, &self.inner, order, map.map(|m| &m.inner)).map_err(to_py)?;
        Ok(PyKernel { inner: k })
    }

    /// Solves the GLE with `kernel`; `y0` defaults to `⟨x_1(0)⟩`.
    #[pyo3(signature = (kernel, dt, t_final, y0 = None))]
    fn solve(&self, kernel: &PyKernel, dt: f64, t_final: f64, y0: Option<f64>) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let cfg = SolverConfig::new(dt, t_final).map_err(to_py)?;
        let p = GleProblem { a: self.inner.a, b: self.inner.b, kernel: kernel.inner.clone() };
        let tr = gle::solve_gle(&p, y0.unwrap_or(self.inner.x1_mean), &cfg).map_err(to_py)?;
        Ok((tr.times, tr.values))
    }
}

/// Conformal map `ψ(w) = w + c0 + c1/w`.
#[pyclass(name = "EllipseMap", frozen)]
struct PyMap {
    inner: EllipseMap,
}

#[pymethods]
impl PyMap {
    #[staticmethod]
    fn from_axes(c0: f64, semi_real: f64, semi_imag: f64) -> PyResult<Self> {
        Ok(PyMap { inner: EllipseMap::from_axes(c0, semi_real, semi_imag).map_err(to_py)? })
    }

    /// Map around `spectrum` with the `c1 ≤ 0` disk fallback.
    #[staticmethod]
    #[pyo3(signature = (spectrum, padding = faber::DEFAULT_PADDING))]
    fn fit(spectrum: Vec<Complex64>, padding: f64) -> PyResult<Self> {
        Ok(PyMap { inner: faber::fit_faber_map(&Spectrum::new(spectrum), padding).map_err(to_py)? })
    }

    #[getter]
    fn c0(&self) -> f64 {
        self.inner.c0
    }

    #[getter]
    fn c1(&self) -> f64 {
        self.inner.c1
    }

    #[getter]
    fn capacity(&self) -> f64 {
        self.inner.capacity
    }

    #[getter]
    fn semi_real(&self) -> f64 {
        self.inner.semi_real
    }

    #[getter]
    fn semi_imag(&self) -> f64 {
        self.inner.semi_imag
    }

    fn modes(&self, t: f64, n: usize) -> PyResult<Vec<f64>> {
        Ok(faber::faber_modes(&self.inner, t, n).map_err(to_py)?.values)
    }

    fn __repr__(&self) -> String {
        let m = &self.inner;
        format!("EllipseMap(c0={}, c1={}, capacity={})", m.c0, m.c1, m.capacity)
    }
}

#[pyclass(name = "KernelExpansion", frozen)]
struct PyKernel {
    inner: kernels::KernelExpansion,
}

#[pymethods]
impl PyKernel {
    #[getter]
    fn family(&self) -> &'static str {
        self.inner.family.name()
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order
    }

    #[getter]
    fn g(&self) -> Vec<f64> {
        self.inner.g.clone()
    }

    #[getter]
    fn f(&self) -> Vec<f64> {
        self.inner.f.clone()
    }

    /// `(g(t), f(t))`.
    fn __call__(&self, t: f64) -> PyResult<(f64, f64)> {
        kernels::kernel_eval(&self.inner, t).map_err(to_py)
    }

    fn laplace(&self, s: Complex64) -> PyResult<Complex64> {
        kernels::laplace_g(&self.inner, s).map_err(to_py)
    }
}

#[pyfunction]
fn eigenvalues(m: Vec<Vec<f64>>) -> PyResult<Vec<Complex64>> {
    Ok(linalg::eigenvalues(&matrix(m)?).map_err(to_py)?.values)
}

#[pyfunction]
fn expm_apply(m: Vec<Vec<f64>>, t: f64, v: Vec<f64>) -> PyResult<Vec<f64>> {
    linalg::expm_apply(&matrix(m)?, t, &v).map_err(to_py)
}

#[pyfunction]
fn bessel_j(n: usize, x: f64) -> f64 {
    faber::bessel_j(n, x)
}

fn boundary(name: &str, l: usize) -> PyResult<Boundary> {
    match name {
        "free" => Ok(Boundary::Free),
        "pinned" => Ok(Boundary::Pinned { coordination: l }),
        other => Err(PyValueError::new_err(format!("unknown boundary `{other}`"))),
    }
}

/// Harmonic chain on a Bethe lattice, or on a path of `nodes` sites when given.
#[pyfunction]
#[pyo3(signature = (l, shells = None, nodes = None, boundary = "free", k = 1.0, m = 1.0, normalize = true))]
fn bethe_chain(
    l: usize,
    shells: Option<usize>,
    nodes: Option<usize>,
    boundary: &str,
    k: f64,
    m: f64,
    normalize: bool,
) -> PyResult<PySystem> {
    let g = match (nodes, shells) {
        (Some(n), None) if l == 2 => models::build_path(n),
        (None, Some(s)) => models::build_bethe(l, s),
        _ => return Err(PyValueError::new_err("give `shells`, or `nodes` for l = 2")),
    }
    .map_err(to_py)?;
    let sys = models::build_chain_system(&g, k, m, normalize.then_some(l), self::boundary(boundary, l)?)
        .map_err(to_py)?;
    Ok(PySystem { inner: sys })
}

#[pyfunction]
#[pyo3(signature = (n, p, seed, k = 1.0, m = 1.0, l_norm = None))]
fn erdos_renyi_chain(n: usize, p: f64, seed: u64, k: f64, m: f64, l_norm: Option<usize>) -> PyResult<PySystem> {
    let g = models::build_erdos_renyi(n, p, seed).map_err(to_py)?;
    let sys = models::build_chain_system(&g, k, m, l_norm, Boundary::Free).map_err(to_py)?;
    Ok(PySystem { inner: sys })
}

/// Doubled annulus wave system and the 1-based sensor coordinate.
#[pyfunction]
#[pyo3(signature = (n_modes = 45, n_radial = 5, n_random_modes = 25, sensor = (1.1, 0.1), mode_mean = 0.0))]
fn wave_model(
    n_modes: usize,
    n_radial: usize,
    n_random_modes: usize,
    sensor: (f64, f64),
    mode_mean: f64,
) -> PyResult<(PySystem, usize)> {
    let spec = models::WaveModelSpec { n_modes, n_radial, n_random_modes, sensor, mode_mean, ..Default::default() };
    let model = models::build_wave_model(&spec).map_err(to_py)?;
    let mean = model.sampler().mean_state();
    let sys = kernels::SystemSpec::new(model.system.a.clone(), mean, StatsKind::ChorinInitial).map_err(to_py)?;
    Ok((PySystem { inner: sys }, model.observable()))
}

#[pyfunction]
fn vacf_matrix_exp(system: &PySystem, index: usize, grid: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(oracles::vacf_matrix_exp(&system.inner, index, &grid).map_err(to_py)?.values)
}

#[pyfunction]
#[pyo3(signature = (t, omega = 1.0))]
fn vacf_analytic_l2(t: f64, omega: f64) -> f64 {
    oracles::vacf_analytic_l2(t, omega)
}

#[pyfunction]
fn exact_mean(system: &PySystem, index: usize, grid: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(oracles::exact_mean(&system.inner, index, &grid).map_err(to_py)?.values)
}

#[pymodule(name = "mzfaber")]
fn init(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystem>()?;
    m.add_class::<PyReduced>()?;
    m.add_class::<PyMap>()?;
    m.add_class::<PyKernel>()?;
    m.add_function(wrap_pyfunction!(eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(expm_apply, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_j, m)?)?;
    m.add_function(wrap_pyfunction!(bethe_chain, m)?)?;
    m.add_function(wrap_pyfunction!(erdos_renyi_chain, m)?)?;
    m.add_function(wrap_pyfunction!(wave_model, m)?)?;
    m.add_function(wrap_pyfunction!(vacf_matrix_exp, m)?)?;
    m.add_function(wrap_pyfunction!(vacf_analytic_l2, m)?)?;
    m.add_function(wrap_pyfunction!(exact_mean, m)?)?;
    Ok(())
}
