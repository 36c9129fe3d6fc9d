//! Reference computations that share no code path with the kernel
//! expansions: operator algebra on affine observables, matrix-exponential
//! correlations and means, Monte Carlo, and direct quadrature.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::faber::bessel_j;
use crate::gle::Trajectory;
use crate::kernels::{StatsKind, SystemSpec};
use crate::linalg::{self, DenseMatrix};
use crate::quadrature::{gauss_legendre, integrate};

/// One letter of an operator word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    L,
    P,
    Q,
}

/// Affine observables `u(x) = c + v · x` as coefficient vectors `[c, v]`.
///
/// `L u = (A x) · ∇u`, so `L_rep = diag(0, Aᵀ)`. The projection keeps the
/// observable coordinate and replaces the rest by their means (conditional
/// expectation) or drops them (equilibrium inner product with a diagonal
/// covariance and zero means).
#[derive(Clone, Debug)]
pub struct AffineObservableRep {
    pub dim: usize,
    pub l_rep: DenseMatrix,
    pub p_rep: DenseMatrix,
    /// 0-based coordinate of the resolved observable.
    pub observable: usize,
}

impl AffineObservableRep {
    pub fn new(system: &SystemSpec, observable_index: usize) -> Result<Self> {
        let n = system.dim();
        if observable_index == 0 || observable_index > n {
            return Err(Error::InvalidArgument(format!("observable index {observable_index} outside 1..={n}")));
        }
        let k = observable_index - 1;
        let a = &system.a;
        let l_rep = DenseMatrix::from_fn(n + 1, n + 1, |i, j| if i == 0 || j == 0 { 0.0 } else { a[(j - 1, i - 1)] })?;
        let mean = |i: usize| match system.stats_kind {
            StatsKind::ChorinInitial => system.init_mean[i],
            StatsKind::BerneEquilibriumQuadratic => 0.0,
        };
        let p_rep = DenseMatrix::from_fn(n + 1, n + 1, |i, j| match (i, j) {
            (0, 0) => 1.0,
            (0, j) if j - 1 != k => mean(j - 1),
            (i, j) if i == j && i - 1 == k => 1.0,
            _ => 0.0,
        })?;
        Ok(AffineObservableRep {
            dim: n + 1,
            l_rep,
            p_rep,
            observable: k,
        })
    }

    pub fn q_rep(&self) -> DenseMatrix {
        DenseMatrix::identity(self.dim).sub(&self.p_rep).expect("same shape")
    }

    fn letter(&self, op: Op) -> DenseMatrix {
        match op {
            Op::L => self.l_rep.clone(),
            Op::P => self.p_rep.clone(),
            Op::Q => self.q_rep(),
        }
    }

    /// `[c, v]` of the observable `x_k`.
    pub fn observable_vector(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        v[self.observable + 1] = 1.0;
        v
    }

    /// Splits `[c, v]` into `(coefficient of x_k, constant)`, checking that no
    /// other coordinate survives.
    pub fn resolved_parts(&self, u: &[f64]) -> Result<(f64, f64)> {
        let stray = u[1..]
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != self.observable)
            .map(|(_, x)| x.abs())
            .fold(0.0, f64::max);
        let scale = u.iter().map(|x| x.abs()).fold(1.0, f64::max);
        if stray > 1e-12 * scale {
            return Err(Error::Inconclusive(format!("observable not in the resolved span, stray weight {stray:e}")));
        }
        Ok((u[self.observable + 1], u[0]))
    }
}

/// Operator product `w[0] w[1] … w[last]` in the affine representation.
pub fn operator_oracle(system: &SystemSpec, observable_index: usize, word: &[Op]) -> Result<DenseMatrix> {
    let rep = AffineObservableRep::new(system, observable_index)?;
    let mut acc = DenseMatrix::identity(rep.dim);
    for &op in word {
        acc = acc.matmul(&rep.letter(op))?;
    }
    Ok(acc)
}

/// `(α, β)` with `P L p(QL) QL x_k = α x_k + β`, assembled term by term from
/// operator words.
pub fn projected_polynomial_oracle(system: &SystemSpec, observable_index: usize, coeffs: &[f64]) -> Result<(f64, f64)> {
    let rep = AffineObservableRep::new(system, observable_index)?;
    let x = rep.observable_vector();
    let mut total = vec![0.0; rep.dim];
    for (j, &c) in coeffs.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let mut word = vec![Op::P, Op::L];
        for _ in 0..=j {
            word.extend([Op::Q, Op::L]);
        }
        let m = operator_oracle(system, observable_index, &word)?;
        for (t, v) in total.iter_mut().zip(m.mat_vec(&x)?) {
            *t += c * v;
        }
    }
    rep.resolved_parts(&total)
}

/// `J_0(2ωt) − J_{4j}(2ωt)`: momentum autocorrelation of site `j` of a
/// semi-infinite chain with a fixed wall next to site 1.
pub fn vacf_analytic_site(t: f64, omega: f64, site: usize) -> f64 {
    let x = 2.0 * omega * t;
    bessel_j(0, x) - bessel_j(4 * site, x)
}

pub fn vacf_analytic_l2(t: f64, omega: f64) -> f64 {
    vacf_analytic_site(t, omega, 1)
}

fn uniform_step(grid: &[f64]) -> Option<f64> {
    if grid.len() < 2 || grid[0] != 0.0 {
        return None;
    }
    let h = grid[1] - grid[0];
    let ok = grid
        .iter()
        .enumerate()
        .all(|(k, &t)| (t - k as f64 * h).abs() <= 1e-12 * (1.0 + t.abs()));
    ok.then_some(h)
}

/// Rows `e_kᵀ e^{t A}` for every grid time.
fn propagator_rows(a: &DenseMatrix, k: usize, grid: &[f64]) -> Result<Vec<Vec<f64>>> {
    let n = a.rows();
    let mut unit = vec![0.0; n];
    unit[k] = 1.0;
    if let Some(h) = uniform_step(grid) {
        let step_t = linalg::expm(a, h)?.transpose();
        let mut rows = Vec::with_capacity(grid.len());
        let mut r = unit;
        for i in 0..grid.len() {
            if i > 0 {
                r = step_t.mat_vec(&r)?;
            }
            rows.push(r.clone());
        }
        Ok(rows)
    } else {
        grid.iter()
            .map(|&t| linalg::expm(a, t)?.transpose().mat_vec(&unit))
            .collect()
    }
}

/// `C(t) = [e^{tC}]_{kk}` for a momentum coordinate `k` (1-based).
pub fn vacf_matrix_exp(system: &SystemSpec, index: usize, grid: &[f64]) -> Result<Trajectory> {
    system.check_hamiltonian_shape()?;
    let n = system.dim();
    if index == 0 || index > n / 2 {
        return Err(Error::InvalidArgument(format!("index {index} is not a momentum coordinate")));
    }
    let k = index - 1;
    let rows = propagator_rows(&system.a.transpose(), k, grid)?;
    Ok(Trajectory {
        times: grid.to_vec(),
        values: rows.iter().map(|r| r[k]).collect(),
    })
}

/// `⟨x_k(t)⟩ = e_kᵀ e^{tA} ⟨x(0)⟩`.
pub fn exact_mean(system: &SystemSpec, index: usize, grid: &[f64]) -> Result<Trajectory> {
    let n = system.dim();
    if index == 0 || index > n {
        return Err(Error::InvalidArgument(format!("index {index} outside 1..={n}")));
    }
    let rows = propagator_rows(&system.a, index - 1, grid)?;
    Ok(Trajectory {
        times: grid.to_vec(),
        values: rows.iter().map(|r| linalg::dot(r, &system.init_mean)).collect(),
    })
}

/// Sample mean with its standard error at each grid time.
#[derive(Clone, Debug, PartialEq)]
pub struct McMean {
    pub mean: Trajectory,
    pub std_err: Vec<f64>,
    pub n_samples: usize,
    pub seed: u64,
}

/// Monte Carlo mean of `x_k(t)` along exact trajectories. Sample `i` draws
/// from ChaCha8 seeded with `seed` on stream `i`.
pub fn mc_mean<S>(system: &SystemSpec, mut sampler: S, index: usize, grid: &[f64], n_samples: usize, seed: u64) -> Result<McMean>
where
    S: FnMut(&mut ChaCha8Rng) -> Vec<f64>,
{
    let n = system.dim();
    if n_samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    if index == 0 || index > n {
        return Err(Error::InvalidArgument(format!("index {index} outside 1..={n}")));
    }
    let rows = propagator_rows(&system.a, index - 1, grid)?;
    // Welford updates
    let mut mean = vec![0.0; grid.len()];
    let mut m2 = vec![0.0; grid.len()];
    for i in 0..n_samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let x0 = sampler(&mut rng);
        if x0.len() != n {
            return Err(Error::DimensionMismatch(format!("sampler returned {} values for dimension {n}", x0.len())));
        }
        let count = (i + 1) as f64;
        for (k, r) in rows.iter().enumerate() {
            let v = linalg::dot(r, &x0);
            let d = v - mean[k];
            mean[k] += d / count;
            m2[k] += d * (v - mean[k]);
        }
    }
    let ns = n_samples as f64;
    let std_err = if n_samples > 1 {
        m2.iter().map(|q| (q / (ns - 1.0) / ns).sqrt()).collect()
    } else {
        vec![0.0; grid.len()]
    };
    Ok(McMean {
        mean: Trajectory { times: grid.to_vec(), values: mean },
        std_err,
        n_samples,
        seed,
    })
}

/// `∫₀^∞ h(t) e^{−st} dt` by adaptive Gauss–Kronrod over panels of width
/// `panel`, stopping once two consecutive panels add less than `rel_tol`
/// of the running total.
pub fn laplace_quadrature<H>(mut h: H, s: Complex64, panel: f64, rel_tol: f64) -> Result<Complex64>
where
    H: FnMut(f64) -> Result<f64>,
{
    if !(s.re > 0.0) {
        return Err(Error::InvalidArgument(format!("need Re(s) > 0, got {s}")));
    }
    let mut total = Complex64::new(0.0, 0.0);
    let mut quiet = 0;
    for k in 0..10_000 {
        let (a, b) = (k as f64 * panel, (k + 1) as f64 * panel);
        let part = integrate(|t| Ok(h(t)? * (-s * t).exp()), a, b, 1e-15, 0.1 * rel_tol, 2000)?;
        total += part;
        if part.norm() <= 0.1 * rel_tol * total.norm() {
            quiet += 1;
            if quiet == 2 {
                return Ok(total);
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::Inconclusive("Laplace integrand does not decay".into()))
}

/// `∫₀^t ∫₀^{s₁} … ∫₀^{s_{n−1}} h(s_n) ds_n … ds₁` by nested Gauss–Legendre.
pub fn nested_integral<H: Fn(f64) -> f64>(h: &H, n: usize, t: f64, points: usize) -> f64 {
    if n == 0 {
        return h(t);
    }
    let (x, w) = gauss_legendre(points, 0.0, t);
    x.iter().zip(&w).map(|(&s, &wi)| wi * nested_integral(h, n - 1, s, points)).sum()
}

/// `∫₀^t (t − s)^{n−1}/(n−1)! h(s) ds`.
pub fn collapsed_integral<H: Fn(f64) -> f64>(h: &H, n: usize, t: f64, points: usize) -> f64 {
    if n == 0 {
        return h(t);
    }
    let fact: f64 = (1..n).map(|k| k as f64).product();
    let (x, w) = gauss_legendre(points, 0.0, t);
    x.iter().zip(&w).map(|(&s, &wi)| wi * (t - s).powi(n as i32 - 1) / fact * h(s)).sum()
}
