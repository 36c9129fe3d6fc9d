//! Spectral Galerkin model of the wave equation on an annulus with
//! homogeneous Dirichlet walls and random initial displacement.
//!
//! Basis `ψ_(i,κ)(r, θ) = sin(iπ(r − r1)/(r2 − r1)) · Θ_κ(θ)` with
//! `Θ ∈ {1, cos θ, sin θ, …, cos Jθ, sin Jθ}`, ordered angular-major:
//! all radial indices for `Θ = 1`, then for `cos θ`, and so on.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::kernels::{StatsKind, SystemSpec};
use crate::linalg::scalar::{norm_one, Lu};
use crate::linalg::DenseMatrix;
use crate::quadrature::gauss_legendre;

const MAX_CONDITION: f64 = 1e12;
const MIN_RADIAL_POINTS: usize = 128;

#[derive(Clone, Debug, PartialEq)]
pub struct WaveModelSpec {
    /// Total basis size `N = n_radial · (2J + 1)`.
    pub n_modes: usize,
    pub n_radial: usize,
    /// Modes `1..=M` carry random initial amplitudes.
    pub n_random_modes: usize,
    pub r1: f64,
    pub r2: f64,
    /// `(r, θ)`.
    pub sensor: (f64, f64),
    pub rng_seed: u64,
    /// Mean of each random amplitude; the variance is one.
    pub mode_mean: f64,
}

impl Default for WaveModelSpec {
    fn default() -> Self {
        WaveModelSpec {
            n_modes: 45,
            n_radial: 5,
            n_random_modes: 25,
            r1: 1.0,
            r2: 11.0,
            sensor: (1.1, 0.1),
            rng_seed: 0,
            mode_mean: 0.0,
        }
    }
}

impl WaveModelSpec {
    /// Highest angular wavenumber `J`.
    pub fn max_wavenumber(&self) -> Result<usize> {
        if self.n_radial == 0 || !self.n_modes.is_multiple_of(self.n_radial) || (self.n_modes / self.n_radial).is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "n_modes = {} must be n_radial = {} times an odd number of angular functions",
                self.n_modes, self.n_radial
            )));
        }
        Ok((self.n_modes / self.n_radial - 1) / 2)
    }

    fn validate(&self) -> Result<usize> {
        let j = self.max_wavenumber()?;
        if !(self.r1 > 0.0 && self.r1 < self.r2 && self.r2.is_finite()) {
            return Err(Error::InvalidArgument(format!("need 0 < r1 < r2, got {} and {}", self.r1, self.r2)));
        }
        if self.n_random_modes > self.n_modes {
            return Err(Error::InvalidArgument(format!(
                "{} random modes exceed the basis size {}",
                self.n_random_modes, self.n_modes
            )));
        }
        let (r, th) = self.sensor;
        if !(r > self.r1 && r < self.r2 && th.is_finite()) {
            return Err(Error::InvalidArgument(format!("sensor radius {r} not strictly inside the annulus")));
        }
        if !self.mode_mean.is_finite() {
            return Err(Error::NonFinite("mode mean"));
        }
        Ok(j)
    }
}

/// Galerkin matrices and nodal data.
#[derive(Clone, Debug)]
pub struct WaveModel {
    pub spec: WaveModelSpec,
    /// Modal Galerkin matrix `A`, `d²ŵ/dt² = A ŵ`.
    pub galerkin: DenseMatrix,
    /// `Ψ_{kn} = ψ_n(x_k)`.
    pub psi: DenseMatrix,
    pub psi_inv: DenseMatrix,
    /// `B = Ψ A Ψ⁻¹`.
    pub nodal: DenseMatrix,
    /// Collocation nodes `(r, θ)`.
    pub nodes: Vec<(f64, f64)>,
    /// 0-based node closest to the sensor and its distance from it.
    pub sensor_node: usize,
    pub sensor_offset: f64,
    /// `[[0, I], [B, 0]]` over `(w, dw/dt)`.
    pub system: SystemSpec,
}

impl WaveModel {
    /// 1-based observable index of the sensor amplitude in `system`.
    pub fn observable(&self) -> usize {
        self.sensor_node + 1
    }

    /// `ψ_n(r, θ)` for 0-based `n`.
    pub fn basis(&self, n: usize, r: f64, theta: f64) -> f64 {
        let (i, kind) = mode_index(n, self.spec.n_radial);
        radial(i, r, self.spec.r1, self.spec.r2).0 * angular(kind, theta).0
    }

    pub fn sampler(&self) -> WaveSampler {
        WaveSampler {
            psi: self.psi.clone(),
            n_random: self.spec.n_random_modes,
            mean: self.spec.mode_mean,
        }
    }
}

/// Draws full initial states `(Ψŵ, 0)`.
#[derive(Clone, Debug)]
pub struct WaveSampler {
    psi: DenseMatrix,
    n_random: usize,
    mean: f64,
}

impl WaveSampler {
    pub fn dim(&self) -> usize {
        2 * self.psi.rows()
    }

    /// Modal amplitudes: `mean + N(0, 1)` for the first `M`, zero after.
    pub fn sample_modes(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let n = self.psi.rows();
        (0..n)
            .map(|k| {
                if k < self.n_random {
                    let z: f64 = StandardNormal.sample(rng);
                    self.mean + z
                } else {
                    0.0
                }
            })
            .collect()
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.lift(&self.sample_modes(rng))
    }

    /// `E[x(0)]`.
    pub fn mean_state(&self) -> Vec<f64> {
        let n = self.psi.rows();
        let modes: Vec<f64> = (0..n).map(|k| if k < self.n_random { self.mean } else { 0.0 }).collect();
        self.lift(&modes)
    }

    fn lift(&self, modes: &[f64]) -> Vec<f64> {
        let mut x = self.psi.mat_vec(modes).expect("consistent dimensions");
        x.resize(2 * modes.len(), 0.0);
        x
    }

    pub fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }
}

/// `(radial index ≥ 1, angular kind)`; kind 0 is the constant, `2j − 1`
/// is `cos jθ` and `2j` is `sin jθ`.
fn mode_index(n: usize, n_radial: usize) -> (usize, usize) {
    (n % n_radial + 1, n / n_radial)
}

/// `(S, S', S'')` of `sin(iπ(r − r1)/(r2 − r1))`.
fn radial(i: usize, r: f64, r1: f64, r2: f64) -> (f64, f64, f64) {
    let k = i as f64 * PI / (r2 - r1);
    let (s, c) = (k * (r - r1)).sin_cos();
    (s, k * c, -k * k * s)
}

/// `(Θ, wavenumber)`.
fn angular(kind: usize, theta: f64) -> (f64, usize) {
    if kind == 0 {
        return (1.0, 0);
    }
    let j = kind.div_ceil(2);
    let v = if kind % 2 == 1 { (j as f64 * theta).cos() } else { (j as f64 * theta).sin() };
    (v, j)
}

pub fn build_wave_model(spec: &WaveModelSpec) -> Result<WaveModel> {
    let jmax = spec.validate()?;
    let n = spec.n_modes;
    let nr = spec.n_radial;
    let n_ang = 2 * jmax + 1;

    let (rq, rw) = gauss_legendre(MIN_RADIAL_POINTS.max(4 * nr), spec.r1, spec.r2);
    let n_theta = 4 * jmax + 4;
    let thetas: Vec<f64> = (0..n_theta).map(|k| 2.0 * PI * k as f64 / n_theta as f64).collect();
    let wt = 2.0 * PI / n_theta as f64;

    // Tabulate radial values and angular values on the quadrature grids.
    let rad: Vec<Vec<(f64, f64, f64)>> = (1..=nr).map(|i| rq.iter().map(|&r| radial(i, r, spec.r1, spec.r2)).collect()).collect();
    let ang: Vec<Vec<f64>> = (0..n_ang).map(|kind| thetas.iter().map(|&t| angular(kind, t).0).collect()).collect();

    let mut a = vec![0.0; n * n];
    for m in 0..n {
        let (im, km) = mode_index(m, nr);
        let norm = {
            let rr: f64 = rad[im - 1].iter().zip(&rw).map(|(v, w)| w * v.0 * v.0).sum();
            let aa: f64 = ang[km].iter().map(|v| wt * v * v).sum();
            rr * aa
        };
        for col in 0..n {
            let (ic, kc) = mode_index(col, nr);
            let (_, jc) = angular(kc, 0.0);
            let ang_prod: f64 = ang[kc].iter().zip(&ang[km]).map(|(x, y)| wt * x * y).sum();
            if ang_prod.abs() < 1e-14 {
                continue;
            }
            let mut rad_int = 0.0;
            for (q, (&r, &w)) in rq.iter().zip(&rw).enumerate() {
                let (s, ds, d2s) = rad[ic - 1][q];
                let lap = d2s + ds / r - (jc * jc) as f64 * s / (r * r);
                rad_int += w * lap * rad[im - 1][q].0;
            }
            a[m * n + col] = rad_int * ang_prod / norm;
        }
    }
    let galerkin = DenseMatrix::new(n, n, a)?;

    let h = (spec.r2 - spec.r1) / (nr + 1) as f64;
    let (_, th0) = spec.sensor;
    let mut nodes = Vec::with_capacity(n);
    for ka in 0..n_ang {
        for kr in 1..=nr {
            nodes.push((spec.r1 + kr as f64 * h, th0 + 2.0 * PI * ka as f64 / n_ang as f64));
        }
    }
    let psi = DenseMatrix::from_fn(n, n, |k, col| {
        let (i, kind) = mode_index(col, nr);
        let (r, th) = nodes[k];
        radial(i, r, spec.r1, spec.r2).0 * angular(kind, th).0
    })?;
    let lu = Lu::factor(psi.data().to_vec(), n)?;
    let inv = lu.inverse();
    let cond = psi.norm_one() * norm_one(&inv, n, n);
    if !(cond <= MAX_CONDITION) {
        return Err(Error::IllConditioned(cond));
    }
    let psi_inv = DenseMatrix::new(n, n, inv)?;
    let nodal = psi.matmul(&galerkin)?.matmul(&psi_inv)?;

    let (sr, st) = spec.sensor;
    let (sx, sy) = (sr * st.cos(), sr * st.sin());
    let (sensor_node, sensor_offset) = nodes
        .iter()
        .map(|&(r, t)| (r * t.cos() - sx).hypot(r * t.sin() - sy))
        .enumerate()
        .fold((0, f64::INFINITY), |best, (k, d)| if d < best.1 { (k, d) } else { best });

    let doubled = DenseMatrix::from_fn(2 * n, 2 * n, |i, j| {
        if i < n && j == i + n {
            1.0
        } else if i >= n && j < n {
            nodal[(i - n, j)]
        } else {
            0.0
        }
    })?;
    let sampler_mean = WaveSampler {
        psi: psi.clone(),
        n_random: spec.n_random_modes,
        mean: spec.mode_mean,
    }
    .mean_state();
    let system = SystemSpec::new(doubled, sampler_mean, StatsKind::ChorinInitial)?;
    Ok(WaveModel {
        spec: spec.clone(),
        galerkin,
        psi,
        psi_inv,
        nodal,
        nodes,
        sensor_node,
        sensor_offset,
        system,
    })
}
