//! Explicit solver for the scalar Volterra integro-differential equation
//!
//! ```text
//! dy/dt = a y + b + ∫₀ᵗ g(t−s) y(s) ds + ∫₀ᵗ f(t−s) ds
//! ```
//!
//! Third-order Adams–Bashforth in time, composite trapezoid for both
//! integrals, two classical Runge–Kutta steps to build the history.

use crate::error::{Error, Result};
use crate::kernels::{kernel_eval, KernelExpansion};

/// Anything that yields `(g(t), f(t))` for `t ≥ 0`.
pub trait MemoryKernel {
    fn eval(&self, t: f64) -> Result<(f64, f64)>;
}

impl MemoryKernel for KernelExpansion {
    fn eval(&self, t: f64) -> Result<(f64, f64)> {
        kernel_eval(self, t)
    }
}

impl<F: Fn(f64) -> (f64, f64)> MemoryKernel for F {
    fn eval(&self, t: f64) -> Result<(f64, f64)> {
        Ok(self(t))
    }
}

/// No memory at all.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoMemory;

impl MemoryKernel for NoMemory {
    fn eval(&self, _t: f64) -> Result<(f64, f64)> {
        Ok((0.0, 0.0))
    }
}

#[derive(Clone, Debug)]
pub struct GleProblem<K> {
    pub a: f64,
    pub b: f64,
    pub kernel: K,
}

pub type ReducedModel = GleProblem<KernelExpansion>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Startup {
    #[default]
    Rk4,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_final: f64,
    pub startup: Startup,
}

impl SolverConfig {
    pub fn new(dt: f64, t_final: f64) -> Result<Self> {
        let cfg = SolverConfig {
            dt,
            t_final,
            startup: Startup::Rk4,
        };
        cfg.steps()?;
        Ok(cfg)
    }

    /// Number of steps; `t_final / dt` must be whole up to rounding.
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0 && self.t_final > 0.0) || !self.dt.is_finite() || !self.t_final.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "dt and t_final must be positive, got dt = {}, t_final = {}",
                self.dt, self.t_final
            )));
        }
        let k = (self.t_final / self.dt).round();
        if (k * self.dt - self.t_final).abs() > 1e-9 * self.t_final || k < 1.0 {
            return Err(Error::InvalidArgument(format!(
                "t_final = {} is not a whole number of steps of {}",
                self.t_final, self.dt
            )));
        }
        Ok(k as usize)
    }
}

/// Uniformly spaced samples of a scalar trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs_diff(&self, other: &Trajectory) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch(format!(
                "trajectories of length {} and {}",
                self.len(),
                other.len()
            )));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

pub fn grid(cfg: &SolverConfig) -> Result<Vec<f64>> {
    let k = cfg.steps()?;
    Ok((0..=k).map(|i| i as f64 * cfg.dt).collect())
}

struct Tables {
    g: Vec<f64>,
    /// `∫₀^{t_k} f` by cumulative trapezoid.
    fint: Vec<f64>,
    f: Vec<f64>,
}

fn tabulate<K: MemoryKernel>(kernel: &K, dt: f64, k: usize) -> Result<Tables> {
    let mut g = Vec::with_capacity(k + 1);
    let mut f = Vec::with_capacity(k + 1);
    for i in 0..=k {
        let (gi, fi) = kernel.eval(i as f64 * dt)?;
        g.push(gi);
        f.push(fi);
    }
    let mut fint = vec![0.0; k + 1];
    for i in 1..=k {
        fint[i] = fint[i - 1] + 0.5 * dt * (f[i - 1] + f[i]);
    }
    Ok(Tables { g, fint, f })
}

/// Trapezoid `∫₀^{t_n} g(t_n − s) y(s) ds` over the stored history `y[..=n]`.
fn memory_at_node(g: &[f64], y: &[f64], n: usize, dt: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let mut acc = 0.5 * (g[n] * y[0] + g[0] * y[n]);
    for k in 1..n {
        acc += g[n - k] * y[k];
    }
    dt * acc
}

/// Right-hand side at `t_n + dt/2` with the stage value `ys` at that time.
fn rhs_half_step<K: MemoryKernel>(
    p: &GleProblem<K>,
    tab: &Tables,
    y: &[f64],
    n: usize,
    dt: f64,
    ys: f64,
) -> Result<f64> {
    let tau = (n as f64 + 0.5) * dt;
    let mut mem = 0.0;
    if n > 0 {
        let (g_first, _) = p.kernel.eval(tau)?;
        let mut acc = 0.5 * g_first * y[0];
        for k in 1..n {
            acc += p.kernel.eval(tau - k as f64 * dt)?.0 * y[k];
        }
        let (g_last, _) = p.kernel.eval(0.5 * dt)?;
        acc += 0.5 * g_last * y[n];
        mem += dt * acc;
    }
    // partial panel [t_n, τ]
    let (g_half, f_half) = p.kernel.eval(0.5 * dt)?;
    mem += 0.25 * dt * (g_half * y[n] + tab.g[0] * ys);
    let fint = tab.fint[n] + 0.25 * dt * (tab.f[n] + f_half);
    Ok(p.a * ys + p.b + mem + fint)
}

/// Right-hand side at `t_{n+1}` with a trial value `y1` in place of `y[n+1]`.
fn rhs_full_step(p_a: f64, p_b: f64, tab: &Tables, y: &[f64], n: usize, dt: f64, y1: f64) -> f64 {
    let m = n + 1;
    let mut acc = 0.5 * (tab.g[m] * y[0] + tab.g[0] * y1);
    for k in 1..m {
        acc += tab.g[m - k] * y[k];
    }
    p_a * y1 + p_b + dt * acc + tab.fint[m]
}

pub fn solve_gle<K: MemoryKernel>(p: &GleProblem<K>, y0: f64, cfg: &SolverConfig) -> Result<Trajectory> {
    let steps = cfg.steps()?;
    let dt = cfg.dt;
    let tab = tabulate(&p.kernel, dt, steps)?;
    let mut y = Vec::with_capacity(steps + 1);
    y.push(y0);
    let mut rhs: Vec<f64> = Vec::with_capacity(steps + 1);
    rhs.push(p.a * y0 + p.b + memory_at_node(&tab.g, &y, 0, dt) + tab.fint[0]);

    for n in 0..steps {
        let next = if n < 2 {
            let k1 = rhs[n];
            let k2 = rhs_half_step(p, &tab, &y, n, dt, y[n] + 0.5 * dt * k1)?;
            let k3 = rhs_half_step(p, &tab, &y, n, dt, y[n] + 0.5 * dt * k2)?;
            let k4 = rhs_full_step(p.a, p.b, &tab, &y, n, dt, y[n] + dt * k3);
            y[n] + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        } else {
            y[n] + dt / 12.0 * (23.0 * rhs[n] - 16.0 * rhs[n - 1] + 5.0 * rhs[n - 2])
        };
        if !next.is_finite() {
            return Err(Error::BlowUp { last_valid_step: n });
        }
        y.push(next);
        let m = n + 1;
        rhs.push(p.a * next + p.b + memory_at_node(&tab.g, &y, m, dt) + tab.fint[m]);
    }
    Ok(Trajectory {
        times: (0..=steps).map(|i| i as f64 * dt).collect(),
        values: y,
    })
}

/// `dy/dt = a y + b` by the same RK4 start and AB3 steps.
pub fn solve_ode_ab3(a: f64, b: f64, y0: f64, cfg: &SolverConfig) -> Result<Trajectory> {
    let steps = cfg.steps()?;
    let dt = cfg.dt;
    let f = |y: f64| a * y + b + 0.0 + 0.0;
    let mut y = vec![y0];
    let mut rhs = vec![f(y0)];
    for n in 0..steps {
        let next = if n < 2 {
            let k1 = rhs[n];
            let k2 = f(y[n] + 0.5 * dt * k1);
            let k3 = f(y[n] + 0.5 * dt * k2);
            let k4 = f(y[n] + dt * k3);
            y[n] + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        } else {
            y[n] + dt / 12.0 * (23.0 * rhs[n] - 16.0 * rhs[n - 1] + 5.0 * rhs[n - 2])
        };
        if !next.is_finite() {
            return Err(Error::BlowUp { last_valid_step: n });
        }
        y.push(next);
        rhs.push(f(next));
    }
    Ok(Trajectory {
        times: (0..=steps).map(|i| i as f64 * dt).collect(),
        values: y,
    })
}

/// Least-squares slope of `log(max error)` against `log(dt)` over a
/// geometric sequence of step sizes.
pub fn observed_order<K: MemoryKernel>(
    p: &GleProblem<K>,
    y0: f64,
    cfgs: &[SolverConfig],
    reference: impl Fn(f64) -> f64,
) -> Result<f64> {
    if cfgs.len() < 3 {
        return Err(Error::InvalidArgument("need at least three step sizes".into()));
    }
    let ratio = cfgs[0].dt / cfgs[1].dt;
    for w in cfgs.windows(2) {
        if ((w[0].dt / w[1].dt) / ratio - 1.0).abs() > 1e-9 || ratio <= 1.0 {
            return Err(Error::InvalidArgument("step sizes must shrink geometrically".into()));
        }
    }
    let mut errs = Vec::with_capacity(cfgs.len());
    for cfg in cfgs {
        let tr = solve_gle(p, y0, cfg)?;
        let e = tr
            .times
            .iter()
            .zip(&tr.values)
            .map(|(&t, &v)| (v - reference(t)).abs())
            .fold(0.0, f64::max);
        errs.push(e);
    }
    if errs.windows(2).any(|w| !(w[1] < w[0])) || errs.contains(&0.0) {
        return Err(Error::Inconclusive(format!("errors do not decrease: {errs:?}")));
    }
    let xs: Vec<f64> = cfgs.iter().map(|c| c.dt.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}
