//! Reduction of a linear system to scalar GLE data and the memory-kernel
//! expansions built from it.
//!
//! For `dx/dt = A x` observed through `x_1`, every projected operator
//! polynomial collapses to vector products with the minor `M11` of `A`:
//!
//! ```text
//! P L p(QL) QL x_1 = [b · p(M11ᵀ) a] x_1 + [p(M11ᵀ) M11ᵀ a] · ⟨x_rest⟩
//! ```
//!
//! with `a` the first row and `b` the first column of `A` minus the diagonal
//! entry. The kernels are then `g(t) = b · e^{t M11ᵀ} a` and
//! `f(t) = (e^{t M11ᵀ} M11ᵀ a) · ⟨x_rest⟩`, expanded in one of four bases.

mod spectral;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::faber::{self, BoundParams, EllipseMap};
use crate::linalg::{self, dot, norm2, DenseMatrix, Spectrum};

pub use spectral::{divided_differences, divided_differences_bidiagonal, divided_differences_recursive, newton_nodes};

/// Relative eigenvalue gap below which the Lagrange basis is refused.
pub const LAGRANGE_GAP: f64 = 1e-8;

/// How the initial statistics enter the projection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StatsKind {
    /// Conditional expectation given `x_1`, unresolved coordinates independent
    /// of `x_1` with known means.
    ChorinInitial,
    /// Equilibrium inner product of a quadratic Hamiltonian in `(p, q)` order,
    /// unit momentum variance; the observable must be a momentum.
    BerneEquilibriumQuadratic,
}

/// `dx/dt = A x` with the mean of `x(0)`.
#[derive(Clone, Debug)]
pub struct SystemSpec {
    pub a: DenseMatrix,
    pub init_mean: Vec<f64>,
    pub stats_kind: StatsKind,
}

impl SystemSpec {
    pub fn new(a: DenseMatrix, init_mean: Vec<f64>, stats_kind: StatsKind) -> Result<Self> {
        let n = a.require_square()?;
        if init_mean.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{n}-dimensional system, mean of length {}",
                init_mean.len()
            )));
        }
        if init_mean.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("initial mean"));
        }
        let s = SystemSpec {
            a,
            init_mean,
            stats_kind,
        };
        if stats_kind == StatsKind::BerneEquilibriumQuadratic {
            s.check_hamiltonian_shape()?;
        }
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    /// `[[0, K], [I/m, 0]]` with `K` symmetric.
    pub fn check_hamiltonian_shape(&self) -> Result<()> {
        let n = self.dim();
        let bad = |why: &str| Err(Error::Unsupported(format!("not a (p, q) Hamiltonian system: {why}")));
        if n == 0 || n % 2 == 1 {
            return bad("odd dimension");
        }
        let h = n / 2;
        let a = &self.a;
        let inv_m = a[(h, 0)];
        if !(inv_m > 0.0) {
            return bad("mass block must be a positive multiple of the identity");
        }
        for i in 0..h {
            for j in 0..h {
                if a[(i, j)] != 0.0 || a[(h + i, h + j)] != 0.0 {
                    return bad("diagonal blocks must vanish");
                }
                let want = if i == j { inv_m } else { 0.0 };
                if a[(h + i, j)] != want {
                    return bad("mass block must be a positive multiple of the identity");
                }
                let (kij, kji) = (a[(i, h + j)], a[(j, h + i)]);
                if (kij - kji).abs() > 1e-12 * (kij.abs() + kji.abs()).max(1.0) {
                    return bad("force block must be symmetric");
                }
            }
        }
        Ok(())
    }
}

/// Everything the kernel formulas need for one observable.
#[derive(Clone, Debug)]
pub struct ReducedData {
    /// Streaming coefficient `A11`.
    pub a: f64,
    /// Streaming constant `avec · ⟨x_rest(0)⟩`.
    pub b: f64,
    pub m11: DenseMatrix,
    pub m11t: DenseMatrix,
    pub avec: Vec<f64>,
    pub bvec: Vec<f64>,
    pub mean_rest: Vec<f64>,
    /// `⟨x_1(0)⟩`.
    pub x1_mean: f64,
    /// 1-based index of the observable in the original system.
    pub observable: usize,
    pub stats_kind: StatsKind,
}

/// Moves `observable_index` (1-based) to the front and splits off `M11`.
pub fn reduce(system: &SystemSpec, observable_index: usize) -> Result<ReducedData> {
    let n = system.dim();
    if observable_index == 0 || observable_index > n {
        return Err(Error::InvalidArgument(format!(
            "observable index {observable_index} outside 1..={n}"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two coordinates".into()));
    }
    let k = observable_index - 1;
    if system.stats_kind == StatsKind::BerneEquilibriumQuadratic && k >= n / 2 {
        return Err(Error::Unsupported(
            "equilibrium projection is implemented for momentum observables only".into(),
        ));
    }
    let perm: Vec<usize> = std::iter::once(k).chain((0..n).filter(|&i| i != k)).collect();
    let a = system.a.permute_symmetric(&perm)?;
    let avec = a.row(0)[1..].to_vec();
    let bvec: Vec<f64> = (1..n).map(|i| a[(i, 0)]).collect();
    let m11 = a.minor(0, 0);
    let m11t = m11.transpose();
    let (mean_rest, x1_mean) = match system.stats_kind {
        StatsKind::ChorinInitial => (
            perm[1..].iter().map(|&i| system.init_mean[i]).collect::<Vec<_>>(),
            system.init_mean[k],
        ),
        StatsKind::BerneEquilibriumQuadratic => (vec![0.0; n - 1], system.init_mean[k]),
    };
    let b = dot(&avec, &mean_rest);
    Ok(ReducedData {
        a: a[(0, 0)],
        b,
        m11,
        m11t,
        avec,
        bvec,
        mean_rest,
        x1_mean,
        observable: observable_index,
        stats_kind: system.stats_kind,
    })
}

impl ReducedData {
    pub fn dim(&self) -> usize {
        self.avec.len()
    }

    /// `M11 ⟨x_rest⟩`, so that `f_j = u · p_j(M11ᵀ) a`.
    fn mean_weight(&self) -> Vec<f64> {
        self.m11.mat_vec(&self.mean_rest).expect("consistent dimensions")
    }

    /// Coefficients `(α, β)` with `P L p(QL) QL x_1 = α x_1 + β` for the
    /// polynomial `p` with monomial coefficients `coeffs`.
    pub fn projected_polynomial(&self, coeffs: &[f64]) -> Result<(f64, f64)> {
        let pa = linalg::poly_apply(&self.m11t, coeffs, &self.avec)?;
        Ok((dot(&self.bvec, &pa), dot(&self.mean_weight(), &pa)))
    }

    /// `g(t) = b · e^{t M11ᵀ} a` and `f(t)` by the matrix exponential.
    pub fn exact_kernel(&self, t: f64) -> Result<(f64, f64)> {
        let e = linalg::expm_apply(&self.m11t, t, &self.avec)?;
        Ok((dot(&self.bvec, &e), dot(&self.mean_weight(), &e)))
    }

    /// Constants of the Faber bound for this reduction.
    ///
    /// `q` comes from `samples` field-of-values boundary points of `M11ᵀ`,
    /// `β` from the logarithmic norm of the full generator.
    pub fn bound_params(&self, generator: &DenseMatrix, map: &EllipseMap, samples: usize) -> Result<BoundParams> {
        let fov = faber::field_of_values_boundary(&self.m11t, samples)?;
        let q = BoundParams::level_enclosing(map, &fov);
        let ma = self.m11t.mat_vec(&self.avec)?;
        let c4 = norm2(&self.bvec) * self.x1_mean.abs();
        let c5 = norm2(&self.mean_rest);
        Ok(BoundParams {
            q,
            k: BoundParams::proof_constant(q, norm2(&self.avec), norm2(&ma), c4, c5),
            beta: faber::log_norm(generator)?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Dyson,
    Faber,
    Lagrange,
    Newton,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Dyson => "dyson",
            Family::Faber => "faber",
            Family::Lagrange => "lagrange",
            Family::Newton => "newton",
        }
    }

    pub fn parse(s: &str) -> Result<Family> {
        match s.to_ascii_lowercase().as_str() {
            "dyson" => Ok(Family::Dyson),
            "faber" => Ok(Family::Faber),
            "lagrange" => Ok(Family::Lagrange),
            "newton" => Ok(Family::Newton),
            other => Err(Error::Parse(format!("unknown expansion family `{other}`"))),
        }
    }
}

/// Temporal basis data for each family.
#[derive(Clone, Debug, PartialEq)]
pub enum ModeParams {
    /// `t^j / j!`.
    Monomial,
    Faber(EllipseMap),
    /// `e^{λ_j t}` with complex weights; the kernel is the real part of the sum.
    Lagrange {
        nodes: Spectrum,
        g: Vec<Complex64>,
        f: Vec<Complex64>,
    },
    /// Divided differences `e[λ_1 … λ_j](t)` with complex weights.
    Newton {
        nodes: Spectrum,
        g: Vec<Complex64>,
        f: Vec<Complex64>,
    },
}

/// A truncated memory-kernel series. For the spectral families `g` and `f`
/// hold the real parts of the complex weights kept in `modes`.
#[derive(Clone, Debug)]
pub struct KernelExpansion {
    pub family: Family,
    pub order: usize,
    pub g: Vec<f64>,
    pub f: Vec<f64>,
    pub modes: ModeParams,
}

/// `g_j = b · (M11ᵀ)^j a`, `f_j = ((M11ᵀ)^{j+1} a) · ⟨x_rest⟩`.
pub fn dyson_coeffs(r: &ReducedData, n: usize) -> Result<KernelExpansion> {
    let u = r.mean_weight();
    let mut w = r.avec.clone();
    let mut g = Vec::with_capacity(n + 1);
    let mut f = Vec::with_capacity(n + 1);
    for j in 0..=n {
        if j > 0 {
            w = r.m11t.mat_vec(&w)?;
        }
        g.push(dot(&r.bvec, &w));
        f.push(dot(&u, &w));
    }
    Ok(KernelExpansion {
        family: Family::Dyson,
        order: n,
        g,
        f,
        modes: ModeParams::Monomial,
    })
}

/// `g_j = b · F_j(M11ᵀ) a`, `f_j = (F_j(M11ᵀ) M11ᵀ a) · ⟨x_rest⟩`.
pub fn faber_coeffs(r: &ReducedData, map: &EllipseMap, n: usize) -> Result<KernelExpansion> {
    let u = r.mean_weight();
    let mut g = Vec::with_capacity(n + 1);
    let mut f = Vec::with_capacity(n + 1);
    faber::faber_recurrence_apply(map, &r.m11t, &r.avec, n)?
        .iter()
        .for_each(|w| {
            g.push(dot(&r.bvec, w));
            f.push(dot(&u, w));
        });
    Ok(KernelExpansion {
        family: Family::Faber,
        order: n,
        g,
        f,
        modes: ModeParams::Faber(*map),
    })
}

/// Eigenvalues of `M11ᵀ` with a containment check against `map`; returns the
/// eigenvalues that fall outside.
pub fn containment_violations(r: &ReducedData, map: &EllipseMap) -> Result<Vec<Complex64>> {
    let s = linalg::eigenvalues(&r.m11t)?;
    Ok(s.iter().copied().filter(|z| !map.contains(*z, 1e-9)).collect())
}

/// Lagrange weights `g_j = b · Π_{k≠j}(M11ᵀ − λ_k)/(λ_j − λ_k) a` over the full
/// spectrum of `M11ᵀ`; `n_full` must equal its dimension.
pub fn lagrange_coeffs(r: &ReducedData, n_full: usize) -> Result<KernelExpansion> {
    if n_full != r.dim() {
        return Err(Error::InvalidArgument(format!(
            "the Lagrange expansion needs all {} eigenvalues, got n_full = {n_full}",
            r.dim()
        )));
    }
    let nodes = newton_nodes(&linalg::eigenvalues(&r.m11t)?);
    let radius = nodes.radius();
    let limit = LAGRANGE_GAP * radius.max(f64::MIN_POSITIVE);
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            let gap = (nodes.values[i] - nodes.values[j]).norm();
            if gap < limit {
                return Err(Error::DegenerateSpectrum { i, j, gap, limit });
            }
        }
    }
    let (g, f) = spectral::lagrange_weights(r, &nodes.values, &r.mean_weight())?;
    Ok(KernelExpansion {
        family: Family::Lagrange,
        order: n_full.saturating_sub(1),
        g: g.iter().map(|z| z.re).collect(),
        f: f.iter().map(|z| z.re).collect(),
        modes: ModeParams::Lagrange {
            nodes,
            g,
            f,
        },
    })
}

/// Newton weights `g_j = b · Π_{k<j}(M11ᵀ − λ_k) a` for the first `n_full`
/// eigenvalues in the order of [`newton_nodes`].
pub fn newton_coeffs(r: &ReducedData, n_full: usize) -> Result<KernelExpansion> {
    if n_full == 0 || n_full > r.dim() {
        return Err(Error::InvalidArgument(format!(
            "n_full must be in 1..={}, got {n_full}",
            r.dim()
        )));
    }
    let all = newton_nodes(&linalg::eigenvalues(&r.m11t)?);
    let nodes = Spectrum::new(all.values[..n_full].to_vec());
    let (g, f) = spectral::newton_weights(r, &nodes.values, &r.mean_weight())?;
    Ok(KernelExpansion {
        family: Family::Newton,
        order: n_full - 1,
        g: g.iter().map(|z| z.re).collect(),
        f: f.iter().map(|z| z.re).collect(),
        modes: ModeParams::Newton { nodes, g, f },
    })
}

impl KernelExpansion {
    /// Builds the expansion of `family` at `order`. The spectral families
    /// ignore `order` and use the full spectrum.
    pub fn build(family: Family, r: &ReducedData, order: usize, map: Option<&EllipseMap>) -> Result<Self> {
        match family {
            Family::Dyson => dyson_coeffs(r, order),
            Family::Faber => {
                let owned;
                let map = match map {
                    Some(m) => m,
                    None => {
                        owned = faber::fit_faber_map(&linalg::eigenvalues(&r.m11t)?, faber::DEFAULT_PADDING)?;
                        &owned
                    }
                };
                faber_coeffs(r, map, order)
            }
            Family::Lagrange => lagrange_coeffs(r, r.dim()),
            Family::Newton => newton_coeffs(r, r.dim()),
        }
    }

    pub fn eval(&self, t: f64) -> Result<(f64, f64)> {
        kernel_eval(self, t)
    }
}

/// `(g(t), f(t)) = Σ_j (g_j, f_j) h_j(t)`.
pub fn kernel_eval(k: &KernelExpansion, t: f64) -> Result<(f64, f64)> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("time must be >= 0, got {t}")));
    }
    match &k.modes {
        ModeParams::Monomial => {
            let (mut g, mut f, mut h) = (0.0, 0.0, 1.0);
            for j in 0..k.g.len() {
                if j > 0 {
                    h *= t / j as f64;
                }
                g += k.g[j] * h;
                f += k.f[j] * h;
            }
            Ok((g, f))
        }
        ModeParams::Faber(map) => {
            let mut h = vec![0.0; k.g.len()];
            faber::faber_modes_into(map, t, &mut h)?;
            Ok((dot(&k.g, &h), dot(&k.f, &h)))
        }
        ModeParams::Lagrange { nodes, g, f } => {
            let mut acc = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for (j, lam) in nodes.iter().enumerate() {
                let e = (lam * t).exp();
                acc.0 += g[j] * e;
                acc.1 += f[j] * e;
            }
            Ok((acc.0.re, acc.1.re))
        }
        ModeParams::Newton { nodes, g, f } => {
            let dd = divided_differences(&nodes.values, t)?;
            let mut acc = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for j in 0..dd.len() {
                acc.0 += g[j] * dd[j];
                acc.1 += f[j] * dd[j];
            }
            Ok((acc.0.re, acc.1.re))
        }
    }
}

/// Laplace transform `G(s) = ∫₀^∞ g(t) e^{−st} dt` of the truncated series.
///
/// Dyson: `Σ g_j / s^{j+1}`. Faber: with `s' = s − c0` and
/// `R = √(s'² − 4c1)` (principal branch), `Σ g_j (2/(s' + R))^j / R`.
pub fn laplace_g(k: &KernelExpansion, s: Complex64) -> Result<Complex64> {
    if !(s.re > 0.0) {
        return Err(Error::InvalidArgument(format!("need Re(s) > 0, got {s}")));
    }
    match &k.modes {
        ModeParams::Monomial => {
            let inv = 1.0 / s;
            let mut p = inv;
            let mut acc = Complex64::new(0.0, 0.0);
            for &gj in &k.g {
                acc += gj * p;
                p *= inv;
            }
            Ok(acc)
        }
        ModeParams::Faber(map) => {
            let sp = s - map.c0;
            let root = (sp * sp - 4.0 * map.c1).sqrt();
            let ratio = 2.0 / (sp + root);
            let mut p = 1.0 / root;
            let mut acc = Complex64::new(0.0, 0.0);
            for &gj in &k.g {
                acc += gj * p;
                p *= ratio;
            }
            Ok(acc)
        }
        _ => Err(Error::Unsupported(format!(
            "Laplace series for the {} family",
            k.family.name()
        ))),
    }
}
