use std::path::{Path, PathBuf};

use mzfaber::kernels::Family;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const OUTPUT_ROOT_VAR: &str = "MZFABER_OUTPUT_ROOT";

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    ChainBethe,
    ChainEr,
    WaveAnnulus,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Projection {
    Chorin,
    Berne,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    /// Autocorrelation (Berne) or mean (Chorin) from the matrix exponential.
    #[default]
    MatrixExp,
    /// `J_0 − J_{4j}` for the pinned `l = 2` chain.
    Analytic,
    MonteCarlo,
    None,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    Free,
    Pinned,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub dt: f64,
    pub t_final: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection { dt: 1e-3, t_final: 10.0 }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChainSection {
    pub l: usize,
    pub shells: Option<usize>,
    /// Path length; only for `l = 2`.
    pub nodes: Option<usize>,
    /// Defaults to pinned for `l = 2` and free otherwise.
    pub boundary: Option<BoundaryKind>,
    pub k: f64,
    pub m: f64,
    /// Divide the spring constant by the coordination number.
    pub normalize: bool,
    /// 1-based tagged site.
    pub site: usize,
}

impl Default for ChainSection {
    fn default() -> Self {
        ChainSection { l: 2, shells: None, nodes: None, boundary: None, k: 1.0, m: 1.0, normalize: true, site: 1 }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct ErSection {
    pub n: usize,
    pub p: f64,
    pub k: f64,
    pub m: f64,
    pub l_norm: Option<usize>,
    pub site: usize,
}

impl Default for ErSection {
    fn default() -> Self {
        ErSection { n: 100, p: 0.1, k: 1.0, m: 1.0, l_norm: None, site: 1 }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct WaveSection {
    pub n_modes: usize,
    pub n_radial: usize,
    pub n_random_modes: usize,
    pub r1: f64,
    pub r2: f64,
    pub sensor_r: f64,
    pub sensor_theta: f64,
    pub mode_mean: f64,
    pub mc_samples: usize,
}

impl Default for WaveSection {
    fn default() -> Self {
        let d = mzfaber::models::WaveModelSpec::default();
        WaveSection {
            n_modes: d.n_modes,
            n_radial: d.n_radial,
            n_random_modes: d.n_random_modes,
            r1: d.r1,
            r2: d.r2,
            sensor_r: d.sensor.0,
            sensor_theta: d.sensor.1,
            mode_mean: d.mode_mean,
            mc_samples: 10_000,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub projection: Projection,
    pub families: Vec<String>,
    pub orders: Vec<usize>,
    #[serde(default)]
    pub oracle: OracleKind,
    pub output_dir: PathBuf,
    pub seed: Option<u64>,
    #[serde(default = "default_padding")]
    pub padding: f64,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub chain: ChainSection,
    #[serde(default)]
    pub erdos_renyi: ErSection,
    #[serde(default)]
    pub wave: WaveSection,
}

fn default_padding() -> f64 {
    mzfaber::faber::DEFAULT_PADDING
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn family_list(&self) -> Result<Vec<Family>, CliError> {
        self.families
            .iter()
            .map(|f| Family::parse(f).map_err(|e| CliError::Config(e.to_string())))
            .collect()
    }

    pub fn is_stochastic(&self) -> bool {
        self.model == ModelKind::ChainEr || self.oracle == OracleKind::MonteCarlo
    }

    pub fn chain_boundary(&self) -> BoundaryKind {
        self.chain
            .boundary
            .unwrap_or(if self.chain.l == 2 { BoundaryKind::Pinned } else { BoundaryKind::Free })
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.families.is_empty() {
            return bad("`families` must not be empty".into());
        }
        let fams = self.family_list()?;
        for (i, f) in fams.iter().enumerate() {
            if fams[..i].contains(f) {
                return bad(format!("family `{}` listed twice", f.name()));
            }
        }
        if self.orders.is_empty() {
            return bad("`orders` must not be empty".into());
        }
        if self.orders.contains(&0) {
            return bad("`orders` must be positive".into());
        }
        if self.orders.windows(2).any(|w| w[1] <= w[0]) {
            return bad(format!("`orders` must be strictly increasing, got {:?}", self.orders));
        }
        if self.is_stochastic() && self.seed.is_none() {
            return bad("`seed` is required for a stochastic model or oracle".into());
        }
        if !(self.padding >= 0.0 && self.padding.is_finite()) {
            return bad(format!("`padding` must be finite and >= 0, got {}", self.padding));
        }
        mzfaber::gle::SolverConfig::new(self.solver.dt, self.solver.t_final)
            .map_err(|e| CliError::Config(format!("[solver] {e}")))?;
        match self.model {
            ModelKind::ChainBethe => {
                let c = &self.chain;
                if c.l < 2 {
                    return bad(format!("[chain] l must be >= 2, got {}", c.l));
                }
                match (c.nodes, c.shells) {
                    (Some(_), Some(_)) => return bad("[chain] give either `nodes` or `shells`, not both".into()),
                    (Some(_), None) if c.l != 2 => return bad("[chain] `nodes` is only valid for l = 2".into()),
                    (None, None) => return bad("[chain] `shells` (or `nodes` for l = 2) is required".into()),
                    _ => {}
                }
                if self.oracle == OracleKind::Analytic && (c.l != 2 || self.chain_boundary() != BoundaryKind::Pinned) {
                    return bad("the analytic oracle needs a pinned l = 2 chain".into());
                }
            }
            ModelKind::ChainEr => {
                if self.oracle == OracleKind::Analytic {
                    return bad("the analytic oracle needs a pinned l = 2 chain".into());
                }
            }
            ModelKind::WaveAnnulus => {
                if self.projection == Projection::Berne {
                    return bad("the wave model has no Hamiltonian (p, q) layout; use `projection = \"chorin\"`".into());
                }
                if self.oracle == OracleKind::Analytic {
                    return bad("the analytic oracle needs a pinned l = 2 chain".into());
                }
                if self.oracle == OracleKind::MonteCarlo && self.wave.mc_samples == 0 {
                    return bad("[wave] mc_samples must be positive".into());
                }
            }
        }
        if self.oracle == OracleKind::MonteCarlo && self.model != ModelKind::WaveAnnulus {
            return bad("the Monte Carlo oracle is only available for wave_annulus".into());
        }
        Ok(())
    }

    /// `output_dir`, placed under `$MZFABER_OUTPUT_ROOT` when that is set and
    /// the path is relative.
    pub fn resolved_output_dir(&self) -> PathBuf {
        resolve_output(&self.output_dir)
    }
}

pub fn resolve_output(dir: &Path) -> PathBuf {
    match std::env::var_os(OUTPUT_ROOT_VAR) {
        Some(root) if dir.is_relative() && !root.is_empty() => PathBuf::from(root).join(dir),
        _ => dir.to_path_buf(),
    }
}
