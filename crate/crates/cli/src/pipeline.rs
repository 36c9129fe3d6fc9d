use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use mzfaber::faber::{fit_faber_map, EllipseMap};
use mzfaber::gle::{grid, solve_gle, GleProblem, SolverConfig, Trajectory};
use mzfaber::io::{kernel_coefficient_table, trajectory_table, Table};
use mzfaber::kernels::{reduce, Family, KernelExpansion, ReducedData, StatsKind, SystemSpec};
use mzfaber::linalg::eigenvalues;
use mzfaber::models::{
    build_bethe, build_chain_system, build_erdos_renyi, build_path, build_wave_model, Boundary, WaveModelSpec,
    WaveSampler,
};
use mzfaber::oracles::{exact_mean, mc_mean, vacf_analytic_site, vacf_matrix_exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{BoundaryKind, ExperimentConfig, ModelKind, OracleKind, Projection};
use crate::CliError;

pub struct Prepared {
    pub system: SystemSpec,
    /// 1-based.
    pub observable: usize,
    pub reduced: ReducedData,
    pub y0: f64,
    pub solver: SolverConfig,
    pub grid: Vec<f64>,
    pub map: Option<EllipseMap>,
    pub sampler: Option<WaveSampler>,
    /// `(ω, site)` for the analytic chain correlation.
    pub analytic: Option<(f64, usize)>,
    pub model_info: serde_json::Value,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RunRecord {
    pub family: String,
    pub order: usize,
    pub status: String,
    pub dir: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub message: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub l2_error: Option<f64>,
}

impl RunRecord {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Summary {
    pub command: String,
    pub model: ModelKind,
    pub projection: Projection,
    pub oracle: OracleKind,
    pub seed: Option<u64>,
    pub dt: f64,
    pub t_final: f64,
    pub dimension: usize,
    pub observable: usize,
    pub y0: f64,
    pub model_info: serde_json::Value,
    pub map: Option<serde_json::Value>,
    pub runs: Vec<RunRecord>,
}

fn with_stats(sys: SystemSpec, projection: Projection) -> Result<SystemSpec, CliError> {
    let kind = match projection {
        Projection::Berne => StatsKind::BerneEquilibriumQuadratic,
        Projection::Chorin => StatsKind::ChorinInitial,
    };
    let n = sys.dim();
    Ok(SystemSpec::new(sys.a, vec![0.0; n], kind)?)
}

fn chain_site(site: usize, n_nodes: usize) -> Result<usize, CliError> {
    if site == 0 || site > n_nodes {
        return Err(CliError::Config(format!("site {site} outside 1..={n_nodes}")));
    }
    Ok(site)
}

pub fn prepare(cfg: &ExperimentConfig, need_map: bool) -> Result<Prepared, CliError> {
    let solver = SolverConfig::new(cfg.solver.dt, cfg.solver.t_final).map_err(|e| CliError::Config(e.to_string()))?;
    let grid = grid(&solver)?;
    let mut sampler = None;
    let mut analytic = None;
    let (system, observable, model_info) = match cfg.model {
        ModelKind::ChainBethe => {
            let c = &cfg.chain;
            let g = match c.nodes {
                Some(n) => build_path(n)?,
                None => build_bethe(c.l, c.shells.unwrap_or(0))?,
            };
            let boundary = match cfg.chain_boundary() {
                BoundaryKind::Free => Boundary::Free,
                BoundaryKind::Pinned => Boundary::Pinned { coordination: c.l },
            };
            let l_norm = c.normalize.then_some(c.l);
            let sys = with_stats(build_chain_system(&g, c.k, c.m, l_norm, boundary)?, cfg.projection)?;
            let site = chain_site(c.site, g.n_nodes)?;
            if cfg.oracle == OracleKind::Analytic {
                let kappa = if c.normalize { 2.0 * c.k / c.l as f64 } else { c.k };
                analytic = Some(((kappa / c.m).sqrt(), site));
            }
            let info = json!({ "nodes": g.n_nodes, "edges": g.edge_count(), "site": site });
            (sys, site, info)
        }
        ModelKind::ChainEr => {
            let e = &cfg.erdos_renyi;
            let g = build_erdos_renyi(e.n, e.p, cfg.seed.unwrap_or(0))?;
            let sys = with_stats(build_chain_system(&g, e.k, e.m, e.l_norm, Boundary::Free)?, cfg.projection)?;
            let site = chain_site(e.site, g.n_nodes)?;
            let info = json!({ "nodes": g.n_nodes, "edges": g.edge_count(), "site": site });
            (sys, site, info)
        }
        ModelKind::WaveAnnulus => {
            let w = &cfg.wave;
            let spec = WaveModelSpec {
                n_modes: w.n_modes,
                n_radial: w.n_radial,
                n_random_modes: w.n_random_modes,
                r1: w.r1,
                r2: w.r2,
                sensor: (w.sensor_r, w.sensor_theta),
                rng_seed: cfg.seed.unwrap_or(0),
                mode_mean: w.mode_mean,
            };
            let model = build_wave_model(&spec)?;
            let node = model.nodes[model.sensor_node];
            let info = json!({
                "modes": w.n_modes,
                "sensor_node": model.observable(),
                "sensor_node_position": [node.0, node.1],
                "sensor_offset": model.sensor_offset,
            });
            sampler = Some(model.sampler());
            let mean = model.sampler().mean_state();
            let sys = SystemSpec::new(model.system.a.clone(), mean, StatsKind::ChorinInitial)?;
            (sys, model.observable(), info)
        }
    };
    let reduced = reduce(&system, observable)?;
    let y0 = match cfg.projection {
        Projection::Berne => 1.0,
        Projection::Chorin => reduced.x1_mean,
    };
    let map = if need_map { Some(fit_faber_map(&eigenvalues(&reduced.m11t)?, cfg.padding)?) } else { None };
    Ok(Prepared { system, observable, reduced, y0, solver, grid, map, sampler, analytic, model_info })
}

pub struct OracleOutput {
    pub trajectory: Trajectory,
    pub std_err: Option<Vec<f64>>,
    pub meta: serde_json::Value,
}

pub fn compute_oracle(cfg: &ExperimentConfig, p: &Prepared) -> Result<Option<OracleOutput>, CliError> {
    let out = match cfg.oracle {
        OracleKind::None => return Ok(None),
        OracleKind::MatrixExp => {
            let trajectory = match cfg.projection {
                Projection::Berne => vacf_matrix_exp(&p.system, p.observable, &p.grid)?,
                Projection::Chorin => exact_mean(&p.system, p.observable, &p.grid)?,
            };
            OracleOutput { trajectory, std_err: None, meta: json!({ "kind": "matrix_exp" }) }
        }
        OracleKind::Analytic => {
            let (omega, site) = p.analytic.ok_or_else(|| CliError::Config("analytic oracle unavailable".into()))?;
            let values = p.grid.iter().map(|&t| vacf_analytic_site(t, omega, site)).collect();
            OracleOutput {
                trajectory: Trajectory { times: p.grid.clone(), values },
                std_err: None,
                meta: json!({ "kind": "analytic", "omega": omega, "site": site }),
            }
        }
        OracleKind::MonteCarlo => {
            let sampler = p.sampler.as_ref().ok_or_else(|| CliError::Config("model has no sampler".into()))?;
            let seed = cfg.seed.ok_or_else(|| CliError::Config("`seed` is required".into()))?;
            let n = cfg.wave.mc_samples;
            let mc = mc_mean(&p.system, |rng| sampler.sample(rng), p.observable, &p.grid, n, seed)?;
            OracleOutput {
                trajectory: mc.mean,
                std_err: Some(mc.std_err),
                meta: json!({ "kind": "monte_carlo", "n_samples": mc.n_samples, "seed": mc.seed }),
            }
        }
    };
    Ok(Some(out))
}

/// `(family, order)` jobs; Lagrange always uses the full spectrum and runs once,
/// Newton takes the first `order + 1` interpolation nodes.
pub fn jobs(cfg: &ExperimentConfig, dim: usize) -> Result<Vec<(Family, usize)>, CliError> {
    let mut out = Vec::new();
    for f in cfg.family_list()? {
        match f {
            Family::Lagrange => out.push((f, dim.saturating_sub(1))),
            Family::Newton => {
                let mut orders: Vec<usize> = cfg.orders.iter().map(|&n| n.min(dim.saturating_sub(1))).collect();
                orders.dedup();
                out.extend(orders.into_iter().map(|n| (f, n)));
            }
            _ => out.extend(cfg.orders.iter().map(|&n| (f, n))),
        }
    }
    Ok(out)
}

pub fn run_dir_name(family: Family, order: usize) -> String {
    format!("{}_n{order}", family.name())
}

pub fn build_kernel(p: &Prepared, family: Family, order: usize) -> mzfaber::Result<KernelExpansion> {
    match family {
        Family::Newton => mzfaber::kernels::newton_coeffs(&p.reduced, order + 1),
        _ => KernelExpansion::build(family, &p.reduced, order, p.map.as_ref()),
    }
}

pub fn error_metrics(values: &[f64], reference: &[f64], dt: f64) -> (Vec<f64>, f64, f64) {
    let err: Vec<f64> = values.iter().zip(reference).map(|(a, b)| (a - b).abs()).collect();
    let max = err.iter().copied().fold(0.0, f64::max);
    let l2 = (err.iter().map(|e| e * e).sum::<f64>() * dt).sqrt();
    (err, max, l2)
}

pub fn write_table(path: &Path, table: &Table) -> Result<(), CliError> {
    let f = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    table.write_csv(BufWriter::new(f))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn oracle_table(o: &OracleOutput) -> Table {
    let mut t = trajectory_table(&o.trajectory, "value");
    if let Some(se) = &o.std_err {
        t.headers.push("std_err".into());
        t.columns.push(se.clone());
    }
    t
}

fn write_oracle(out: &Path, o: &OracleOutput) -> Result<(), CliError> {
    write_table(&out.join("oracle.csv"), &oracle_table(o))?;
    write_json(&out.join("oracle.json"), &o.meta)
}

fn map_json(map: &Option<EllipseMap>) -> Option<serde_json::Value> {
    map.map(|m| {
        json!({
            "c0": m.c0, "c1": m.c1, "capacity": m.capacity,
            "semi_real": m.semi_real, "semi_imag": m.semi_imag,
        })
    })
}

fn summary(cfg: &ExperimentConfig, p: &Prepared, command: &str, runs: Vec<RunRecord>) -> Summary {
    Summary {
        command: command.into(),
        model: cfg.model,
        projection: cfg.projection,
        oracle: cfg.oracle,
        seed: cfg.seed,
        dt: p.solver.dt,
        t_final: p.solver.t_final,
        dimension: p.system.dim(),
        observable: p.observable,
        y0: p.y0,
        model_info: p.model_info.clone(),
        map: map_json(&p.map),
        runs,
    }
}

fn failed(family: Family, order: usize, dir: String, e: impl std::fmt::Display) -> RunRecord {
    RunRecord {
        family: family.name().into(),
        order,
        status: "failed".into(),
        dir,
        message: Some(e.to_string()),
        max_error: None,
        l2_error: None,
    }
}

fn one_run(out: &Path, p: &Prepared, oracle: Option<&OracleOutput>, family: Family, order: usize) -> RunRecord {
    let name = run_dir_name(family, order);
    let dir_rel = format!("runs/{name}");
    let dir = out.join(&dir_rel);
    let attempt = || -> Result<RunRecord, CliError> {
        create_dir(&dir)?;
        let kernel = build_kernel(p, family, order)?;
        write_table(&dir.join("kernel.csv"), &kernel_coefficient_table(&kernel))?;
        let problem = GleProblem { a: p.reduced.a, b: p.reduced.b, kernel };
        let traj = solve_gle(&problem, p.y0, &p.solver)?;
        write_table(&dir.join("trajectory.csv"), &trajectory_table(&traj, "value"))?;
        let (max_error, l2_error) = match oracle {
            Some(o) => {
                let (err, max, l2) = error_metrics(&traj.values, &o.trajectory.values, p.solver.dt);
                let table = Table::new(vec!["t".into(), "error".into()], vec![traj.times.clone(), err])?;
                write_table(&dir.join("error.csv"), &table)?;
                (Some(max), Some(l2))
            }
            None => (None, None),
        };
        Ok(RunRecord {
            family: family.name().into(),
            order,
            status: "ok".into(),
            dir: dir_rel.clone(),
            message: None,
            max_error,
            l2_error,
        })
    };
    attempt().unwrap_or_else(|e| failed(family, order, dir_rel.clone(), e))
}

pub fn prepare_output(cfg: &ExperimentConfig) -> Result<PathBuf, CliError> {
    let out = cfg.resolved_output_dir();
    create_dir(&out)?;
    Ok(out)
}

fn needs_map(cfg: &ExperimentConfig) -> Result<bool, CliError> {
    Ok(cfg.family_list()?.contains(&Family::Faber))
}

/// Returns the summary and whether any run failed.
pub fn run(cfg: &ExperimentConfig) -> Result<(Summary, bool), CliError> {
    let p = prepare(cfg, needs_map(cfg)?)?;
    let out = prepare_output(cfg)?;
    let oracle = compute_oracle(cfg, &p)?;
    if let Some(o) = &oracle {
        write_oracle(&out, o)?;
    }
    let jobs = jobs(cfg, p.reduced.dim())?;
    let runs: Vec<RunRecord> = jobs
        .par_iter()
        .map(|&(family, order)| one_run(&out, &p, oracle.as_ref(), family, order))
        .collect();
    let any_failed = runs.iter().any(|r| !r.ok());
    let s = summary(cfg, &p, "run", runs);
    write_json(&out.join("summary.json"), &s)?;
    Ok((s, any_failed))
}

pub fn kernels_only(cfg: &ExperimentConfig) -> Result<(Summary, bool), CliError> {
    let p = prepare(cfg, needs_map(cfg)?)?;
    let out = prepare_output(cfg)?;
    let runs: Vec<RunRecord> = jobs(cfg, p.reduced.dim())?
        .par_iter()
        .map(|&(family, order)| {
            let dir_rel = format!("runs/{}", run_dir_name(family, order));
            let dir = out.join(&dir_rel);
            let attempt = || -> Result<RunRecord, CliError> {
                create_dir(&dir)?;
                let k = build_kernel(&p, family, order)?;
                write_table(&dir.join("kernel.csv"), &kernel_coefficient_table(&k))?;
                Ok(RunRecord {
                    family: family.name().into(),
                    order,
                    status: "ok".into(),
                    dir: dir_rel.clone(),
                    message: None,
                    max_error: None,
                    l2_error: None,
                })
            };
            attempt().unwrap_or_else(|e| failed(family, order, dir_rel.clone(), e))
        })
        .collect();
    let any_failed = runs.iter().any(|r| !r.ok());
    let s = summary(cfg, &p, "kernel", runs);
    write_json(&out.join("summary.json"), &s)?;
    Ok((s, any_failed))
}

pub fn oracle_only(cfg: &ExperimentConfig) -> Result<PathBuf, CliError> {
    if cfg.oracle == OracleKind::None {
        return Err(CliError::Config("`oracle = \"none\"` leaves nothing to compute".into()));
    }
    let p = prepare(cfg, false)?;
    let out = prepare_output(cfg)?;
    if let Some(o) = compute_oracle(cfg, &p)? {
        write_oracle(&out, &o)?;
    }
    Ok(out)
}
