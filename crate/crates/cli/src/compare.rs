use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use mzfaber::io::Table;
use serde::Serialize;

use crate::pipeline::{RunRecord, Summary};
use crate::CliError;

#[derive(Debug, Serialize)]
pub struct RunDiff {
    pub a: String,
    pub b: String,
    pub max_trajectory_diff: f64,
    pub max_error_a: Option<f64>,
    pub max_error_b: Option<f64>,
    pub l2_error_a: Option<f64>,
    pub l2_error_b: Option<f64>,
    pub regressed: bool,
}

#[derive(Debug, Serialize)]
pub struct Comparison {
    pub tolerance: f64,
    pub pairs: Vec<RunDiff>,
    pub unmatched: Vec<String>,
    pub regressions: usize,
}

fn report_dir(p: &Path) -> PathBuf {
    if p.is_file() {
        p.parent().map(Path::to_path_buf).unwrap_or_default()
    } else {
        p.to_path_buf()
    }
}

pub fn load_summary(dir: &Path) -> Result<Summary, CliError> {
    let path = dir.join("summary.json");
    let f = File::open(&path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_reader(BufReader::new(f)).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn load_table(path: &Path) -> Result<Table, CliError> {
    let f = File::open(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Table::read_csv(BufReader::new(f)).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn label(r: &RunRecord) -> String {
    format!("{}_n{}", r.family, r.order)
}

/// Pairs runs by `(family, order)`, or by order alone when the reports share
/// no family.
fn pair_runs<'a>(a: &'a [RunRecord], b: &'a [RunRecord]) -> (Vec<(&'a RunRecord, &'a RunRecord)>, Vec<String>) {
    let shared_family = a.iter().any(|x| b.iter().any(|y| x.family == y.family));
    let key = |r: &RunRecord| if shared_family { label(r) } else { r.order.to_string() };
    let mut pairs = Vec::new();
    let mut unmatched = Vec::new();
    for x in a {
        match b.iter().find(|y| key(y) == key(x)) {
            Some(y) => pairs.push((x, y)),
            None => unmatched.push(format!("a:{}", label(x))),
        }
    }
    for y in b {
        if !a.iter().any(|x| key(x) == key(y)) {
            unmatched.push(format!("b:{}", label(y)));
        }
    }
    (pairs, unmatched)
}

pub fn compare(a: &Path, b: &Path, tolerance: f64) -> Result<Comparison, CliError> {
    let (da, db) = (report_dir(a), report_dir(b));
    let (sa, sb) = (load_summary(&da)?, load_summary(&db)?);
    if sa.dt != sb.dt || sa.t_final != sb.t_final {
        return Err(CliError::Config(format!(
            "grid mismatch: dt {} / {} and t_final {} / {}",
            sa.dt, sb.dt, sa.t_final, sb.t_final
        )));
    }
    let (pairs, mut unmatched) = pair_runs(&sa.runs, &sb.runs);
    let mut out = Vec::new();
    for (x, y) in pairs {
        if !(x.ok() && y.ok()) {
            unmatched.push(format!("failed:{}|{}", label(x), label(y)));
            continue;
        }
        let ta = load_table(&da.join(&x.dir).join("trajectory.csv"))?;
        let tb = load_table(&db.join(&y.dir).join("trajectory.csv"))?;
        if ta.column("t") != tb.column("t") {
            return Err(CliError::Config(format!("grid mismatch between {} and {}", label(x), label(y))));
        }
        let (va, vb) = match (ta.column("value"), tb.column("value")) {
            (Some(va), Some(vb)) => (va, vb),
            _ => return Err(CliError::Config("trajectory.csv lacks a `value` column".into())),
        };
        let diff = va.iter().zip(vb).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        let worse = |ea: Option<f64>, eb: Option<f64>| matches!((ea, eb), (Some(ea), Some(eb)) if eb > ea + tolerance);
        let regressed = worse(x.max_error, y.max_error) || worse(x.l2_error, y.l2_error);
        out.push(RunDiff {
            a: label(x),
            b: label(y),
            max_trajectory_diff: diff,
            max_error_a: x.max_error,
            max_error_b: y.max_error,
            l2_error_a: x.l2_error,
            l2_error_b: y.l2_error,
            regressed,
        });
    }
    let regressions = out.iter().filter(|d| d.regressed).count();
    Ok(Comparison { tolerance, pairs: out, unmatched, regressions })
}
