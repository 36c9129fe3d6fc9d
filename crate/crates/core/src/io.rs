//! Column tables as CSV with a header row and `{:.16e}` numbers, which
//! round-trip every finite `f64`.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::gle::Trajectory;
use crate::kernels::KernelExpansion;

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(headers: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if headers.len() != columns.len() {
            return Err(Error::DimensionMismatch(format!("{} headers for {} columns", headers.len(), columns.len())));
        }
        if let Some(first) = columns.first() {
            if columns.iter().any(|c| c.len() != first.len()) {
                return Err(Error::DimensionMismatch("columns of unequal length".into()));
            }
        }
        if headers.iter().any(|h| h.contains(',') || h.contains('\n')) {
            return Err(Error::InvalidArgument("headers may not contain commas or newlines".into()));
        }
        Ok(Table { headers, columns })
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.headers.iter().position(|h| h == name).map(|i| self.columns[i].as_slice())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", self.headers.join(","))?;
        let mut line = String::new();
        for r in 0..self.rows() {
            line.clear();
            for (k, col) in self.columns.iter().enumerate() {
                if k > 0 {
                    line.push(',');
                }
                line.push_str(&format!("{:.16e}", col[r]));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))??;
        let headers: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
        let mut columns = vec![Vec::new(); headers.len()];
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != headers.len() {
                return Err(Error::Parse(format!(
                    "line {}: {} fields, expected {}",
                    i + 2,
                    fields.len(),
                    headers.len()
                )));
            }
            for (c, f) in columns.iter_mut().zip(fields) {
                c.push(f.trim().parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {e}", i + 2)))?);
            }
        }
        Table::new(headers, columns)
    }
}

pub fn trajectory_table(tr: &Trajectory, name: &str) -> Table {
    Table {
        headers: vec!["t".into(), name.into()],
        columns: vec![tr.times.clone(), tr.values.clone()],
    }
}

/// `j, g_j, f_j` for a kernel expansion.
pub fn kernel_coefficient_table(k: &KernelExpansion) -> Table {
    Table {
        headers: vec!["j".into(), "g".into(), "f".into()],
        columns: vec![(0..k.g.len()).map(|j| j as f64).collect(), k.g.clone(), k.f.clone()],
    }
}

/// `t, g(t), f(t)` sampled on `times`.
pub fn kernel_sample_table(k: &KernelExpansion, times: &[f64]) -> Result<Table> {
    let mut g = Vec::with_capacity(times.len());
    let mut f = Vec::with_capacity(times.len());
    for &t in times {
        let (a, b) = k.eval(t)?;
        g.push(a);
        f.push(b);
    }
    Ok(Table {
        headers: vec!["t".into(), "g".into(), "f".into()],
        columns: vec![times.to_vec(), g, f],
    })
}
