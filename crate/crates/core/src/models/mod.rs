//! Benchmark linear systems: harmonic networks on graphs and a Galerkin
//! wave model on an annulus.

mod wave;

use std::collections::VecDeque;
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kernels::{StatsKind, SystemSpec};
use crate::linalg::DenseMatrix;

pub use wave::{build_wave_model, WaveModel, WaveModelSpec, WaveSampler};

/// Undirected simple graph.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphSpec {
    pub n_nodes: usize,
    pub adjacency: DenseMatrix,
    pub degree: DenseMatrix,
}

impl GraphSpec {
    /// From 0-based undirected edges. Self-loops and duplicates are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = DenseMatrix::zeros(n, n).into_data();
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidArgument(format!("edge ({i}, {j}) outside {n} nodes")));
            }
            if i == j {
                return Err(Error::InvalidArgument(format!("self-loop at node {i}")));
            }
            if adj[i * n + j] != 0.0 {
                return Err(Error::InvalidArgument(format!("duplicate edge ({i}, {j})")));
            }
            adj[i * n + j] = 1.0;
            adj[j * n + i] = 1.0;
        }
        let deg: Vec<f64> = (0..n).map(|i| adj[i * n..(i + 1) * n].iter().sum()).collect();
        Ok(GraphSpec {
            n_nodes: n,
            adjacency: DenseMatrix::new(n, n, adj)?,
            degree: DenseMatrix::diag(&deg),
        })
    }

    /// 0-based edges with `i < j`, in row order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.n_nodes;
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if self.adjacency[(i, j)] != 0.0 {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    pub fn degrees(&self) -> Vec<f64> {
        (0..self.n_nodes).map(|i| self.degree[(i, i)]).collect()
    }

    /// Writes one `i j` line per edge, 1-based.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# nodes {}", self.n_nodes)?;
        for (i, j) in self.edges() {
            writeln!(w, "{} {}", i + 1, j + 1)?;
        }
        Ok(())
    }

    /// Reads the format of [`GraphSpec::write_edge_list`]. Without a
    /// `# nodes` header the node count is the largest index seen.
    pub fn read_edge_list<R: BufRead>(r: R) -> Result<Self> {
        let mut n_decl = None;
        let mut edges = Vec::new();
        let mut n_seen = 0;
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let s = line.trim();
            if let Some(rest) = s.strip_prefix('#') {
                if let Some(v) = rest.trim().strip_prefix("nodes") {
                    n_decl = Some(v.trim().parse::<usize>().map_err(|e| {
                        Error::Parse(format!("line {}: bad node count: {e}", lineno + 1))
                    })?);
                }
                continue;
            }
            if s.is_empty() {
                continue;
            }
            let mut it = s.split_whitespace().map(|x| x.parse::<usize>());
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(i)), Some(Ok(j)), None) if i >= 1 && j >= 1 => {
                    n_seen = n_seen.max(i).max(j);
                    edges.push((i - 1, j - 1));
                }
                _ => return Err(Error::Parse(format!("line {}: expected `i j`, got {s:?}", lineno + 1))),
            }
        }
        Self::from_edges(n_decl.unwrap_or(n_seen), &edges)
    }
}

/// `1 + Σ_{k=1}^{S} l (l−1)^{k−1}`.
pub fn bethe_node_count(l: usize, shells: usize) -> usize {
    let mut total = 1;
    let mut shell = l;
    for _ in 0..shells {
        total += shell;
        shell *= l.saturating_sub(1);
    }
    total
}

/// Bethe lattice truncated after `shells` shells, labeled breadth first
/// from the root (node 0).
pub fn build_bethe(l: usize, shells: usize) -> Result<GraphSpec> {
    if l < 2 || shells < 1 {
        return Err(Error::InvalidArgument(format!("need l >= 2 and S >= 1, got l = {l}, S = {shells}")));
    }
    let n = bethe_node_count(l, shells);
    let mut edges = Vec::with_capacity(n - 1);
    let mut queue = VecDeque::from([(0usize, 0usize)]);
    let mut next = 1;
    while let Some((node, depth)) = queue.pop_front() {
        if depth == shells {
            continue;
        }
        let children = if depth == 0 { l } else { l - 1 };
        for _ in 0..children {
            edges.push((node, next));
            queue.push_back((next, depth + 1));
            next += 1;
        }
    }
    debug_assert_eq!(next, n);
    GraphSpec::from_edges(n, &edges)
}

/// `0 − 1 − … − (n−1)`.
pub fn build_path(n: usize) -> Result<GraphSpec> {
    if n == 0 {
        return Err(Error::InvalidArgument("empty path".into()));
    }
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    GraphSpec::from_edges(n, &edges)
}

/// `G(n, p)` from a ChaCha8 stream: pairs `i < j` in row order, each kept
/// when the next uniform draw falls below `p`.
pub fn build_erdos_renyi(n: usize, p: f64, seed: u64) -> Result<GraphSpec> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("probability {p} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    GraphSpec::from_edges(n, &edges)
}

/// Treatment of nodes with fewer than the full number of neighbours.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    /// Springs only along graph edges.
    Free,
    /// Every node feels `coordination` springs; missing neighbours are held
    /// fixed at zero displacement.
    Pinned { coordination: usize },
}

/// Harmonic network `H = Σ p²/2m + κ/2 Σ_edges (q_i − q_j)²` in `(p, q)`
/// order, so `C = [[0, κ(B − D)], [I/m, 0]]`.
///
/// With `l_norm = Some(l)` the pair potential is `k/(2l) Σ_{i,j} B_ij (q_i − q_j)²`
/// over ordered pairs, which gives `κ = 2k/l`; otherwise `κ = k`.
pub fn build_chain_system(g: &GraphSpec, k: f64, m: f64, l_norm: Option<usize>, boundary: Boundary) -> Result<SystemSpec> {
    if !(k > 0.0 && m > 0.0) {
        return Err(Error::InvalidArgument(format!("need k > 0 and m > 0, got k = {k}, m = {m}")));
    }
    let kappa = match l_norm {
        Some(0) => return Err(Error::InvalidArgument("coordination divisor must be positive".into())),
        Some(l) => 2.0 * k / l as f64,
        None => k,
    };
    let n = g.n_nodes;
    let d: Vec<f64> = match boundary {
        Boundary::Free => g.degrees(),
        Boundary::Pinned { coordination } => {
            let c = coordination as f64;
            if g.degrees().iter().any(|&x| x > c) {
                return Err(Error::InvalidArgument(format!("a node has more than {coordination} neighbours")));
            }
            vec![c; n]
        }
    };
    let a = DenseMatrix::from_fn(2 * n, 2 * n, |i, j| {
        if i < n && j >= n {
            let (r, c) = (i, j - n);
            kappa * (g.adjacency[(r, c)] - if r == c { d[r] } else { 0.0 })
        } else if i >= n && j < n && i - n == j {
            1.0 / m
        } else {
            0.0
        }
    })?;
    SystemSpec::new(a, vec![0.0; 2 * n], StatsKind::BerneEquilibriumQuadratic)
}

/// `H(p, q) = |p|²/(2m) − ½ qᵀ K q` for a `(p, q)` system with force block `K`.
pub fn chain_energy(system: &SystemSpec, state: &[f64]) -> Result<f64> {
    system.check_hamiltonian_shape()?;
    let n = system.dim() / 2;
    if state.len() != 2 * n {
        return Err(Error::DimensionMismatch(format!("state of length {} for dimension {}", state.len(), 2 * n)));
    }
    let inv_m = system.a[(n, 0)];
    let (p, q) = state.split_at(n);
    let kinetic = 0.5 * inv_m * p.iter().map(|x| x * x).sum::<f64>();
    let mut potential = 0.0;
    for i in 0..n {
        for j in 0..n {
            potential -= 0.5 * q[i] * system.a[(i, n + j)] * q[j];
        }
    }
    Ok(kinetic + potential)
}
