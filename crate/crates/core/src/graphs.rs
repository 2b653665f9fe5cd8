//! Simple labelled graphs, the β ↔ p dictionary, the walk statistic `X`,
//! and the graph Laplacian.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};

/// Edge probability of the Gibbs weight `exp(-β' Tr Δ)`:
/// `p = e^{-2β'} / (1 + e^{-2β'})`, written as `1 / (1 + e^{2β'})` so that
/// neither tail overflows.
pub fn beta_to_p(beta_prime: f64) -> f64 {
    1.0 / (1.0 + (2.0 * beta_prime).exp())
}

/// Inverse of [`beta_to_p`] on `(0, 1)`.
pub fn p_to_beta(p: f64) -> f64 {
    0.5 * ((1.0 - p) / p).ln()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub n: usize,
    pub beta: f64,
    pub g: f64,
    pub beta_prime: f64,
    pub p: f64,
    /// Set in sparse mode, where `p = cbar / n`.
    pub cbar: Option<f64>,
}

impl ModelParams {
    pub fn from_beta(n: usize, beta: f64, g: f64) -> Result<Self> {
        if !beta.is_finite() || !g.is_finite() {
            return invalid("beta and g must be finite");
        }
        let beta_prime = beta - g;
        Ok(ModelParams {
            n,
            beta,
            g,
            beta_prime,
            p: beta_to_p(beta_prime),
            cbar: None,
        })
    }

    /// Sparse parametrization `p = cbar / n` at `g = 0`.
    pub fn sparse(n: usize, cbar: f64) -> Result<Self> {
        if !(cbar >= 0.0 && cbar < n as f64) {
            return invalid(format!("sparse mode needs 0 <= cbar < n (cbar={cbar}, n={n})"));
        }
        let p = cbar / n as f64;
        let beta = if p > 0.0 { p_to_beta(p) } else { f64::INFINITY };
        Ok(ModelParams {
            n,
            beta,
            g: 0.0,
            beta_prime: beta,
            p,
            cbar: Some(cbar),
        })
    }
}

/// Undirected simple graph on vertices `0..n`, adjacency stored as packed
/// upper-triangle bits.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct Graph {
    n: usize,
    bits: Vec<u64>,
}

fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            bits: vec![0; pair_count(n).div_ceil(64)],
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for i in 0..n {
            for j in i + 1..n {
                g.add_edge(i, j);
            }
        }
        g
    }

    /// From 0-based edges; duplicates are idempotent, loops rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(n);
        for &(i, j) in edges {
            if i >= n || j >= n {
                return invalid(format!("edge ({i},{j}) out of range for n={n}"));
            }
            if i == j {
                return invalid(format!("self-loop at vertex {i}"));
            }
            g.add_edge(i, j);
        }
        Ok(g)
    }

    /// Graph whose pair `t` (in [`Graph::pairs`] order) is present iff bit `t` of `mask` is set.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        let mut g = Self::empty(n);
        if !g.bits.is_empty() {
            g.bits[0] = mask;
        }
        g
    }

    fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        i * self.n - i * (i + 1) / 2 + (j - i - 1)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn add_edge(&mut self, i: usize, j: usize) {
        let t = self.index(i, j);
        self.bits[t / 64] |= 1 << (t % 64);
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        if i == j {
            return false;
        }
        let t = self.index(i, j);
        self.bits[t / 64] >> (t % 64) & 1 == 1
    }

    pub fn edge_count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// All unordered pairs `(i, j)`, `i < j`, in storage order.
    pub fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        Self::pairs(self.n).filter(|&(i, j)| self.has_edge(i, j)).collect()
    }

    pub fn degrees(&self) -> Vec<u64> {
        let mut d = vec![0u64; self.n];
        for (i, j) in self.edges() {
            d[i] += 1;
            d[j] += 1;
        }
        d
    }

    pub fn adjacency_lists(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for (i, j) in self.edges() {
            adj[i].push(j);
            adj[j].push(i);
        }
        adj
    }

    /// Text form `"n m"` followed by one 1-based edge `"i j"` per line.
    pub fn to_edge_list(&self) -> String {
        let edges = self.edges();
        let mut s = format!("{} {}\n", self.n, edges.len());
        for (i, j) in edges {
            let _ = writeln!(s, "{} {}", i + 1, j + 1);
        }
        s
    }

    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty edge list".into()))?;
        let nums = |line: &str| -> Result<(usize, usize)> {
            let mut it = line.split_whitespace().map(str::parse::<usize>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(a)), Some(Ok(b)), None) => Ok((a, b)),
                _ => Err(Error::Parse(format!("expected two integers, got {line:?}"))),
            }
        };
        let (n, m) = nums(header)?;
        let mut edges = Vec::with_capacity(m);
        for line in lines {
            let (i, j) = nums(line)?;
            if i == 0 || j == 0 {
                return Err(Error::Parse(format!("vertices are 1-based, got {line:?}")));
            }
            edges.push((i - 1, j - 1));
        }
        if edges.len() != m {
            return Err(Error::Parse(format!("header promises {m} edges, found {}", edges.len())));
        }
        let g = Self::from_edges(n, &edges)?;
        if g.edge_count() != m {
            return Err(Error::Parse("duplicate edges in edge list".into()));
        }
        Ok(g)
    }
}

/// Calls `f(i, j)` (with `j < i`) for each pair of `0..n` present in a
/// `G(n, p)` sample, skipping absent pairs geometrically so the cost is
/// proportional to the number of edges.
pub fn for_each_edge<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R, mut f: impl FnMut(usize, usize)) {
    if n < 2 || p <= 0.0 {
        return;
    }
    if p >= 1.0 {
        for i in 1..n {
            for j in 0..i {
                f(i, j);
            }
        }
        return;
    }
    let log_q = (-p).ln_1p();
    let (mut v, mut w) = (1usize, -1i64);
    while v < n {
        let r: f64 = rng.gen();
        let skip = ((1.0 - r).ln() / log_q).floor();
        // a skip this large runs past the last pair
        if skip >= (n * n) as f64 {
            return;
        }
        w += 1 + skip as i64;
        while w >= v as i64 && v < n {
            w -= v as i64;
            v += 1;
        }
        if v < n {
            f(v, w as usize);
        }
    }
}

/// Generator for replicate `replicate` of a seeded experiment: ChaCha8
/// seeded from `seed`, on stream `replicate`. Streams are independent, so
/// results never depend on scheduling.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

pub fn sample_graph(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return invalid(format!("p = {p} is not a probability"));
    }
    if n == 0 {
        return invalid("n must be at least 1");
    }
    let mut g = Graph::empty(n);
    let mut rng = replicate_rng(seed, 0);
    for_each_edge(n, p, &mut rng, |i, j| g.add_edge(i, j));
    Ok(g)
}

/// Degree sequence of a `G(n, p)` sample without storing the adjacency.
pub fn sample_degrees<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Vec<u32> {
    let mut d = vec![0u32; n];
    for_each_edge(n, p, rng, |i, j| {
        d[i] += 1;
        d[j] += 1;
    });
    d
}

/// `Σ deg²` from a degree sequence.
pub fn x_from_degrees<T: Copy + Into<u64>>(degrees: &[T]) -> u64 {
    degrees.iter().map(|&d| d.into() * d.into()).sum()
}

/// `Σ_{ij} (A^q)_{ij}`, the number of `q`-step walks. For `q = 2` this is `Σ deg²`.
pub fn x_stat(graph: &Graph, q: u32) -> Result<BigInt> {
    if q == 0 {
        return invalid("q must be at least 1");
    }
    if q == 2 {
        return Ok(BigInt::from(x_from_degrees(&graph.degrees())));
    }
    let adj = graph.adjacency_lists();
    let mut v = vec![BigInt::from(1); graph.n()];
    for _ in 0..q {
        v = adj
            .iter()
            .map(|nbrs| nbrs.iter().fold(BigInt::zero(), |s, &j| s + &v[j]))
            .collect();
    }
    Ok(v.into_iter().sum())
}

/// `(Tr Δ, Tr Δ²) = (2|E|, Σ deg² + 2|E|)`.
pub fn laplacian_traces(graph: &Graph) -> (u64, u64) {
    let degrees = graph.degrees();
    let two_e: u64 = degrees.iter().sum();
    (two_e, x_from_degrees(&degrees) + two_e)
}

/// Dense Laplacian `Δ = B - A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaplacianMatrix {
    n: usize,
    entries: Vec<i64>,
}

impl LaplacianMatrix {
    pub fn new(graph: &Graph) -> Self {
        let n = graph.n();
        let mut entries = vec![0i64; n * n];
        for (i, j) in graph.edges() {
            entries[i * n + j] = -1;
            entries[j * n + i] = -1;
            entries[i * n + i] += 1;
            entries[j * n + j] += 1;
        }
        LaplacianMatrix { n, entries }
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.n + j]
    }

    pub fn row_sums(&self) -> Vec<i64> {
        self.entries.chunks(self.n.max(1)).map(|r| r.iter().sum()).collect()
    }

    pub fn trace(&self) -> i64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// `Tr Δ² = Σ_ij Δ_ij Δ_ji`, by direct matrix arithmetic.
    pub fn trace_sq(&self) -> i64 {
        let mut t = 0;
        for i in 0..self.n {
            for j in 0..self.n {
                t += self.get(i, j) * self.get(j, i);
            }
        }
        t
    }

    pub fn min_eigenvalue(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let m = DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j) as f64);
        m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Checks the degree-based traces against the dense matrix and that the
/// Laplacian is positive semi-definite (to 1e-9). Limited to `n ≤ 64`.
pub fn verify_laplacian(graph: &Graph) -> Result<()> {
    if graph.n() > 64 {
        return invalid("dense Laplacian checks are limited to n <= 64");
    }
    let lap = LaplacianMatrix::new(graph);
    let (t1, t2) = laplacian_traces(graph);
    if lap.trace() as u64 != t1 || lap.trace_sq() as u64 != t2 {
        return Err(Error::Consistency(format!(
            "trace identities fail: matrix ({}, {}) vs degrees ({t1}, {t2})",
            lap.trace(),
            lap.trace_sq()
        )));
    }
    if lap.row_sums().iter().any(|&s| s != 0) {
        return Err(Error::Consistency("Laplacian row sums are not zero".into()));
    }
    let lmin = lap.min_eigenvalue();
    if lmin < -1e-9 {
        return Err(Error::Consistency(format!("negative Laplacian eigenvalue {lmin}")));
    }
    Ok(())
}
