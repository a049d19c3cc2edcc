//! Problem graphs, the Gset text format, random instance generation and the
//! Max-Cut to Ising mapping.
//!
//! Energies use the upper-triangle convention
//! `H = sum_{i<j} J_ij s_i s_j + sum_i h_i s_i`, so for a Max-Cut model with
//! `J_ij = w_ij` and `h = 0` the identity `cut = (W_total - H) / 2` holds in
//! exact integer arithmetic.

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weighted undirected edge with 0-based endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub w: i64,
}

/// Weighted undirected simple graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    node_count: usize,
    edges: Vec<Edge>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, out-of-range endpoints,
    /// duplicate unordered pairs and zero weights.
    pub fn new(node_count: usize, edges: Vec<Edge>) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::InvalidGraph("node count must be positive".into()));
        }
        let mut seen = HashSet::with_capacity(edges.len());
        for (k, e) in edges.iter().enumerate() {
            if e.i >= node_count || e.j >= node_count {
                return Err(Error::InvalidGraph(format!(
                    "edge {k} ({}, {}) out of range for {node_count} nodes",
                    e.i, e.j
                )));
            }
            if e.i == e.j {
                return Err(Error::InvalidGraph(format!("edge {k} is a self-loop on {}", e.i)));
            }
            if e.w == 0 {
                return Err(Error::InvalidGraph(format!("edge {k} has zero weight")));
            }
            if !seen.insert((e.i.min(e.j), e.i.max(e.j))) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge {{{}, {}}}",
                    e.i, e.j
                )));
            }
        }
        Ok(Self { node_count, edges })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Sum of all edge weights.
    pub fn total_weight(&self) -> i64 {
        self.edges.iter().map(|e| e.w).sum()
    }

    /// True when every node is reachable from node 0.
    pub fn is_connected(&self) -> bool {
        let n = self.node_count;
        let mut adj = vec![Vec::new(); n];
        for e in &self.edges {
            adj[e.i].push(e.j);
            adj[e.j].push(e.i);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == n
    }

    /// Serializes to Gset text: `N M` then one `i j w` line per edge, 1-based.
    pub fn to_gset(&self) -> String {
        let mut out = String::with_capacity(16 * (self.edges.len() + 1));
        let _ = writeln!(out, "{} {}", self.node_count, self.edges.len());
        for e in &self.edges {
            let _ = writeln!(out, "{} {} {}", e.i + 1, e.j + 1, e.w);
        }
        out
    }
}

fn parse_int(tok: &str, line: usize, what: &str) -> Result<i64> {
    tok.parse::<i64>().map_err(|_| Error::Parse {
        line,
        msg: format!("expected integer {what}, found {tok:?}"),
    })
}

/// Parses Gset text. Line numbers in diagnostics are 1-based.
pub fn parse_gset(text: &str) -> Result<Graph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty());

    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "missing header line \"N M\"".into(),
    })?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 2 {
        return Err(Error::Parse {
            line: hline,
            msg: format!("header must be \"N M\", found {header:?}"),
        });
    }
    let n = parse_int(toks[0], hline, "node count")?;
    let m = parse_int(toks[1], hline, "edge count")?;
    if n <= 0 || m < 0 {
        return Err(Error::Parse {
            line: hline,
            msg: format!("invalid header values N={n}, M={m}"),
        });
    }
    let n = n as usize;
    let m = m as usize;

    let mut edges = Vec::with_capacity(m);
    let mut seen = HashSet::with_capacity(m);
    for (line, body) in lines.by_ref().take(m) {
        let toks: Vec<&str> = body.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(Error::Parse {
                line,
                msg: format!("expected \"i j w\", found {body:?}"),
            });
        }
        let mut idx = [0usize; 2];
        for (slot, tok) in idx.iter_mut().zip(&toks[..2]) {
            let v = parse_int(tok, line, "node index")?;
            if v < 1 || v as usize > n {
                return Err(Error::NodeOutOfRange { line, index: v, n });
            }
            *slot = v as usize - 1;
        }
        let w = parse_int(toks[2], line, "weight")?;
        let [i, j] = idx;
        if i == j {
            return Err(Error::SelfLoop { line, node: i + 1 });
        }
        if w == 0 {
            return Err(Error::Parse {
                line,
                msg: "zero edge weight".into(),
            });
        }
        if !seen.insert((i.min(j), i.max(j))) {
            return Err(Error::DuplicateEdge {
                line,
                i: i + 1,
                j: j + 1,
            });
        }
        edges.push(Edge { i, j, w });
    }
    if edges.len() < m {
        return Err(Error::Parse {
            line: text.lines().count(),
            msg: format!("header declares {m} edges, found {}", edges.len()),
        });
    }
    if let Some((line, body)) = lines.next() {
        return Err(Error::Parse {
            line,
            msg: format!("unexpected content after {m} edges: {body:?}"),
        });
    }
    Graph::new(n, edges)
}

/// Samples a random graph: each unordered pair is kept independently with
/// probability `density`, with weight uniform over `[weight_min, weight_max]`
/// excluding zero. Pure function of its arguments.
pub fn generate_instance(
    n: usize,
    density: f64,
    weight_min: i64,
    weight_max: i64,
    seed: u64,
) -> Result<Graph> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidDensity(density));
    }
    if n == 0 {
        return Err(Error::InvalidGraph("node count must be positive".into()));
    }
    if weight_min > weight_max {
        return Err(Error::EmptyWeightRange {
            min: weight_min,
            max: weight_max,
        });
    }
    let weights: Vec<i64> = (weight_min..=weight_max).filter(|&w| w != 0).collect();
    if weights.is_empty() {
        return Err(Error::EmptyWeightRange {
            min: weight_min,
            max: weight_max,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total_pairs = n as u64 * (n as u64 - 1) / 2;
    let mut edges = Vec::new();
    // Geometric skipping over the linearized upper triangle keeps sparse
    // generation at O(M) instead of O(N^2).
    let log_q = (1.0 - density).ln();
    let mut pos: u64 = 0;
    let (mut row, mut row_start) = (0usize, 0u64);
    loop {
        if density < 1.0 {
            let u: f64 = rng.random::<f64>();
            let skip = ((1.0 - u).ln() / log_q).floor();
            if !skip.is_finite() || skip >= (total_pairs - pos) as f64 {
                break;
            }
            pos += skip as u64;
        }
        if pos >= total_pairs {
            break;
        }
        // advance to the row containing `pos`; row r holds n-1-r pairs
        while pos >= row_start + (n - 1 - row) as u64 {
            row_start += (n - 1 - row) as u64;
            row += 1;
        }
        let col = row + 1 + (pos - row_start) as usize;
        let w = weights[rng.random_range(0..weights.len())];
        edges.push(Edge { i: row, j: col, w });
        pos += 1;
    }
    Graph::new(n, edges)
}

/// Spin configuration with entries in {-1, +1}.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinState(Vec<i8>);

impl SpinState {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some((index, &v)) = spins.iter().enumerate().find(|(_, &v)| v != 1 && v != -1) {
            return Err(Error::InvalidSpin {
                index,
                value: v as i64,
            });
        }
        Ok(Self(spins))
    }

    pub(crate) fn from_trusted(spins: Vec<i8>) -> Self {
        debug_assert!(spins.iter().all(|&s| s == 1 || s == -1));
        Self(spins)
    }

    pub fn all_up(n: usize) -> Self {
        Self(vec![1; n])
    }

    /// Spins from real positions, with `sign(0) = +1`.
    pub fn from_signs(x: &[f64]) -> Self {
        Self(x.iter().map(|&v| if v >= 0.0 { 1 } else { -1 }).collect())
    }

    pub fn random(n: usize, rng: &mut impl Rng) -> Self {
        Self((0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|&s| -s).collect())
    }

    /// Number of positions where the two states differ.
    pub fn hamming(&self, other: &SpinState) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }
}

/// Ising model with a symmetric zero-diagonal integer coupling matrix stored
/// in compressed sparse rows, plus a bias vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsingModel {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<i32>,
    h: Vec<i64>,
}

impl IsingModel {
    /// Builds a model from a dense row-major coupling matrix.
    pub fn from_dense(n: usize, j: &[i64], h: Vec<i64>) -> Result<Self> {
        if j.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: j.len(),
            });
        }
        if h.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: h.len(),
            });
        }
        let mut triplets = Vec::new();
        for r in 0..n {
            if j[r * n + r] != 0 {
                return Err(Error::InvalidGraph(format!("nonzero diagonal at {r}")));
            }
            for c in 0..n {
                let v = j[r * n + c];
                if v != j[c * n + r] {
                    return Err(Error::InvalidGraph(format!("asymmetric coupling at ({r}, {c})")));
                }
                if v != 0 {
                    triplets.push((r, c, v));
                }
            }
        }
        Self::from_sorted_triplets(n, &triplets, h)
    }

    fn from_sorted_triplets(n: usize, t: &[(usize, usize, i64)], h: Vec<i64>) -> Result<Self> {
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(t.len());
        let mut vals = Vec::with_capacity(t.len());
        for &(r, c, v) in t {
            let v = i32::try_from(v)
                .map_err(|_| Error::InvalidGraph(format!("coupling {v} exceeds i32 range")))?;
            row_ptr[r + 1] += 1;
            cols.push(c as u32);
            vals.push(v);
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(Self {
            n,
            row_ptr,
            cols,
            vals,
            h,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> &[i64] {
        &self.h
    }

    /// Nonzero couplings of row `i` as `(column, value)` pairs, columns ascending.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, i64)> + '_ {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[a..b]
            .iter()
            .zip(&self.vals[a..b])
            .map(|(&c, &v)| (c as usize, v as i64))
    }

    pub fn degree(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        match self.cols[a..b].binary_search(&(j as u32)) {
            Ok(k) => self.vals[a + k] as i64,
            Err(_) => 0,
        }
    }

    /// Dense row-major copy of J. Intended for small models.
    pub fn dense(&self) -> Vec<i64> {
        let mut d = vec![0i64; self.n * self.n];
        for i in 0..self.n {
            for (c, v) in self.row(i) {
                d[i * self.n + c] = v;
            }
        }
        d
    }

    /// Largest absolute coupling.
    pub fn max_abs(&self) -> i64 {
        self.vals.iter().map(|v| (*v as i64).abs()).max().unwrap_or(0)
    }

    /// `sum_{i<j} J_ij`.
    pub fn upper_weight(&self) -> i64 {
        self.vals.iter().map(|&v| v as i64).sum::<i64>() / 2
    }

    /// Root-mean-square of the off-diagonal couplings (zeros included).
    pub fn coupling_rms(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let sq: f64 = self.vals.iter().map(|&v| (v as f64) * (v as f64)).sum();
        (sq / (self.n as f64 * (self.n as f64 - 1.0))).sqrt()
    }

    /// Model with every coupling and bias negated.
    pub fn negated(&self) -> Self {
        Self {
            n: self.n,
            row_ptr: self.row_ptr.clone(),
            cols: self.cols.clone(),
            vals: self.vals.iter().map(|v| -v).collect(),
            h: self.h.iter().map(|v| -v).collect(),
        }
    }

    /// Model with every coupling multiplied by `factor`.
    pub fn scaled(&self, factor: i64) -> Result<Self> {
        let mut vals = Vec::with_capacity(self.vals.len());
        for &v in &self.vals {
            let s = (v as i64)
                .checked_mul(factor)
                .and_then(|s| i32::try_from(s).ok())
                .ok_or_else(|| Error::InvalidGraph("scaled coupling overflows".into()))?;
            vals.push(s);
        }
        Ok(Self {
            vals,
            ..self.clone()
        })
    }

    /// `J x` for real `x`. Summation runs over ascending columns, so results
    /// are reproducible bit for bit.
    pub fn mul_real(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (c, v) in self.row(i) {
                acc += v as f64 * x[c];
            }
            *o = acc;
        }
    }

    /// `J x` for integer `x`.
    pub fn mul_int(&self, x: &[i64], out: &mut [i64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).map(|(c, v)| v * x[c]).sum();
        }
    }

    /// Local field `sum_j J_ij s_j` at spin `i`.
    pub fn local_field(&self, i: usize, s: &[i8]) -> i64 {
        self.row(i).map(|(c, v)| v * s[c] as i64).sum()
    }
}

/// `J_ij = J_ji = w` for each edge, `h = 0`.
pub fn maxcut_to_ising(g: &Graph) -> IsingModel {
    let n = g.node_count();
    let mut t: Vec<(usize, usize, i64)> = Vec::with_capacity(2 * g.edges().len());
    for e in g.edges() {
        t.push((e.i, e.j, e.w));
        t.push((e.j, e.i, e.w));
    }
    t.sort_unstable_by_key(|&(r, c, _)| (r, c));
    IsingModel::from_sorted_triplets(n, &t, vec![0; n]).expect("graph weights fit in i32")
}

/// Total weight of edges whose endpoints lie on different sides.
pub fn cut_value(g: &Graph, s: &SpinState) -> Result<i64> {
    if s.len() != g.node_count() {
        return Err(Error::DimensionMismatch {
            expected: g.node_count(),
            found: s.len(),
        });
    }
    let sp = s.as_slice();
    Ok(g.edges()
        .iter()
        .filter(|e| sp[e.i] != sp[e.j])
        .map(|e| e.w)
        .sum())
}

/// `sum_{i<j} J_ij s_i s_j + sum_i h_i s_i`.
pub fn ising_energy(m: &IsingModel, s: &SpinState) -> Result<i64> {
    if s.len() != m.n() {
        return Err(Error::DimensionMismatch {
            expected: m.n(),
            found: s.len(),
        });
    }
    let sp = s.as_slice();
    let mut pair = 0i64;
    for i in 0..m.n() {
        pair += sp[i] as i64 * m.local_field(i, sp);
    }
    let bias: i64 = m.h().iter().zip(sp).map(|(h, &s)| h * s as i64).sum();
    Ok(pair / 2 + bias)
}

/// Cut recovered from the energy of a Max-Cut-derived model.
pub fn cut_from_energy(m: &IsingModel, energy: i64) -> i64 {
    (m.upper_weight() - energy) / 2
}
