#![allow(dead_code)]

use cim_ising::{Edge, Graph, IsingModel, SpinState};

/// Cut weight summed edge by edge.
pub fn direct_cut(g: &Graph, s: &[i8]) -> i64 {
    g.edges().iter().filter(|e| s[e.i] != s[e.j]).map(|e| e.w).sum()
}

/// Energy from the dense upper triangle plus the field term.
pub fn direct_energy(m: &IsingModel, s: &[i8]) -> i64 {
    let n = m.n();
    let j = m.dense();
    let mut e = 0;
    for a in 0..n {
        for b in a + 1..n {
            e += j[a * n + b] * s[a] as i64 * s[b] as i64;
        }
        e += m.h()[a] * s[a] as i64;
    }
    e
}

/// Exhaustive maximum cut. Node 0 is pinned to +1.
pub fn brute_force_maxcut(g: &Graph) -> i64 {
    let n = g.node_count();
    assert!(n <= 24, "enumeration too large");
    let mut best = i64::MIN;
    let mut s = vec![1i8; n];
    for mask in 0u32..(1 << (n - 1)) {
        for (k, v) in s.iter_mut().enumerate().skip(1) {
            *v = if mask >> (k - 1) & 1 == 1 { -1 } else { 1 };
        }
        best = best.max(direct_cut(g, &s));
    }
    best
}

/// Graph from an explicit upper-triangle weight list, skipping zeros.
pub fn graph_from_upper(n: usize, upper: &[i64]) -> Graph {
    let mut edges = Vec::new();
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            if upper[k] != 0 {
                edges.push(Edge { i, j, w: upper[k] });
            }
            k += 1;
        }
    }
    Graph::new(n, edges).unwrap()
}

pub fn spins(v: &[i8]) -> SpinState {
    SpinState::new(v.to_vec()).unwrap()
}
