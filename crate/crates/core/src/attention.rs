//! Attention-inspired initialization.
//!
//! From the coupling topology three binary matrices are formed: `K`
//! (connectivity), `Q` (its elementwise complement, diagonal included) and
//! `V` (column neighbour vectors, equal to `K`). Each spin gets the score
//! `S_i = Q_i^T K V_i`, and spins scoring at or above the mean start at +1.

use serde::{Deserialize, Serialize};

use crate::graph::{IsingModel, SpinState};

/// Dense square bit matrix, one `u64`-word bitset per row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(n: usize) -> Self {
        let words = n.div_ceil(64);
        Self {
            n,
            words,
            bits: vec![0; n * words],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.bits[r * self.words + c / 64] >> (c % 64) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        let w = &mut self.bits[r * self.words + c / 64];
        if v {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.bits[r * self.words..(r + 1) * self.words]
    }

    /// Elementwise complement, padding bits kept clear.
    pub fn complement(&self) -> Self {
        let mut out = self.clone();
        let tail = self.n % 64;
        for r in 0..self.n {
            let row = &mut out.bits[r * self.words..(r + 1) * self.words];
            for w in row.iter_mut() {
                *w = !*w;
            }
            if tail != 0 {
                row[self.words - 1] &= (1u64 << tail) - 1;
            }
        }
        out
    }

    /// Row as a 0/1 vector.
    pub fn row_vec(&self, r: usize) -> Vec<u8> {
        (0..self.n).map(|c| self.get(r, c) as u8).collect()
    }

    /// Column as a 0/1 vector.
    pub fn col_vec(&self, c: usize) -> Vec<u8> {
        (0..self.n).map(|r| self.get(r, c) as u8).collect()
    }
}

fn and_popcount(a: &[u64], b: &[u64]) -> u64 {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones() as u64).sum()
}

/// The `K`, `Q`, `V` triple for a model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttentionMatrices {
    pub k: BitMatrix,
    pub q: BitMatrix,
    pub v: BitMatrix,
}

impl AttentionMatrices {
    pub fn n(&self) -> usize {
        self.k.n()
    }

    /// Column `Q_i` as a 0/1 vector.
    pub fn q_col(&self, i: usize) -> Vec<u8> {
        self.q.col_vec(i)
    }

    /// Column `V_i` as a 0/1 vector.
    pub fn v_col(&self, i: usize) -> Vec<u8> {
        self.v.col_vec(i)
    }
}

/// Connectivity from the nonzero pattern of J; sign and magnitude ignored.
pub fn build_attention_matrices(m: &IsingModel) -> AttentionMatrices {
    let n = m.n();
    let mut k = BitMatrix::zeros(n);
    for i in 0..n {
        for (c, _) in m.row(i) {
            k.set(i, c, true);
        }
    }
    let q = k.complement();
    let v = k.clone();
    AttentionMatrices { k, q, v }
}

/// Whether the `j = i` term of the score sum is kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelfTerm {
    /// Literal triple sum; `Q_i[i] = 1` contributes `deg(i)`.
    #[default]
    Include,
    /// Drops the diagonal contribution.
    Exclude,
}

/// Per-spin scores with an exact rational mean `sum / n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreVector {
    pub s: Vec<u64>,
}

impl ScoreVector {
    pub fn sum(&self) -> u64 {
        self.s.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        if self.s.is_empty() {
            0.0
        } else {
            self.sum() as f64 / self.s.len() as f64
        }
    }

    /// `S_i >= Mean(S)` decided as `n * S_i >= sum S`.
    pub fn at_or_above_mean(&self, i: usize) -> bool {
        self.s.len() as u128 * self.s[i] as u128 >= self.sum() as u128
    }

    /// +1 at or above the mean, -1 below.
    pub fn to_spins(&self) -> SpinState {
        let spins = (0..self.s.len())
            .map(|i| if self.at_or_above_mean(i) { 1 } else { -1 })
            .collect();
        SpinState::new(spins).expect("entries are +-1")
    }
}

/// `S_i = sum_j Q_i[j] (K V_i)[j]`, with `(K V_i)[j]` evaluated as the popcount
/// of `K[j,:] & V[:,i]` (V symmetric, so its column is a row bitset).
pub fn attention_scores(a: &AttentionMatrices) -> ScoreVector {
    attention_scores_with(a, SelfTerm::Include)
}

pub fn attention_scores_with(a: &AttentionMatrices, self_term: SelfTerm) -> ScoreVector {
    let n = a.n();
    let s = (0..n)
        .map(|i| {
            let vi = a.v.row(i);
            (0..n)
                .filter(|&j| a.q.get(j, i) && !(self_term == SelfTerm::Exclude && j == i))
                .map(|j| and_popcount(a.k.row(j), vi))
                .sum()
        })
        .collect();
    ScoreVector { s }
}

/// Same scores from adjacency lists alone:
/// `S_i = sum_{k in N(i)} deg(k) - 2 * triangles(i)` (minus `deg(i)` without
/// the self term). Runs in `O(sum_i sum_{k in N(i)} (deg i + deg k))`, which
/// keeps large sparse instances tractable.
pub fn attention_scores_sparse(m: &IsingModel, self_term: SelfTerm) -> ScoreVector {
    let n = m.n();
    let nbrs: Vec<Vec<usize>> = (0..n).map(|i| m.row(i).map(|(c, _)| c).collect()).collect();
    let s = (0..n)
        .map(|i| {
            let ni = &nbrs[i];
            let mut total: u64 = 0;
            let mut common: u64 = 0;
            for &k in ni {
                total += nbrs[k].len() as u64;
                common += sorted_intersection_len(ni, &nbrs[k]);
            }
            let s = total - common;
            match self_term {
                SelfTerm::Include => s,
                SelfTerm::Exclude => s - ni.len() as u64,
            }
        })
        .collect();
    ScoreVector { s }
}

fn sorted_intersection_len(a: &[usize], b: &[usize]) -> u64 {
    let (mut x, mut y, mut c) = (0, 0, 0);
    while x < a.len() && y < b.len() {
        match a[x].cmp(&b[y]) {
            std::cmp::Ordering::Less => x += 1,
            std::cmp::Ordering::Greater => y += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                x += 1;
                y += 1;
            }
        }
    }
    c
}

/// Deterministic initial spins: +1 where `S_i >= Mean(S)`, else -1.
pub fn attention_init(m: &IsingModel) -> SpinState {
    attention_init_with(m, SelfTerm::Include)
}

pub fn attention_init_with(m: &IsingModel, self_term: SelfTerm) -> SpinState {
    attention_scores_sparse(m, self_term).to_spins()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_instance, maxcut_to_ising, Edge, Graph};

    fn model(n: usize, e: &[(usize, usize)]) -> IsingModel {
        let g = Graph::new(n, e.iter().map(|&(i, j)| Edge { i, j, w: 1 }).collect()).unwrap();
        maxcut_to_ising(&g)
    }

    fn complete(n: usize) -> IsingModel {
        let e: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        model(n, &e)
    }

    // Literal evaluation of sum_{j,k} Q_i[j] K[j,k] V_i[k] over 0/1 vectors.
    fn triple_sum(a: &AttentionMatrices) -> Vec<u64> {
        let n = a.n();
        (0..n)
            .map(|i| {
                let q = a.q_col(i);
                let v = a.v_col(i);
                let mut s = 0u64;
                for j in 0..n {
                    for k in 0..n {
                        s += q[j] as u64 * a.k.get(j, k) as u64 * v[k] as u64;
                    }
                }
                s
            })
            .collect()
    }

    #[test]
    fn path3_matrices() {
        let a = build_attention_matrices(&model(3, &[(0, 1), (1, 2)]));
        assert_eq!(a.k.row_vec(0), vec![0, 1, 0]);
        assert_eq!(a.k.row_vec(1), vec![1, 0, 1]);
        assert_eq!(a.k.row_vec(2), vec![0, 1, 0]);
        for r in 0..3 {
            for c in 0..3 {
                assert_eq!(a.q.get(r, c), !a.k.get(r, c));
                assert_eq!(a.v.get(r, c), a.k.get(r, c));
            }
        }
    }

    #[test]
    fn empty_and_complete_matrices() {
        let a = build_attention_matrices(&model(3, &[]));
        for r in 0..3 {
            assert_eq!(a.k.row_vec(r), vec![0, 0, 0]);
            assert_eq!(a.q.row_vec(r), vec![1, 1, 1]);
        }
        let a = build_attention_matrices(&complete(4));
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(a.q.get(r, c), r == c);
            }
        }
    }

    #[test]
    fn complement_clears_padding() {
        let a = build_attention_matrices(&model(70, &[(0, 69)]));
        let ones: u64 = (0..70).map(|r| a.q.row(r).iter().map(|w| w.count_ones() as u64).sum::<u64>()).sum();
        assert_eq!(ones, 70 * 70 - 2);
    }

    #[test]
    fn path4_scores_and_init() {
        let m = model(4, &[(0, 1), (1, 2), (2, 3)]);
        let a = build_attention_matrices(&m);
        assert_eq!(triple_sum(&a), vec![2, 3, 3, 2]);
        let s = attention_scores(&a);
        assert_eq!(s.s, vec![2, 3, 3, 2]);
        assert_eq!(s.mean(), 2.5);
        assert_eq!(attention_init(&m).as_slice(), &[-1, 1, 1, -1]);
    }

    #[test]
    fn empty_graph_ties_to_up() {
        let m = model(5, &[]);
        assert_eq!(attention_scores(&build_attention_matrices(&m)).s, vec![0; 5]);
        assert_eq!(attention_init(&m), SpinState::all_up(5));
    }

    #[test]
    fn complete_graph_scores() {
        for n in 2..8 {
            let a = build_attention_matrices(&complete(n));
            assert_eq!(triple_sum(&a), vec![n as u64 - 1; n]);
            assert_eq!(attention_scores(&a).s, vec![n as u64 - 1; n]);
            assert_eq!(attention_init(&complete(n)), SpinState::all_up(n));
        }
    }

    #[test]
    fn isolated_node_scores_zero() {
        let m = model(4, &[(0, 1), (1, 2)]);
        assert_eq!(attention_scores_sparse(&m, SelfTerm::Include).s[3], 0);
    }

    #[test]
    fn self_term_excluded_subtracts_degree() {
        let m = maxcut_to_ising(&generate_instance(20, 0.3, 1, 1, 4).unwrap());
        let a = build_attention_matrices(&m);
        let inc = attention_scores_with(&a, SelfTerm::Include);
        let exc = attention_scores_with(&a, SelfTerm::Exclude);
        for i in 0..20 {
            assert_eq!(inc.s[i] - exc.s[i], m.degree(i) as u64);
        }
        assert_eq!(exc, attention_scores_sparse(&m, SelfTerm::Exclude));
    }

    #[test]
    fn routes_agree_with_triple_sum() {
        for seed in 0..20 {
            let n = 3 + (seed as usize * 7) % 62;
            let m = maxcut_to_ising(&generate_instance(n, 0.05 + 0.045 * seed as f64, -3, 3, seed).unwrap());
            let a = build_attention_matrices(&m);
            let oracle = triple_sum(&a);
            assert_eq!(attention_scores(&a).s, oracle);
            assert_eq!(attention_scores_sparse(&m, SelfTerm::Include).s, oracle);
        }
    }
}
