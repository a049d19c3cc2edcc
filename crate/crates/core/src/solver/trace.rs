use serde::{Deserialize, Serialize};

use crate::graph::{IsingModel, SpinState};

/// One recorded iteration. Iteration 0 is the initial state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterRecord {
    pub iter: usize,
    pub cut: i64,
    pub energy: i64,
    /// Spins that changed sign since the previous record.
    pub flips: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spins: Option<SpinState>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveTrace {
    pub records: Vec<IterRecord>,
    pub final_spins: SpinState,
    pub best_spins: SpinState,
    pub best_cut: i64,
    pub best_energy: i64,
    /// First iteration at which the best energy was reached.
    pub iterations_to_best: usize,
    pub converged: bool,
}

impl SolveTrace {
    /// Number of update steps executed.
    pub fn iterations(&self) -> usize {
        self.records.last().map_or(0, |r| r.iter)
    }

    /// First iteration whose cut reaches `target`.
    pub fn iterations_to_cut(&self, target: i64) -> Option<usize> {
        self.records.iter().find(|r| r.cut >= target).map(|r| r.iter)
    }
}

/// Exact integer energy maintained through local fields under spin flips.
#[derive(Debug, Clone)]
pub(crate) struct EnergyTracker {
    spins: Vec<i8>,
    field: Vec<i64>,
    energy: i64,
}

impl EnergyTracker {
    pub fn new(m: &IsingModel, s: &SpinState) -> Self {
        let spins = s.as_slice().to_vec();
        let field: Vec<i64> = (0..m.n()).map(|i| m.local_field(i, &spins)).collect();
        let pair: i64 = spins.iter().zip(&field).map(|(&s, &f)| s as i64 * f).sum();
        let bias: i64 = m.h().iter().zip(&spins).map(|(h, &s)| h * s as i64).sum();
        Self { spins, field, energy: pair / 2 + bias }
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn energy(&self) -> i64 {
        self.energy
    }

    /// Energy change if spin `k` were flipped.
    pub fn flip_delta(&self, m: &IsingModel, k: usize) -> i64 {
        -2 * self.spins[k] as i64 * (self.field[k] + m.h()[k])
    }

    pub fn flip(&mut self, m: &IsingModel, k: usize) {
        self.energy += self.flip_delta(m, k);
        let old = self.spins[k] as i64;
        self.spins[k] = -self.spins[k];
        for (c, v) in m.row(k) {
            self.field[c] -= 2 * v * old;
        }
    }

    /// Moves to the sign pattern of `target`, returning the number of flips.
    pub fn sync_to(&mut self, m: &IsingModel, target: &[i8]) -> usize {
        let mut flips = 0;
        for k in 0..target.len() {
            if self.spins[k] != target[k] {
                self.flip(m, k);
                flips += 1;
            }
        }
        flips
    }
}

/// Accumulates records, tracks the best state and the stability window.
pub(crate) struct TraceBuilder {
    weight: i64,
    window: usize,
    record_spins: bool,
    stable: usize,
    records: Vec<IterRecord>,
    best_energy: i64,
    best_spins: Vec<i8>,
    iterations_to_best: usize,
}

impl TraceBuilder {
    pub fn new(m: &IsingModel, t: &EnergyTracker, window: usize, record_spins: bool) -> Self {
        let mut b = Self {
            weight: m.upper_weight(),
            window,
            record_spins,
            stable: 0,
            records: Vec::new(),
            best_energy: t.energy(),
            best_spins: t.spins().to_vec(),
            iterations_to_best: 0,
        };
        b.push(0, t, 0);
        b
    }

    fn push(&mut self, iter: usize, t: &EnergyTracker, flips: usize) {
        let e = t.energy();
        self.records.push(IterRecord {
            iter,
            cut: (self.weight - e) / 2,
            energy: e,
            flips,
            spins: self.record_spins.then(|| SpinState::from_trusted(t.spins().to_vec())),
        });
        if e < self.best_energy {
            self.best_energy = e;
            self.best_spins.copy_from_slice(t.spins());
            self.iterations_to_best = iter;
        }
    }

    /// Records an iteration; returns true once spins have been unchanged for
    /// `window` consecutive iterations.
    pub fn record(&mut self, iter: usize, t: &EnergyTracker, flips: usize) -> bool {
        self.push(iter, t, flips);
        if flips == 0 {
            self.stable += 1;
        } else {
            self.stable = 0;
        }
        self.stable >= self.window
    }

    pub fn finish(self, t: &EnergyTracker, converged: bool) -> SolveTrace {
        SolveTrace {
            records: self.records,
            final_spins: SpinState::from_trusted(t.spins().to_vec()),
            best_spins: SpinState::from_trusted(self.best_spins),
            best_cut: (self.weight - self.best_energy) / 2,
            best_energy: self.best_energy,
            iterations_to_best: self.iterations_to_best,
            converged,
        }
    }
}
