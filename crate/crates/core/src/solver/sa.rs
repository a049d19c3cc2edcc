use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sb::Init;
use super::trace::{EnergyTracker, SolveTrace, TraceBuilder};
use crate::error::{Error, Result};
use crate::graph::{IsingModel, SpinState};

/// Temperature per sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TemperatureSchedule {
    /// `t0 * (t_end / t0)^(t / (sweeps - 1))` in energy units.
    Geometric { t0: f64, t_end: f64 },
    /// Geometric, with both ends given as multiples of `rms(J) * sqrt(n)`.
    Relative { t0: f64, t_end: f64 },
    /// Explicit per-sweep temperatures; the last one is held.
    Explicit { temps: Vec<f64> },
}

impl Default for TemperatureSchedule {
    fn default() -> Self {
        TemperatureSchedule::Relative { t0: 1.0, t_end: 0.02 }
    }
}

impl TemperatureSchedule {
    /// Per-sweep temperatures for `m` over `sweeps` sweeps.
    pub fn temperatures(&self, m: &IsingModel, sweeps: usize) -> Result<Vec<f64>> {
        let geometric = |t0: f64, t1: f64| -> Result<Vec<f64>> {
            if !(t0.is_finite() && t0 > 0.0 && t1.is_finite() && t1 >= 0.0 && t1 <= t0) {
                return Err(Error::InvalidConfig(format!(
                    "geometric schedule needs t0 > 0 and 0 <= t_end <= t0, got {t0}, {t1}"
                )));
            }
            if t1 == 0.0 {
                return Err(Error::InvalidConfig("geometric schedule needs t_end > 0".into()));
            }
            Ok((0..sweeps)
                .map(|t| {
                    let f = if sweeps > 1 { t as f64 / (sweeps - 1) as f64 } else { 0.0 };
                    t0 * (t1 / t0).powf(f)
                })
                .collect())
        };
        match self {
            TemperatureSchedule::Geometric { t0, t_end } => geometric(*t0, *t_end),
            TemperatureSchedule::Relative { t0, t_end } => {
                let scale = m.coupling_rms() * (m.n() as f64).sqrt();
                let scale = if scale > 0.0 { scale } else { 1.0 };
                geometric(t0 * scale, t_end * scale)
            }
            TemperatureSchedule::Explicit { temps } => {
                let first = *temps.first().ok_or(Error::EmptySchedule)?;
                if !(first.is_finite() && first > 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "initial temperature must be positive, got {first}"
                    )));
                }
                if temps.windows(2).any(|w| !(w[1] <= w[0] && w[1] >= 0.0)) {
                    return Err(Error::InvalidConfig(
                        "temperatures must be nonincreasing and nonnegative".into(),
                    ));
                }
                Ok((0..sweeps).map(|t| temps[t.min(temps.len() - 1)]).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SaConfig {
    pub schedule: TemperatureSchedule,
    /// Number of sweeps; one sweep proposes a flip of every spin in index order.
    pub max_iters: usize,
    pub seed: u64,
    pub window: usize,
    pub stop_on_convergence: bool,
    pub record_spins: bool,
}

impl Default for SaConfig {
    fn default() -> Self {
        Self {
            schedule: TemperatureSchedule::default(),
            max_iters: 1000,
            seed: 0,
            window: 10,
            stop_on_convergence: false,
            record_spins: false,
        }
    }
}

/// Metropolis single-spin-flip annealing.
pub fn run_sa(m: &IsingModel, init: &Init, cfg: &SaConfig) -> Result<SolveTrace> {
    if cfg.max_iters == 0 {
        return Err(Error::InvalidConfig("max_iters must be >= 1".into()));
    }
    if cfg.window == 0 {
        return Err(Error::InvalidConfig("window must be >= 1".into()));
    }
    let temps = cfg.schedule.temperatures(m, cfg.max_iters)?;
    let n = m.n();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let start = match init {
        Init::Random => SpinState::random(n, &mut rng),
        Init::Spins(s) if s.len() == n => s.clone(),
        Init::Spins(s) => return Err(Error::DimensionMismatch { expected: n, found: s.len() }),
    };
    let mut tracker = EnergyTracker::new(m, &start);
    let mut trace = TraceBuilder::new(m, &tracker, cfg.window, cfg.record_spins);
    let mut converged = false;
    let mut before = vec![0i8; n];
    for (t, &temp) in temps.iter().enumerate() {
        before.copy_from_slice(tracker.spins());
        for k in 0..n {
            let de = tracker.flip_delta(m, k);
            let accept = de <= 0 || (temp > 0.0 && rng.random::<f64>() < (-(de as f64) / temp).exp());
            if accept {
                tracker.flip(m, k);
            }
        }
        let flips = before.iter().zip(tracker.spins()).filter(|(a, b)| a != b).count();
        if trace.record(t + 1, &tracker, flips) {
            converged = true;
            if cfg.stop_on_convergence {
                break;
            }
        }
    }
    Ok(trace.finish(&tracker, converged))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_instance, maxcut_to_ising};

    fn edge() -> IsingModel {
        IsingModel::from_dense(2, &[0, 1, 1, 0], vec![0; 2]).unwrap()
    }

    fn explicit(temps: Vec<f64>, sweeps: usize) -> SaConfig {
        SaConfig { schedule: TemperatureSchedule::Explicit { temps }, max_iters: sweeps, ..SaConfig::default() }
    }

    #[test]
    fn greedy_limit_cuts_single_edge() {
        // first temperature must be positive; the rest is greedy descent
        let cfg = explicit(vec![1e-12, 0.0], 5);
        let t = run_sa(&edge(), &Init::Spins(SpinState::all_up(2)), &cfg).unwrap();
        assert_eq!(t.records[1].cut, 1);
        assert_eq!(t.final_spins.as_slice(), &[-1, 1]);
        assert_eq!(t.best_cut, 1);
    }

    #[test]
    fn zero_coupling_accepts_every_flip() {
        let m = IsingModel::from_dense(3, &[0; 9], vec![0; 3]).unwrap();
        let cfg = explicit(vec![0.5], 4);
        let t = run_sa(&m, &Init::Spins(SpinState::all_up(3)), &cfg).unwrap();
        assert!(t.records[1..].iter().all(|r| r.flips == 3));
        assert_eq!(t.final_spins, SpinState::all_up(3));
    }

    #[test]
    fn empty_and_invalid_schedules() {
        let m = edge();
        assert_eq!(run_sa(&m, &Init::Random, &explicit(vec![], 3)), Err(Error::EmptySchedule));
        assert!(run_sa(&m, &Init::Random, &explicit(vec![0.0], 3)).is_err());
        assert!(run_sa(&m, &Init::Random, &explicit(vec![1.0, 2.0], 3)).is_err());
        let cfg = SaConfig {
            schedule: TemperatureSchedule::Geometric { t0: 1.0, t_end: 2.0 },
            ..SaConfig::default()
        };
        assert!(run_sa(&m, &Init::Random, &cfg).is_err());
    }

    #[test]
    fn geometric_endpoints() {
        let s = TemperatureSchedule::Geometric { t0: 10.0, t_end: 0.1 };
        let t = s.temperatures(&edge(), 3).unwrap();
        assert!((t[0] - 10.0).abs() < 1e-12 && (t[1] - 1.0).abs() < 1e-12 && (t[2] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn deterministic_and_improving() {
        let g = generate_instance(60, 0.3, -1, 1, 2).unwrap();
        let m = maxcut_to_ising(&g);
        let cfg = SaConfig { seed: 4, max_iters: 200, ..SaConfig::default() };
        let a = run_sa(&m, &Init::Random, &cfg).unwrap();
        assert_eq!(a, run_sa(&m, &Init::Random, &cfg).unwrap());
        assert!(a.best_cut > a.records[0].cut);
    }
}
