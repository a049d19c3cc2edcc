use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::backend::{Negated, VmmBackend};
use super::trace::{EnergyTracker, SolveTrace, TraceBuilder};
use crate::error::{Error, Result};
use crate::graph::{IsingModel, SpinState};
use crate::quantize::{Interval, Rounding};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    #[default]
    #[serde(rename = "sb")]
    Conventional,
    #[serde(rename = "light-sb")]
    Light,
}

/// Ramp of the pump amplitude `p` over the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PSchedule {
    /// `p = delta * t / (ramp - 1)` at step `t`, held at `delta` afterwards.
    #[default]
    Linear,
}

/// Starting point of a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Init {
    Random,
    Spins(SpinState),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SbConfig {
    pub k_coeff: f64,
    pub delta: f64,
    /// Fixed coupling strength. When absent, `zeta_scale / (rms(J) * sqrt(n))`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
    pub zeta_scale: f64,
    pub p_schedule: PSchedule,
    /// Iterations over which `p` ramps to `delta`, after which it is held.
    /// Absent means the whole run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ramp_iters: Option<usize>,
    pub max_iters: usize,
    pub interval: Interval,
    pub rounding: Rounding,
    pub seed: u64,
    /// Iterations with unchanged spins that count as converged.
    pub window: usize,
    pub stop_on_convergence: bool,
    /// Store the spin vector in every trace record.
    pub record_spins: bool,
}

impl Default for SbConfig {
    fn default() -> Self {
        Self {
            k_coeff: 1.0,
            delta: 0.75,
            zeta: None,
            zeta_scale: 0.7,
            p_schedule: PSchedule::Linear,
            ramp_iters: None,
            max_iters: 1000,
            interval: Interval::Float,
            rounding: Rounding::Stochastic,
            seed: 0,
            window: 10,
            stop_on_convergence: true,
            record_spins: false,
        }
    }
}

impl SbConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return bad(format!("delta must be positive, got {}", self.delta));
        }
        if !(self.k_coeff.is_finite() && self.k_coeff >= 0.0) {
            return bad(format!("k_coeff must be >= 0, got {}", self.k_coeff));
        }
        if let Some(z) = self.zeta {
            if !(z.is_finite() && z > 0.0) {
                return bad(format!("zeta must be positive, got {z}"));
            }
        }
        if !(self.zeta_scale.is_finite() && self.zeta_scale > 0.0) {
            return bad(format!("zeta_scale must be positive, got {}", self.zeta_scale));
        }
        if self.max_iters == 0 {
            return bad("max_iters must be >= 1".into());
        }
        if self.ramp_iters == Some(0) {
            return bad("ramp_iters must be >= 1".into());
        }
        if self.window == 0 {
            return bad("window must be >= 1".into());
        }
        Ok(())
    }

    pub fn zeta_for(&self, m: &IsingModel) -> f64 {
        if let Some(z) = self.zeta {
            return z;
        }
        let rms = m.coupling_rms();
        if rms == 0.0 {
            self.zeta_scale
        } else {
            self.zeta_scale / (rms * (m.n() as f64).sqrt())
        }
    }

    /// Pump amplitude applied at step `t` (0-based).
    pub fn p_at(&self, t: usize) -> f64 {
        let ramp = self.ramp_iters.unwrap_or(self.max_iters);
        match self.p_schedule {
            PSchedule::Linear if ramp > 1 => {
                self.delta * t.min(ramp - 1) as f64 / (ramp - 1) as f64
            }
            PSchedule::Linear => self.delta,
        }
    }

    /// Constants of one step. The light variant always runs on the ternary grid.
    pub fn step_params(&self, m: &IsingModel, variant: Variant) -> StepParams {
        let (k_coeff, interval) = match variant {
            Variant::Conventional => (self.k_coeff, self.interval),
            Variant::Light => (0.0, Interval::TERNARY),
        };
        StepParams {
            k_coeff,
            delta: self.delta,
            zeta: self.zeta_for(m),
            interval,
            rounding: self.rounding,
        }
    }
}

/// Resolved per-step constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepParams {
    pub k_coeff: f64,
    pub delta: f64,
    pub zeta: f64,
    pub interval: Interval,
    pub rounding: Rounding,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbState {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub iter: usize,
    pub p: f64,
}

impl SbState {
    pub fn zeros(n: usize) -> Self {
        Self { x: vec![0.0; n], y: vec![0.0; n], iter: 0, p: 0.0 }
    }

    pub fn spins(&self) -> SpinState {
        SpinState::from_signs(&self.x)
    }
}

/// `Y <- Y - K X^3 - (delta - p) X + zeta F`, then `X <- X + delta Y`, with
/// clamping, the inelastic wall and grid snapping. `field` is `F`.
fn update<R: Rng + ?Sized>(st: &mut SbState, field: &[f64], prm: &StepParams, rng: &mut R) {
    let lin = prm.delta - st.p;
    for i in 0..st.x.len() {
        let x = st.x[i];
        let y = st.y[i] - prm.k_coeff * x * x * x - lin * x + prm.zeta * field[i];
        st.y[i] = prm.interval.snap(y.clamp(-1.0, 1.0), prm.rounding, rng);
    }
    for i in 0..st.x.len() {
        let r = st.x[i] + prm.delta * st.y[i];
        if r.abs() >= 1.0 {
            st.y[i] = 0.0;
        }
        st.x[i] = prm.interval.snap(r.clamp(-1.0, 1.0), prm.rounding, rng);
    }
    st.iter += 1;
}

fn check_state(n: usize, st: &SbState) -> Result<()> {
    for len in [st.x.len(), st.y.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, found: len });
        }
    }
    Ok(())
}

/// One conventional SB step with field `J X` evaluated on `backend`.
pub fn sb_step<B: VmmBackend + ?Sized, R: Rng + ?Sized>(
    backend: &B,
    st: &SbState,
    prm: &StepParams,
    rng: &mut R,
) -> Result<SbState> {
    check_state(backend.n(), st)?;
    let mut field = vec![0.0; st.x.len()];
    backend.mul_real(&st.x, &mut field)?;
    let mut next = st.clone();
    update(&mut next, &field, prm, rng);
    Ok(next)
}

fn to_ternary(x: &[f64], out: &mut [i8]) -> Result<()> {
    for (i, (&v, o)) in x.iter().zip(out.iter_mut()).enumerate() {
        *o = if v == 1.0 {
            1
        } else if v == -1.0 {
            -1
        } else if v == 0.0 {
            0
        } else {
            return Err(Error::InvalidInput { index: i, value: v as i64, expected: "-1, 0 or 1" });
        };
    }
    Ok(())
}

/// One light SB step: no cubic term, ternary grid, integer `J X` on `backend`.
pub fn light_sb_step<B: VmmBackend + ?Sized, R: Rng + ?Sized>(
    backend: &B,
    st: &SbState,
    prm: &StepParams,
    rng: &mut R,
) -> Result<SbState> {
    check_state(backend.n(), st)?;
    let n = st.x.len();
    let mut xt = vec![0i8; n];
    to_ternary(&st.x, &mut xt)?;
    let mut jx = vec![0i64; n];
    backend.mul_ternary(&xt, &mut jx)?;
    let field: Vec<f64> = jx.iter().map(|&v| v as f64).collect();
    let prm = StepParams { k_coeff: 0.0, interval: Interval::TERNARY, ..*prm };
    let mut next = st.clone();
    update(&mut next, &field, &prm, rng);
    Ok(next)
}

/// Starting magnitude of conventional SB positions on a given grid.
fn init_level(interval: Interval) -> f64 {
    match interval {
        Interval::Float => 0.1,
        Interval::Grid(d) => (0.1 * d as f64).round().max(1.0) / d as f64,
    }
}

fn initial_state(
    n: usize,
    init: &Init,
    prm: &StepParams,
    variant: Variant,
    rng: &mut ChaCha8Rng,
) -> SbState {
    let mut st = SbState::zeros(n);
    match (variant, init) {
        (Variant::Light, Init::Spins(s)) => {
            st.x = s.as_slice().iter().map(|&v| v as f64).collect();
        }
        (Variant::Light, Init::Random) => {
            st.x = SpinState::random(n, rng).as_slice().iter().map(|&v| v as f64).collect();
        }
        (Variant::Conventional, Init::Spins(s)) => {
            let a = init_level(prm.interval);
            st.x = s.as_slice().iter().map(|&v| a * v as f64).collect();
        }
        (Variant::Conventional, Init::Random) => match prm.interval {
            Interval::Float => {
                st.x = (0..n).map(|_| rng.random_range(-0.1..0.1)).collect();
            }
            Interval::Grid(d) => {
                let top = (init_level(prm.interval) * d as f64).round() as u32;
                st.x = (0..n)
                    .map(|_| {
                        let k = rng.random_range(1..=top) as f64 / d as f64;
                        if rng.random::<bool>() {
                            k
                        } else {
                            -k
                        }
                    })
                    .collect();
            }
        },
    }
    st
}

/// Runs SB on the exact backend.
pub fn run_sb(m: &IsingModel, init: &Init, cfg: &SbConfig, variant: Variant) -> Result<SolveTrace> {
    run_sb_with(m, m, init, cfg, variant)
}

/// Runs SB with `J x` evaluated on `backend`, which must hold the couplings
/// of `m`. The dynamics maximize `x^T J x`, so the step is driven with `-J`
/// to minimize the energy of `m`.
pub fn run_sb_with<B: VmmBackend + ?Sized>(
    m: &IsingModel,
    backend: &B,
    init: &Init,
    cfg: &SbConfig,
    variant: Variant,
) -> Result<SolveTrace> {
    cfg.validate()?;
    let n = m.n();
    if backend.n() != n {
        return Err(Error::DimensionMismatch { expected: n, found: backend.n() });
    }
    if let Init::Spins(s) = init {
        if s.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: s.len() });
        }
    }
    let prm = cfg.step_params(m, variant);
    let neg = Negated(backend);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut st = initial_state(n, init, &prm, variant, &mut rng);

    let mut tracker = EnergyTracker::new(m, &st.spins());
    let mut trace = TraceBuilder::new(m, &tracker, cfg.window, cfg.record_spins);
    let mut field = vec![0.0; n];
    let mut xt = vec![0i8; n];
    let mut jx = vec![0i64; n];
    let mut signs = tracker.spins().to_vec();
    let mut converged = false;
    for t in 0..cfg.max_iters {
        st.p = cfg.p_at(t);
        match variant {
            Variant::Conventional => neg.mul_real(&st.x, &mut field)?,
            Variant::Light => {
                to_ternary(&st.x, &mut xt)?;
                neg.mul_ternary(&xt, &mut jx)?;
                for (f, &v) in field.iter_mut().zip(&jx) {
                    *f = v as f64;
                }
            }
        }
        update(&mut st, &field, &prm, &mut rng);
        // A spin at x = 0 keeps its previous sign.
        for (s, &x) in signs.iter_mut().zip(&st.x) {
            if x > 0.0 {
                *s = 1;
            } else if x < 0.0 {
                *s = -1;
            }
        }
        let flips = tracker.sync_to(m, &signs);
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

    fn model(n: usize, j: &[i64]) -> IsingModel {
        IsingModel::from_dense(n, j, vec![0; n]).unwrap()
    }

    fn params(k: f64, delta: f64, zeta: f64, interval: Interval) -> StepParams {
        StepParams { k_coeff: k, delta, zeta, interval, rounding: Rounding::Nearest }
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(0)
    }

    #[test]
    fn zero_state_is_fixed() {
        let m = model(2, &[0, 3, 3, 0]);
        let st = SbState::zeros(2);
        let prm = params(1.0, 0.5, 1.0, Interval::Float);
        let next = sb_step(&m, &st, &prm, &mut rng()).unwrap();
        assert_eq!((next.x, next.y), (vec![0.0; 2], vec![0.0; 2]));
        let next = light_sb_step(&m, &st, &prm, &mut rng()).unwrap();
        assert_eq!((next.x, next.y), (vec![0.0; 2], vec![0.0; 2]));
    }

    #[test]
    fn scalar_hand_evaluation() {
        let m = model(1, &[0]);
        let st = SbState { x: vec![1.0], y: vec![0.0], iter: 0, p: 0.0 };
        let next = sb_step(&m, &st, &params(1.0, 0.5, 7.0, Interval::Float), &mut rng()).unwrap();
        assert_eq!(next.y, vec![-1.0]);
        assert_eq!(next.x, vec![0.5]);
        assert_eq!(next.iter, 1);
    }

    #[test]
    fn grid_snap_after_step() {
        // p = delta and no couplings: y stays 0.6, x = 0 + 0.5 * 0.6 = 0.3
        let m = model(1, &[0]);
        let st = SbState { x: vec![0.0], y: vec![0.6], iter: 0, p: 0.5 };
        let next = sb_step(&m, &st, &params(0.0, 0.5, 1.0, Interval::Float), &mut rng()).unwrap();
        assert!((next.x[0] - 0.3).abs() < 1e-15);
        let next = sb_step(&m, &st, &params(0.0, 0.5, 1.0, Interval::Grid(2)), &mut rng()).unwrap();
        // y snaps 0.6 -> 0.5, then x = 0.25 -> 0.5
        assert_eq!((next.x[0], next.y[0]), (0.5, 0.5));
    }

    #[test]
    fn light_step_example() {
        let m = model(2, &[0, 1, 1, 0]);
        let st = SbState { x: vec![1.0, -1.0], y: vec![0.0, 0.0], iter: 0, p: 0.0 };
        let next = light_sb_step(&m, &st, &params(1.0, 0.5, 1.0, Interval::Float), &mut rng()).unwrap();
        assert_eq!(next.y, vec![-1.0, 1.0]);
        assert_eq!(next.x, vec![1.0, -1.0]);
    }

    #[test]
    fn light_step_linear_term_vanishes_at_full_pump() {
        let m = model(2, &[0, 0, 0, 0]);
        let st = SbState { x: vec![1.0, 0.0], y: vec![1.0, -1.0], iter: 3, p: 0.5 };
        let next = light_sb_step(&m, &st, &params(0.0, 0.5, 1.0, Interval::Float), &mut rng()).unwrap();
        // x0 hits the wall and its momentum resets; y1 unchanged
        assert_eq!(next.y, vec![0.0, -1.0]);
        assert_eq!(next.x, vec![1.0, -1.0]);
    }

    #[test]
    fn light_step_rejects_non_ternary_state() {
        let m = model(1, &[0]);
        let st = SbState { x: vec![0.5], y: vec![0.0], iter: 0, p: 0.0 };
        let prm = params(0.0, 0.5, 1.0, Interval::TERNARY);
        assert!(matches!(
            light_sb_step(&m, &st, &prm, &mut rng()),
            Err(Error::InvalidInput { .. })
        ));
    }

    #[test]
    fn dimension_mismatch() {
        let m = model(2, &[0, 1, 1, 0]);
        let prm = params(1.0, 0.5, 1.0, Interval::Float);
        assert!(sb_step(&m, &SbState::zeros(3), &prm, &mut rng()).is_err());
        let bad = Init::Spins(SpinState::all_up(3));
        assert!(run_sb(&m, &bad, &SbConfig::default(), Variant::Light).is_err());
    }

    #[test]
    fn single_edge_reaches_optimum() {
        let m = model(2, &[0, 1, 1, 0]);
        for variant in [Variant::Conventional, Variant::Light] {
            for seed in 0..10 {
                let cfg = SbConfig { seed, max_iters: 100, ..SbConfig::default() };
                let t = run_sb(&m, &Init::Random, &cfg, variant).unwrap();
                assert_eq!(t.best_cut, 1, "{variant:?} seed {seed}");
            }
        }
    }

    #[test]
    fn deterministic_traces() {
        let g = generate_instance(40, 0.2, -2, 2, 3).unwrap();
        let m = maxcut_to_ising(&g);
        for variant in [Variant::Conventional, Variant::Light] {
            let cfg = SbConfig { seed: 9, max_iters: 200, ..SbConfig::default() };
            let a = run_sb(&m, &Init::Random, &cfg, variant).unwrap();
            let b = run_sb(&m, &Init::Random, &cfg, variant).unwrap();
            assert_eq!(a, b);
            assert!(a.iterations_to_best <= a.iterations());
        }
    }

    #[test]
    fn invalid_configs() {
        let m = model(1, &[0]);
        for cfg in [
            SbConfig { delta: 0.0, ..SbConfig::default() },
            SbConfig { k_coeff: -1.0, ..SbConfig::default() },
            SbConfig { zeta: Some(0.0), ..SbConfig::default() },
            SbConfig { max_iters: 0, ..SbConfig::default() },
            SbConfig { window: 0, ..SbConfig::default() },
        ] {
            assert!(matches!(
                run_sb(&m, &Init::Random, &cfg, Variant::Conventional),
                Err(Error::InvalidConfig(_))
            ));
        }
    }

    #[test]
    fn p_ramp() {
        let cfg = SbConfig { delta: 0.5, max_iters: 5, ..SbConfig::default() };
        let p: Vec<f64> = (0..5).map(|t| cfg.p_at(t)).collect();
        assert_eq!(p, vec![0.0, 0.125, 0.25, 0.375, 0.5]);
    }

    #[test]
    fn init_levels() {
        assert_eq!(init_level(Interval::Float), 0.1);
        assert_eq!(init_level(Interval::Grid(1)), 1.0);
        assert_eq!(init_level(Interval::Grid(4)), 0.25);
        assert_eq!(init_level(Interval::Grid(16)), 0.125);
        assert_eq!(init_level(Interval::Grid(64)), 6.0 / 64.0);
    }
}
