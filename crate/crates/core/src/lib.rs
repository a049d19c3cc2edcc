//! Max-Cut and Ising solvers: attention-style initialization, simulated
//! bifurcation (conventional and ternary "light" variants), a simulated
//! annealing baseline, and a behavioral compute-in-memory crossbar backend.

pub mod attention;
pub mod bench;
pub mod cim;
pub mod error;
pub mod graph;
pub mod quantize;
pub mod solver;

pub use attention::{
    attention_init, attention_init_with, attention_scores, attention_scores_sparse,
    attention_scores_with, build_attention_matrices, AttentionMatrices, BitMatrix, ScoreVector,
    SelfTerm,
};
pub use error::{Error, Result};
pub use graph::{
    cut_from_energy, cut_value, generate_instance, ising_energy, maxcut_to_ising, parse_gset,
    Edge, Graph, IsingModel, SpinState,
};
pub use quantize::{ternary_quantize, Interval, Rounding};
pub use solver::{
    interval_sweep, light_sb_step, run_sa, run_sb, run_sb_with, sb_step, Init, SaConfig, SbConfig,
    SbState, SolveTrace, TemperatureSchedule, Variant,
};

/// Seed of repetition `index` derived from a base seed (SplitMix64 finalizer).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(0x6a09_e667_f3bc_c909);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mean and sample standard deviation, summed in slice order.
pub fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
