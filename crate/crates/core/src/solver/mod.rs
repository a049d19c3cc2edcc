//! Simulated bifurcation and simulated annealing solvers.

mod backend;
mod sa;
mod sb;
mod sweep;
mod trace;

pub use backend::{Negated, VmmBackend};
pub use sa::{run_sa, SaConfig, TemperatureSchedule};
pub use sb::{
    light_sb_step, run_sb, run_sb_with, sb_step, Init, PSchedule, SbConfig, SbState, StepParams,
    Variant,
};
pub use sweep::{interval_sweep, SweepReport, SweepRow, SweepRun};
pub use trace::{IterRecord, SolveTrace};
