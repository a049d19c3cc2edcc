//! Experiment configuration, reports and commands.

mod commands;
mod config;
mod report;

pub use commands::{
    cmd_compare_init, cmd_generate, cmd_solve, cmd_sweep_interval, load_instance, run_once,
    write_compare, write_solve, write_sweep, ArmSummary, CompareReport, CompareRow, Instance,
    SolveReport, SweepCsvRow, SweepOutput, SweepRunCsvRow, TraceFile,
};
pub use config::{
    BackendKind, CompareConfig, CrossbarConfig, ExperimentConfig, InitStrategy, InstanceSource,
    OutputConfig, SolverKind, SweepConfig,
};
pub use report::{aggregate, read_csv, to_csv_string, write_csv, AggregateRow, RunRow};
