use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{BackendKind, ExperimentConfig, InitStrategy, InstanceSource, SolverKind};
use super::report::{aggregate, to_csv_string, AggregateRow, RunRow};
use crate::attention::{attention_init_with, build_attention_matrices, SelfTerm};
use crate::cim::{attention_scores_crossbar, program_with_slices, ReadSummary};
use crate::error::{Error, Result};
use crate::graph::{generate_instance, maxcut_to_ising, parse_gset, Graph, IsingModel, SpinState};
use crate::solver::{
    interval_sweep, run_sa, run_sb, run_sb_with, Init, SaConfig, SbConfig, SolveTrace, SweepReport,
    SweepRun, Variant,
};
use crate::{derive_seed, mean_std};

/// A loaded problem.
#[derive(Debug, Clone)]
pub struct Instance {
    pub id: String,
    pub graph: Graph,
    pub model: IsingModel,
}

impl Instance {
    pub fn new(id: impl Into<String>, graph: Graph) -> Self {
        let model = maxcut_to_ising(&graph);
        Self { id: id.into(), graph, model }
    }
}

pub fn load_instance(src: &InstanceSource) -> Result<Instance> {
    match src {
        InstanceSource::File { path } => {
            let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
            let graph = parse_gset(&text)?;
            let id = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string());
            Ok(Instance::new(id, graph))
        }
        InstanceSource::Generate { n, density, weight_min, weight_max, seed } => {
            let graph = generate_instance(*n, *density, *weight_min, *weight_max, *seed)?;
            let id = format!("gen-n{n}-d{density}-w{weight_min}_{weight_max}-s{seed}");
            Ok(Instance::new(id, graph))
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io { path: path.display().to_string(), msg: e.to_string() }
}

/// Per-run trace file contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFile {
    pub instance: String,
    pub variant: String,
    pub init: String,
    pub backend: String,
    pub repetition: usize,
    pub seed: u64,
    pub best_cut: i64,
    pub iterations_to_best: usize,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crossbar: Option<ReadSummary>,
    pub config: ExperimentConfig,
    pub trace: SolveTrace,
}

fn initial_spins(inst: &Instance, cfg: &ExperimentConfig) -> Result<SpinState> {
    let m = &inst.model;
    match cfg.backend {
        BackendKind::Exact => Ok(attention_init_with(m, cfg.self_term)),
        BackendKind::Crossbar => {
            let a = build_attention_matrices(m);
            let mut s = attention_scores_crossbar(&a, cfg.crossbar.noise, cfg.crossbar.adc)?;
            if cfg.self_term == SelfTerm::Exclude {
                for (i, v) in s.s.iter_mut().enumerate() {
                    *v = v.saturating_sub(m.degree(i) as u64);
                }
            }
            Ok(s.to_spins())
        }
    }
}

/// Runs one repetition of the configured pipeline.
pub fn run_once(
    inst: &Instance,
    cfg: &ExperimentConfig,
    init: InitStrategy,
    repetition: usize,
) -> Result<(RunRow, TraceFile)> {
    let seed = derive_seed(cfg.seed, repetition as u64);
    let m = &inst.model;
    let start = Instant::now();
    let init_state = match init {
        InitStrategy::Random => Init::Random,
        InitStrategy::Attention => Init::Spins(initial_spins(inst, cfg)?),
    };
    let sb = SbConfig { seed, record_spins: cfg.output.record_spins, ..cfg.sb.clone() };
    let mut crossbar = None;
    let trace = match (cfg.solver, cfg.backend) {
        (SolverKind::Sb, BackendKind::Exact) => run_sb(m, &init_state, &sb, Variant::Conventional)?,
        (SolverKind::LightSb, BackendKind::Exact) => run_sb(m, &init_state, &sb, Variant::Light)?,
        (SolverKind::LightSb, BackendKind::Crossbar) => {
            let xb = program_with_slices(
                m,
                cfg.crossbar.slices_per_weight,
                cfg.crossbar.noise,
                cfg.crossbar.adc,
            )?;
            let t = run_sb_with(m, &xb, &init_state, &sb, Variant::Light)?;
            crossbar = Some(xb.read_summary());
            t
        }
        (SolverKind::Sa, BackendKind::Exact) => {
            let sa = SaConfig { seed, record_spins: cfg.output.record_spins, ..cfg.sa.clone() };
            run_sa(m, &init_state, &sa)?
        }
        (solver, backend) => {
            return Err(Error::InvalidConfig(format!("solver {solver} cannot run on backend {backend}")))
        }
    };
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let row = RunRow {
        instance: inst.id.clone(),
        n: m.n(),
        variant: cfg.solver.to_string(),
        init: init.to_string(),
        backend: cfg.backend.to_string(),
        repetition,
        seed,
        best_cut: trace.best_cut,
        iterations_to_best: trace.iterations_to_best,
        iterations: trace.iterations(),
        converged: trace.converged,
        wall_ms,
    };
    let file = TraceFile {
        instance: inst.id.clone(),
        variant: row.variant.clone(),
        init: row.init.clone(),
        backend: row.backend.clone(),
        repetition,
        seed,
        best_cut: trace.best_cut,
        iterations_to_best: trace.iterations_to_best,
        converged: trace.converged,
        crossbar,
        config: cfg.clone(),
        trace,
    };
    Ok((row, file))
}

fn run_reps(
    inst: &Instance,
    cfg: &ExperimentConfig,
    init: InitStrategy,
) -> Result<Vec<(RunRow, TraceFile)>> {
    (0..cfg.repetitions)
        .into_par_iter()
        .map(|r| run_once(inst, cfg, init, r))
        .collect()
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub rows: Vec<RunRow>,
    pub aggregates: Vec<AggregateRow>,
    pub traces: Vec<TraceFile>,
}

pub fn cmd_solve(inst: &Instance, cfg: &ExperimentConfig) -> Result<SolveReport> {
    cfg.validate()?;
    let (rows, traces): (Vec<_>, Vec<_>) = run_reps(inst, cfg, cfg.init)?.into_iter().unzip();
    let aggregates = aggregate(&rows);
    Ok(SolveReport { rows, aggregates, traces })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub instance: String,
    pub arm: String,
    pub repetition: usize,
    pub seed: u64,
    pub best_cut: i64,
    pub iterations_to_best: usize,
    pub iterations_to_target: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmSummary {
    pub arm: String,
    pub runs: usize,
    pub mean_best_cut: f64,
    pub mean_iterations_to_best: f64,
    /// Runs whose trace reached the target cut.
    pub reached_target: usize,
    /// Mean over the runs that reached the target.
    pub mean_iterations_to_target: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub instance: String,
    pub n: usize,
    pub variant: String,
    pub target: i64,
    /// "config" or "best-of-arms".
    pub target_source: String,
    pub random: ArmSummary,
    pub attention: ArmSummary,
    /// Attention mean iterations_to_best over random mean iterations_to_best.
    pub iteration_ratio: f64,
    /// Relative difference of mean best cuts, attention minus random.
    pub cut_gap: f64,
    pub rows: Vec<CompareRow>,
    pub config: ExperimentConfig,
}

fn summarize_arm(arm: &str, rows: &[CompareRow]) -> ArmSummary {
    let mine: Vec<&CompareRow> = rows.iter().filter(|r| r.arm == arm).collect();
    let cuts: Vec<f64> = mine.iter().map(|r| r.best_cut as f64).collect();
    let its: Vec<f64> = mine.iter().map(|r| r.iterations_to_best as f64).collect();
    let hit: Vec<f64> = mine.iter().filter_map(|r| r.iterations_to_target.map(|v| v as f64)).collect();
    ArmSummary {
        arm: arm.to_string(),
        runs: mine.len(),
        mean_best_cut: mean_std(&cuts).0,
        mean_iterations_to_best: mean_std(&its).0,
        reached_target: hit.len(),
        mean_iterations_to_target: (!hit.is_empty()).then(|| mean_std(&hit).0),
    }
}

/// Random against attention initialization with the same solver settings.
/// Repetition `r` of both arms uses the same solver seed.
pub fn cmd_compare_init(inst: &Instance, cfg: &ExperimentConfig) -> Result<CompareReport> {
    cfg.validate()?;
    let mut runs = Vec::new();
    for init in [InitStrategy::Random, InitStrategy::Attention] {
        for (row, file) in run_reps(inst, cfg, init)? {
            runs.push((row, file.trace));
        }
    }
    let best = runs.iter().map(|(r, _)| r.best_cut).max().expect("repetitions >= 1");
    let (target, target_source) = match cfg.compare.target {
        Some(t) => (t, "config"),
        None => (best, "best-of-arms"),
    };
    let rows: Vec<CompareRow> = runs
        .iter()
        .map(|(r, t)| CompareRow {
            instance: inst.id.clone(),
            arm: r.init.clone(),
            repetition: r.repetition,
            seed: r.seed,
            best_cut: r.best_cut,
            iterations_to_best: r.iterations_to_best,
            iterations_to_target: t.iterations_to_cut(target),
        })
        .collect();
    let random = summarize_arm("random", &rows);
    let attention = summarize_arm("attention", &rows);
    Ok(CompareReport {
        instance: inst.id.clone(),
        n: inst.model.n(),
        variant: cfg.solver.to_string(),
        target,
        target_source: target_source.to_string(),
        iteration_ratio: attention.mean_iterations_to_best / random.mean_iterations_to_best,
        cut_gap: (attention.mean_best_cut - random.mean_best_cut) / random.mean_best_cut.abs(),
        random,
        attention,
        rows,
        config: cfg.clone(),
    })
}

/// Aggregate row of the interval sweep CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCsvRow {
    pub instance: String,
    pub label: String,
    pub runs: usize,
    pub mean_cut: f64,
    pub std_cut: f64,
    pub normalized: f64,
    pub reference_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRunCsvRow {
    pub instance: String,
    pub label: String,
    pub run: usize,
    pub seed: u64,
    pub best_cut: i64,
    pub iterations_to_best: usize,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub report: SweepReport,
    pub rows: Vec<SweepCsvRow>,
    pub runs: Vec<SweepRunCsvRow>,
}

fn run_rows(instance: &str, runs: &[SweepRun]) -> Vec<SweepRunCsvRow> {
    runs.iter()
        .map(|r| SweepRunCsvRow {
            instance: instance.to_string(),
            label: r.label.clone(),
            run: r.run,
            seed: r.seed,
            best_cut: r.best_cut,
            iterations_to_best: r.iterations_to_best,
        })
        .collect()
}

pub fn cmd_sweep_interval(inst: &Instance, cfg: &ExperimentConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    if inst.model.n() < 2 {
        return Err(Error::InvalidConfig("the interval sweep needs at least 2 nodes".into()));
    }
    let sb = SbConfig { seed: cfg.seed, ..cfg.sb.clone() };
    let report = interval_sweep(&inst.model, &cfg.sweep.intervals, cfg.sweep.runs, &sb, &cfg.sa)?;
    let rows = report
        .rows
        .iter()
        .map(|r| SweepCsvRow {
            instance: inst.id.clone(),
            label: r.label.clone(),
            runs: r.runs,
            mean_cut: r.mean_cut,
            std_cut: r.std_cut,
            normalized: r.normalized,
            reference_mean: report.reference.mean_cut,
        })
        .collect();
    let runs = run_rows(&inst.id, &report.runs);
    Ok(SweepOutput { report, rows, runs })
}

/// Writes a generated instance in Gset format and returns it.
pub fn cmd_generate(
    n: usize,
    density: f64,
    weight_min: i64,
    weight_max: i64,
    seed: u64,
    out: &Path,
) -> Result<Graph> {
    let g = generate_instance(n, density, weight_min, weight_max, seed)?;
    write_file(out, g.to_gset().as_bytes())?;
    Ok(g)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Report(e.to_string()))?;
    write_file(path, text.as_bytes())
}

fn write_config(dir: &Path, cfg: &ExperimentConfig) -> Result<PathBuf> {
    let path = dir.join("config.toml");
    write_file(&path, cfg.to_toml()?.as_bytes())?;
    Ok(path)
}

/// Writes `report.csv`, `aggregate.csv`, `traces/run-NNN.json` and `config.toml`.
pub fn write_solve(dir: &Path, rep: &SolveReport, cfg: &ExperimentConfig) -> Result<()> {
    write_file(&dir.join("report.csv"), to_csv_string(&rep.rows)?.as_bytes())?;
    write_file(&dir.join("aggregate.csv"), to_csv_string(&rep.aggregates)?.as_bytes())?;
    for t in &rep.traces {
        write_json(&dir.join("traces").join(format!("run-{:03}.json", t.repetition)), t)?;
    }
    write_config(dir, cfg)?;
    Ok(())
}

/// Writes `compare.csv`, `compare.json` and `config.toml`.
pub fn write_compare(dir: &Path, rep: &CompareReport) -> Result<()> {
    write_file(&dir.join("compare.csv"), to_csv_string(&rep.rows)?.as_bytes())?;
    write_json(&dir.join("compare.json"), rep)?;
    write_config(dir, &rep.config)?;
    Ok(())
}

/// Writes `sweep.csv`, `sweep_runs.csv`, `sweep.json` and `config.toml`.
pub fn write_sweep(dir: &Path, out: &SweepOutput, cfg: &ExperimentConfig) -> Result<()> {
    write_file(&dir.join("sweep.csv"), to_csv_string(&out.rows)?.as_bytes())?;
    write_file(&dir.join("sweep_runs.csv"), to_csv_string(&out.runs)?.as_bytes())?;
    write_json(&dir.join("sweep.json"), &out.report)?;
    write_config(dir, cfg)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    fn edge_instance() -> Instance {
        Instance::new("edge", Graph::new(2, vec![Edge { i: 0, j: 1, w: 1 }]).unwrap())
    }

    #[test]
    fn single_edge_compare() {
        let inst = edge_instance();
        // equal scores tie to +1, so the attention start cuts nothing
        assert_eq!(attention_init_with(&inst.model, SelfTerm::Include), SpinState::all_up(2));
        let cfg = ExperimentConfig { repetitions: 1, ..Default::default() };
        let rep = cmd_compare_init(&inst, &cfg).unwrap();
        assert_eq!(rep.rows.len(), 2);
        assert_eq!(rep.target, 1);
        assert_eq!(rep.target_source, "best-of-arms");
        let att = rep.rows.iter().find(|r| r.arm == "attention").unwrap();
        assert_eq!(att.best_cut, 1);
        assert!(att.iterations_to_best > 0);
        assert_eq!(att.iterations_to_target, Some(att.iterations_to_best));
    }

    #[test]
    fn solve_is_deterministic_apart_from_wall_time() {
        let inst = load_instance(&InstanceSource::default()).unwrap();
        let cfg = ExperimentConfig { repetitions: 3, ..Default::default() };
        let strip = |mut rows: Vec<RunRow>| {
            rows.iter_mut().for_each(|r| r.wall_ms = 0.0);
            rows
        };
        let a = strip(cmd_solve(&inst, &cfg).unwrap().rows);
        let b = strip(cmd_solve(&inst, &cfg).unwrap().rows);
        assert_eq!(a, b);
        assert_eq!(a.len(), 3);
    }

    #[test]
    fn crossbar_solve_matches_exact() {
        let inst = load_instance(&InstanceSource::default()).unwrap();
        let exact = ExperimentConfig { repetitions: 2, ..Default::default() };
        let xb = ExperimentConfig { backend: BackendKind::Crossbar, ..exact.clone() };
        let a = cmd_solve(&inst, &exact).unwrap();
        let b = cmd_solve(&inst, &xb).unwrap();
        for (x, y) in a.traces.iter().zip(&b.traces) {
            assert_eq!(x.trace, y.trace);
            assert!(y.crossbar.unwrap().conversions > 0);
        }
    }

    #[test]
    fn missing_file_is_io_error() {
        let src = InstanceSource::File { path: "/nonexistent/g.txt".into() };
        assert!(matches!(load_instance(&src), Err(Error::Io { .. })));
    }
}
