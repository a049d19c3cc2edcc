use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use cim_ising::bench::{
    cmd_compare_init, cmd_generate, cmd_solve, cmd_sweep_interval, load_instance, to_csv_string,
    write_compare, write_solve, write_sweep, BackendKind, ExperimentConfig, InitStrategy,
    InstanceSource, SolverKind,
};
use cim_ising::cim::AdcBits;
use cim_ising::{Error, Interval, Rounding, SelfTerm, TemperatureSchedule};

#[derive(Parser)]
#[command(name = "cim-ising", version, about = "Max-Cut / Ising experiments with simulated bifurcation")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured solver pipeline and write reports and traces.
    #[command(allow_negative_numbers = true)]
    Solve(Common),
    /// Write a random instance in Gset format.
    Generate(GenerateArgs),
    /// Compare random and attention initialization.
    #[command(allow_negative_numbers = true)]
    CompareInit(Common),
    /// Sweep the SB quantization interval against the floating-point reference.
    #[command(allow_negative_numbers = true)]
    SweepInterval(Common),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    density: f64,
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    wmin: i64,
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    wmax: i64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

/// Flags shared by the experiment subcommands. Each overrides the matching
/// config file value; `--set key=value` reaches any remaining field.
#[derive(Args)]
struct Common {
    /// TOML experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Gset instance file.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Generate the instance instead: N,DENSITY,WMIN,WMAX,SEED.
    #[arg(long, value_name = "SPEC", allow_hyphen_values = true)]
    generate: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    repetitions: Option<usize>,
    #[arg(long, value_parser = ["random", "attention"])]
    init: Option<String>,
    #[arg(long, value_parser = ["sb", "light-sb", "sa"])]
    solver: Option<String>,
    #[arg(long, value_parser = ["exact", "crossbar"])]
    backend: Option<String>,
    #[arg(long, value_parser = ["include", "exclude"])]
    self_term: Option<String>,
    #[arg(long)]
    k_coeff: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    zeta: Option<f64>,
    #[arg(long)]
    zeta_scale: Option<f64>,
    #[arg(long)]
    ramp_iters: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// "float", "1" or "1/d".
    #[arg(long)]
    interval: Option<String>,
    #[arg(long, value_parser = ["nearest", "stochastic"])]
    rounding: Option<String>,
    #[arg(long)]
    window: Option<usize>,
    /// Keep iterating after the spins stabilize.
    #[arg(long)]
    no_early_stop: bool,
    #[arg(long)]
    sa_sweeps: Option<usize>,
    /// Relative geometric schedule start, in units of rms(J) * sqrt(n).
    #[arg(long)]
    sa_t0: Option<f64>,
    #[arg(long)]
    sa_t_end: Option<f64>,
    #[arg(long)]
    slices: Option<usize>,
    #[arg(long)]
    i_on_mean: Option<f64>,
    #[arg(long)]
    i_on_sigma: Option<f64>,
    #[arg(long)]
    i_off_mean: Option<f64>,
    #[arg(long)]
    i_off_sigma: Option<f64>,
    #[arg(long)]
    read_sigma: Option<f64>,
    #[arg(long)]
    noise_seed: Option<u64>,
    /// ADC resolution in bits, or "exact".
    #[arg(long)]
    adc_bits: Option<String>,
    #[arg(long)]
    adc_full_scale: Option<f64>,
    /// Target cut for compare-init.
    #[arg(long, allow_negative_numbers = true)]
    target: Option<i64>,
    /// Comma-separated intervals for sweep-interval.
    #[arg(long)]
    intervals: Option<String>,
    /// Runs per interval for sweep-interval.
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    record_spins: bool,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Set any config key, e.g. `--set sb.delta=0.8`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Config(anyhow::Error),
    Instance(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Instance(_) => 2,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Config(e) | Failure::Instance(e) => e,
        }
    }
}

fn cfg_err<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Config(e.into())
}

fn parse_enum<T: serde::de::DeserializeOwned>(s: &str) -> anyhow::Result<T> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| anyhow!("invalid value {s:?}"))
}

fn apply_set(cfg: ExperimentConfig, assignments: &[String]) -> anyhow::Result<ExperimentConfig> {
    if assignments.is_empty() {
        return Ok(cfg);
    }
    let mut root = toml::Table::try_from(&cfg)?;
    for a in assignments {
        let (key, raw) = a.split_once('=').ok_or_else(|| anyhow!("--set expects KEY=VALUE, got {a:?}"))?;
        let value: toml::Value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(raw.to_string()));
        let parts: Vec<&str> = key.trim().split('.').collect();
        let (last, path) = parts.split_last().expect("split yields one part");
        let mut table = &mut root;
        for p in path {
            table = table
                .entry(p.to_string())
                .or_insert_with(|| toml::Value::Table(Default::default()))
                .as_table_mut()
                .ok_or_else(|| anyhow!("{key}: {p} is not a table"))?;
        }
        table.insert(last.to_string(), value);
    }
    Ok(ExperimentConfig::from_toml(&toml::to_string(&root)?)?)
}

fn build_config(c: &Common) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(p) = &c.instance {
        cfg.instance = InstanceSource::File { path: p.clone() };
    }
    if let Some(spec) = &c.generate {
        let f: Vec<&str> = spec.split(',').map(str::trim).collect();
        if f.len() != 5 {
            return Err(anyhow!("--generate expects N,DENSITY,WMIN,WMAX,SEED"));
        }
        cfg.instance = InstanceSource::Generate {
            n: f[0].parse().context("generate n")?,
            density: f[1].parse().context("generate density")?,
            weight_min: f[2].parse().context("generate wmin")?,
            weight_max: f[3].parse().context("generate wmax")?,
            seed: f[4].parse().context("generate seed")?,
        };
    }
    if let Some(v) = c.seed {
        cfg.seed = v;
    }
    if let Some(v) = c.repetitions {
        cfg.repetitions = v;
    }
    if let Some(v) = &c.init {
        cfg.init = parse_enum::<InitStrategy>(v)?;
    }
    if let Some(v) = &c.solver {
        cfg.solver = parse_enum::<SolverKind>(v)?;
    }
    if let Some(v) = &c.backend {
        cfg.backend = parse_enum::<BackendKind>(v)?;
    }
    if let Some(v) = &c.self_term {
        cfg.self_term = parse_enum::<SelfTerm>(v)?;
    }
    let sb = &mut cfg.sb;
    if let Some(v) = c.k_coeff {
        sb.k_coeff = v;
    }
    if let Some(v) = c.delta {
        sb.delta = v;
    }
    if let Some(v) = c.zeta {
        sb.zeta = Some(v);
    }
    if let Some(v) = c.zeta_scale {
        sb.zeta_scale = v;
    }
    if let Some(v) = c.ramp_iters {
        sb.ramp_iters = Some(v);
    }
    if let Some(v) = c.max_iters {
        sb.max_iters = v;
    }
    if let Some(v) = &c.interval {
        sb.interval = v.parse::<Interval>()?;
    }
    if let Some(v) = &c.rounding {
        sb.rounding = parse_enum::<Rounding>(v)?;
    }
    if let Some(v) = c.window {
        sb.window = v;
        cfg.sa.window = v;
    }
    if c.no_early_stop {
        sb.stop_on_convergence = false;
        cfg.sa.stop_on_convergence = false;
    }
    if let Some(v) = c.sa_sweeps {
        cfg.sa.max_iters = v;
    }
    if c.sa_t0.is_some() || c.sa_t_end.is_some() {
        let (t0, t_end) = match cfg.sa.schedule {
            TemperatureSchedule::Relative { t0, t_end } => (t0, t_end),
            _ => match TemperatureSchedule::default() {
                TemperatureSchedule::Relative { t0, t_end } => (t0, t_end),
                _ => unreachable!("default schedule is relative"),
            },
        };
        cfg.sa.schedule = TemperatureSchedule::Relative {
            t0: c.sa_t0.unwrap_or(t0),
            t_end: c.sa_t_end.unwrap_or(t_end),
        };
    }
    let xb = &mut cfg.crossbar;
    if let Some(v) = c.slices {
        xb.slices_per_weight = v;
    }
    if let Some(v) = c.i_on_mean {
        xb.noise.i_on_mean = v;
    }
    if let Some(v) = c.i_on_sigma {
        xb.noise.i_on_sigma = v;
    }
    if let Some(v) = c.i_off_mean {
        xb.noise.i_off_mean = v;
    }
    if let Some(v) = c.i_off_sigma {
        xb.noise.i_off_sigma = v;
    }
    if let Some(v) = c.read_sigma {
        xb.noise.read_sigma = v;
    }
    if let Some(v) = c.noise_seed {
        xb.noise.seed = v;
    }
    if let Some(v) = &c.adc_bits {
        xb.adc.bits = v.parse::<AdcBits>()?;
    }
    if let Some(v) = c.adc_full_scale {
        xb.adc.full_scale = v;
    }
    if let Some(v) = c.target {
        cfg.compare.target = Some(v);
    }
    if let Some(v) = &c.intervals {
        cfg.sweep.intervals =
            v.split(',').map(|s| s.parse::<Interval>()).collect::<Result<_, _>>()?;
    }
    if let Some(v) = c.runs {
        cfg.sweep.runs = v;
    }
    if c.record_spins {
        cfg.output.record_spins = true;
    }
    if let Some(v) = &c.out {
        cfg.output.dir = v.clone();
    }
    let cfg = apply_set(cfg, &c.set)?;
    cfg.validate()?;
    Ok(cfg)
}

fn prepare(c: &Common) -> Result<(ExperimentConfig, cim_ising::bench::Instance), Failure> {
    let cfg = build_config(c).map_err(cfg_err)?;
    let inst = load_instance(&cfg.instance).map_err(|e| match e {
        Error::InvalidDensity(_) | Error::EmptyWeightRange { .. } => cfg_err(e),
        other => Failure::Instance(other.into()),
    })?;
    Ok((cfg, inst))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Command::Solve(c) => {
            let (cfg, inst) = prepare(&c)?;
            let rep = cmd_solve(&inst, &cfg).map_err(cfg_err)?;
            write_solve(&cfg.output.dir, &rep, &cfg).map_err(cfg_err)?;
            print!("{}", to_csv_string(&rep.aggregates).map_err(cfg_err)?);
        }
        Command::CompareInit(c) => {
            let (cfg, inst) = prepare(&c)?;
            let rep = cmd_compare_init(&inst, &cfg).map_err(cfg_err)?;
            write_compare(&cfg.output.dir, &rep).map_err(cfg_err)?;
            println!(
                "target {} ({}); random: mean best {:.2}, mean iterations {:.1}; \
                 attention: mean best {:.2}, mean iterations {:.1}; ratio {:.3}",
                rep.target,
                rep.target_source,
                rep.random.mean_best_cut,
                rep.random.mean_iterations_to_best,
                rep.attention.mean_best_cut,
                rep.attention.mean_iterations_to_best,
                rep.iteration_ratio
            );
        }
        Command::SweepInterval(c) => {
            let (cfg, inst) = prepare(&c)?;
            let out = cmd_sweep_interval(&inst, &cfg).map_err(cfg_err)?;
            write_sweep(&cfg.output.dir, &out, &cfg).map_err(cfg_err)?;
            print!("{}", to_csv_string(&out.rows).map_err(cfg_err)?);
        }
        Command::Generate(g) => {
            let graph = cmd_generate(g.n, g.density, g.wmin, g.wmax, g.seed, &g.out).map_err(cfg_err)?;
            println!("{} nodes, {} edges -> {}", graph.node_count(), graph.edges().len(), g.out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}
