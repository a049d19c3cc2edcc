use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sa::{run_sa, SaConfig};
use super::sb::{run_sb, Init, SbConfig, Variant};
use crate::error::{Error, Result};
use crate::graph::IsingModel;
use crate::quantize::Interval;
use crate::{derive_seed, mean_std};

/// Label of the annealing baseline row.
pub const SA_LABEL: &str = "sa";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRun {
    pub label: String,
    pub run: usize,
    pub seed: u64,
    pub best_cut: i64,
    pub iterations_to_best: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub label: String,
    pub runs: usize,
    pub mean_cut: f64,
    pub std_cut: f64,
    /// `mean_cut` divided by the floating-point reference mean.
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub sb: SbConfig,
    pub sa: SaConfig,
    /// Floating-point conventional SB, the normalization reference.
    pub reference: SweepRow,
    pub reference_runs: Vec<SweepRun>,
    /// One row per requested interval, then the annealing baseline.
    pub rows: Vec<SweepRow>,
    pub runs: Vec<SweepRun>,
}

enum Job {
    Sb(Interval),
    Sa,
}

impl Job {
    fn label(&self) -> String {
        match self {
            Job::Sb(iv) => iv.to_string(),
            Job::Sa => SA_LABEL.to_string(),
        }
    }
}

fn summarize(label: String, runs: &[SweepRun], reference: f64) -> SweepRow {
    let cuts: Vec<f64> = runs.iter().map(|r| r.best_cut as f64).collect();
    let (mean, std) = mean_std(&cuts);
    SweepRow { label, runs: runs.len(), mean_cut: mean, std_cut: std, normalized: mean / reference }
}

/// Conventional SB from random starts at each interval, normalized to the
/// floating-point mean, plus an annealing baseline. Run `r` of every
/// configuration uses seed `derive_seed(cfg.seed, r)`.
pub fn interval_sweep(
    m: &IsingModel,
    intervals: &[Interval],
    runs: usize,
    cfg: &SbConfig,
    sa: &SaConfig,
) -> Result<SweepReport> {
    if runs == 0 {
        return Err(Error::InvalidConfig("runs per interval must be >= 1".into()));
    }
    cfg.validate()?;
    let mut jobs = vec![Job::Sb(Interval::Float)];
    jobs.extend(intervals.iter().filter(|iv| **iv != Interval::Float).map(|&iv| Job::Sb(iv)));
    jobs.push(Job::Sa);

    let tasks: Vec<(usize, usize)> =
        (0..jobs.len()).flat_map(|j| (0..runs).map(move |r| (j, r))).collect();
    let results: Vec<SweepRun> = tasks
        .par_iter()
        .map(|&(j, r)| {
            let seed = derive_seed(cfg.seed, r as u64);
            let trace = match jobs[j] {
                Job::Sb(interval) => {
                    let c = SbConfig { interval, seed, ..cfg.clone() };
                    run_sb(m, &Init::Random, &c, Variant::Conventional)?
                }
                Job::Sa => run_sa(m, &Init::Random, &SaConfig { seed, ..sa.clone() })?,
            };
            Ok(SweepRun {
                label: jobs[j].label(),
                run: r,
                seed,
                best_cut: trace.best_cut,
                iterations_to_best: trace.iterations_to_best,
            })
        })
        .collect::<Result<_>>()?;

    let by_job: Vec<&[SweepRun]> = results.chunks(runs).collect();
    let reference_mean = mean_std(&by_job[0].iter().map(|r| r.best_cut as f64).collect::<Vec<_>>()).0;
    let reference = summarize(jobs[0].label(), by_job[0], reference_mean);

    let mut rows = Vec::new();
    let mut out_runs = Vec::new();
    for &iv in intervals {
        let j = if iv == Interval::Float {
            0
        } else {
            jobs.iter().position(|job| matches!(job, Job::Sb(x) if *x == iv)).expect("job exists")
        };
        rows.push(summarize(jobs[j].label(), by_job[j], reference_mean));
        out_runs.extend_from_slice(by_job[j]);
    }
    let last = jobs.len() - 1;
    rows.push(summarize(jobs[last].label(), by_job[last], reference_mean));
    out_runs.extend_from_slice(by_job[last]);

    Ok(SweepReport {
        sb: cfg.clone(),
        sa: sa.clone(),
        reference,
        reference_runs: by_job[0].to_vec(),
        rows,
        runs: out_runs,
    })
}
