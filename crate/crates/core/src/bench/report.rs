use std::io::{Read, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mean_std;

/// One solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub instance: String,
    pub n: usize,
    pub variant: String,
    pub init: String,
    pub backend: String,
    pub repetition: usize,
    pub seed: u64,
    pub best_cut: i64,
    pub iterations_to_best: usize,
    pub iterations: usize,
    pub converged: bool,
    pub wall_ms: f64,
}

/// Mean and sample standard deviation over the runs of one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub instance: String,
    pub variant: String,
    pub init: String,
    pub backend: String,
    pub runs: usize,
    pub mean_best_cut: f64,
    pub std_best_cut: f64,
    pub mean_iterations_to_best: f64,
    pub std_iterations_to_best: f64,
}

/// Groups rows by (instance, variant, init, backend) in order of first appearance.
pub fn aggregate(rows: &[RunRow]) -> Vec<AggregateRow> {
    let mut keys: Vec<(&str, &str, &str, &str)> = Vec::new();
    for r in rows {
        let k = (r.instance.as_str(), r.variant.as_str(), r.init.as_str(), r.backend.as_str());
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(instance, variant, init, backend)| {
            let group: Vec<&RunRow> = rows
                .iter()
                .filter(|r| {
                    r.instance == instance && r.variant == variant && r.init == init && r.backend == backend
                })
                .collect();
            let cuts: Vec<f64> = group.iter().map(|r| r.best_cut as f64).collect();
            let its: Vec<f64> = group.iter().map(|r| r.iterations_to_best as f64).collect();
            let (mc, sc) = mean_std(&cuts);
            let (mi, si) = mean_std(&its);
            AggregateRow {
                instance: instance.to_string(),
                variant: variant.to_string(),
                init: init.to_string(),
                backend: backend.to_string(),
                runs: group.len(),
                mean_best_cut: mc,
                std_best_cut: sc,
                mean_iterations_to_best: mi,
                std_iterations_to_best: si,
            }
        })
        .collect()
}

/// Writes rows as CSV with a header line.
pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Report(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Report(e.to_string()))
}

pub fn to_csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Report(e.to_string()))
}

/// Reads CSV rows; every field must parse as its declared type.
pub fn read_csv<T: DeserializeOwned, R: Read>(input: R) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| row.map_err(|e| Error::Report(e.to_string()))).collect()
}
