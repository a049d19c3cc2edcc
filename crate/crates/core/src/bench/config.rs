use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::attention::SelfTerm;
use crate::cim::{AdcConfig, NoiseModel, DEFAULT_SLICES};
use crate::error::{Error, Result};
use crate::quantize::Interval;
use crate::solver::{SaConfig, SbConfig};

/// Where the problem instance comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InstanceSource {
    File {
        path: PathBuf,
    },
    Generate {
        n: usize,
        density: f64,
        weight_min: i64,
        weight_max: i64,
        seed: u64,
    },
}

impl Default for InstanceSource {
    fn default() -> Self {
        InstanceSource::Generate { n: 32, density: 0.1, weight_min: -4, weight_max: 4, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitStrategy {
    Random,
    #[default]
    Attention,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Sb,
    #[default]
    LightSb,
    Sa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Exact,
    Crossbar,
}

macro_rules! display_via_serde {
    ($($t:ty),*) => {$(
        impl std::fmt::Display for $t {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                let s = serde_json::to_value(self).map_err(|_| std::fmt::Error)?;
                f.write_str(s.as_str().ok_or(std::fmt::Error)?)
            }
        }
    )*};
}

display_via_serde!(InitStrategy, SolverKind, BackendKind);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrossbarConfig {
    pub slices_per_weight: usize,
    pub noise: NoiseModel,
    pub adc: AdcConfig,
}

impl Default for CrossbarConfig {
    fn default() -> Self {
        Self { slices_per_weight: DEFAULT_SLICES, noise: NoiseModel::ideal(), adc: AdcConfig::exact() }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    /// Cut that counts as reaching the target. Absent means the best cut
    /// found by either arm.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub intervals: Vec<Interval>,
    pub runs: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { intervals: Interval::STUDY.to_vec(), runs: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Store spin vectors in trace files.
    pub record_spins: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), record_spins: false }
    }
}

/// Complete description of one experiment. Every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Base seed; repetition `r` runs with `derive_seed(seed, r)`.
    pub seed: u64,
    pub repetitions: usize,
    pub init: InitStrategy,
    pub solver: SolverKind,
    pub backend: BackendKind,
    pub self_term: SelfTerm,
    pub instance: InstanceSource,
    pub sb: SbConfig,
    pub sa: SaConfig,
    pub crossbar: CrossbarConfig,
    pub compare: CompareConfig,
    pub sweep: SweepConfig,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            repetitions: 10,
            init: InitStrategy::default(),
            solver: SolverKind::default(),
            backend: BackendKind::default(),
            self_term: SelfTerm::default(),
            instance: InstanceSource::default(),
            sb: SbConfig::default(),
            sa: SaConfig::default(),
            crossbar: CrossbarConfig::default(),
            compare: CompareConfig::default(),
            sweep: SweepConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidConfig(format!(
            "cannot read config {}: {e}",
            path.display()
        )))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::InvalidConfig("repetitions must be >= 1".into()));
        }
        if self.seed > i64::MAX as u64 {
            return Err(Error::InvalidConfig("seed must fit in a signed 64-bit integer".into()));
        }
        self.sb.validate()?;
        if self.sa.max_iters == 0 || self.sa.window == 0 {
            return Err(Error::InvalidConfig("sa.max_iters and sa.window must be >= 1".into()));
        }
        if self.backend == BackendKind::Crossbar && self.solver != SolverKind::LightSb {
            return Err(Error::InvalidConfig(
                "the crossbar backend runs light-sb only (its inputs are ternary)".into(),
            ));
        }
        self.crossbar.noise.validate()?;
        self.crossbar.adc.validate()?;
        if self.sweep.runs == 0 {
            return Err(Error::InvalidConfig("sweep.runs must be >= 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cim::AdcBits;

    #[test]
    fn default_round_trips() {
        let c = ExperimentConfig::default();
        let text = c.to_toml().unwrap();
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), c);
    }

    #[test]
    fn customized_round_trips() {
        let mut c = ExperimentConfig::default();
        c.instance = InstanceSource::File { path: "g/G1.txt".into() };
        c.solver = SolverKind::Sa;
        c.sb.zeta = Some(0.037);
        c.sb.interval = Interval::Grid(8);
        c.sb.ramp_iters = Some(40);
        c.crossbar.adc.bits = AdcBits::Bits(6);
        c.crossbar.noise.i_on_sigma = 0.05;
        c.compare.target = Some(11500);
        c.sweep.intervals = vec![Interval::Float, Interval::Grid(1)];
        let text = c.to_toml().unwrap();
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), c);
    }

    #[test]
    fn partial_file_uses_defaults() {
        let c = ExperimentConfig::from_toml("repetitions = 3\n[sb]\nmax_iters = 50\n").unwrap();
        assert_eq!(c.repetitions, 3);
        assert_eq!(c.sb.max_iters, 50);
        assert_eq!(c.sb.delta, SbConfig::default().delta);
    }

    #[test]
    fn rejects_unknown_and_invalid() {
        assert!(ExperimentConfig::from_toml("repetitons = 3").is_err());
        let c = ExperimentConfig { repetitions: 0, ..Default::default() };
        assert!(c.validate().is_err());
        let c = ExperimentConfig {
            backend: BackendKind::Crossbar,
            solver: SolverKind::Sb,
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }
}
