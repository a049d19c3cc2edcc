use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::thermometer::{check_slices, thermometer_decode, thermometer_encode, DEFAULT_SLICES};
use crate::attention::{AttentionMatrices, ScoreVector};
use crate::error::{Error, Result};
use crate::graph::IsingModel;

/// Cell current statistics in normalized units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseModel {
    pub i_on_mean: f64,
    pub i_on_sigma: f64,
    pub i_off_mean: f64,
    pub i_off_sigma: f64,
    /// Sigma of the per-read noise added to each cell current. Zero by default.
    pub read_sigma: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub const IDEAL: NoiseModel = NoiseModel {
        i_on_mean: 1.0,
        i_on_sigma: 0.0,
        i_off_mean: 0.0,
        i_off_sigma: 0.0,
        read_sigma: 0.0,
        seed: 0,
    };

    pub fn ideal() -> Self {
        Self::IDEAL
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.i_on_mean,
            self.i_on_sigma,
            self.i_off_mean,
            self.i_off_sigma,
            self.read_sigma,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite
            || self.i_on_sigma < 0.0
            || self.i_off_sigma < 0.0
            || self.read_sigma < 0.0
            || self.i_off_mean < 0.0
            || self.i_on_mean <= self.i_off_mean
        {
            return Err(Error::InvalidConfig(format!("invalid noise model {self:?}")));
        }
        Ok(())
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::IDEAL
    }
}

/// ADC resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdcBits {
    #[default]
    Exact,
    Bits(u32),
}

impl fmt::Display for AdcBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdcBits::Exact => f.write_str("exact"),
            AdcBits::Bits(b) => write!(f, "{b}"),
        }
    }
}

impl FromStr for AdcBits {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("exact") {
            return Ok(AdcBits::Exact);
        }
        match s.parse::<u32>() {
            Ok(b) if (1..=32).contains(&b) => Ok(AdcBits::Bits(b)),
            _ => Err(Error::InvalidConfig(format!("invalid ADC bits {s:?}"))),
        }
    }
}

impl Serialize for AdcBits {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            AdcBits::Exact => s.serialize_str("exact"),
            AdcBits::Bits(b) => s.serialize_u32(*b),
        }
    }
}

impl<'de> Deserialize<'de> for AdcBits {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(b) => b.to_string().parse(),
            Raw::Str(s) => s.parse(),
        }
        .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdcConfig {
    pub bits: AdcBits,
    pub full_scale: f64,
}

impl AdcConfig {
    pub fn exact() -> Self {
        Self { bits: AdcBits::Exact, full_scale: 32.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.full_scale.is_finite() && self.full_scale > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "ADC full scale must be positive, got {}",
                self.full_scale
            )));
        }
        if let AdcBits::Bits(b) = self.bits {
            if !(1..=32).contains(&b) {
                return Err(Error::InvalidConfig(format!("invalid ADC bits {b}")));
            }
        }
        Ok(())
    }
}

impl Default for AdcConfig {
    fn default() -> Self {
        Self::exact()
    }
}

/// Converts a column current. Returns the digital value and whether it saturated.
///
/// With `bits = b` the levels are `k * full_scale / (2^b - 1)` for
/// `k = 0 ..= 2^b - 1`; inputs are rounded to the nearest level.
pub fn adc_readout(analog: f64, adc: &AdcConfig) -> (f64, bool) {
    let analog = analog.max(0.0);
    match adc.bits {
        AdcBits::Exact => (analog, false),
        AdcBits::Bits(b) => {
            if analog > adc.full_scale {
                return (adc.full_scale, true);
            }
            let top = ((1u64 << b) - 1) as f64;
            let step = adc.full_scale / top;
            let k = (analog / step).round().min(top);
            (k * step, false)
        }
    }
}

/// Read statistics accumulated by an array. Counters are atomic so reads can
/// run concurrently on a shared array.
#[derive(Debug, Default)]
struct ReadStats {
    conversions: AtomicU64,
    saturations: AtomicU64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReadSummary {
    pub conversions: u64,
    pub saturations: u64,
}

/// A programmed crossbar: `rows x (logical_cols * slices)` binary cells.
#[derive(Debug)]
pub struct CrossbarArray {
    rows: usize,
    logical_cols: usize,
    slices: usize,
    cells: Vec<u8>,
    /// Frozen per-cell currents sampled at program time.
    current: Vec<f64>,
    noise: NoiseModel,
    adc: AdcConfig,
    stats: ReadStats,
}

impl CrossbarArray {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.logical_cols * self.slices
    }

    pub fn logical_cols(&self) -> usize {
        self.logical_cols
    }

    pub fn slices_per_weight(&self) -> usize {
        self.slices
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn adc(&self) -> &AdcConfig {
        &self.adc
    }

    pub fn cell(&self, row: usize, col: usize) -> u8 {
        self.cells[row * self.cols() + col]
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    /// Recovers the programmed integer matrix, row-major.
    pub fn decode(&self) -> Vec<i64> {
        let cols = self.cols();
        let mut out = Vec::with_capacity(self.rows * self.logical_cols);
        for r in 0..self.rows {
            for j in 0..self.logical_cols {
                let start = r * cols + j * self.slices;
                out.push(thermometer_decode(&self.cells[start..start + self.slices]));
            }
        }
        out
    }

    pub fn read_summary(&self) -> ReadSummary {
        ReadSummary {
            conversions: self.stats.conversions.load(Ordering::Relaxed),
            saturations: self.stats.saturations.load(Ordering::Relaxed),
        }
    }

    pub fn reset_stats(&self) {
        self.stats.conversions.store(0, Ordering::Relaxed);
        self.stats.saturations.store(0, Ordering::Relaxed);
    }

    /// ADC readout of one physical column with the given rows activated.
    pub fn column_mac(&self, gate_inputs: &[u8], col: usize) -> Result<f64> {
        if gate_inputs.len() != self.rows {
            return Err(Error::DimensionMismatch { expected: self.rows, found: gate_inputs.len() });
        }
        if col >= self.cols() {
            return Err(Error::ColumnOutOfRange { col, cols: self.cols() });
        }
        for (i, &g) in gate_inputs.iter().enumerate() {
            if g > 1 {
                return Err(Error::InvalidInput { index: i, value: g as i64, expected: "0 or 1" });
            }
        }
        let active: Vec<usize> = (0..self.rows).filter(|&r| gate_inputs[r] == 1).collect();
        Ok(self.read_column(&active, col))
    }

    fn read_column(&self, active: &[usize], col: usize) -> f64 {
        let cols = self.cols();
        let mut sum = 0.0;
        for &r in active {
            sum += self.current[r * cols + col];
        }
        if self.noise.read_sigma > 0.0 && !active.is_empty() {
            sum += self.read_noise(active, col);
        }
        let (v, sat) = adc_readout(sum, &self.adc);
        self.stats.conversions.fetch_add(1, Ordering::Relaxed);
        if sat {
            self.stats.saturations.fetch_add(1, Ordering::Relaxed);
        }
        v
    }

    /// Per-read noise, a pure function of the seed, the column and the
    /// activation pattern so that identical reads return identical values.
    fn read_noise(&self, active: &[usize], col: usize) -> f64 {
        let mut h = mix(self.noise.seed ^ 0x5851_f42d_4c95_7f2d, col as u64);
        for &r in active {
            h = mix(h, r as u64);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(h);
        let normal = Normal::new(0.0, self.noise.read_sigma * (active.len() as f64).sqrt())
            .expect("validated sigma");
        normal.sample(&mut rng)
    }

    /// Signed sum of the slice readouts of logical column `j`.
    fn logical_readout(&self, active: &[usize], j: usize) -> f64 {
        let half = self.slices / 2;
        let base = j * self.slices;
        let mut acc = 0.0;
        for s in 0..self.slices {
            let v = self.read_column(active, base + s);
            if s < half {
                acc += v;
            } else {
                acc -= v;
            }
        }
        acc
    }

    /// Two-phase ternary product without final rounding.
    pub fn vmm_ternary_analog(&self, x: &[i8]) -> Result<Vec<f64>> {
        if x.len() != self.rows {
            return Err(Error::DimensionMismatch { expected: self.rows, found: x.len() });
        }
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for (i, &v) in x.iter().enumerate() {
            match v {
                1 => plus.push(i),
                -1 => minus.push(i),
                0 => {}
                _ => {
                    return Err(Error::InvalidInput {
                        index: i,
                        value: v as i64,
                        expected: "-1, 0 or 1",
                    })
                }
            }
        }
        let mut out = vec![0.0; self.logical_cols];
        for (j, o) in out.iter_mut().enumerate() {
            let p1 = if plus.is_empty() { 0.0 } else { self.logical_readout(&plus, j) };
            let p2 = if minus.is_empty() { 0.0 } else { self.logical_readout(&minus, j) };
            *o = p1 - p2;
        }
        Ok(out)
    }

    /// Two-phase ternary vector-matrix product, rounded to integers.
    pub fn vmm_ternary(&self, x: &[i8]) -> Result<Vec<i64>> {
        Ok(self.vmm_ternary_analog(x)?.into_iter().map(|v| v.round() as i64).collect())
    }

    /// `q^T K v` with rows gated by `q` and logical columns gated by `v`.
    pub fn vmv(&self, q: &[u8], v: &[u8]) -> Result<i64> {
        if q.len() != self.rows {
            return Err(Error::DimensionMismatch { expected: self.rows, found: q.len() });
        }
        if v.len() != self.logical_cols {
            return Err(Error::DimensionMismatch { expected: self.logical_cols, found: v.len() });
        }
        for (i, &b) in q.iter().chain(v.iter()).enumerate() {
            if b > 1 {
                return Err(Error::InvalidInput { index: i, value: b as i64, expected: "0 or 1" });
            }
        }
        let active: Vec<usize> = (0..self.rows).filter(|&r| q[r] == 1).collect();
        if active.is_empty() {
            return Ok(0);
        }
        let mut acc = 0.0;
        for j in (0..self.logical_cols).filter(|&j| v[j] == 1) {
            acc += self.logical_readout(&active, j);
        }
        Ok(acc.round() as i64)
    }
}

fn mix(h: u64, v: u64) -> u64 {
    let mut z = h ^ v.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(h << 6).wrapping_add(h >> 2);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Programs a row-major `rows x cols` integer matrix.
pub fn program_matrix(
    rows: usize,
    cols: usize,
    entries: &[i64],
    slices: usize,
    noise: NoiseModel,
    adc: AdcConfig,
) -> Result<CrossbarArray> {
    check_slices(slices)?;
    noise.validate()?;
    adc.validate()?;
    if entries.len() != rows * cols {
        return Err(Error::DimensionMismatch { expected: rows * cols, found: entries.len() });
    }
    let phys = cols * slices;
    let mut cells = Vec::with_capacity(rows * phys);
    for &w in entries {
        cells.extend(thermometer_encode(w, slices)?);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let on = Normal::new(noise.i_on_mean, noise.i_on_sigma).expect("validated");
    let off = Normal::new(noise.i_off_mean, noise.i_off_sigma).expect("validated");
    // Sampled in row-major cell order, so each current is fixed by the seed
    // and its coordinates.
    let current = cells
        .iter()
        .map(|&c| {
            let d = if c == 1 { &on } else { &off };
            d.sample(&mut rng).max(0.0)
        })
        .collect();
    Ok(CrossbarArray {
        rows,
        logical_cols: cols,
        slices,
        cells,
        current,
        noise,
        adc,
        stats: ReadStats::default(),
    })
}

/// Programs the coupling matrix of `m` with the default 8 slices per weight.
pub fn program(m: &IsingModel, noise: NoiseModel, adc: AdcConfig) -> Result<CrossbarArray> {
    program_with_slices(m, DEFAULT_SLICES, noise, adc)
}

pub fn program_with_slices(
    m: &IsingModel,
    slices: usize,
    noise: NoiseModel,
    adc: AdcConfig,
) -> Result<CrossbarArray> {
    program_matrix(m.n(), m.n(), &m.dense(), slices, noise, adc)
}

/// Attention scores evaluated as `Q_i^T K V_i` reads on a crossbar holding K.
pub fn attention_scores_crossbar(
    a: &AttentionMatrices,
    noise: NoiseModel,
    adc: AdcConfig,
) -> Result<ScoreVector> {
    let n = a.n();
    let mut k = Vec::with_capacity(n * n);
    for r in 0..n {
        k.extend(a.k.row_vec(r).into_iter().map(i64::from));
    }
    let xb = program_matrix(n, n, &k, DEFAULT_SLICES, noise, adc)?;
    let mut s = Vec::with_capacity(n);
    for i in 0..n {
        s.push(xb.vmv(&a.q_col(i), &a.v_col(i))?.max(0) as u64);
    }
    Ok(ScoreVector { s })
}
