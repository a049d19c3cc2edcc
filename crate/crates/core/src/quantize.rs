//! Uniform grid quantization of SB positions and momenta.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Rounds `v` in [-1, 1] to {-1, 0, 1}; ties at +-0.5 go away from zero.
pub fn ternary_quantize(v: f64) -> f64 {
    if v >= 0.5 {
        1.0
    } else if v <= -0.5 {
        -1.0
    } else {
        0.0
    }
}

/// How a value is mapped onto the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rounding {
    /// Nearest grid point, ties away from zero.
    Nearest,
    /// Unbiased randomized rounding between the two neighbouring grid points,
    /// applied to the magnitude so the rule is odd-symmetric.
    #[default]
    Stochastic,
}

/// Quantization interval of the SB state grid `{-1, -1 + step, ..., 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interval {
    #[default]
    Float,
    /// Step `1 / denominator`.
    Grid(u32),
}

impl Interval {
    /// The seven grid sizes of the interval study, finest first.
    pub const STUDY: [Interval; 7] = [
        Interval::Grid(64),
        Interval::Grid(32),
        Interval::Grid(16),
        Interval::Grid(8),
        Interval::Grid(4),
        Interval::Grid(2),
        Interval::Grid(1),
    ];

    pub const TERNARY: Interval = Interval::Grid(1);

    pub fn step(&self) -> Option<f64> {
        match self {
            Interval::Float => None,
            Interval::Grid(d) => Some(1.0 / *d as f64),
        }
    }

    pub fn is_ternary(&self) -> bool {
        *self == Interval::TERNARY
    }

    /// Snaps `v` to the grid. `Float` is the identity.
    pub fn snap<R: Rng + ?Sized>(&self, v: f64, rounding: Rounding, rng: &mut R) -> f64 {
        let Interval::Grid(d) = *self else {
            return v;
        };
        let d = d as f64;
        let mag = v.abs() * d;
        let level = match rounding {
            Rounding::Nearest => (mag + 0.5).floor(),
            Rounding::Stochastic => {
                let lo = mag.floor();
                let u: f64 = rng.random();
                if u < mag - lo {
                    lo + 1.0
                } else {
                    lo
                }
            }
        };
        (level / d).copysign(v) + 0.0
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Interval::Float => f.write_str("float"),
            Interval::Grid(1) => f.write_str("1"),
            Interval::Grid(d) => write!(f, "1/{d}"),
        }
    }
}

impl FromStr for Interval {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        let bad = || Error::InvalidConfig(format!("invalid interval {s:?}"));
        if s.eq_ignore_ascii_case("float") {
            return Ok(Interval::Float);
        }
        if s == "1" {
            return Ok(Interval::Grid(1));
        }
        let den = s.strip_prefix("1/").ok_or_else(bad)?;
        let d: u32 = den.parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        Ok(Interval::Grid(d))
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
