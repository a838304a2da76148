use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Strategy {
    /// `v = x_r1 + F (x_r2 - x_r3)`
    #[serde(rename = "rand_1", alias = "rand/1")]
    Rand1,
    /// `v = x_i + F (x_r1 - x_i) + F (x_r2 - x_r3)`
    #[serde(rename = "current_to_rand_1", alias = "current-to-rand/1")]
    CurrentToRand1,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Rand1 => "rand/1",
            Strategy::CurrentToRand1 => "current-to-rand/1",
        })
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '/'], "_").as_str() {
            "rand_1" | "rand1" => Ok(Strategy::Rand1),
            "current_to_rand_1" | "currenttorand1" => Ok(Strategy::CurrentToRand1),
            _ => Err(Error::InvalidConfig(format!("unknown strategy `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DEConfig {
    pub n_pop: usize,
    pub max_iter: usize,
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "Cr")]
    pub cr: f64,
    pub strategy: Strategy,
    #[serde(rename = "Ic")]
    pub ic: f64,
    pub delta: f64,
    pub seed: u64,
}

impl Default for DEConfig {
    fn default() -> Self {
        DEConfig {
            n_pop: 100,
            max_iter: 300,
            f: 0.7,
            cr: 0.9,
            strategy: Strategy::Rand1,
            ic: 0.25,
            delta: 0.5,
            seed: 0,
        }
    }
}

impl DEConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidConfig(m));
        if self.n_pop < 4 {
            return fail(format!("n_pop = {} but mutation needs at least 4", self.n_pop));
        }
        if !(self.f > 0.0 && self.f.is_finite()) {
            return fail(format!("F = {} must be positive", self.f));
        }
        if !(0.0..=1.0).contains(&self.cr) {
            return fail(format!("Cr = {} outside [0, 1]", self.cr));
        }
        if !(0.0..=1.0).contains(&self.ic) {
            return fail(format!("Ic = {} outside [0, 1]", self.ic));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return fail(format!("delta = {} must be positive", self.delta));
        }
        Ok(())
    }
}
