//! From raw multi-rate sensor streams to a table of labeled extrusions.
//!
//! The stages are pure functions: [`resample_locf`] aligns every signal to a
//! 1 Hz clock, [`segment_extrusions`] cuts the commander speed into
//! stoppage + active pairs, [`extract_search_point`] summarises the stoppage
//! window, and [`compute_steadiness_time`] / [`classify_extrusion`] label the
//! active part from the profilometer.

mod classify;
mod features;
pub mod io;
mod pipeline;
mod resample;
mod segment;
mod steadiness;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use classify::classify_extrusion;
pub use features::{extract_search_point, CategoricalTrace, ExtruderStart, FeatureRoles, PropertyStats, SearchPoint};
pub use pipeline::{label_frame, label_signals, LabelingDiagnostics, LabelingOutput, PlantRoles};
pub use resample::resample_locf;
pub use segment::{segment_extrusions, ExtrusionSegment, Segmentation};
pub use steadiness::{compute_steadiness_time, SteadinessConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalKind {
    Continuous,
    Categorical,
    Boolean,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Cat(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// Seconds since epoch; fractional parts are floored to their tick.
    pub t: f64,
    pub value: Value,
}

impl Sample {
    pub fn num(t: f64, v: f64) -> Self {
        Sample {
            t,
            value: Value::Num(v),
        }
    }

    pub fn cat(t: f64, v: impl Into<String>) -> Self {
        Sample {
            t,
            value: Value::Cat(v.into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawSignal {
    pub name: String,
    pub unit: String,
    pub kind: SignalKind,
    /// Declared vocabulary for categorical signals; empty means "accept any".
    pub vocabulary: Vec<String>,
    pub samples: Vec<Sample>,
}

impl RawSignal {
    pub fn continuous(name: impl Into<String>, samples: Vec<(f64, f64)>) -> Self {
        RawSignal {
            name: name.into(),
            unit: String::new(),
            kind: SignalKind::Continuous,
            vocabulary: Vec::new(),
            samples: samples.into_iter().map(|(t, v)| Sample::num(t, v)).collect(),
        }
    }

    pub fn categorical(name: impl Into<String>, samples: Vec<(f64, &str)>) -> Self {
        RawSignal {
            name: name.into(),
            unit: String::new(),
            kind: SignalKind::Categorical,
            vocabulary: Vec::new(),
            samples: samples.into_iter().map(|(t, v)| Sample::cat(t, v)).collect(),
        }
    }

    /// Checks ordering, finiteness and vocabulary membership.
    pub fn validate(&self) -> Result<()> {
        let err = |reason: String| Error::Curation {
            signal: self.name.clone(),
            reason,
        };
        for pair in self.samples.windows(2) {
            if !(pair[1].t > pair[0].t) {
                return Err(err(format!("timestamps not strictly increasing at t={}", pair[1].t)));
            }
        }
        for s in &self.samples {
            if !s.t.is_finite() {
                return Err(err("non-finite timestamp".into()));
            }
            match (&s.value, self.kind) {
                (Value::Num(v), SignalKind::Continuous | SignalKind::Boolean) => {
                    if !v.is_finite() {
                        return Err(err(format!("non-finite value at t={}", s.t)));
                    }
                }
                (Value::Cat(c), SignalKind::Categorical) => {
                    if !self.vocabulary.is_empty() && !self.vocabulary.contains(c) {
                        return Err(err(format!("value `{c}` outside declared vocabulary")));
                    }
                }
                _ => return Err(err(format!("value kind mismatch at t={}", s.t))),
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Numeric(Vec<f64>),
    Categorical { vocabulary: Vec<String>, codes: Vec<u32> },
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Numeric(v) => v.len(),
            Column::Categorical { codes, .. } => codes.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_numeric(&self) -> Option<&[f64]> {
        match self {
            Column::Numeric(v) => Some(v),
            Column::Categorical { .. } => None,
        }
    }

    /// Label at `idx` for categorical columns.
    pub fn label(&self, idx: usize) -> Option<&str> {
        match self {
            Column::Categorical { vocabulary, codes } => codes.get(idx).map(|&c| vocabulary[c as usize].as_str()),
            Column::Numeric(_) => None,
        }
    }
}

/// Signals aligned on a 1 Hz clock starting at `start`.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformFrame {
    pub start: i64,
    pub len: usize,
    pub columns: BTreeMap<String, Column>,
}

impl UniformFrame {
    pub fn clock(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.len as i64).map(move |i| self.start + i)
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        self.columns.get(name).ok_or_else(|| Error::Curation {
            signal: name.to_string(),
            reason: "column missing from frame".into(),
        })
    }

    pub fn numeric(&self, name: &str) -> Result<&[f64]> {
        self.column(name)?.as_numeric().ok_or_else(|| Error::Curation {
            signal: name.to_string(),
            reason: "expected a continuous column".into(),
        })
    }
}

/// Feasibility class of an extrusion; 1 is the only feasible class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Class {
    Steady = 1,
    NotSteady = 2,
    Cut = 3,
}

impl Class {
    pub const ALL: [Class; 3] = [Class::Steady, Class::NotSteady, Class::Cut];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn index(self) -> usize {
        self as usize - 1
    }

    pub fn from_index(i: usize) -> Class {
        Class::ALL[i]
    }

    pub fn is_feasible(self) -> bool {
        self == Class::Steady
    }
}

impl From<Class> for u8 {
    fn from(c: Class) -> u8 {
        c.code()
    }
}

impl TryFrom<u8> for Class {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, Self::Error> {
        match v {
            1 => Ok(Class::Steady),
            2 => Ok(Class::NotSteady),
            3 => Ok(Class::Cut),
            other => Err(format!("class label {other} outside {{1,2,3}}")),
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

/// One segmented, featurised and labeled extrusion.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledExtrusion {
    pub id: usize,
    /// Timestamp of the first active tick.
    pub start_time: i64,
    pub search_point: SearchPoint,
    pub steadiness_time: Option<f64>,
    pub class: Class,
}

impl LabeledExtrusion {
    pub fn product(&self) -> &str {
        &self.search_point.product_type
    }
}
