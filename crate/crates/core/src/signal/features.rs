use serde::{Deserialize, Serialize};

use super::{ExtrusionSegment, UniformFrame};
use crate::error::{Error, Result};

/// Column names that feed the search-point features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRoles {
    /// Pressure and temperature signals summarised over the stoppage window.
    pub properties: Vec<String>,
    /// Screw speed of each extruder, commander first.
    pub extruders: Vec<String>,
    #[serde(default)]
    pub material: Option<String>,
    #[serde(default)]
    pub die: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyStats {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub std: f64,
    pub first: f64,
    pub last: f64,
}

impl PropertyStats {
    pub(crate) fn over(name: &str, xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        PropertyStats {
            name: name.to_string(),
            min,
            max,
            // keeps min <= mean <= max under rounding
            mean: mean.clamp(min, max),
            std: var.sqrt(),
            first: xs[0],
            last: xs[xs.len() - 1],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtruderStart {
    pub usage: bool,
    pub target_speed: f64,
    pub acceleration: f64,
}

impl ExtruderStart {
    pub const UNUSED: ExtruderStart = ExtruderStart {
        usage: false,
        target_speed: 0.0,
        acceleration: 0.0,
    };

    /// Seconds needed to reach the target speed; zero for unused extruders.
    pub fn ramp_time(&self) -> f64 {
        if self.usage {
            self.target_speed / self.acceleration
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoricalTrace {
    pub first: String,
    pub last: String,
    pub changed: bool,
}

/// Conditions an extrusion was launched under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchPoint {
    pub properties: Vec<PropertyStats>,
    pub extruders: Vec<ExtruderStart>,
    pub material: Option<CategoricalTrace>,
    pub die: Option<CategoricalTrace>,
    pub product_type: String,
}

impl SearchPoint {
    /// Continuous coordinates: min/max/mean per property, then target speed
    /// and start acceleration per extruder.
    pub fn decision_vector(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.properties.len() * 3 + self.extruders.len() * 2);
        for p in &self.properties {
            v.extend([p.min, p.max, p.mean]);
        }
        for e in &self.extruders {
            v.extend([e.target_speed, e.acceleration]);
        }
        v
    }

    pub fn usage(&self) -> Vec<bool> {
        self.extruders.iter().map(|e| e.usage).collect()
    }
}

/// Summarises a segment: window statistics over the stoppage range and the
/// start-up behaviour of each extruder over the active range.
pub fn extract_search_point(
    segment: &ExtrusionSegment,
    frame: &UniformFrame,
    roles: &FeatureRoles,
) -> Result<SearchPoint> {
    let stop = segment.stoppage_range.clone();
    let active = segment.active_range.clone();
    if stop.end > frame.len || active.end > frame.len || stop.end != active.start {
        return Err(Error::InvalidConfig(format!(
            "segment ranges {stop:?}/{active:?} invalid for frame of {} ticks",
            frame.len
        )));
    }
    if stop.len() < 2 {
        return Err(Error::DegenerateWindow(format!(
            "stoppage window {stop:?} shorter than 2 ticks"
        )));
    }

    let properties = roles
        .properties
        .iter()
        .map(|name| Ok(PropertyStats::over(name, &frame.numeric(name)?[stop.clone()])))
        .collect::<Result<Vec<_>>>()?;

    let extruders = roles
        .extruders
        .iter()
        .map(|name| {
            let speed = frame.numeric(name)?;
            Ok(start_behaviour(&speed[active.clone()]))
        })
        .collect::<Result<Vec<_>>>()?;

    let trace = |col: &Option<String>| -> Result<Option<CategoricalTrace>> {
        let Some(name) = col else { return Ok(None) };
        let column = frame.column(name)?;
        let labels: Vec<&str> = stop.clone().filter_map(|i| column.label(i)).collect();
        if labels.is_empty() {
            return Err(Error::Curation {
                signal: name.clone(),
                reason: "expected a categorical column".into(),
            });
        }
        Ok(Some(CategoricalTrace {
            first: labels[0].to_string(),
            last: labels[labels.len() - 1].to_string(),
            changed: labels.windows(2).any(|w| w[0] != w[1]),
        }))
    };

    Ok(SearchPoint {
        properties,
        extruders,
        material: trace(&roles.material)?,
        die: trace(&roles.die)?,
        product_type: segment.product_type.clone().unwrap_or_default(),
    })
}

/// Plateau detection: the first sample within 2% of the maximum speed that
/// stays there for at least 3 s. Target speed is the median of that run and
/// the start acceleration is target / (seconds since the speed left zero).
fn start_behaviour(speed: &[f64]) -> ExtruderStart {
    const BAND: f64 = 0.02;
    const SUSTAIN: usize = 3;

    let max = speed.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return ExtruderStart::UNUSED;
    }
    let floor = (1.0 - BAND) * max;
    let near = |i: usize| speed[i] >= floor;
    let run_len = |i: usize| (i..speed.len()).take_while(|&j| near(j)).count();

    let first_near = (0..speed.len()).find(|&i| near(i)).expect("max is attained");
    let start = (first_near..speed.len())
        .find(|&i| near(i) && run_len(i) >= SUSTAIN)
        .unwrap_or(first_near);

    let mut run: Vec<f64> = speed[start..start + run_len(start)].to_vec();
    run.sort_by(f64::total_cmp);
    let target = if run.len() % 2 == 1 {
        run[run.len() / 2]
    } else {
        0.5 * (run[run.len() / 2 - 1] + run[run.len() / 2])
    };

    // The tick before index 0 is the commander's last zero tick.
    let origin = speed[..start].iter().rposition(|&v| v <= 0.0).map_or(-1, |i| i as i64);
    let elapsed = (start as i64 - origin) as f64;
    ExtruderStart {
        usage: true,
        target_speed: target,
        acceleration: target / elapsed,
    }
}
