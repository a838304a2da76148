use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    classify_extrusion, extract_search_point, segment_extrusions, Class, FeatureRoles, LabeledExtrusion, RawSignal,
    Segmentation, SteadinessConfig, UniformFrame,
};
use crate::error::{Error, Result};

/// Which frame columns play which part in the process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantRoles {
    pub commander: String,
    #[serde(flatten)]
    pub features: FeatureRoles,
    pub profilometer: String,
    /// Signal holding the profilometer setpoint.
    pub setpoint: String,
    pub cut: String,
    pub product: String,
    #[serde(default)]
    pub steadiness: Option<SteadinessConfig>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LabelingDiagnostics {
    pub n_ticks: usize,
    pub n_segments: usize,
    pub n_labeled: usize,
    pub discarded_head_ticks: usize,
    pub discarded_tail_ticks: usize,
    pub degenerate_windows: usize,
    pub warnings: usize,
    pub class_counts: BTreeMap<String, usize>,
    pub class_frequencies: BTreeMap<String, f64>,
}

#[derive(Debug, Clone)]
pub struct LabelingOutput {
    pub extrusions: Vec<LabeledExtrusion>,
    pub segmentation: Segmentation,
    pub diagnostics: LabelingDiagnostics,
}

/// Segments the frame and labels every extrusion. Segments whose stoppage
/// window is too short to summarise are skipped and counted.
pub fn label_frame(frame: &UniformFrame, roles: &PlantRoles) -> Result<LabelingOutput> {
    let mut seg = segment_extrusions(frame, &roles.commander)?;
    seg.assign_context(frame, Some(&roles.product), roles.features.die.as_deref())?;
    let profilometer = frame.numeric(&roles.profilometer)?;
    let setpoint = frame.numeric(&roles.setpoint)?;
    let cut = frame.numeric(&roles.cut)?;
    let steadiness = roles.steadiness.unwrap_or_default();

    let labeled: Vec<Result<Option<LabeledExtrusion>>> = seg
        .segments
        .par_iter()
        .enumerate()
        .map(|(id, s)| {
            let search_point = match extract_search_point(s, frame, &roles.features) {
                Ok(sp) => sp,
                Err(Error::DegenerateWindow(_)) => return Ok(None),
                Err(e) => return Err(e),
            };
            let active = s.active_range.clone();
            let (class, steadiness_time) = classify_extrusion(
                &profilometer[active.clone()],
                &cut[active.clone()],
                setpoint[active.start],
                &steadiness,
            );
            Ok(Some(LabeledExtrusion {
                id,
                start_time: frame.start + active.start as i64,
                search_point,
                steadiness_time,
                class,
            }))
        })
        .collect();

    let mut extrusions = Vec::with_capacity(labeled.len());
    let mut degenerate = 0;
    for item in labeled {
        match item? {
            Some(e) => extrusions.push(e),
            None => degenerate += 1,
        }
    }

    let mut class_counts = BTreeMap::new();
    for c in Class::ALL {
        class_counts.insert(c.to_string(), extrusions.iter().filter(|e| e.class == c).count());
    }
    let total = extrusions.len().max(1) as f64;
    let class_frequencies = class_counts
        .iter()
        .map(|(k, &v)| (k.clone(), v as f64 / total))
        .collect();
    let diagnostics = LabelingDiagnostics {
        n_ticks: frame.len,
        n_segments: seg.segments.len(),
        n_labeled: extrusions.len(),
        discarded_head_ticks: seg.discarded_head.as_ref().map_or(0, |r| r.len()),
        discarded_tail_ticks: seg.discarded_tail.as_ref().map_or(0, |r| r.len()),
        degenerate_windows: degenerate,
        warnings: seg.warnings,
        class_counts,
        class_frequencies,
    };
    Ok(LabelingOutput {
        extrusions,
        segmentation: seg,
        diagnostics,
    })
}

/// Resamples `signals` over their common span and labels the frame.
pub fn label_signals(signals: &[RawSignal], roles: &PlantRoles) -> Result<LabelingOutput> {
    let span = super::io::common_span(signals)?;
    label_frame(&super::resample_locf(signals, span)?, roles)
}
