use std::ops::Range;

use serde::Serialize;

use super::UniformFrame;
use crate::error::Result;

/// A stoppage window followed by the active run it precedes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtrusionSegment {
    pub stoppage_range: Range<usize>,
    pub active_range: Range<usize>,
    pub product_type: Option<String>,
    pub die_id: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Segmentation {
    pub segments: Vec<ExtrusionSegment>,
    /// Leading active interval dropped because the frame starts mid-extrusion.
    pub discarded_head: Option<Range<usize>>,
    /// Zero-speed ticks after the last active interval.
    pub discarded_tail: Option<Range<usize>>,
    pub warnings: usize,
}

/// Splits the frame on the commander extruder's speed: an extrusion starts
/// when speed leaves zero and ends when it returns to zero.
pub fn segment_extrusions(frame: &UniformFrame, commander: &str) -> Result<Segmentation> {
    let speed = frame.numeric(commander)?;
    let n = speed.len();
    let active = |i: usize| speed[i] > 0.0;
    let mut out = Segmentation::default();

    let mut i = 0;
    if n > 0 && active(0) {
        while i < n && active(i) {
            i += 1;
        }
        out.discarded_head = Some(0..i);
        out.warnings += 1;
        log::warn!("frame starts mid-extrusion; discarding ticks 0..{i}");
    }

    let mut stop_start = i;
    while i < n {
        if !active(i) {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && active(i) {
            i += 1;
        }
        out.segments.push(ExtrusionSegment {
            stoppage_range: stop_start..start,
            active_range: start..i,
            product_type: None,
            die_id: None,
        });
        stop_start = i;
    }
    if stop_start < n {
        out.discarded_tail = Some(stop_start..n);
    }
    Ok(out)
}

impl Segmentation {
    /// Fills product and die ids from the categorical columns at active start.
    pub fn assign_context(&mut self, frame: &UniformFrame, product: Option<&str>, die: Option<&str>) -> Result<()> {
        for seg in &mut self.segments {
            let at = seg.active_range.start;
            if let Some(name) = product {
                seg.product_type = frame.column(name)?.label(at).map(str::to_string);
            }
            if let Some(name) = die {
                seg.die_id = frame.column(name)?.label(at).map(str::to_string);
            }
        }
        Ok(())
    }
}
