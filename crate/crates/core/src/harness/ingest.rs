use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::signal::io::{labeled_outputs, read_signal_dir, write_labeled_csv};
use crate::signal::{label_signals, LabelingOutput};

#[derive(Serialize)]
struct SegmentationFile<'a> {
    segmentation: &'a crate::signal::Segmentation,
    diagnostics: &'a crate::signal::LabelingDiagnostics,
}

/// Labels a signal directory and writes `labeled.csv` plus `segmentation.json`
/// into `out`. Nothing is written unless labeling succeeds.
pub fn cmd_ingest(signal_dir: &Path, out: &Path) -> Result<LabelingOutput> {
    let (manifest, signals) = read_signal_dir(signal_dir)?;
    let labeled = label_signals(&signals, &manifest.roles)?;
    let seg_json = serde_json::to_string_pretty(&SegmentationFile {
        segmentation: &labeled.segmentation,
        diagnostics: &labeled.diagnostics,
    })?;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let (csv_path, seg_path) = labeled_outputs(out);
    write_labeled_csv(&csv_path, &labeled.extrusions)?;
    std::fs::write(&seg_path, seg_json).map_err(|e| Error::io(&seg_path, e))?;
    Ok(labeled)
}
