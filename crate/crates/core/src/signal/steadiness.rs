use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadinessConfig {
    /// Half-width of the tolerance band, relative to the setpoint.
    pub tolerance: f64,
    /// Sliding window length in samples (seconds at 1 Hz).
    pub window: usize,
}

impl Default for SteadinessConfig {
    fn default() -> Self {
        SteadinessConfig {
            tolerance: 0.01,
            window: 5,
        }
    }
}

/// Seconds from the start of `series` until the profilometer settles.
///
/// 1. band = setpoint ± tolerance·setpoint;
/// 2. RMSE of every `window`-sample sliding window against the setpoint;
/// 3. threshold = largest RMSE among windows lying entirely inside the band;
/// 4. result = end offset of the first window with RMSE < threshold.
///
/// If no window beats the threshold strictly (every in-band window has the
/// same RMSE, e.g. a perfect series) the comparison falls back to `<=`.
/// Returns `None` when no window ever lies inside the band.
pub fn compute_steadiness_time(series: &[f64], setpoint: f64, config: &SteadinessConfig) -> Result<Option<f64>> {
    let w = config.window;
    if w == 0 || series.len() < w {
        return Err(Error::InsufficientData(format!(
            "steadiness needs at least {w} samples, got {}",
            series.len()
        )));
    }
    if !(setpoint > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "setpoint must be positive, got {setpoint}"
        )));
    }
    let half_band = config.tolerance * setpoint;

    let mut rmse = Vec::with_capacity(series.len() + 1 - w);
    let mut threshold: Option<f64> = None;
    for win in series.windows(w) {
        let r = window_rmse(win, setpoint);
        if win.iter().all(|v| (v - setpoint).abs() <= half_band) {
            threshold = Some(threshold.map_or(r, |t: f64| t.max(r)));
        }
        rmse.push(r);
    }
    let Some(threshold) = threshold else {
        return Ok(None);
    };
    let first = rmse
        .iter()
        .position(|&r| r < threshold)
        .or_else(|| rmse.iter().position(|&r| r <= threshold))
        .expect("the threshold window itself satisfies <=");
    Ok(Some((first + w - 1) as f64))
}

pub(crate) fn window_rmse(win: &[f64], setpoint: f64) -> f64 {
    let ss: f64 = win.iter().map(|v| (v - setpoint) * (v - setpoint)).sum();
    (ss / win.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    const CFG: SteadinessConfig = SteadinessConfig {
        tolerance: 0.01,
        window: 5,
    };

    #[test]
    fn perfect_series_settles_at_first_full_window() {
        let s = vec![100.0; 12];
        assert_eq!(compute_steadiness_time(&s, 100.0, &CFG).unwrap(), Some(4.0));
    }

    #[test]
    fn never_in_band() {
        let s: Vec<f64> = (0..30).map(|i| 103.0 + (i as f64).sin()).collect();
        assert_eq!(compute_steadiness_time(&s, 100.0, &CFG).unwrap(), None);
    }

    #[test]
    fn approach_then_settle() {
        // Out of band until index 5, small noise afterwards, a wobble later
        // defines the threshold.
        let mut s = vec![0.0, 80.0, 90.0, 95.0, 97.0, 100.1, 99.9, 100.0, 100.1, 99.9];
        s.extend([100.6, 100.6, 100.6, 100.6, 100.6, 100.0, 100.0]);
        assert_eq!(compute_steadiness_time(&s, 100.0, &CFG).unwrap(), Some(9.0));
    }

    #[test]
    fn short_series_is_an_error() {
        assert!(matches!(
            compute_steadiness_time(&[1.0; 4], 1.0, &CFG),
            Err(Error::InsufficientData(_))
        ));
        assert!(compute_steadiness_time(&[1.0; 8], 0.0, &CFG).is_err());
    }
}
