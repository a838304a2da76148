use super::steadiness::{compute_steadiness_time, SteadinessConfig};
use super::Class;

/// Labels the active part of an extrusion.
///
/// `profilometer` reads zero while no extrudate passes under the sensor and
/// `cut` is positive on ticks where the operator cut the material. Both are
/// 1 Hz series aligned with the active range.
///
/// * class 3 when the cut fires before the first profilometer reading, or no
///   reading ever arrives;
/// * class 2 when readings exist but the series never settles;
/// * class 1 otherwise.
pub fn classify_extrusion(
    profilometer: &[f64],
    cut: &[f64],
    setpoint: f64,
    config: &SteadinessConfig,
) -> (Class, Option<f64>) {
    let first_reading = profilometer.iter().position(|&v| v > 0.0);
    let first_cut = cut.iter().position(|&v| v > 0.0);
    let Some(reading) = first_reading else {
        return (Class::Cut, None);
    };
    if first_cut.is_some_and(|c| c < reading) {
        return (Class::Cut, None);
    }
    match compute_steadiness_time(profilometer, setpoint, config) {
        Ok(Some(t)) => (Class::Steady, Some(t)),
        _ => (Class::NotSteady, None),
    }
}
