//! Synthetic extrusion plant with a hidden, grid-certified ground truth.
//!
//! Signals follow the on-disk layout the signal pipeline reads; the ground
//! truth goes to a separate directory.

mod plant;
mod truth;

pub use plant::{
    generate_history, simulate, true_optimum, GroundTruth, InjectedExtrusion, PlantSpec, ProductProfile, ProductTruth,
    SyntheticPlant, GROUND_TRUTH_FILE,
};
pub use truth::{
    effective_coords, grid_minimum, to_native, ClassRule, Landscape, Optimum, Well, EFFECTIVE, N_EXTRUDERS, PROPERTIES,
    QUALITY,
};
