use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::signal::Class;

pub const PROPERTIES: [&str; 5] = [
    "pressure_barrel",
    "pressure_die",
    "temp_feed",
    "temp_barrel",
    "temp_die",
];
pub const N_EXTRUDERS: usize = 5;

/// Decision-vector positions of the ground truth's inputs.
pub const PRESSURE_BARREL_MEAN: usize = 2;
pub const PRESSURE_DIE_MEAN: usize = 5;
pub const TEMP_FEED_MEAN: usize = 8;
pub const TEMP_BARREL_MEAN: usize = 11;
pub const TEMP_DIE_MEAN: usize = 14;
pub const COMMANDER_SPEED: usize = 15;

/// Native units of the four coordinates the steadiness time depends on,
/// as `centre + half_range * z`.
pub const EFFECTIVE: [(usize, f64, f64); 4] = [
    (TEMP_BARREL_MEAN, 85.0, 15.0),
    (TEMP_DIE_MEAN, 95.0, 15.0),
    (PRESSURE_BARREL_MEAN, 150.0, 50.0),
    (COMMANDER_SPEED, 40.0, 20.0),
];

/// Native units of the two quality coordinates.
pub const QUALITY: [(usize, f64, f64); 2] = [(TEMP_FEED_MEAN, 60.0, 8.0), (PRESSURE_DIE_MEAN, 80.0, 20.0)];

pub fn effective_coords(decision: &[f64]) -> [f64; 4] {
    EFFECTIVE.map(|(i, c, h)| (decision[i] - c) / h)
}

pub fn to_native(z: [f64; 4]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (o, (&(_, c, h), zi)) in out.iter_mut().zip(EFFECTIVE.iter().zip(z)) {
        *o = c + h * zi;
    }
    out
}

/// Anisotropic Gaussian well in normalised coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Well {
    pub centre: [f64; 4],
    pub width: [f64; 4],
    pub depth: f64,
}

impl Well {
    fn at(&self, z: &[f64; 4]) -> f64 {
        let q: f64 = (0..4).map(|d| ((z[d] - self.centre[d]) / self.width[d]).powi(2)).sum();
        self.depth * (-0.5 * q).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Landscape {
    /// `base + span (1 - min(1, Σ wells)) + interaction ((u - v)/2)²`,
    /// where `u`, `v` are the barrel and die temperatures.
    Wells {
        base: f64,
        span: f64,
        interaction: f64,
        wells: Vec<Well>,
    },
    /// `base + Σ curvature_d (z_d - centre_d)²`.
    Quadratic {
        base: f64,
        centre: [f64; 4],
        curvature: [f64; 4],
    },
}

impl Landscape {
    /// Noise-free steadiness time in seconds at normalised coordinates `z`.
    pub fn value(&self, z: &[f64; 4]) -> f64 {
        match self {
            Landscape::Wells {
                base,
                span,
                interaction,
                wells,
            } => {
                let g: f64 = wells.iter().map(|w| w.at(z)).sum();
                let t = 0.5 * (z[0] - z[1]);
                base + span * (1.0 - g.min(1.0)) + interaction * t * t
            }
            Landscape::Quadratic {
                base,
                centre,
                curvature,
            } => base + (0..4).map(|d| curvature[d] * (z[d] - centre[d]).powi(2)).sum::<f64>(),
        }
    }
}

/// Quality score over the normalised feed temperature and die pressure; the
/// lowest scores are steady, a thin band above them never settles, and the
/// rest are cut.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRule {
    pub die_weight: f64,
    pub steady_below: f64,
    pub unsteady_below: f64,
}

impl ClassRule {
    pub fn score(&self, decision: &[f64]) -> f64 {
        let [f, e] = QUALITY.map(|(i, c, h)| (decision[i] - c) / h);
        f + self.die_weight * e
    }

    pub fn class_of(&self, decision: &[f64]) -> Class {
        let q = self.score(decision);
        if q < self.steady_below {
            Class::Steady
        } else if q < self.unsteady_below {
            Class::NotSteady
        } else {
            Class::Cut
        }
    }
}

/// Grid-certified minimiser of one product's landscape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    /// Normalised effective coordinates.
    pub z: [f64; 4],
    /// The same point in native units (barrel temp, die temp, barrel pressure, commander speed).
    pub x: [f64; 4],
    pub y: f64,
    /// Points per axis.
    pub resolution: usize,
    /// Largest grid step over the four axes, normalised.
    pub step: f64,
}

/// Brute-force minimum of `landscape` over the box `[lo, hi]` on a regular
/// `resolution⁴` grid, polished by a compass search inside the box starting
/// from the best grid point. The feasibility rule does not involve these
/// coordinates, so every grid point admits a class-1 completion.
pub fn grid_minimum(landscape: &Landscape, lo: [f64; 4], hi: [f64; 4], resolution: usize) -> Optimum {
    let r = resolution.max(2);
    let axis = |d: usize, i: usize| lo[d] + (hi[d] - lo[d]) * i as f64 / (r - 1) as f64;
    let (y, z) = (0..r * r)
        .into_par_iter()
        .map(|ab| {
            let (a, b) = (ab / r, ab % r);
            let mut best = (f64::INFINITY, [0.0; 4]);
            for c in 0..r {
                for d in 0..r {
                    let z = [axis(0, a), axis(1, b), axis(2, c), axis(3, d)];
                    let y = landscape.value(&z);
                    if y < best.0 {
                        best = (y, z);
                    }
                }
            }
            best
        })
        .reduce(
            || (f64::INFINITY, [0.0; 4]),
            |p, q| {
                if q.0 < p.0 || (q.0 == p.0 && q.1 < p.1) {
                    q
                } else {
                    p
                }
            },
        );
    let step = (0..4).map(|d| (hi[d] - lo[d]) / (r - 1) as f64).fold(0.0, f64::max);
    let (y, z) = polish(landscape, lo, hi, y, z, step);
    Optimum {
        z,
        x: to_native(z),
        y,
        resolution: r,
        step,
    }
}

fn polish(
    landscape: &Landscape,
    lo: [f64; 4],
    hi: [f64; 4],
    mut y: f64,
    mut z: [f64; 4],
    step: f64,
) -> (f64, [f64; 4]) {
    let mut h = step;
    while h > 1e-10 {
        let mut moved = false;
        for d in 0..4 {
            for sign in [-1.0, 1.0] {
                let mut t = z;
                t[d] = (t[d] + sign * h).clamp(lo[d], hi[d]);
                let v = landscape.value(&t);
                if v < y {
                    (y, z, moved) = (v, t, true);
                }
            }
        }
        if !moved {
            h *= 0.5;
        }
    }
    (y, z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_minimum_within_one_step() {
        let centre = [0.13, -0.41, 0.77, -0.05];
        let l = Landscape::Quadratic {
            base: 4.0,
            centre,
            curvature: [3.0, 1.0, 0.5, 2.0],
        };
        let opt = grid_minimum(&l, [-1.0; 4], [1.0; 4], 21);
        for d in 0..4 {
            assert!((opt.z[d] - centre[d]).abs() <= opt.step);
        }
        assert!(opt.y >= 4.0 && opt.y < 4.0 + 0.01 * 6.5);
    }

    #[test]
    fn wells_stay_in_range() {
        let l = Landscape::Wells {
            base: 6.0,
            span: 42.0,
            interaction: 5.0,
            wells: vec![
                Well {
                    centre: [0.0; 4],
                    width: [0.3; 4],
                    depth: 1.0,
                },
                Well {
                    centre: [0.1; 4],
                    width: [0.3; 4],
                    depth: 0.8,
                },
            ],
        };
        assert_eq!(l.value(&[0.0; 4]), 6.0);
        assert!(l.value(&[1.3, -1.3, 1.3, 1.3]) <= 60.0);
    }
}
