use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::de::{DEConfig, Strategy};
use crate::error::{Error, Result};
use crate::surrogate::{BoostParams, ForestParams};

/// One strategy/F/Cr combination of the experiment grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridEntry {
    pub id: u32,
    pub strategy: Strategy,
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "Cr")]
    pub cr: f64,
}

impl GridEntry {
    /// `base` with this entry's strategy, F and Cr.
    pub fn apply(&self, base: &DEConfig) -> DEConfig {
        DEConfig {
            strategy: self.strategy,
            f: self.f,
            cr: self.cr,
            ..base.clone()
        }
    }
}

pub const GRID_F: [f64; 3] = [0.7, 0.8, 0.9];
pub const GRID_CR: [f64; 3] = [0.5, 0.7, 0.9];

/// The 18 combinations: IDs 1-9 use current-to-rand/1 and 10-18 rand/1;
/// within each block F cycles fastest and Cr steps every three IDs.
pub fn experiment_grid() -> Vec<GridEntry> {
    let mut out = Vec::with_capacity(18);
    for strategy in [Strategy::CurrentToRand1, Strategy::Rand1] {
        for cr in GRID_CR {
            for f in GRID_F {
                out.push(GridEntry {
                    id: out.len() as u32 + 1,
                    strategy,
                    f,
                    cr,
                });
            }
        }
    }
    out
}

pub fn grid_entry(id: u32) -> Result<GridEntry> {
    experiment_grid()
        .into_iter()
        .find(|e| e.id == id)
        .ok_or_else(|| Error::InvalidConfig(format!("no grid entry with id {id}")))
}

/// Draws `n` distinct points of a Cartesian product with the given axis
/// sizes, uniformly without replacement, as per-axis indices.
fn sample_product(sizes: &[usize], n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let total: usize = sizes.iter().product();
    let n = n.min(total);
    let mut flat = index::sample(rng, total, n).into_vec();
    flat.sort_unstable();
    flat.into_iter()
        .map(|mut k| {
            sizes
                .iter()
                .map(|&s| {
                    let i = k % s;
                    k /= s;
                    i
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestGrid {
    pub min_samples_leaf: Vec<usize>,
    pub min_samples_split: Vec<usize>,
}

impl Default for ForestGrid {
    fn default() -> Self {
        ForestGrid {
            min_samples_leaf: vec![5, 25, 50, 75, 100],
            min_samples_split: (2..=7).collect(),
        }
    }
}

impl ForestGrid {
    pub fn size(&self) -> usize {
        self.min_samples_leaf.len() * self.min_samples_split.len()
    }

    /// `n` random grid points layered over `base`.
    pub fn sample(&self, base: &ForestParams, n: usize, seed: u64) -> Vec<ForestParams> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        sample_product(
            &[self.min_samples_leaf.len(), self.min_samples_split.len()],
            n,
            &mut rng,
        )
        .into_iter()
        .map(|ix| ForestParams {
            min_samples_leaf: self.min_samples_leaf[ix[0]],
            min_samples_split: self.min_samples_split[ix[1]],
            ..base.clone()
        })
        .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoostGrid {
    pub max_depth: Vec<usize>,
    pub gamma: Vec<f64>,
    pub n_estimators: Vec<usize>,
    pub eta: Vec<f64>,
    pub subsample: Vec<f64>,
}

impl Default for BoostGrid {
    fn default() -> Self {
        BoostGrid {
            max_depth: (2..=5).collect(),
            gamma: vec![0.0, 0.3, 0.7, 1.0, 2.0, 4.0, 8.0],
            n_estimators: vec![5, 10, 25, 50, 75, 100, 150],
            eta: vec![0.1, 0.25, 0.4, 0.55, 0.7],
            subsample: vec![0.1, 0.25, 0.5, 0.75, 1.0],
        }
    }
}

impl BoostGrid {
    pub fn size(&self) -> usize {
        self.max_depth.len() * self.gamma.len() * self.n_estimators.len() * self.eta.len() * self.subsample.len()
    }

    pub fn sample(&self, base: &BoostParams, n: usize, seed: u64) -> Vec<BoostParams> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sizes = [
            self.max_depth.len(),
            self.gamma.len(),
            self.n_estimators.len(),
            self.eta.len(),
            self.subsample.len(),
        ];
        sample_product(&sizes, n, &mut rng)
            .into_iter()
            .map(|ix| BoostParams {
                max_depth: self.max_depth[ix[0]],
                gamma: self.gamma[ix[1]],
                n_estimators: self.n_estimators[ix[2]],
                eta: self.eta[ix[3]],
                subsample: self.subsample[ix[4]],
                ..base.clone()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn grid_matches_the_published_table() {
        let g = experiment_grid();
        assert_eq!(g.len(), 18);
        let expect = |id: u32, s: Strategy, f: f64, cr: f64| {
            let e = grid_entry(id).unwrap();
            assert_eq!((e.strategy, e.f, e.cr), (s, f, cr), "id {id}");
        };
        expect(1, Strategy::CurrentToRand1, 0.7, 0.5);
        expect(2, Strategy::CurrentToRand1, 0.8, 0.5);
        expect(4, Strategy::CurrentToRand1, 0.7, 0.7);
        expect(9, Strategy::CurrentToRand1, 0.9, 0.9);
        expect(10, Strategy::Rand1, 0.7, 0.5);
        expect(16, Strategy::Rand1, 0.7, 0.9);
        expect(18, Strategy::Rand1, 0.9, 0.9);
        let combos: HashSet<String> = g.iter().map(|e| format!("{}|{}|{}", e.strategy, e.f, e.cr)).collect();
        assert_eq!(combos.len(), 18);
        for (i, e) in g.iter().enumerate() {
            assert_eq!(e.id as usize, i + 1);
        }
        assert!(grid_entry(0).is_err() && grid_entry(19).is_err());
    }

    #[test]
    fn default_search_spaces() {
        let f = ForestGrid::default();
        assert_eq!(f.min_samples_leaf, [5, 25, 50, 75, 100]);
        assert_eq!(f.min_samples_split, [2, 3, 4, 5, 6, 7]);
        let b = BoostGrid::default();
        assert_eq!(b.max_depth, [2, 3, 4, 5]);
        assert_eq!(b.gamma.len(), 7);
        assert_eq!(b.n_estimators, [5, 10, 25, 50, 75, 100, 150]);
        assert_eq!(b.eta.len(), 5);
        assert_eq!(b.subsample, [0.1, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(b.size(), 4 * 7 * 7 * 5 * 5);
    }

    #[test]
    fn sampling_is_distinct_seeded_and_capped() {
        let b = BoostGrid::default();
        let a = b.sample(&BoostParams::default(), 40, 3);
        assert_eq!(a, b.sample(&BoostParams::default(), 40, 3));
        let keys: HashSet<String> = a
            .iter()
            .map(|p| {
                format!(
                    "{}|{}|{}|{}|{}",
                    p.max_depth, p.gamma, p.n_estimators, p.eta, p.subsample
                )
            })
            .collect();
        assert_eq!(keys.len(), 40);
        let f = ForestGrid::default();
        let all = f.sample(&ForestParams::default(), 1000, 0);
        assert_eq!(all.len(), 30);
        assert!(all.iter().all(|p| p.n_trees == 100));
    }
}
