use serde::{Deserialize, Serialize};

use super::gmm::{sample_gmm, select_by_bic, BicScore, GaussianMixture};
use crate::de::SearchSpace;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::signal::{Class, LabeledExtrusion};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitConfig {
    /// Fraction of the population drawn from the fitted mixture.
    pub ic: f64,
    pub n_pop: usize,
    pub product_type: String,
    pub seed: u64,
    /// Largest component count tried during BIC selection.
    pub max_components: usize,
}

impl InitConfig {
    pub fn new(product_type: impl Into<String>, n_pop: usize, ic: f64, seed: u64) -> Self {
        InitConfig {
            ic,
            n_pop,
            product_type: product_type.into(),
            seed,
            max_components: 5,
        }
    }

    pub fn n_density(&self) -> usize {
        (self.n_pop as f64 * self.ic).round() as usize
    }

    pub fn n_best(&self) -> usize {
        self.n_pop - self.n_density()
    }
}

/// Initial population: best historical rows first (ascending steadiness
/// time), then the mixture draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Population<T: Scalar> {
    pub individuals: Vec<Vec<T>>,
    pub n_density: usize,
    /// Extrusion ids behind the historical individuals, in order.
    pub best_ids: Vec<usize>,
    pub mixture: Option<GaussianMixture<T>>,
    pub bic: Vec<BicScore>,
}

impl<T: Scalar> Population<T> {
    pub fn historical(&self) -> &[Vec<T>] {
        &self.individuals[..self.best_ids.len()]
    }

    pub fn density(&self) -> &[Vec<T>] {
        &self.individuals[self.best_ids.len()..]
    }
}

/// Class-1 rows of `product` sorted by steadiness time, earlier start first on ties.
pub fn best_historical<'a>(history: &'a [LabeledExtrusion], product: &str) -> Vec<&'a LabeledExtrusion> {
    let mut rows: Vec<&LabeledExtrusion> = history
        .iter()
        .filter(|r| r.product() == product && r.class == Class::Steady)
        .collect();
    rows.sort_by(|a, b| {
        let (ta, tb) = (
            a.steadiness_time.unwrap_or(f64::INFINITY),
            b.steadiness_time.unwrap_or(f64::INFINITY),
        );
        ta.total_cmp(&tb).then(a.start_time.cmp(&b.start_time))
    });
    rows
}

/// Hybrid initialization: `round(n_pop·Ic)` draws from a mixture fitted to
/// the product's scaled decision vectors (unscaled and clamped into the
/// space's bounds), plus the remaining slots filled with the best historical
/// class-1 individuals.
pub fn get_n_samples<T: Scalar>(
    history: &[LabeledExtrusion],
    space: &SearchSpace<T>,
    cfg: &InitConfig,
) -> Result<Population<T>> {
    if !(0.0..=1.0).contains(&cfg.ic) {
        return Err(Error::InvalidConfig(format!("Ic = {} outside [0, 1]", cfg.ic)));
    }
    if space.product_type() != cfg.product_type {
        return Err(Error::InvalidConfig(format!(
            "search space is for `{}`, not `{}`",
            space.product_type(),
            cfg.product_type
        )));
    }
    let best = best_historical(history, &cfg.product_type);
    if best.len() < cfg.n_pop {
        return Err(Error::Initialization(format!(
            "product `{}` has {} class-1 rows, population needs {}",
            cfg.product_type,
            best.len(),
            cfg.n_pop
        )));
    }
    let n_best = cfg.n_best();
    let mut individuals: Vec<Vec<T>> = best[..n_best]
        .iter()
        .map(|r| r.search_point.decision_vector().into_iter().map(T::of).collect())
        .collect();
    let best_ids = best[..n_best].iter().map(|r| r.id).collect();

    let n_density = cfg.n_density();
    let (mut mixture, mut bic) = (None, Vec::new());
    if n_density > 0 {
        let scaled: Vec<Vec<T>> = history
            .iter()
            .filter(|r| r.product() == cfg.product_type)
            .map(|r| {
                let x: Vec<T> = r.search_point.decision_vector().into_iter().map(T::of).collect();
                space.scaler.transform(&x)
            })
            .collect();
        let (gmm, scores) = select_by_bic(&scaled, cfg.max_components, cfg.seed)
            .map_err(|e| Error::Initialization(format!("mixture for `{}`: {e}", cfg.product_type)))?;
        for draw in sample_gmm(&gmm, n_density, cfg.seed.wrapping_add(1)) {
            let mut x = space.scaler.inverse(&draw);
            space.bounds.clamp(&mut x);
            individuals.push(x);
        }
        mixture = Some(gmm);
        bic = scores;
    }
    Ok(Population {
        individuals,
        n_density,
        best_ids,
        mixture,
        bic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::row;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn history(n: usize) -> Vec<LabeledExtrusion> {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        (0..n)
            .map(|i| {
                let t: f64 = 5.0 + (rng.random::<f64>() * 20.0).round();
                let class = if i % 4 == 3 { Class::Cut } else { Class::Steady };
                let steady = (class == Class::Steady).then_some(t);
                let product = if i % 5 == 0 { "B" } else { "A" };
                row(
                    i,
                    product,
                    &[80.0 + 10.0 * rng.random::<f64>(), 50.0 * rng.random::<f64>()],
                    &[
                        (
                            true,
                            20.0 + 40.0 * rng.random::<f64>(),
                            5.0 + 25.0 * rng.random::<f64>(),
                        ),
                        (false, 0.0, 0.0),
                    ],
                    steady,
                    class,
                )
            })
            .collect()
    }

    #[test]
    fn split_counts() {
        let h = history(400);
        let space = SearchSpace::<f64>::from_history(&h, "A").unwrap();
        let pop = get_n_samples(&h, &space, &InitConfig::new("A", 100, 0.25, 1)).unwrap();
        assert_eq!(pop.individuals.len(), 100);
        assert_eq!(pop.best_ids.len(), 75);
        assert_eq!(pop.density().len(), 25);
        assert!(pop.density().iter().all(|x| space.bounds.contains(x)));
        let times: Vec<f64> = pop.best_ids.iter().map(|&id| h[id].steadiness_time.unwrap()).collect();
        assert!(times.windows(2).all(|w| w[0] <= w[1]));
        assert!(pop
            .best_ids
            .iter()
            .all(|&id| h[id].product() == "A" && h[id].class == Class::Steady));
        // unused extruder pinned to zero
        assert!(pop.individuals.iter().all(|x| x[8] == 0.0 && x[9] == 0.0));
    }

    #[test]
    fn zero_ratio_is_pure_history() {
        let h = history(400);
        let space = SearchSpace::<f64>::from_history(&h, "A").unwrap();
        let pop = get_n_samples(&h, &space, &InitConfig::new("A", 100, 0.0, 1)).unwrap();
        let expect: Vec<Vec<f64>> = best_historical(&h, "A")[..100]
            .iter()
            .map(|r| r.search_point.decision_vector())
            .collect();
        assert_eq!(pop.individuals, expect);
        assert!(pop.mixture.is_none());
    }

    #[test]
    fn ties_go_to_the_earlier_extrusion() {
        let mut h = history(40);
        for r in &mut h {
            if r.class == Class::Steady {
                r.steadiness_time = Some(7.0);
            }
        }
        let ids: Vec<usize> = best_historical(&h, "A").iter().map(|r| r.id).collect();
        assert!(ids.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn count_preserved_for_any_ratio() {
        let h = history(400);
        let space = SearchSpace::<f64>::from_history(&h, "A").unwrap();
        for ic in [0.0, 0.1, 0.33, 0.5, 0.999, 1.0] {
            let pop = get_n_samples(&h, &space, &InitConfig::new("A", 37, ic, 2)).unwrap();
            assert_eq!(pop.individuals.len(), 37);
        }
    }

    #[test]
    fn too_little_history() {
        let h = history(40);
        let space = SearchSpace::<f64>::from_history(&h, "B").unwrap();
        assert!(matches!(
            get_n_samples(&h, &space, &InitConfig::new("B", 30, 0.25, 0)),
            Err(Error::Initialization(_))
        ));
    }
}
