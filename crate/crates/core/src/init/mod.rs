//! Data-driven initial population: a Gaussian mixture over the historical
//! decision space, hybridised with the best historical individuals.

mod gmm;
pub mod linalg;
mod population;

pub use gmm::{fit_gmm_em, fit_gmm_em_with, sample_gmm, select_by_bic, BicScore, EmConfig, EmTrace, GaussianMixture};
pub use population::{best_historical, get_n_samples, InitConfig, Population};
