//! Differential evolution over the continuous decision coordinates, with
//! surrogate fitness and multi-level penalties.

mod config;
mod operators;
mod penalty;
mod run;
mod space;

pub use config::{DEConfig, Strategy};
pub use operators::{crossover_binomial, dispersion, donor, draw_indices, mean_feature_std, mutate, select_greedy};
pub use penalty::{fitness, multi_level_penalty, penalty_factor, t_setpoint, Evaluation, Surrogate};
pub use run::{run, run_from, write_convergence_csv, Generation, RunHistory};
pub use space::{check_ranges, Bounds, SearchSpace};
