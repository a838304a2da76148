//! The two surrogates standing in for the process: a random-forest classifier
//! for the minimum-quality constraint and a boosted-tree regressor for the
//! steadiness time, plus the resampling, scaling and validation they need.

mod boost;
mod bundle;
mod dataset;
mod forest;
mod kfold;
mod metrics;
pub mod persist;
mod resample;
mod scaler;
pub mod tree;

pub use boost::{train_objective_regressor, BoostParams, BoostTrace, ObjectiveModel};
pub use bundle::{BoundSurrogates, Surrogates, BUNDLE_KIND};
pub use dataset::{ClassDataset, Dataset, FeatureEncoder, RegressionDataset, SearchContext};
pub use forest::{train_constraint_classifier, ConstraintModel, ForestParams, MaxFeatures};
pub use kfold::{kfold, stratified_kfold, stratified_split};
pub use metrics::{confusion_matrix, f1_score, kendall_tau, KendallCounts};
pub use resample::{rebalance, smote_oversample, tomek_undersample, tomek_undersample_class};
pub use scaler::ScalerParams;
