use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::RegressionDataset;
use super::tree::{grow, DecisionTree, GrowParams, SquaredError};
use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};

pub const MIN_TRAINING_ROWS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostParams {
    pub max_depth: usize,
    /// Minimum loss reduction required to keep a split.
    pub gamma: f64,
    pub n_estimators: usize,
    /// Shrinkage applied to every stage.
    pub eta: f64,
    /// Fraction of rows drawn uniformly without replacement per stage.
    pub subsample: f64,
    /// L2 penalty on leaf values.
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    /// Log-space rows beyond `mean ± outlier_sigma·std` are dropped.
    pub outlier_sigma: Option<f64>,
    pub seed: u64,
}

fn default_lambda() -> f64 {
    1.0
}

impl Default for BoostParams {
    fn default() -> Self {
        BoostParams {
            max_depth: 3,
            gamma: 0.7,
            n_estimators: 50,
            eta: 0.1,
            subsample: 1.0,
            lambda: default_lambda(),
            outlier_sigma: Some(3.0),
            seed: 0,
        }
    }
}

/// Boosted-tree surrogate of the steadiness time, fitted in log space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ObjectiveModel<T: Scalar> {
    pub params: BoostParams,
    pub n_features: usize,
    pub base_score: T,
    pub trees: Vec<DecisionTree<T, T>>,
}

/// Per-stage diagnostics from training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct BoostTrace<T: Scalar> {
    /// Training MSE in log space; entry 0 is the constant base model.
    pub stage_mse: Vec<T>,
    pub outliers_removed: usize,
    pub n_train: usize,
}

impl<T: Scalar> ObjectiveModel<T> {
    /// `base_score + eta * sum of tree outputs` (log seconds).
    pub fn predict_log(&self, x: &[T]) -> Result<T> {
        if x.len() != self.n_features {
            return Err(Error::Prediction(format!(
                "input has {} features, model expects {}",
                x.len(),
                self.n_features
            )));
        }
        let sum: T = self.trees.iter().map(|t| *t.leaf(x)).sum();
        Ok(self.base_score + T::of(self.params.eta) * sum)
    }

    /// Predicted steadiness time in seconds.
    pub fn predict_objective(&self, x: &[T]) -> Result<T> {
        Ok(self.predict_log(x)?.exp())
    }

    pub fn predict_batch(&self, rows: &[Vec<T>]) -> Result<Vec<T>> {
        rows.iter().map(|r| self.predict_objective(r)).collect()
    }
}

/// Stage-wise least-squares boosting on log targets.
pub fn train_objective_regressor<T: Scalar>(
    data: &RegressionDataset<T>,
    params: &BoostParams,
) -> Result<(ObjectiveModel<T>, BoostTrace<T>)> {
    if data.len() < MIN_TRAINING_ROWS {
        return Err(Error::Training(format!(
            "objective regressor needs at least {MIN_TRAINING_ROWS} rows, got {}",
            data.len()
        )));
    }
    if data.y.iter().any(|&y| !(y > T::zero()) || !y.is_finite()) {
        return Err(Error::Training("steadiness times must be positive and finite".into()));
    }
    if !(params.subsample > 0.0 && params.subsample <= 1.0) || !(params.eta > 0.0) || !(params.lambda >= 0.0) {
        return Err(Error::Training(
            "subsample must lie in (0, 1], eta be positive and lambda non-negative".into(),
        ));
    }

    let log_y: Vec<T> = data.y.iter().map(|y| y.ln()).collect();
    let keep: Vec<usize> = match params.outlier_sigma {
        Some(k) => {
            let m = scalar::mean(&log_y);
            let s = scalar::std_dev(&log_y);
            let limit = T::of(k) * s;
            (0..log_y.len()).filter(|&i| (log_y[i] - m).abs() <= limit).collect()
        }
        None => (0..log_y.len()).collect(),
    };
    if keep.len() < MIN_TRAINING_ROWS {
        return Err(Error::Training(format!(
            "only {} rows left after outlier rejection",
            keep.len()
        )));
    }
    let x: Vec<Vec<T>> = keep.iter().map(|&i| data.x[i].clone()).collect();
    let target: Vec<T> = keep.iter().map(|&i| log_y[i]).collect();
    let n = x.len();

    let base = scalar::mean(&target);
    let eta = T::of(params.eta);
    let mut fitted = vec![base; n];
    let mse = |fitted: &[T]| {
        let ss: T = target.iter().zip(fitted).map(|(&t, &f)| (t - f) * (t - f)).sum();
        ss / T::of_usize(n)
    };
    let mut stage_mse = vec![mse(&fitted)];
    let grow_params = GrowParams {
        max_depth: Some(params.max_depth),
        min_samples_split: 2,
        min_samples_leaf: 1,
        max_features: None,
        min_gain: T::of(params.gamma),
    };
    let criterion = SquaredError {
        lambda: T::of(params.lambda),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n_sub = ((params.subsample * n as f64).round() as usize).clamp(1, n);
    let mut trees = Vec::with_capacity(params.n_estimators);
    for _ in 0..params.n_estimators {
        let residual: Vec<T> = target.iter().zip(&fitted).map(|(&t, &f)| t - f).collect();
        let sample: Vec<usize> = if n_sub == n {
            (0..n).collect()
        } else {
            let mut s = index::sample(&mut rng, n, n_sub).into_vec();
            s.sort_unstable();
            s
        };
        let tree = grow(&x, &residual, sample, &criterion, &grow_params, &mut rng);
        for (f, row) in fitted.iter_mut().zip(&x) {
            *f += eta * *tree.leaf(row);
        }
        stage_mse.push(mse(&fitted));
        trees.push(tree);
    }
    let model = ObjectiveModel {
        params: params.clone(),
        n_features: data.n_features(),
        base_score: base,
        trees,
    };
    let trace = BoostTrace {
        stage_mse,
        outliers_removed: data.len() - n,
        n_train: n,
    };
    Ok((model, trace))
}
