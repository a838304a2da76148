use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::grid::{BoostGrid, ForestGrid};
use crate::error::{Error, Result};
use crate::signal::io::read_labeled_csv;
use crate::signal::{Class, LabeledExtrusion};
use crate::surrogate::{
    confusion_matrix, f1_score, kendall_tau, kfold, rebalance, stratified_kfold, stratified_split,
    train_constraint_classifier, train_objective_regressor, BoostParams, ClassDataset, FeatureEncoder, ForestParams,
    RegressionDataset, Surrogates,
};
use crate::Real;

pub const MODELS_FILE: &str = "surrogates.json";
pub const TRAINING_REPORT_FILE: &str = "training_report.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub seed: u64,
    /// Stratified fraction held out from model selection and fitting.
    pub holdout: f64,
    pub folds: usize,
    pub smote_k: usize,
    /// Random grid points tried per model on top of the defaults.
    pub forest_candidates: usize,
    pub boost_candidates: usize,
    pub forest: ForestParams,
    pub boost: BoostParams,
    pub forest_grid: ForestGrid,
    pub boost_grid: BoostGrid,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            seed: 0,
            holdout: 0.2,
            folds: 5,
            smote_k: 5,
            forest_candidates: 4,
            boost_candidates: 16,
            forest: ForestParams::default(),
            boost: BoostParams::default(),
            forest_grid: ForestGrid::default(),
            boost_grid: BoostGrid::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.holdout > 0.0 && self.holdout < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "holdout = {} outside (0, 1)",
                self.holdout
            )));
        }
        if self.folds < 2 {
            return Err(Error::InvalidConfig("cross-validation needs at least 2 folds".into()));
        }
        if self.smote_k == 0 {
            return Err(Error::InvalidConfig("smote_k must be positive".into()));
        }
        Ok(())
    }
}

/// Cross-validation score of one candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate<P> {
    pub params: P,
    pub fold_scores: Vec<f64>,
    pub mean_score: f64,
    /// Mean validation error (log-space MSE for the regressor), used to break
    /// near-ties in score.
    pub mean_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierReport {
    /// Macro F1 per fold for every candidate.
    pub candidates: Vec<Candidate<ForestParams>>,
    pub chosen: ForestParams,
    pub train_rows_after_rebalance: usize,
    pub train_f1: f64,
    pub holdout_f1: f64,
    /// Holdout confusion matrix, `[truth][prediction]`.
    pub holdout_confusion: [[usize; 3]; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressorReport {
    /// Kendall tau per fold for every candidate.
    pub candidates: Vec<Candidate<BoostParams>>,
    pub chosen: BoostParams,
    pub train_rows: usize,
    pub outliers_removed: usize,
    pub stage_mse: Vec<f64>,
    pub train_kendall: f64,
    pub holdout_kendall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    pub n_rows: usize,
    pub n_train: usize,
    pub n_holdout: usize,
    /// Counts for classes 1, 2 and 3.
    pub class_counts: [usize; 3],
    pub feature_names: Vec<String>,
    pub classifier: ClassifierReport,
    pub regressor: RegressorReport,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Constant predictions leave tau undefined; they carry no ranking, so they score zero.
fn tau_or_zero(a: &[f64], b: &[f64]) -> Result<f64> {
    match kendall_tau(a, b) {
        Ok(t) => Ok(t),
        Err(Error::UndefinedCorrelation(_)) => Ok(0.0),
        Err(e) => Err(e),
    }
}

fn std_error(v: &[f64]) -> f64 {
    let m = mean(v);
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1).max(1) as f64;
    (var / v.len() as f64).sqrt()
}

/// Highest mean score wins. When errors are recorded, every candidate within
/// one standard error of that score competes on lowest mean error instead.
/// Earlier candidates win exact ties.
fn pick<P: Clone>(candidates: &[Candidate<P>]) -> P {
    let mut best = 0;
    for (i, c) in candidates.iter().enumerate() {
        if c.mean_score > candidates[best].mean_score {
            best = i;
        }
    }
    let floor = candidates[best].mean_score - std_error(&candidates[best].fold_scores);
    let mut chosen = best;
    for (i, c) in candidates.iter().enumerate() {
        if let (Some(e), Some(current)) = (c.mean_error, candidates[chosen].mean_error) {
            if c.mean_score >= floor && (e < current || (e == current && i < chosen)) {
                chosen = i;
            }
        }
    }
    candidates[chosen].params.clone()
}

fn with_defaults<P: PartialEq + Clone>(base: &P, sampled: Vec<P>) -> Vec<P> {
    let mut out = vec![base.clone()];
    out.extend(sampled.into_iter().filter(|p| p != base));
    out
}

fn classifier_cv(data: &ClassDataset<Real>, params: &ForestParams, cfg: &TrainConfig) -> Result<Vec<f64>> {
    stratified_kfold(&data.y, cfg.folds, cfg.seed)?
        .iter()
        .enumerate()
        .map(|(j, (train, val))| {
            let balanced = rebalance(&data.subset(train), cfg.smote_k, cfg.seed.wrapping_add(j as u64))?;
            let model = train_constraint_classifier(&balanced, params)?;
            let val = data.subset(val);
            f1_score(&model.predict_batch(&val.x)?, &val.y)
        })
        .collect()
}

/// Kendall tau and log-space MSE per fold.
fn regressor_cv(
    data: &RegressionDataset<Real>,
    params: &BoostParams,
    cfg: &TrainConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut taus = Vec::with_capacity(cfg.folds);
    let mut errors = Vec::with_capacity(cfg.folds);
    for (train, val) in kfold(data.len(), cfg.folds, cfg.seed)? {
        let (model, _) = train_objective_regressor(&data.subset(&train), params)?;
        let val = data.subset(&val);
        let pred = model.predict_batch(&val.x)?;
        taus.push(tau_or_zero(&pred, &val.y)?);
        let se: Vec<f64> = pred
            .iter()
            .zip(&val.y)
            .map(|(p, y)| (p.ln() - y.ln()).powi(2))
            .collect();
        errors.push(mean(&se));
    }
    Ok((taus, errors))
}

/// Selects hyperparameters by cross-validation on a stratified training
/// split, fits both surrogates on that split and scores them on the holdout.
pub fn train_surrogates(rows: &[LabeledExtrusion], cfg: &TrainConfig) -> Result<(Surrogates<Real>, TrainingReport)> {
    cfg.validate()?;
    let encoder = FeatureEncoder::fit(rows)?;
    let labels: Vec<Class> = rows.iter().map(|r| r.class).collect();
    let (train_idx, holdout_idx) = stratified_split(&labels, cfg.holdout, cfg.seed)?;
    let pick_rows = |idx: &[usize]| idx.iter().map(|&i| rows[i].clone()).collect::<Vec<_>>();
    let (train_rows, holdout_rows) = (pick_rows(&train_idx), pick_rows(&holdout_idx));

    let class_train: ClassDataset<Real> = encoder.class_dataset(&train_rows)?;
    let class_holdout: ClassDataset<Real> = encoder.class_dataset(&holdout_rows)?;
    let reg_train: RegressionDataset<Real> = encoder.regression_dataset(&train_rows)?;
    let reg_holdout: RegressionDataset<Real> = encoder.regression_dataset(&holdout_rows)?;
    if reg_train.len() < cfg.folds * 2 || reg_holdout.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} class-1 rows in training and {} in holdout are too few for the objective model",
            reg_train.len(),
            reg_holdout.len()
        )));
    }

    let forest_base = ForestParams {
        seed: cfg.seed,
        ..cfg.forest.clone()
    };
    let forest_candidates = with_defaults(
        &forest_base,
        cfg.forest_grid.sample(&forest_base, cfg.forest_candidates, cfg.seed),
    )
    .into_iter()
    .map(|params| {
        let fold_scores = classifier_cv(&class_train, &params, cfg)?;
        log::info!("forest {params:?}: macro F1 {:.4}", mean(&fold_scores));
        Ok(Candidate {
            mean_score: mean(&fold_scores),
            params,
            fold_scores,
            mean_error: None,
        })
    })
    .collect::<Result<Vec<_>>>()?;
    let forest_params = pick(&forest_candidates);

    let boost_base = BoostParams {
        seed: cfg.seed,
        ..cfg.boost.clone()
    };
    let boost_candidates = with_defaults(
        &boost_base,
        cfg.boost_grid
            .sample(&boost_base, cfg.boost_candidates, cfg.seed.wrapping_add(1)),
    )
    .into_iter()
    .map(|params| {
        let (fold_scores, fold_errors) = regressor_cv(&reg_train, &params, cfg)?;
        log::info!(
            "boost {params:?}: Kendall tau {:.4}, log MSE {:.4}",
            mean(&fold_scores),
            mean(&fold_errors)
        );
        Ok(Candidate {
            mean_score: mean(&fold_scores),
            params,
            fold_scores,
            mean_error: Some(mean(&fold_errors)),
        })
    })
    .collect::<Result<Vec<_>>>()?;
    let boost_params = pick(&boost_candidates);

    let balanced = rebalance(&class_train, cfg.smote_k, cfg.seed)?;
    let constraint = train_constraint_classifier(&balanced, &forest_params)?;
    let (objective, trace) = train_objective_regressor(&reg_train, &boost_params)?;

    let train_pred = constraint.predict_batch(&class_train.x)?;
    let holdout_pred = constraint.predict_batch(&class_holdout.x)?;
    let classifier = ClassifierReport {
        candidates: forest_candidates,
        chosen: forest_params,
        train_rows_after_rebalance: balanced.len(),
        train_f1: f1_score(&train_pred, &class_train.y)?,
        holdout_f1: f1_score(&holdout_pred, &class_holdout.y)?,
        holdout_confusion: confusion_matrix(&holdout_pred, &class_holdout.y),
    };
    let regressor = RegressorReport {
        candidates: boost_candidates,
        chosen: boost_params,
        train_rows: reg_train.len(),
        outliers_removed: trace.outliers_removed,
        stage_mse: trace.stage_mse,
        train_kendall: tau_or_zero(&objective.predict_batch(&reg_train.x)?, &reg_train.y)?,
        holdout_kendall: tau_or_zero(&objective.predict_batch(&reg_holdout.x)?, &reg_holdout.y)?,
    };
    let mut class_counts = [0; 3];
    for c in &labels {
        class_counts[c.index()] += 1;
    }
    let report = TrainingReport {
        n_rows: rows.len(),
        n_train: train_rows.len(),
        n_holdout: holdout_rows.len(),
        class_counts,
        feature_names: encoder.feature_names(),
        classifier,
        regressor,
    };
    Ok((
        Surrogates {
            encoder,
            constraint,
            objective,
        },
        report,
    ))
}

/// Paths written by [`cmd_train`].
pub fn train_outputs(out: &Path) -> (PathBuf, PathBuf) {
    (out.join(MODELS_FILE), out.join(TRAINING_REPORT_FILE))
}

/// Trains on a labeled CSV and writes the model bundle and the report to `out`.
pub fn cmd_train(labeled: &Path, cfg: &TrainConfig, out: &Path) -> Result<TrainingReport> {
    let rows = read_labeled_csv(labeled)?;
    let (models, report) = train_surrogates(&rows, cfg)?;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let (models_path, report_path) = train_outputs(out);
    models.save(&models_path)?;
    let text = serde_json::to_string_pretty(&report)?;
    std::fs::write(&report_path, text).map_err(|e| Error::io(&report_path, e))?;
    Ok(report)
}
