use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::de::{multi_level_penalty, t_setpoint, SearchSpace};
use crate::error::{Error, Result};
use crate::init::best_historical;
use crate::signal::io::{csv_io, read_labeled_csv};
use crate::signal::{Class, LabeledExtrusion};
use crate::surrogate::Surrogates;
use crate::Real;

pub const REPORT_JSON: &str = "report.json";
pub const REPORT_CSV: &str = "report.csv";

/// The columns of `results.csv` the report needs.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ResultRow {
    pub product: String,
    pub id: u32,
    pub rep: usize,
    pub status: String,
    pub best_fitness: Option<f64>,
    pub best_feasible_fitness: Option<f64>,
}

pub fn read_results_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_io(path, e))?;
    Ok(r.deserialize().collect::<std::result::Result<Vec<ResultRow>, _>>()?)
}

/// Baseline, best historical and optimized steadiness time for one product,
/// all in seconds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductComparison {
    pub product: String,
    pub n_steady: usize,
    /// Regressor prediction at the median decision vector of the class-1 rows.
    pub baseline: f64,
    /// Shortest observed steadiness time.
    pub best_historical: f64,
    /// Surrogate fitness of that best observed row.
    pub best_historical_predicted: f64,
    /// Best fitness over every successful run.
    pub optimized: f64,
    pub optimized_run: String,
    /// Best fitness reached by a feasible, consistent individual.
    pub optimized_feasible: Option<f64>,
    /// `1 - optimized / baseline`.
    pub reduction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub products: Vec<ProductComparison>,
    pub mean_reduction: Option<f64>,
    /// Products left out, with the reason.
    pub excluded: Vec<(String, String)>,
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    super::experiment::quantile(values, 0.5)
}

/// Coordinate-wise median of the product's class-1 decision vectors.
pub fn median_decision(history: &[LabeledExtrusion], product: &str) -> Option<Vec<f64>> {
    let rows: Vec<Vec<f64>> = history
        .iter()
        .filter(|r| r.product() == product && r.class == Class::Steady)
        .map(|r| r.search_point.decision_vector())
        .collect();
    let d = rows.first()?.len();
    Some(
        (0..d)
            .map(|j| median(&mut rows.iter().map(|r| r[j]).collect::<Vec<_>>()))
            .collect(),
    )
}

fn compare_product(
    models: &Surrogates<Real>,
    history: &[LabeledExtrusion],
    product: &str,
    runs: &[&ResultRow],
    delta: f64,
) -> std::result::Result<ProductComparison, String> {
    let best_rows = best_historical(history, product);
    let Some(best_row) = best_rows.first() else {
        return Err("no class-1 extrusions".into());
    };
    let (optimized, optimized_run) = runs
        .iter()
        .filter(|r| r.status == "ok")
        .filter_map(|r| r.best_fitness.map(|f| (f, format!("{}/{}/{}", r.product, r.id, r.rep))))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .ok_or("no successful optimization runs")?;
    let optimized_feasible = runs
        .iter()
        .filter(|r| r.status == "ok")
        .filter_map(|r| r.best_feasible_fitness)
        .min_by(f64::total_cmp);
    let space = SearchSpace::<Real>::from_history(history, product).map_err(|e| e.to_string())?;
    let bound = models.bind(&space.context).map_err(|e| e.to_string())?;
    let median_x = median_decision(history, product).expect("class-1 rows exist");
    let baseline = bound.predict_objective(&median_x).map_err(|e| e.to_string())?;
    let best_x = best_row.search_point.decision_vector();
    let (raw, class) = bound.predict_both(&best_x).map_err(|e| e.to_string())?;
    let t_set = t_setpoint(&best_x, &space).map_err(|e| e.to_string())?;
    Ok(ProductComparison {
        product: product.to_string(),
        n_steady: best_rows.len(),
        baseline,
        best_historical: best_row.steadiness_time.expect("class 1 rows carry a time"),
        best_historical_predicted: multi_level_penalty(raw, class, t_set, delta).fitness,
        optimized,
        optimized_run,
        optimized_feasible,
        reduction: 1.0 - optimized / baseline,
    })
}

/// Compares baseline, best historical and optimized values per product.
/// Products without class-1 history or without a successful run are
/// excluded with a warning.
pub fn build_report(
    models: &Surrogates<Real>,
    history: &[LabeledExtrusion],
    results: &[ResultRow],
    delta: f64,
) -> ComparisonReport {
    let mut by_product: BTreeMap<&str, Vec<&ResultRow>> = BTreeMap::new();
    for r in history {
        by_product.entry(r.product()).or_default();
    }
    for r in results {
        by_product.entry(r.product.as_str()).or_default().push(r);
    }
    let mut products = Vec::new();
    let mut excluded = Vec::new();
    for (product, runs) in by_product {
        match compare_product(models, history, product, &runs, delta) {
            Ok(c) => products.push(c),
            Err(why) => {
                log::warn!("product `{product}` excluded from the report: {why}");
                excluded.push((product.to_string(), why));
            }
        }
    }
    let mean_reduction =
        (!products.is_empty()).then(|| products.iter().map(|p| p.reduction).sum::<f64>() / products.len() as f64);
    ComparisonReport {
        products,
        mean_reduction,
        excluded,
    }
}

pub fn report_outputs(out: &Path) -> [PathBuf; 2] {
    [REPORT_JSON, REPORT_CSV].map(|f| out.join(f))
}

pub fn write_report(report: &ComparisonReport, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let [json_path, csv_path] = report_outputs(out);
    let text = serde_json::to_string_pretty(report)?;
    std::fs::write(&json_path, text).map_err(|e| Error::io(&json_path, e))?;
    let mut w = csv::Writer::from_path(&csv_path).map_err(|e| csv_io(&csv_path, e))?;
    w.write_record([
        "product",
        "baseline",
        "best_historical",
        "best_historical_predicted",
        "optimized",
        "optimized_feasible",
        "reduction",
    ])?;
    for p in &report.products {
        w.write_record([
            p.product.clone(),
            p.baseline.to_string(),
            p.best_historical.to_string(),
            p.best_historical_predicted.to_string(),
            p.optimized.to_string(),
            p.optimized_feasible.map(|v| v.to_string()).unwrap_or_default(),
            p.reduction.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&csv_path, e))
}

pub fn cmd_report(results: &Path, labeled: &Path, models: &Path, delta: f64, out: &Path) -> Result<ComparisonReport> {
    let models = Surrogates::load(models)?;
    let history = read_labeled_csv(labeled)?;
    let rows = read_results_csv(results)?;
    let report = build_report(&models, &history, &rows, delta);
    write_report(&report, out)?;
    Ok(report)
}
