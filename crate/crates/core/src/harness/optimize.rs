use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::de::{run_from, write_convergence_csv, DEConfig, RunHistory, SearchSpace};
use crate::error::{Error, Result};
use crate::init::{get_n_samples, BicScore, InitConfig};
use crate::signal::io::read_labeled_csv;
use crate::signal::LabeledExtrusion;
use crate::surrogate::{SearchContext, Surrogates};
use crate::Real;

/// How the initial population was assembled.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitInfo {
    pub product_type: String,
    pub context: SearchContext,
    pub n_pop: usize,
    pub n_density: usize,
    /// Extrusion ids of the best-historical seeds, best first.
    pub best_ids: Vec<usize>,
    pub bic: Vec<BicScore>,
}

/// One optimizer run for `product` with surrogates already in memory.
pub fn optimize_product(
    models: &Surrogates<Real>,
    history: &[LabeledExtrusion],
    product: &str,
    cfg: &DEConfig,
) -> Result<(RunHistory<Real>, InitInfo)> {
    cfg.validate()?;
    let space = SearchSpace::from_history(history, product)?;
    let pop = get_n_samples(history, &space, &InitConfig::new(product, cfg.n_pop, cfg.ic, cfg.seed))?;
    let bound = models.bind(&space.context)?;
    let h = run_from(cfg, &pop, &space, &bound, &mut |_| {})?;
    let info = InitInfo {
        product_type: product.to_string(),
        context: space.context.clone(),
        n_pop: cfg.n_pop,
        n_density: pop.n_density,
        best_ids: pop.best_ids,
        bic: pop.bic,
    };
    Ok((h, info))
}

/// `run.json`, `convergence.csv` and `init.json` under `out`.
pub fn optimize_outputs(out: &Path) -> [PathBuf; 3] {
    ["run.json", "convergence.csv", "init.json"].map(|f| out.join(f))
}

pub fn cmd_optimize(
    models: &Path,
    labeled: &Path,
    product: &str,
    cfg: &DEConfig,
    out: &Path,
) -> Result<RunHistory<Real>> {
    let models = Surrogates::load(models)?;
    let history = read_labeled_csv(labeled)?;
    let (h, info) = optimize_product(&models, &history, product, cfg)?;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let [run_path, conv_path, init_path] = optimize_outputs(out);
    h.save_json(&run_path)?;
    let file = std::fs::File::create(&conv_path).map_err(|e| Error::io(&conv_path, e))?;
    write_convergence_csv(
        std::io::BufWriter::new(file),
        &[(format!("{product}/seed{}", cfg.seed), &h)],
    )?;
    let text = serde_json::to_string_pretty(&info)?;
    std::fs::write(&init_path, text).map_err(|e| Error::io(&init_path, e))?;
    Ok(h)
}
