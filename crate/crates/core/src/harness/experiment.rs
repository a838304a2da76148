use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{experiment_grid, GridEntry};
use crate::de::{run_from, write_convergence_csv, DEConfig, RunHistory, SearchSpace};
use crate::error::{Error, Result};
use crate::init::{get_n_samples, InitConfig, Population};
use crate::signal::io::read_labeled_csv;
use crate::signal::LabeledExtrusion;
use crate::surrogate::Surrogates;
use crate::Real;

pub const RESULTS_FILE: &str = "results.csv";
pub const CONVERGENCE_FILE: &str = "convergence.csv";
pub const BOXPLOT_FILE: &str = "boxplot.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub repetitions: usize,
    /// Iteration counts at which the best-so-far value is reported. Runs
    /// last as long as the largest one unless the run length is overridden.
    pub max_iter_set: Vec<usize>,
    /// Products to run; empty means every product in the history.
    pub products: Vec<String>,
    /// Grid IDs to run; empty means all 18.
    pub ids: Vec<u32>,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
    /// Also write every run history to `runs/`.
    pub write_histories: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            repetitions: 10,
            max_iter_set: vec![150, 300, 500],
            products: Vec::new(),
            ids: Vec::new(),
            jobs: 0,
            write_histories: false,
        }
    }
}

impl ExperimentConfig {
    /// Run length when no explicit `max_iter` is given.
    pub fn default_max_iter(&self) -> Option<usize> {
        self.max_iter_set.iter().copied().max()
    }

    /// Reporting iterations for runs of length `max_iter`.
    pub fn checkpoints(&self, max_iter: usize) -> Vec<usize> {
        let mut c: Vec<usize> = self.max_iter_set.iter().copied().filter(|&m| m <= max_iter).collect();
        c.push(max_iter);
        c.sort_unstable();
        c.dedup();
        c
    }

    pub fn entries(&self) -> Result<Vec<GridEntry>> {
        let grid = experiment_grid();
        if self.ids.is_empty() {
            return Ok(grid);
        }
        self.ids.iter().map(|&id| super::grid::grid_entry(id)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub product: String,
    pub entry: GridEntry,
    pub rep: usize,
    pub seed: u64,
    pub outcome: std::result::Result<RunHistory<Real>, String>,
}

impl RunRecord {
    pub fn run_id(&self) -> String {
        format!("{}/{}/{}", self.product, self.entry.id, self.rep)
    }
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub base: DEConfig,
    pub checkpoints: Vec<usize>,
    /// Ordered by product, grid ID, repetition.
    pub records: Vec<RunRecord>,
}

impl Experiment {
    pub fn histories(&self) -> impl Iterator<Item = (&RunRecord, &RunHistory<Real>)> {
        self.records
            .iter()
            .filter_map(|r| r.outcome.as_ref().ok().map(|h| (r, h)))
    }

    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.outcome.is_err()).count()
    }
}

fn history_products(history: &[LabeledExtrusion]) -> Vec<String> {
    let set: BTreeSet<&str> = history.iter().map(|r| r.product()).collect();
    set.into_iter().map(str::to_string).collect()
}

/// Every selected grid entry, repetition and product. Repetition `r` uses
/// seed `base.seed + r` for both the initial population and the run, so all
/// entries of one repetition start from the same population. Failed runs
/// are recorded and the grid carries on.
pub fn run_experiment(
    models: &Surrogates<Real>,
    history: &[LabeledExtrusion],
    base: &DEConfig,
    cfg: &ExperimentConfig,
) -> Result<Experiment> {
    base.validate()?;
    if cfg.repetitions == 0 {
        return Err(Error::InvalidConfig("repetitions must be positive".into()));
    }
    let entries = cfg.entries()?;
    let products = if cfg.products.is_empty() {
        history_products(history)
    } else {
        cfg.products.clone()
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;

    let seed_of = |rep: usize| base.seed.wrapping_add(rep as u64);
    let mut records = Vec::with_capacity(products.len() * entries.len() * cfg.repetitions);
    for product in &products {
        let prepared = SearchSpace::<Real>::from_history(history, product).map(|space| {
            let pops: Vec<Result<Population<Real>>> = pool.install(|| {
                (0..cfg.repetitions)
                    .into_par_iter()
                    .map(|rep| {
                        let init = InitConfig::new(product.as_str(), base.n_pop, base.ic, seed_of(rep));
                        get_n_samples(history, &space, &init)
                    })
                    .collect()
            });
            (space, pops)
        });
        let tasks: Vec<(GridEntry, usize)> = entries
            .iter()
            .flat_map(|&e| (0..cfg.repetitions).map(move |rep| (e, rep)))
            .collect();
        let outcomes: Vec<std::result::Result<RunHistory<Real>, String>> = match &prepared {
            Err(e) => {
                log::warn!("product `{product}` skipped: {e}");
                tasks.iter().map(|_| Err(e.to_string())).collect()
            }
            Ok((space, pops)) => {
                let bound = models.bind(&space.context)?;
                pool.install(|| {
                    tasks
                        .par_iter()
                        .map(|&(entry, rep)| {
                            let pop = pops[rep].as_ref().map_err(|e| e.to_string())?;
                            let cfg = DEConfig {
                                seed: seed_of(rep),
                                ..entry.apply(base)
                            };
                            run_from(&cfg, pop, space, &bound, &mut |_| {}).map_err(|e| e.to_string())
                        })
                        .collect()
                })
            }
        };
        for ((entry, rep), outcome) in tasks.into_iter().zip(outcomes) {
            records.push(RunRecord {
                product: product.clone(),
                entry,
                rep,
                seed: seed_of(rep),
                outcome,
            });
        }
    }
    Ok(Experiment {
        base: base.clone(),
        checkpoints: cfg.checkpoints(base.max_iter),
        records,
    })
}

/// Linear interpolation between order statistics; `sorted` must be ascending.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn entry_cols(e: &GridEntry) -> [String; 4] {
    [
        e.id.to_string(),
        e.strategy.to_string(),
        e.f.to_string(),
        e.cr.to_string(),
    ]
}

pub fn write_results_csv<W: Write>(out: W, exp: &Experiment) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["product", "id", "strategy", "F", "Cr", "rep", "seed", "status"]
        .map(String::from)
        .to_vec();
    header.extend(["best_fitness", "best_feasible_fitness", "historical_seed_best"].map(String::from));
    header.extend(exp.checkpoints.iter().map(|c| format!("best_at_{c}")));
    header.push("message".into());
    w.write_record(&header)?;
    for r in &exp.records {
        let mut rec = vec![r.product.clone()];
        rec.extend(entry_cols(&r.entry));
        rec.extend([r.rep.to_string(), r.seed.to_string()]);
        match &r.outcome {
            Ok(h) => {
                rec.push("ok".into());
                rec.extend([
                    h.final_best().to_string(),
                    opt(h.final_best_feasible()),
                    opt(h.historical_seed_best),
                ]);
                rec.extend(exp.checkpoints.iter().map(|&c| opt(h.best_fitness.get(c).copied())));
                rec.push(String::new());
            }
            Err(msg) => {
                rec.push("failed".into());
                rec.extend(std::iter::repeat_n(String::new(), 3 + exp.checkpoints.len()));
                rec.push(msg.clone());
            }
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<results csv>", e))
}

/// Distribution of best-so-far fitness per product, grid ID and checkpoint.
pub fn write_boxplot_csv<W: Write>(out: W, exp: &Experiment) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "product", "id", "strategy", "F", "Cr", "max_iter", "n_runs", "min", "q1", "median", "q3", "max", "iqr",
    ])?;
    let mut i = 0;
    while i < exp.records.len() {
        let first = &exp.records[i];
        let mut j = i;
        while j < exp.records.len()
            && exp.records[j].product == first.product
            && exp.records[j].entry.id == first.entry.id
        {
            j += 1;
        }
        for &c in &exp.checkpoints {
            let mut v: Vec<f64> = exp.records[i..j]
                .iter()
                .filter_map(|r| r.outcome.as_ref().ok().and_then(|h| h.best_fitness.get(c).copied()))
                .collect();
            v.sort_by(f64::total_cmp);
            let mut rec = vec![first.product.clone()];
            rec.extend(entry_cols(&first.entry));
            rec.extend([c.to_string(), v.len().to_string()]);
            if v.is_empty() {
                rec.extend(std::iter::repeat_n(String::new(), 6));
            } else {
                let q = |p| quantile(&v, p);
                rec.extend([v[0], q(0.25), q(0.5), q(0.75), v[v.len() - 1], q(0.75) - q(0.25)].map(|x| x.to_string()));
            }
            w.write_record(&rec)?;
        }
        i = j;
    }
    w.flush().map_err(|e| Error::io("<boxplot csv>", e))
}

pub fn experiment_outputs(out: &Path) -> [PathBuf; 3] {
    [RESULTS_FILE, CONVERGENCE_FILE, BOXPLOT_FILE].map(|f| out.join(f))
}

pub fn write_experiment(exp: &Experiment, out: &Path, histories: bool) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let [results, convergence, boxplot] = experiment_outputs(out);
    let create = |p: &Path| {
        std::fs::File::create(p)
            .map(std::io::BufWriter::new)
            .map_err(|e| Error::io(p, e))
    };
    write_results_csv(create(&results)?, exp)?;
    let runs: Vec<(String, &RunHistory<Real>)> = exp.histories().map(|(r, h)| (r.run_id(), h)).collect();
    write_convergence_csv(create(&convergence)?, &runs)?;
    write_boxplot_csv(create(&boxplot)?, exp)?;
    if histories {
        let dir = out.join("runs");
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        for (r, h) in exp.histories() {
            h.save_json(&dir.join(format!("{}_{}_{}.json", r.product, r.entry.id, r.rep)))?;
        }
    }
    Ok(())
}

pub fn cmd_experiment(
    models: &Path,
    labeled: &Path,
    base: &DEConfig,
    cfg: &ExperimentConfig,
    out: &Path,
) -> Result<Experiment> {
    let models = Surrogates::load(models)?;
    let history = read_labeled_csv(labeled)?;
    let exp = run_experiment(&models, &history, base, cfg)?;
    write_experiment(&exp, out, cfg.write_histories)?;
    Ok(exp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_interpolate_linearly() {
        let v = [1.0, 2.0, 4.0, 8.0, 16.0];
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 0.5), 4.0);
        assert_eq!(quantile(&v, 1.0), 16.0);
        assert_eq!(quantile(&v, 0.25), 2.0);
        assert_eq!(quantile(&[1.0, 2.0], 0.5), 1.5);
        assert_eq!(quantile(&[3.0], 0.75), 3.0);
    }

    #[test]
    fn checkpoints_follow_run_length() {
        let c = ExperimentConfig::default();
        assert_eq!(c.default_max_iter(), Some(500));
        assert_eq!(c.checkpoints(500), [150, 300, 500]);
        assert_eq!(c.checkpoints(100), [100]);
        assert_eq!(c.checkpoints(200), [150, 200]);
        let picked = ExperimentConfig { ids: vec![16, 3], ..c };
        let e = picked.entries().unwrap();
        assert_eq!(e.iter().map(|e| e.id).collect::<Vec<_>>(), [16, 3]);
    }
}
