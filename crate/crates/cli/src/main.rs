use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ddde_core::de::{DEConfig, Strategy};
use ddde_core::harness::{
    cmd_experiment, cmd_ingest, cmd_optimize, cmd_report, cmd_train, experiment_outputs, HarnessConfig, MODELS_FILE,
    RESULTS_FILE,
};
use ddde_core::synth::{generate_history, GROUND_TRUTH_FILE};
use ddde_core::{Error, Result};

const LABELED_FILE: &str = "labeled.csv";

#[derive(Parser)]
#[command(
    name = "ddde",
    version,
    about = "Data-driven differential evolution over a sensor-recorded process"
)]
struct Cli {
    /// TOML file with [paths], [synth], [train], [optimize] and [experiment] sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic plant: signal CSVs plus a separate ground-truth file.
    Synth {
        #[arg(long)]
        n_extrusions: Option<usize>,
    },
    /// Segment and label a directory of signal CSVs.
    Ingest {
        /// Directory holding manifest.json and one CSV per signal.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Fit the feasibility classifier and the steadiness-time regressor.
    Train {
        /// Labeled CSV, or the directory `ingest` wrote it to.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// One optimizer run for a product.
    Optimize {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        product: String,
        #[command(flatten)]
        de: DeArgs,
    },
    /// The 18-combination strategy grid with repetitions.
    Experiment {
        #[command(flatten)]
        inputs: Inputs,
        /// Restrict to these products; repeatable.
        #[arg(long)]
        product: Vec<String>,
        #[command(flatten)]
        de: DeArgs,
        /// Worker threads; 0 uses every core.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        repetitions: Option<usize>,
    },
    /// Baseline, best-historical and optimized times per product.
    Report {
        #[command(flatten)]
        inputs: Inputs,
        /// results.csv from `experiment`, or its directory.
        #[arg(long)]
        results: Option<PathBuf>,
        #[arg(long)]
        delta: Option<f64>,
    },
}

#[derive(Args)]
struct Inputs {
    /// Labeled CSV, or the directory `ingest` wrote it to.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Model bundle, or the directory `train` wrote it to.
    #[arg(long)]
    models: Option<PathBuf>,
}

#[derive(Args)]
struct DeArgs {
    #[arg(long)]
    n_pop: Option<usize>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long = "F")]
    f: Option<f64>,
    #[arg(long = "Cr")]
    cr: Option<f64>,
    /// rand/1 or current-to-rand/1.
    #[arg(long)]
    strategy: Option<Strategy>,
    /// Share of the population drawn from the fitted mixture.
    #[arg(long = "Ic")]
    ic: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
}

impl DeArgs {
    fn apply(&self, base: &DEConfig, seed: Option<u64>) -> DEConfig {
        let b = base.clone();
        DEConfig {
            n_pop: self.n_pop.unwrap_or(b.n_pop),
            max_iter: self.max_iter.unwrap_or(b.max_iter),
            f: self.f.unwrap_or(b.f),
            cr: self.cr.unwrap_or(b.cr),
            strategy: self.strategy.unwrap_or(b.strategy),
            ic: self.ic.unwrap_or(b.ic),
            delta: self.delta.unwrap_or(b.delta),
            seed: seed.unwrap_or(b.seed),
        }
    }
}

fn required(flag: Option<&PathBuf>, fallback: Option<&PathBuf>, name: &str) -> Result<PathBuf> {
    flag.or(fallback)
        .cloned()
        .ok_or_else(|| Error::InvalidConfig(format!("--{name} is required (or set it under [paths])")))
}

/// A directory stands for the default file inside it.
fn file_in(path: PathBuf, default: &str) -> PathBuf {
    if path.is_dir() {
        path.join(default)
    } else {
        path
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => HarnessConfig::load(p)?,
        None => HarnessConfig::default(),
    };
    let out = cli
        .out
        .clone()
        .or(cfg.paths.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let data = |flag: Option<&PathBuf>| required(flag, cfg.paths.data.as_ref(), "data");
    let labeled = |flag: Option<&PathBuf>| data(flag).map(|p| file_in(p, LABELED_FILE));
    let models =
        |flag: Option<&PathBuf>| required(flag, cfg.paths.models.as_ref(), "models").map(|p| file_in(p, MODELS_FILE));

    match &cli.command {
        Command::Synth { n_extrusions } => {
            let mut spec = cfg.synth.clone();
            spec.n_extrusions = n_extrusions.unwrap_or(spec.n_extrusions);
            spec.seed = cli.seed.unwrap_or(spec.seed);
            let (signals, truth) = (out.join("signals"), out.join("truth"));
            let gt = generate_history(&spec, &signals, &truth)?;
            println!("{} extrusions -> {}", gt.extrusions.len(), signals.display());
            println!("ground truth -> {}", truth.join(GROUND_TRUTH_FILE).display());
            for p in &gt.products {
                if let Some(o) = &p.optimum {
                    println!("{}: y* = {:.3} s at {:?}", p.name, o.y, o.x);
                }
            }
        }
        Command::Ingest { data: d } => {
            let dir = data(d.as_ref())?;
            let d = cmd_ingest(&dir, &out)?.diagnostics;
            println!(
                "{} extrusions labeled from {} segments ({} degenerate windows, {} warnings)",
                d.n_labeled, d.n_segments, d.degenerate_windows, d.warnings
            );
            for (class, n) in &d.class_counts {
                println!("class {class}: {n} ({:.1}%)", 100.0 * d.class_frequencies[class]);
            }
        }
        Command::Train { data: d } => {
            let mut train = cfg.train.clone();
            train.seed = cli.seed.unwrap_or(train.seed);
            let report = cmd_train(&labeled(d.as_ref())?, &train, &out)?;
            println!(
                "rows {} (train {}, holdout {}), classes {:?}",
                report.n_rows, report.n_train, report.n_holdout, report.class_counts
            );
            println!(
                "classifier macro-F1: train {:.3}, holdout {:.3}",
                report.classifier.train_f1, report.classifier.holdout_f1
            );
            println!(
                "regressor Kendall tau: train {:.3}, holdout {:.3}",
                report.regressor.train_kendall, report.regressor.holdout_kendall
            );
        }
        Command::Optimize { inputs, product, de } => {
            let de_cfg = de.apply(&cfg.optimize, cli.seed);
            let h = cmd_optimize(
                &models(inputs.models.as_ref())?,
                &labeled(inputs.data.as_ref())?,
                product,
                &de_cfg,
                &out,
            )?;
            println!(
                "best fitness {:.4} s after {} iterations",
                h.final_best(),
                de_cfg.max_iter
            );
            if let Some(seed_best) = h.historical_seed_best {
                println!("best historical seed {seed_best:.4} s");
            }
            println!("decision {:?}", h.final_best_individual());
        }
        Command::Experiment {
            inputs,
            product,
            de,
            jobs,
            repetitions,
        } => {
            let mut exp_cfg = cfg.experiment.clone();
            if !product.is_empty() {
                exp_cfg.products = product.clone();
            }
            exp_cfg.jobs = jobs.unwrap_or(exp_cfg.jobs);
            exp_cfg.repetitions = repetitions.unwrap_or(exp_cfg.repetitions);
            let mut base = de.apply(&cfg.optimize, cli.seed);
            base.max_iter = de.max_iter.or(exp_cfg.default_max_iter()).unwrap_or(base.max_iter);
            let exp = cmd_experiment(
                &models(inputs.models.as_ref())?,
                &labeled(inputs.data.as_ref())?,
                &base,
                &exp_cfg,
                &out,
            )?;
            let failed = exp.failures();
            println!("{} runs, {} failed", exp.records.len(), failed);
            for p in experiment_outputs(&out) {
                println!("-> {}", p.display());
            }
        }
        Command::Report { inputs, results, delta } => {
            let results = required(results.as_ref(), cfg.paths.results.as_ref(), "results")?;
            let delta = delta.unwrap_or(cfg.optimize.delta);
            let report = cmd_report(
                &file_in(results, RESULTS_FILE),
                &labeled(inputs.data.as_ref())?,
                &models(inputs.models.as_ref())?,
                delta,
                &out,
            )?;
            println!("product  baseline  best_hist  optimized  reduction");
            for p in &report.products {
                println!(
                    "{:<8} {:>8.2} {:>10.2} {:>10.2} {:>9.1}%",
                    p.product,
                    p.baseline,
                    p.best_historical,
                    p.optimized,
                    100.0 * p.reduction
                );
            }
            if let Some(m) = report.mean_reduction {
                println!("mean reduction {:.1}%", 100.0 * m);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
