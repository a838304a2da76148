use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::DEConfig;
use super::operators::{crossover_binomial, dispersion, mutate, select_greedy};
use super::penalty::{fitness, Evaluation, Surrogate};
use super::space::{check_ranges, SearchSpace};
use crate::error::{Error, Result};
use crate::init::{get_n_samples, InitConfig, Population};
use crate::scalar::Scalar;
use crate::signal::LabeledExtrusion;

/// State handed to a run observer after the initial evaluation
/// (`iteration == 0`, no trials) and after every selection step.
pub struct Generation<'a, T: Scalar> {
    pub iteration: usize,
    pub population: &'a [Vec<T>],
    pub evaluations: &'a [Evaluation<T>],
    pub trials: Option<(&'a [Vec<T>], &'a [Evaluation<T>])>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RunHistory<T: Scalar> {
    pub config: DEConfig,
    pub product_type: String,
    /// Best fitness so far; entry 0 is the initial population.
    pub best_fitness: Vec<T>,
    pub best_individual: Vec<Vec<T>>,
    /// Best fitness among feasible, consistent members of the population.
    pub best_feasible_fitness: Vec<Option<T>>,
    pub dispersion: Vec<T>,
    /// Best initial fitness among the best-historical seeds.
    pub historical_seed_best: Option<T>,
    pub n_density: usize,
    pub final_population: Vec<Vec<T>>,
    pub final_evaluations: Vec<Evaluation<T>>,
}

impl<T: Scalar> RunHistory<T> {
    pub fn final_best(&self) -> T {
        *self.best_fitness.last().expect("history has the initial entry")
    }

    pub fn final_best_individual(&self) -> &[T] {
        self.best_individual.last().expect("history has the initial entry")
    }

    pub fn final_best_feasible(&self) -> Option<T> {
        self.best_feasible_fitness.last().copied().flatten()
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Writes `iteration,run_id,best_fitness` rows for every run.
pub fn write_convergence_csv<T: Scalar, W: Write>(out: W, runs: &[(String, &RunHistory<T>)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iteration", "run_id", "best_fitness"])?;
    for (id, h) in runs {
        for (it, f) in h.best_fitness.iter().enumerate() {
            w.write_record([it.to_string(), id.clone(), f.as_f64().to_string()])?;
        }
    }
    w.flush().map_err(|e| Error::io("<convergence csv>", e))?;
    Ok(())
}

fn argmin<T: Scalar>(evals: &[Evaluation<T>]) -> usize {
    (0..evals.len()).fold(0, |b, i| if evals[i].fitness < evals[b].fitness { i } else { b })
}

fn best_feasible<T: Scalar>(evals: &[Evaluation<T>]) -> Option<T> {
    evals
        .iter()
        .filter(|e| e.is_feasible())
        .map(|e| e.fitness)
        .fold(None, |acc, f| Some(acc.map_or(f, |a: T| a.min(f))))
}

/// Initializes from history and runs the optimizer.
pub fn run<T: Scalar, S: Surrogate<T> + ?Sized>(
    cfg: &DEConfig,
    history: &[LabeledExtrusion],
    space: &SearchSpace<T>,
    surrogate: &S,
) -> Result<RunHistory<T>> {
    cfg.validate()?;
    let init = InitConfig::new(space.product_type(), cfg.n_pop, cfg.ic, cfg.seed);
    let pop = get_n_samples(history, space, &init)?;
    run_from(cfg, &pop, space, surrogate, &mut |_| {})
}

/// The optimizer loop from a given initial population: evaluate, then
/// `max_iter` rounds of mutate → crossover → clamp → evaluate → select.
pub fn run_from<T: Scalar, S: Surrogate<T> + ?Sized>(
    cfg: &DEConfig,
    initial: &Population<T>,
    space: &SearchSpace<T>,
    surrogate: &S,
    observer: &mut dyn FnMut(&Generation<T>),
) -> Result<RunHistory<T>> {
    cfg.validate()?;
    if initial.individuals.len() != cfg.n_pop {
        return Err(Error::InvalidConfig(format!(
            "initial population has {} rows, n_pop is {}",
            initial.individuals.len(),
            cfg.n_pop
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let delta = T::of(cfg.delta);
    let f = T::of(cfg.f);

    let mut pop = initial.individuals.clone();
    let mut evals = fitness(&pop, surrogate, space, delta)?;
    let historical_seed_best = evals[..initial.best_ids.len()]
        .iter()
        .map(|e| e.fitness)
        .fold(None, |acc, v| Some(acc.map_or(v, |a: T| a.min(v))));
    observer(&Generation {
        iteration: 0,
        population: &pop,
        evaluations: &evals,
        trials: None,
    });

    let i0 = argmin(&evals);
    let mut h = RunHistory {
        config: cfg.clone(),
        product_type: space.product_type().to_string(),
        best_fitness: vec![evals[i0].fitness],
        best_individual: vec![pop[i0].clone()],
        best_feasible_fitness: vec![best_feasible(&evals)],
        dispersion: vec![dispersion(&pop, &space.scaler)],
        historical_seed_best,
        n_density: initial.n_density,
        final_population: Vec::new(),
        final_evaluations: Vec::new(),
    };

    for it in 1..=cfg.max_iter {
        let donors = mutate(&pop, f, cfg.strategy, &mut rng)?;
        let trials = check_ranges(&crossover_binomial(&pop, &donors, cfg.cr, &mut rng), &space.bounds);
        let trial_evals = fitness(&trials, surrogate, space, delta)?;
        let keep: Vec<bool> = trial_evals
            .iter()
            .zip(&evals)
            .map(|(u, x)| u.fitness < x.fitness)
            .collect();
        let f_pop: Vec<T> = evals.iter().map(|e| e.fitness).collect();
        let f_trial: Vec<T> = trial_evals.iter().map(|e| e.fitness).collect();
        let (next, _) = select_greedy(&pop, &trials, &f_pop, &f_trial);
        let next_evals: Vec<Evaluation<T>> = keep
            .iter()
            .zip(trial_evals.iter().zip(&evals))
            .map(|(&k, (u, x))| if k { *u } else { *x })
            .collect();
        observer(&Generation {
            iteration: it,
            population: &next,
            evaluations: &next_evals,
            trials: Some((&trials, &trial_evals)),
        });
        pop = next;
        evals = next_evals;

        let i = argmin(&evals);
        let prev = *h.best_fitness.last().expect("initial entry");
        if evals[i].fitness < prev {
            h.best_fitness.push(evals[i].fitness);
            h.best_individual.push(pop[i].clone());
        } else {
            h.best_fitness.push(prev);
            let b = h.best_individual.last().expect("initial entry").clone();
            h.best_individual.push(b);
        }
        let feasible_now = best_feasible(&evals);
        let feasible_prev = *h.best_feasible_fitness.last().expect("initial entry");
        h.best_feasible_fitness.push(match (feasible_prev, feasible_now) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        });
        h.dispersion.push(dispersion(&pop, &space.scaler));
    }
    h.final_population = pop;
    h.final_evaluations = evals;
    Ok(h)
}
