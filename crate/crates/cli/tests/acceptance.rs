//! Acceptance suite. Runs every criterion in order, prints one PASS/FAIL line
//! each and exits non-zero if any failed. Criteria run sequentially so the
//! wall-clock limits are not skewed by each other.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use ddde_core::de::{multi_level_penalty, run_from, DEConfig, SearchSpace};
use ddde_core::harness::{
    experiment_grid, optimize_product, run_experiment, train_surrogates, ExperimentConfig, TrainConfig, BOXPLOT_FILE,
    CONVERGENCE_FILE, RESULTS_FILE,
};
use ddde_core::init::{fit_gmm_em, get_n_samples, InitConfig};
use ddde_core::signal::io::write_labeled_csv;
use ddde_core::signal::{compute_steadiness_time, label_signals, Class, LabeledExtrusion, SteadinessConfig};
use ddde_core::surrogate::{
    f1_score, kendall_tau, smote_oversample, tomek_undersample, train_objective_regressor, BoostParams, ClassDataset,
    Dataset, Surrogates,
};
use ddde_core::synth::{simulate, PlantSpec, SyntheticPlant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// The synthetic plant, its labeled history and surrogates trained once for
/// every criterion that needs them.
struct Fixture {
    plant: SyntheticPlant,
    rows: Vec<LabeledExtrusion>,
    models: Surrogates<f64>,
    dir: tempfile::TempDir,
}

impl Fixture {
    fn build() -> Self {
        let plant = simulate(&PlantSpec::default()).expect("plant");
        let rows = label_signals(&plant.signals, &plant.manifest.roles)
            .expect("labels")
            .extrusions;
        let cfg = TrainConfig {
            forest_candidates: 0,
            boost_candidates: 0,
            boost: BoostParams {
                gamma: 0.0,
                ..BoostParams::default()
            },
            ..TrainConfig::default()
        };
        let (models, _) = train_surrogates(&rows, &cfg).expect("surrogates");
        let dir = tempfile::tempdir().expect("tempdir");
        write_labeled_csv(&dir.path().join("labeled.csv"), &rows).expect("labeled csv");
        models.save(&dir.path().join("surrogates.json")).expect("models");
        Fixture {
            plant,
            rows,
            models,
            dir,
        }
    }

    fn products(&self) -> Vec<String> {
        self.plant.truth.products.iter().map(|p| p.name.clone()).collect()
    }
}

// 1. Steadiness labeler against a literal four-step reimplementation.

fn brute_steadiness(series: &[f64], setpoint: f64) -> Option<f64> {
    let lo = setpoint - 0.01 * setpoint;
    let hi = setpoint + 0.01 * setpoint;
    let n_windows = series.len() - 4;
    let mut rmse = vec![0.0; n_windows];
    let mut inside = vec![false; n_windows];
    for start in 0..n_windows {
        let mut ss = 0.0;
        let mut all_in = true;
        for k in 0..5 {
            let v = series[start + k];
            ss += (v - setpoint) * (v - setpoint);
            all_in &= v >= lo && v <= hi;
        }
        rmse[start] = (ss / 5.0).sqrt();
        inside[start] = all_in;
    }
    let mut threshold = f64::NEG_INFINITY;
    for start in 0..n_windows {
        if inside[start] && rmse[start] > threshold {
            threshold = rmse[start];
        }
    }
    if threshold == f64::NEG_INFINITY {
        return None;
    }
    for start in 0..n_windows {
        if rmse[start] < threshold {
            return Some((start + 4) as f64);
        }
    }
    for start in 0..n_windows {
        if rmse[start] <= threshold {
            return Some((start + 4) as f64);
        }
    }
    unreachable!()
}

fn profilometer_series(rng: &mut ChaCha8Rng) -> (Vec<f64>, f64) {
    let setpoint = rng.random_range(5.0..40.0);
    let len = rng.random_range(5..400);
    let amp = setpoint * rng.random_range(0.0..0.4);
    let decay = rng.random_range(0.005..0.2);
    let period = rng.random_range(4.0..40.0);
    let noise = setpoint * rng.random_range(0.0..0.006);
    let offset = if rng.random_bool(0.15) { setpoint * 0.03 } else { 0.0 };
    let series = (0..len)
        .map(|t| {
            let t = t as f64;
            let osc = amp * (-decay * t).exp() * (std::f64::consts::TAU * t / period).cos();
            let eps = noise * (rng.random::<f64>() * 2.0 - 1.0);
            if rng.random_bool(0.02) {
                setpoint
            } else {
                setpoint + offset + osc + eps
            }
        })
        .collect();
    (series, setpoint)
}

fn criterion_1() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let cases: Vec<(Vec<f64>, f64)> = (0..100).map(|_| profilometer_series(&mut rng)).collect();
    let cfg = SteadinessConfig::default();
    let t0 = Instant::now();
    let got: Vec<Option<f64>> = cases
        .iter()
        .map(|(s, sp)| compute_steadiness_time(s, *sp, &cfg).expect("valid series"))
        .collect();
    let elapsed = t0.elapsed().as_secs_f64();
    let mut absent = 0;
    for (i, ((s, sp), g)) in cases.iter().zip(&got).enumerate() {
        let want = brute_steadiness(s, *sp);
        ensure(*g == want, || format!("series {i}: labeler {g:?}, oracle {want:?}"))?;
        absent += usize::from(want.is_none());
    }
    ensure(elapsed < 5.0, || format!("took {elapsed:.3} s"))?;
    Ok(format!(
        "100/100 series identical ({absent} never steady), {elapsed:.4} s (limit 5 s)"
    ))
}

// 2. Penalty values and dominance over a full run.

fn criterion_2(fx: &Fixture) -> Check {
    let cases = [
        (
            multi_level_penalty(10.0, Class::NotSteady, 1.0, 0.5).fitness,
            1350.0,
            "g=2, y=10",
        ),
        (
            multi_level_penalty(2.0, Class::Cut, 1.0, 0.5).fitness,
            2560.0,
            "g=3, y=2",
        ),
        (
            multi_level_penalty(10.0, Class::Steady, 20.0, 0.5).fitness,
            30.0,
            "g=1, t_set=20 >= 1.5*10",
        ),
    ];
    for (got, want, label) in cases {
        ensure(got == want, || format!("{label}: {got} != {want}"))?;
    }

    let product = &fx.products()[0];
    let space = ok(SearchSpace::from_history(&fx.rows, product))?;
    let cfg = DEConfig::default();
    let pop = ok(get_n_samples(
        &fx.rows,
        &space,
        &InitConfig::new(product.as_str(), cfg.n_pop, cfg.ic, cfg.seed),
    ))?;
    let bound = ok(fx.models.bind(&space.context))?;
    let (mut checked, mut skipped, mut violations, mut max_ratio) = (0, 0, 0, 0.0f64);
    ok(run_from(&cfg, &pop, &space, &bound, &mut |g| {
        let mut evals: Vec<_> = g.evaluations.to_vec();
        if let Some((_, t)) = g.trials {
            evals.extend_from_slice(t);
        }
        let lo = evals.iter().map(|e| e.raw).fold(f64::INFINITY, f64::min);
        let hi = evals.iter().map(|e| e.raw).fold(0.0, f64::max);
        let ratio = hi / lo;
        max_ratio = max_ratio.max(ratio);
        if ratio >= 135.0 {
            skipped += 1;
            return;
        }
        checked += 1;
        let worst_feasible = evals
            .iter()
            .filter(|e| e.is_feasible())
            .map(|e| e.fitness)
            .fold(f64::NEG_INFINITY, f64::max);
        let best_infeasible = evals
            .iter()
            .filter(|e| e.class != Class::Steady)
            .map(|e| e.penalized)
            .fold(f64::INFINITY, f64::min);
        if best_infeasible <= worst_feasible {
            violations += 1;
        }
    }))?;
    ensure(violations == 0, || {
        format!("dominance broken at {violations} iterations")
    })?;
    ensure(checked == cfg.max_iter + 1, || {
        format!(
            "only {checked} of {} iterations had range ratio < 135",
            cfg.max_iter + 1
        )
    })?;
    Ok(format!(
        "1350 / 2560 / t_set+10 exact; dominance held at {checked} iterations of {product} (max range ratio {max_ratio:.2}, {skipped} skipped)"
    ))
}

// 3. Elitism over the full strategy grid.

fn criterion_3(fx: &Fixture) -> Check {
    let base = DEConfig {
        n_pop: 30,
        max_iter: 100,
        ..DEConfig::default()
    };
    let cfg = ExperimentConfig {
        repetitions: 10,
        max_iter_set: vec![100],
        ..ExperimentConfig::default()
    };
    let t0 = Instant::now();
    let exp = ok(run_experiment(&fx.models, &fx.rows, &base, &cfg))?;
    let elapsed = t0.elapsed().as_secs_f64();
    let expected = 18 * 10 * fx.products().len();
    ensure(exp.records.len() == expected, || {
        format!("{} runs, expected {expected}", exp.records.len())
    })?;
    ensure(exp.failures() == 0, || format!("{} runs failed", exp.failures()))?;
    let mut violations = 0;
    for (rec, h) in exp.histories() {
        let curve_ok = h.best_fitness.len() == base.max_iter + 1 && h.best_fitness.windows(2).all(|w| w[1] <= w[0]);
        let final_min = h
            .final_evaluations
            .iter()
            .map(|e| e.fitness)
            .fold(f64::INFINITY, f64::min);
        if !curve_ok || final_min != h.final_best() {
            violations += 1;
            eprintln!("elitism violated in {}", rec.run_id());
        }
    }
    ensure(violations == 0, || format!("{violations} runs violate elitism"))?;
    ensure(elapsed < 600.0, || format!("grid took {elapsed:.1} s"))?;
    Ok(format!(
        "{expected} runs, 0 violations (tolerance 0), best retained in every final population, {elapsed:.1} s (limit 600 s)"
    ))
}

// 4. Initialization split.

fn criterion_4(fx: &Fixture) -> Check {
    let product = fx
        .products()
        .into_iter()
        .max_by_key(|p| {
            fx.rows
                .iter()
                .filter(|r| r.product() == p && r.class == Class::Steady)
                .count()
        })
        .expect("products");
    let space: SearchSpace<f64> = ok(SearchSpace::from_history(&fx.rows, &product))?;
    let mut steady: Vec<&LabeledExtrusion> = fx
        .rows
        .iter()
        .filter(|r| r.product() == product && r.class == Class::Steady)
        .collect();
    steady.sort_by(|a, b| {
        a.steadiness_time
            .partial_cmp(&b.steadiness_time)
            .expect("finite")
            .then(a.start_time.cmp(&b.start_time))
    });
    let best_vectors: Vec<Vec<f64>> = steady.iter().map(|r| r.search_point.decision_vector()).collect();

    let pop = ok(get_n_samples(
        &fx.rows,
        &space,
        &InitConfig::new(product.as_str(), 100, 0.25, 0),
    ))?;
    ensure(pop.density().len() == 25 && pop.historical().len() == 75, || {
        format!(
            "Ic=0.25 gave {} density + {} historical",
            pop.density().len(),
            pop.historical().len()
        )
    })?;
    ensure(pop.historical() == &best_vectors[..75], || {
        "historical part is not the 75 best rows".into()
    })?;
    ensure(pop.density().iter().all(|x| space.bounds.contains(x)), || {
        "density draw outside bounds".into()
    })?;

    let pop0 = ok(get_n_samples(
        &fx.rows,
        &space,
        &InitConfig::new(product.as_str(), 100, 0.0, 0),
    ))?;
    ensure(pop0.n_density == 0 && pop0.individuals == best_vectors[..100], || {
        "Ic=0 population is not the 100 best class-1 rows".into()
    })?;
    Ok(format!(
        "product {product}: Ic=0.25 -> 25 density + 75 best historical; Ic=0 -> exactly the 100 best class-1 rows"
    ))
}

// 5. End-to-end improvement against the ground truth.

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn criterion_5(fx: &Fixture) -> Check {
    let mut parts = Vec::new();
    let mut failures = Vec::new();
    for product in fx.products() {
        let truth = fx.plant.truth.product(&product).map_err(|e| e.to_string())?;
        let y_star = truth.optimum.as_ref().ok_or("no certified optimum")?.y;
        let (mut best, mut true_at_best, mut seed_values) = (Vec::new(), Vec::new(), Vec::new());
        for seed in 0..10 {
            let cfg = DEConfig {
                n_pop: 50,
                max_iter: 300,
                seed,
                ..DEConfig::default()
            };
            let (h, _) = ok(optimize_product(&fx.models, &fx.rows, &product, &cfg))?;
            best.push(h.final_best());
            true_at_best.push(ok(fx.plant.truth.y_star(&product, h.final_best_individual()))?);
            seed_values.push(h.historical_seed_best.ok_or("no historical seeds")?);
        }
        let seed_best = seed_values.iter().copied().fold(f64::INFINITY, f64::min);
        let med = median(best);
        let rel = med / y_star - 1.0;
        parts.push(format!(
            "{product}: median {med:.3} vs seed {seed_best:.3}, y* {y_star:.3} ({:+.1}%), true y at x_opt {:.3}",
            100.0 * rel,
            median(true_at_best)
        ));
        if !(med < seed_best) {
            failures.push(format!("{product} median {med:.4} not below seed value {seed_best:.4}"));
        }
        if rel.abs() > 0.20 {
            failures.push(format!("{product} median {med:.4} is {:+.1}% from y*", 100.0 * rel));
        }
    }
    ensure(failures.is_empty(), || {
        format!("{}; {}", failures.join("; "), parts.join("; "))
    })?;
    Ok(format!("strictly below seed, within 20% of y*: {}", parts.join("; ")))
}

// 6. Metric oracles.

fn brute_tau_b(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len();
    let (mut conc, mut disc, mut tie_a, mut tie_b) = (0u64, 0u64, 0u64, 0u64);
    for i in 0..n {
        for j in i + 1..n {
            let da = a[i] - a[j];
            let db = b[i] - b[j];
            if da == 0.0 {
                tie_a += 1;
            }
            if db == 0.0 {
                tie_b += 1;
            }
            if da != 0.0 && db != 0.0 {
                if (da > 0.0) == (db > 0.0) {
                    conc += 1;
                } else {
                    disc += 1;
                }
            }
        }
    }
    let n0 = (n * (n - 1) / 2) as u64;
    if tie_a == n0 || tie_b == n0 {
        return None;
    }
    Some((conc as f64 - disc as f64) / (((n0 - tie_a) as f64) * ((n0 - tie_b) as f64)).sqrt())
}

fn brute_macro_f1(pred: &[Class], truth: &[Class]) -> f64 {
    let mut scores = Vec::new();
    for c in Class::ALL {
        let tp = pred.iter().zip(truth).filter(|(p, t)| **p == c && **t == c).count() as f64;
        let predicted = pred.iter().filter(|p| **p == c).count() as f64;
        let actual = truth.iter().filter(|t| **t == c).count() as f64;
        if predicted == 0.0 && actual == 0.0 {
            continue;
        }
        let precision = if predicted > 0.0 { tp / predicted } else { 0.0 };
        let recall = if actual > 0.0 { tp / actual } else { 0.0 };
        scores.push(if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        });
    }
    scores.iter().sum::<f64>() / scores.len() as f64
}

fn criterion_6() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let (mut tied_cases, mut undefined) = (0, 0);
    for i in 0..1000 {
        let n = rng.random_range(2..120);
        let levels = [0, 2, 3, 5, 10][i % 5];
        let draw = |rng: &mut ChaCha8Rng| -> f64 {
            if levels == 0 {
                rng.random_range(-1.0..1.0)
            } else {
                rng.random_range(0..levels) as f64
            }
        };
        let a: Vec<f64> = (0..n).map(|_| draw(&mut rng)).collect();
        let b: Vec<f64> = (0..n).map(|_| draw(&mut rng)).collect();
        tied_cases += usize::from(levels > 0);
        match (kendall_tau(&a, &b).ok(), brute_tau_b(&a, &b)) {
            (Some(x), Some(y)) => ensure(x == y, || format!("case {i}: tau {x} vs pair enumeration {y}"))?,
            (None, None) => undefined += 1,
            (x, y) => return Err(format!("case {i}: tau {x:?} vs pair enumeration {y:?}")),
        }
    }
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let n = rng.random_range(1..200);
        let skew = rng.random_range(0.0..1.0);
        let label = |rng: &mut ChaCha8Rng| {
            if rng.random_bool(skew) {
                Class::Cut
            } else {
                Class::ALL[rng.random_range(0..3)]
            }
        };
        let truth: Vec<Class> = (0..n).map(|_| label(&mut rng)).collect();
        let pred: Vec<Class> = (0..n).map(|_| label(&mut rng)).collect();
        let got = ok(f1_score(&pred, &truth))?;
        let want = brute_macro_f1(&pred, &truth);
        worst = worst.max((got - want).abs());
        ensure((got - want).abs() <= 1e-12, || {
            format!("label set {i}: F1 {got} vs {want}")
        })?;
    }
    Ok(format!(
        "tau-b identical to pair enumeration on 1000 vectors ({tied_cases} with ties, {undefined} undefined in both); macro-F1 max deviation {worst:.1e} on 1000 label sets (tolerance 1e-12)"
    ))
}

// 7. EM monotonicity.

fn criterion_7() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut worst_drop = 0.0f64;
    let mut iterations = 0;
    for fit in 0..50 {
        let d = rng.random_range(1..5);
        let true_k = rng.random_range(1..5);
        let n = rng.random_range(150..500);
        let centres: Vec<Vec<f64>> = (0..true_k)
            .map(|_| (0..d).map(|_| rng.random_range(-5.0..5.0)).collect())
            .collect();
        let data: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let c = &centres[rng.random_range(0..true_k)];
                let scale = rng.random_range(0.3..1.5);
                c.iter()
                    .map(|m| m + scale * (rng.random::<f64>() + rng.random::<f64>() + rng.random::<f64>() - 1.5))
                    .collect()
            })
            .collect();
        let k = rng.random_range(1..6);
        let (_, trace) = ok(fit_gmm_em(&data, k, fit))?;
        iterations += trace.log_likelihood.len();
        for w in trace.log_likelihood.windows(2) {
            worst_drop = worst_drop.max(w[0] - w[1]);
            ensure(w[1] >= w[0] - 1e-9, || {
                format!("fit {fit}: log-likelihood {} -> {}", w[0], w[1])
            })?;
        }
    }
    Ok(format!(
        "50 fits, {iterations} EM iterations, largest decrease {worst_drop:.1e} (tolerance 1e-9)"
    ))
}

// 8. Resampling properties.

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Distance from `p` to the segment `a`–`b`, with the segment parameter.
fn segment_distance(p: &[f64], a: &[f64], b: &[f64]) -> (f64, f64) {
    let ab: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let len2: f64 = ab.iter().map(|v| v * v).sum();
    let u = if len2 == 0.0 {
        0.0
    } else {
        p.iter().zip(a).zip(&ab).map(|((p, a), d)| (p - a) * d).sum::<f64>() / len2
    };
    let u = u.clamp(0.0, 1.0);
    let q: Vec<f64> = a.iter().zip(&ab).map(|(a, d)| a + u * d).collect();
    (sq_dist(p, &q).sqrt(), u)
}

fn random_imbalanced(rng: &mut ChaCha8Rng) -> ClassDataset<f64> {
    let d = rng.random_range(1..5);
    let sizes = [
        rng.random_range(60..150),
        rng.random_range(6..40),
        rng.random_range(6..40),
    ];
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (c, &size) in Class::ALL.iter().zip(&sizes) {
        let centre: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
        for _ in 0..size {
            x.push(centre.iter().map(|m| m + rng.random_range(-1.5..1.5)).collect());
            y.push(*c);
        }
    }
    Dataset::new(x, y).expect("dataset")
}

fn criterion_8() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let k = 5;
    let (mut synthetic, mut removed) = (0, 0);
    let mut worst = 0.0f64;
    for case in 0..100 {
        let data = random_imbalanced(&mut rng);
        let counts = data.class_counts();
        let majority = *counts.iter().max().expect("classes");
        let out = ok(smote_oversample(&data, None, k, &mut rng))?;
        ensure(out.class_counts() == [majority; 3], || {
            format!("case {case}: counts {:?} after SMOTE", out.class_counts())
        })?;
        ensure(
            out.x[..data.len()] == data.x[..] && out.y[..data.len()] == data.y[..],
            || format!("case {case}: original rows changed"),
        )?;
        for (p, c) in out.x[data.len()..].iter().zip(&out.y[data.len()..]) {
            let members: Vec<usize> = (0..data.len()).filter(|&i| data.y[i] == *c).collect();
            let mut best = f64::INFINITY;
            for &a in &members {
                let mut nn: Vec<(f64, usize)> = members
                    .iter()
                    .filter(|&&b| b != a)
                    .map(|&b| (sq_dist(&data.x[a], &data.x[b]), b))
                    .collect();
                nn.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
                for &(_, b) in nn.iter().take(k) {
                    best = best.min(segment_distance(p, &data.x[a], &data.x[b]).0);
                }
            }
            worst = worst.max(best);
            ensure(best <= 1e-9, || {
                format!("case {case}: synthetic point {best:.2e} off every neighbour segment")
            })?;
            synthetic += 1;
        }

        let cleaned = tomek_undersample(&data);
        let majority_class = Class::ALL[(0..3).rev().max_by_key(|&i| counts[i]).expect("classes")];
        for c in Class::ALL.into_iter().filter(|c| *c != majority_class) {
            let before: Vec<&Vec<f64>> = (0..data.len())
                .filter(|&i| data.y[i] == c)
                .map(|i| &data.x[i])
                .collect();
            let after: Vec<&Vec<f64>> = (0..cleaned.len())
                .filter(|&i| cleaned.y[i] == c)
                .map(|i| &cleaned.x[i])
                .collect();
            ensure(before == after, || {
                format!("case {case}: Tomek removed a class {} row", c.code())
            })?;
        }
        removed += data.len() - cleaned.len();
    }
    Ok(format!(
        "100 datasets: counts equalized, {synthetic} synthetic points on neighbour segments (max distance {worst:.1e}, tolerance 1e-9); Tomek removed {removed} rows, none from minority classes"
    ))
}

// 9. Determinism of the experiment subcommand.

fn run_cli_experiment(fx: &Fixture, out: &Path) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_ddde"))
        .args([
            "experiment",
            "--n-pop",
            "20",
            "--max-iter",
            "40",
            "--repetitions",
            "2",
            "--jobs",
            "4",
        ])
        .args(["--seed", "11"])
        .arg("--data")
        .arg(fx.dir.path().join("labeled.csv"))
        .arg("--models")
        .arg(fx.dir.path().join("surrogates.json"))
        .arg("--out")
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(status.status.success(), || {
        format!(
            "experiment exited with {}: {}",
            status.status,
            String::from_utf8_lossy(&status.stderr)
        )
    })
}

fn criterion_9(fx: &Fixture) -> Check {
    let outs: Vec<PathBuf> = ["exp1", "exp2"].iter().map(|d| fx.dir.path().join(d)).collect();
    for out in &outs {
        run_cli_experiment(fx, out)?;
    }
    let mut sizes = Vec::new();
    for file in [RESULTS_FILE, CONVERGENCE_FILE, BOXPLOT_FILE] {
        let a = ok(std::fs::read(outs[0].join(file)))?;
        let b = ok(std::fs::read(outs[1].join(file)))?;
        ensure(a == b, || format!("{file} differs between invocations"))?;
        sizes.push(format!("{file} {} B", a.len()));
    }
    let rows = ok(std::fs::read_to_string(outs[0].join(RESULTS_FILE)))?.lines().count() - 1;
    ensure(rows == 18 * 2 * fx.products().len(), || format!("{rows} result rows"))?;
    Ok(format!(
        "two `ddde experiment` runs byte-identical ({})",
        sizes.join(", ")
    ))
}

// 10. Boosting regression.

fn criterion_10(fx: &Fixture) -> Check {
    let data = ok(fx.models.encoder.regression_dataset::<f64>(&fx.rows))?;
    let mut parts = Vec::new();
    for params in [
        BoostParams::default(),
        BoostParams {
            gamma: 0.0,
            max_depth: 5,
            n_estimators: 150,
            eta: 0.7,
            ..BoostParams::default()
        },
    ] {
        let (_, trace) = ok(train_objective_regressor(&data, &params))?;
        for (i, w) in trace.stage_mse.windows(2).enumerate() {
            ensure(w[1] <= w[0], || format!("stage {}: MSE {} -> {}", i + 1, w[0], w[1]))?;
        }
        parts.push(format!(
            "{} stages {:.4} -> {:.4}",
            params.n_estimators,
            trace.stage_mse[0],
            trace.stage_mse.last().expect("stages")
        ));
    }

    let constant = Dataset::new(data.x.clone(), vec![12.5; data.len()]).map_err(|e| e.to_string())?;
    let (model, _) = ok(train_objective_regressor(&constant, &BoostParams::default()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let mut worst = 0.0f64;
    let probes = data.x.iter().cloned().chain((0..200).map(|_| {
        let row = &data.x[rng.random_range(0..data.len())];
        row.iter().map(|v| v * rng.random_range(0.5..1.5)).collect()
    }));
    for x in probes {
        worst = worst.max((ok(model.predict_objective(&x))? - 12.5).abs());
    }
    ensure(worst <= 1e-9, || format!("constant target off by {worst:.2e}"))?;
    Ok(format!(
        "log-space MSE non-increasing (tolerance 0): {}; constant target max error {worst:.1e} (tolerance 1e-9)",
        parts.join(", ")
    ))
}

fn run_criterion(id: u8, name: &str, f: impl FnOnce() -> Check) -> bool {
    let t0 = Instant::now();
    let outcome = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(r) => r,
        Err(p) => Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into())),
    };
    let secs = t0.elapsed().as_secs_f64();
    match &outcome {
        Ok(detail) => println!("[PASS] {id:>2} {name}: {detail} [{secs:.1} s]"),
        Err(detail) => println!("[FAIL] {id:>2} {name}: {detail} [{secs:.1} s]"),
    }
    outcome.is_ok()
}

fn main() {
    println!("acceptance: building synthetic plant and surrogates");
    let t0 = Instant::now();
    let fx = Fixture::build();
    println!(
        "acceptance: {} extrusions, {} products, fixture ready in {:.1} s",
        fx.rows.len(),
        fx.products().len(),
        t0.elapsed().as_secs_f64()
    );
    assert_eq!(experiment_grid().len(), 18);

    let results = [
        run_criterion(1, "labeler oracle equivalence", criterion_1),
        run_criterion(2, "penalty values and dominance", || criterion_2(&fx)),
        run_criterion(3, "elitism across the strategy grid", || criterion_3(&fx)),
        run_criterion(4, "initialization split", || criterion_4(&fx)),
        run_criterion(5, "end-to-end improvement", || criterion_5(&fx)),
        run_criterion(6, "metric oracles", criterion_6),
        run_criterion(7, "EM monotonicity", criterion_7),
        run_criterion(8, "resampling properties", criterion_8),
        run_criterion(9, "experiment determinism", || criterion_9(&fx)),
        run_criterion(10, "boosting regression", || criterion_10(&fx)),
    ];
    let passed = results.iter().filter(|&&r| r).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
