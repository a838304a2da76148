use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use super::truth::{effective_coords, grid_minimum, ClassRule, Landscape, Optimum, Well, N_EXTRUDERS, PROPERTIES};
use crate::error::{Error, Result};
use crate::signal::io::{write_signal, Manifest, SignalSpec, MANIFEST_FILE};
use crate::signal::{Class, FeatureRoles, PlantRoles, PropertyStats, RawSignal, Sample, SignalKind};

pub const GROUND_TRUTH_FILE: &str = "ground_truth.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductProfile {
    pub name: String,
    pub weight: f64,
    pub usage: [bool; N_EXTRUDERS],
    /// Profilometer setpoint.
    pub setpoint: f64,
    pub die: String,
    pub materials: Vec<String>,
    /// Centre of the historical operating points, normalised.
    pub nominal: [f64; 4],
    pub landscape: Landscape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlantSpec {
    pub n_extrusions: usize,
    pub products: Vec<ProductProfile>,
    /// Target frequencies of classes 1, 2, 3.
    pub class_mix: [f64; 3],
    /// Log-space standard deviation of the observed steadiness time.
    pub noise_sigma: f64,
    /// Spread of operating points around each product's nominal, normalised.
    pub spread: f64,
    pub quality_spread: f64,
    pub die_weight: f64,
    /// Inclusive range of stoppage-window lengths in seconds.
    pub stoppage_ticks: (usize, usize),
    /// Points per axis for the certified optimum.
    pub grid_resolution: usize,
    pub seed: u64,
}

/// Wells shared by every product on the line, as `(centre, width, depth)`.
const LINE_WELLS: [([f64; 4], [f64; 4], f64); 3] = [
    ([0.45, -0.30, -0.35, 0.30], [0.90, 1.10, 1.50, 1.70], 0.75),
    ([-0.55, 0.50, 0.45, -0.40], [0.80, 0.90, 1.40, 1.60], 0.50),
    ([0.35, 0.75, -0.55, -0.65], [0.70, 0.80, 1.20, 1.40], 0.40),
];

/// The line wells moved by `shift` and deepened by `depth_scale`.
fn line_landscape(shift: [f64; 4], depth_scale: f64) -> Landscape {
    Landscape::Wells {
        base: 10.0,
        span: 30.0,
        interaction: 5.0,
        wells: LINE_WELLS
            .iter()
            .map(|&(c, width, depth)| Well {
                centre: std::array::from_fn(|d| c[d] + shift[d]),
                width,
                depth: depth * depth_scale,
            })
            .collect(),
    }
}

impl Default for PlantSpec {
    fn default() -> Self {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        PlantSpec {
            n_extrusions: 2000,
            products: vec![
                ProductProfile {
                    name: "A".into(),
                    weight: 0.697,
                    usage: [true, true, true, false, false],
                    setpoint: 12.0,
                    die: "D-A".into(),
                    materials: s(&["EPDM-1", "EPDM-2"]),
                    nominal: [-0.05, 0.0, -0.05, 0.0],
                    landscape: line_landscape([0.0; 4], 1.0),
                },
                ProductProfile {
                    name: "B".into(),
                    weight: 0.196,
                    usage: [true, true, false, true, false],
                    setpoint: 8.5,
                    die: "D-B".into(),
                    materials: s(&["EPDM-2", "NBR-1"]),
                    nominal: [-0.15, 0.10, 0.15, -0.15],
                    landscape: line_landscape([-0.10, 0.10, 0.10, -0.05], 0.9),
                },
                ProductProfile {
                    name: "C".into(),
                    weight: 0.107,
                    usage: [true, false, true, false, true],
                    setpoint: 15.0,
                    die: "D-C".into(),
                    materials: s(&["NBR-1"]),
                    nominal: [-0.05, 0.15, -0.05, 0.0],
                    landscape: line_landscape([0.10, 0.05, -0.10, 0.10], 1.1),
                },
            ],
            class_mix: [0.33, 0.074, 0.596],
            noise_sigma: 0.1,
            spread: 0.3,
            quality_spread: 0.6,
            die_weight: 0.6,
            stoppage_ticks: (20, 40),
            grid_resolution: 41,
            seed: 0,
        }
    }
}

impl PlantSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.products.is_empty() {
            return bad("plant has no products");
        }
        let wsum: f64 = self.products.iter().map(|p| p.weight).sum();
        if self.products.iter().any(|p| p.weight < 0.0) || (wsum - 1.0).abs() > 1e-6 {
            return bad("product mix must be a probability vector");
        }
        if self.class_mix.iter().any(|&p| p < 0.0) || (self.class_mix.iter().sum::<f64>() - 1.0).abs() > 1e-6 {
            return bad("class mix must be a probability vector");
        }
        if self
            .products
            .iter()
            .any(|p| !p.usage[0] || p.materials.is_empty() || !(p.setpoint > 0.0))
        {
            return bad("every product uses the commander extruder, has a material and a positive setpoint");
        }
        if self.stoppage_ticks.0 < 2 || self.stoppage_ticks.0 > self.stoppage_ticks.1 {
            return bad("stoppage windows need at least 2 ticks");
        }
        Ok(())
    }
}

/// What the generator did for one extrusion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectedExtrusion {
    pub id: usize,
    pub product: String,
    /// Tick at which the commander leaves zero.
    pub start_time: i64,
    pub class: Class,
    /// Decision vector as the pipeline will extract it.
    pub decision: Vec<f64>,
    pub y_star: f64,
    /// Observed steadiness time in seconds (class 1 only).
    pub steadiness_time: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductTruth {
    pub name: String,
    pub landscape: Landscape,
    /// Box spanned by the product's history in normalised effective coordinates.
    pub lower: [f64; 4],
    pub upper: [f64; 4],
    pub optimum: Option<Optimum>,
}

/// Hidden record of the synthetic plant; never read by the optimizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub spec: PlantSpec,
    pub class_rule: ClassRule,
    pub products: Vec<ProductTruth>,
    pub extrusions: Vec<InjectedExtrusion>,
}

impl GroundTruth {
    pub fn product(&self, name: &str) -> Result<&ProductTruth> {
        self.products
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown product `{name}`")))
    }

    /// Noise-free steadiness time of a decision vector.
    pub fn y_star(&self, product: &str, decision: &[f64]) -> Result<f64> {
        Ok(self.product(product)?.landscape.value(&effective_coords(decision)))
    }

    pub fn class_of(&self, decision: &[f64]) -> Class {
        self.class_rule.class_of(decision)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Grid minimiser of the product's landscape over its historical box.
pub fn true_optimum(truth: &GroundTruth, product: &str, resolution: usize) -> Result<Optimum> {
    let p = truth.product(product)?;
    if p.lower.iter().zip(&p.upper).any(|(l, u)| l > u) {
        return Err(Error::InsufficientData(format!("product `{product}` has no history")));
    }
    Ok(grid_minimum(&p.landscape, p.lower, p.upper, resolution))
}

/// Generated plant held in memory.
#[derive(Debug, Clone)]
pub struct SyntheticPlant {
    pub manifest: Manifest,
    pub signals: Vec<RawSignal>,
    pub truth: GroundTruth,
}

fn normal<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Per-extrusion draws that fix the stoppage window.
struct Draft {
    product: usize,
    stop_len: usize,
    /// Property samples at offsets from the stoppage start.
    property_samples: Vec<Vec<(f64, f64)>>,
    material: String,
    material_offset: f64,
    /// Per extruder `(target, ramp ticks, delay)`.
    ramps: Vec<Option<(f64, usize, usize)>>,
    decision: Vec<f64>,
}

fn held_series(samples: &[(f64, f64)], len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut k = 0;
    let mut cur = f64::NAN;
    for tick in 0..len {
        while k < samples.len() && samples[k].0.floor() as usize <= tick {
            cur = samples[k].1;
            k += 1;
        }
        out.push(cur);
    }
    out
}

fn draft<R: Rng>(spec: &PlantSpec, prev_material: Option<&str>, rng: &mut R) -> Draft {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut product = spec.products.len() - 1;
    for (i, p) in spec.products.iter().enumerate() {
        acc += p.weight;
        if u < acc {
            product = i;
            break;
        }
    }
    let prof = &spec.products[product];
    let stop_len = rng.random_range(spec.stoppage_ticks.0..=spec.stoppage_ticks.1);
    let z: [f64; 4] = std::array::from_fn(|d| (prof.nominal[d] + spec.spread * normal(rng)).clamp(-1.3, 1.3));
    let f = (spec.quality_spread * normal(rng)).clamp(-2.5, 2.5);
    let e = (spec.quality_spread * normal(rng)).clamp(-2.5, 2.5);
    // pressure_barrel, pressure_die, temp_feed, temp_barrel, temp_die
    let levels = [
        150.0 + 50.0 * z[2],
        80.0 + 20.0 * e,
        60.0 + 8.0 * f,
        85.0 + 15.0 * z[0],
        95.0 + 15.0 * z[1],
    ];
    let event_gap = Exp::new(1.0 / 2.5).expect("positive rate");
    let property_samples: Vec<Vec<(f64, f64)>> = levels
        .iter()
        .enumerate()
        .map(|(p, &level)| {
            let mut s = Vec::new();
            if p < 2 {
                let mut t: f64 = rng.random();
                while t < stop_len as f64 {
                    s.push((t, level + 0.8 * normal(rng)));
                    t += rng.sample(event_gap);
                }
            } else {
                for t in (0..stop_len).step_by(5) {
                    s.push((t as f64, level + 0.25 * normal(rng)));
                }
            }
            s
        })
        .collect();

    let material = prof.materials[rng.random_range(0..prof.materials.len())].clone();
    let material_offset = if prev_material.is_some() && rng.random::<f64>() < 0.15 {
        (stop_len / 2) as f64
    } else {
        0.0
    };

    let speed = 40.0 + 20.0 * z[3];
    let ramps: Vec<Option<(f64, usize, usize)>> = (0..N_EXTRUDERS)
        .map(|k| {
            if !prof.usage[k] {
                return None;
            }
            let target = if k == 0 {
                speed
            } else {
                speed * (0.5 + 0.1 * k as f64) * (1.0 + 0.05 * normal(rng))
            };
            let accel = rng.random_range(5.0..30.0);
            let ramp = ((target / accel).round() as usize).clamp(1, 12);
            let delay = if k == 0 { 0 } else { rng.random_range(0..=2) };
            Some((target, ramp, delay))
        })
        .collect();

    let mut decision = Vec::with_capacity(3 * PROPERTIES.len() + 2 * N_EXTRUDERS);
    for (p, samples) in property_samples.iter().enumerate() {
        let st = PropertyStats::over(PROPERTIES[p], &held_series(samples, stop_len));
        decision.extend([st.min, st.max, st.mean]);
    }
    for r in &ramps {
        match r {
            Some((target, ramp, _)) => decision.extend([*target, target / *ramp as f64]),
            None => decision.extend([0.0, 0.0]),
        }
    }
    Draft {
        product,
        stop_len,
        property_samples,
        material,
        material_offset,
        ramps,
        decision,
    }
}

/// Midpoint cut so that `count` of the sorted scores fall below it.
fn quantile_cut(sorted: &[f64], count: usize) -> f64 {
    match (count, sorted.len()) {
        (_, 0) => 0.0,
        (0, _) => sorted[0] - 1.0,
        (c, n) if c >= n => sorted[n - 1] + 1.0,
        (c, _) => 0.5 * (sorted[c - 1] + sorted[c]),
    }
}

struct Emitter {
    signals: BTreeMap<&'static str, Vec<Sample>>,
}

impl Emitter {
    fn push(&mut self, name: &'static str, t: f64, v: f64) {
        self.signals.get_mut(name).expect("declared").push(Sample::num(t, v));
    }

    fn push_cat(&mut self, name: &'static str, t: f64, v: &str) {
        let s = self.signals.get_mut(name).expect("declared");
        let same = s
            .last()
            .is_some_and(|last| matches!(&last.value, crate::signal::Value::Cat(c) if c == v));
        if !same {
            s.push(Sample::cat(t, v));
        }
    }
}

const EXTRUDER_NAMES: [&str; N_EXTRUDERS] = ["speed_1", "speed_2", "speed_3", "speed_4", "speed_5"];

/// Runs the plant: draws every extrusion, assigns classes by quality-score
/// quantiles, injects steadiness times from the landscape with log-normal
/// noise and renders all signals.
pub fn simulate(spec: &PlantSpec) -> Result<SyntheticPlant> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut drafts = Vec::with_capacity(spec.n_extrusions);
    let mut prev_material: Option<String> = None;
    for _ in 0..spec.n_extrusions {
        let d = draft(spec, prev_material.as_deref(), &mut rng);
        prev_material = Some(d.material.clone());
        drafts.push(d);
    }

    let mut rule = ClassRule {
        die_weight: spec.die_weight,
        steady_below: 0.0,
        unsteady_below: 0.0,
    };
    let mut scores: Vec<f64> = drafts.iter().map(|d| rule.score(&d.decision)).collect();
    scores.sort_by(f64::total_cmp);
    let n = scores.len() as f64;
    let n1 = (n * spec.class_mix[0]).round() as usize;
    let n12 = (n * (spec.class_mix[0] + spec.class_mix[1])).round() as usize;
    rule.steady_below = quantile_cut(&scores, n1);
    rule.unsteady_below = quantile_cut(&scores, n12);

    let mut em = Emitter {
        signals: BTreeMap::new(),
    };
    let names: Vec<&'static str> = PROPERTIES
        .iter()
        .copied()
        .chain(EXTRUDER_NAMES)
        .chain([
            "profilometer",
            "profilometer_setpoint",
            "cut",
            "product",
            "material",
            "die",
        ])
        .collect();
    for &name in &names {
        em.signals.insert(name, Vec::new());
    }

    let mut extrusions = Vec::with_capacity(drafts.len());
    let mut t: usize = 0;
    for (id, d) in drafts.iter().enumerate() {
        let prof = &spec.products[d.product];
        let stop = t;
        let start = stop + d.stop_len;
        let class = rule.class_of(&d.decision);
        let y_star = prof.landscape.value(&effective_coords(&d.decision));
        let steadiness = (class == Class::Steady)
            .then(|| ((y_star * (spec.noise_sigma * normal(&mut rng)).exp()).round() as usize).max(5));
        let active_len = match class {
            Class::Steady => (steadiness.expect("class 1") + rng.random_range(12..=24)).max(20),
            Class::NotSteady => rng.random_range(40..=80),
            Class::Cut => rng.random_range(20..=40),
        };
        let end = start + active_len;

        for (p, samples) in d.property_samples.iter().enumerate() {
            for &(rel, v) in samples {
                em.push(PROPERTIES[p], stop as f64 + rel, v);
            }
        }
        em.push_cat("product", stop as f64, &prof.name);
        em.push_cat("die", stop as f64, &prof.die);
        em.push_cat("material", stop as f64 + d.material_offset, &d.material);
        let sp_samples = em.signals.get("profilometer_setpoint").expect("declared");
        if sp_samples
            .last()
            .is_none_or(|s| s.value != crate::signal::Value::Num(prof.setpoint))
        {
            em.push("profilometer_setpoint", stop as f64, prof.setpoint);
        }
        if id == 0 {
            em.push("profilometer", 0.0, 0.0);
            em.push("cut", 0.0, 0.0);
        }

        for (k, ramp) in d.ramps.iter().enumerate() {
            for tick in stop..end {
                let v = match (ramp, tick >= start) {
                    (&Some((target, r, delay)), true) => {
                        let i = tick - start;
                        if i < delay {
                            0.0
                        } else if i - delay + 1 < r {
                            target * (i - delay + 1) as f64 / r as f64
                        } else {
                            target
                        }
                    }
                    _ => 0.0,
                };
                em.push(EXTRUDER_NAMES[k], tick as f64, v);
            }
        }

        let sp = prof.setpoint;
        match class {
            Class::Steady => {
                let ts = steadiness.expect("class 1");
                let r0 = rng.random_range(1..=3).min(ts - 4);
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                for i in r0..active_len {
                    let dev = if i + 4 < ts {
                        sign * (0.03 + 0.12 * (-((i - r0) as f64) / 4.0).exp() + 0.01 * rng.random::<f64>())
                    } else if i <= ts {
                        0.0015 * rng.random_range(-1.0..1.0)
                    } else if i % 2 == 0 {
                        0.006
                    } else {
                        -0.006
                    };
                    em.push("profilometer", (start + i) as f64, sp * (1.0 + dev));
                }
                em.push("profilometer", end as f64, 0.0);
            }
            Class::NotSteady => {
                let r0 = rng.random_range(1..=3);
                for i in r0..active_len {
                    let dev = 0.025 + 0.01 * (0.9 * i as f64).sin();
                    em.push("profilometer", (start + i) as f64, sp * (1.0 + dev));
                }
                em.push("profilometer", end as f64, 0.0);
            }
            Class::Cut => {
                let c = start + rng.random_range(0..=2);
                em.push("cut", c as f64, 1.0);
                em.push("cut", (c + 1) as f64, 0.0);
            }
        }

        extrusions.push(InjectedExtrusion {
            id,
            product: prof.name.clone(),
            start_time: start as i64,
            class,
            decision: d.decision.clone(),
            y_star,
            steadiness_time: steadiness,
        });
        t = end;
    }
    if !drafts.is_empty() {
        for tick in t..t + 10 {
            for name in EXTRUDER_NAMES {
                em.push(name, tick as f64, 0.0);
            }
        }
    }

    let products = spec
        .products
        .iter()
        .map(|p| {
            let mut lower = [f64::INFINITY; 4];
            let mut upper = [f64::NEG_INFINITY; 4];
            for e in extrusions.iter().filter(|e| e.product == p.name) {
                let z = effective_coords(&e.decision);
                for dd in 0..4 {
                    lower[dd] = lower[dd].min(z[dd]);
                    upper[dd] = upper[dd].max(z[dd]);
                }
            }
            let optimum = lower
                .iter()
                .zip(&upper)
                .all(|(l, u)| l <= u)
                .then(|| grid_minimum(&p.landscape, lower, upper, spec.grid_resolution));
            ProductTruth {
                name: p.name.clone(),
                landscape: p.landscape.clone(),
                lower,
                upper,
                optimum,
            }
        })
        .collect();

    let vocab = |f: &dyn Fn(&ProductProfile) -> Vec<String>| {
        let mut v: Vec<String> = spec.products.iter().flat_map(f).collect();
        v.sort();
        v.dedup();
        v
    };
    let product_vocab = vocab(&|p| vec![p.name.clone()]);
    let material_vocab = vocab(&|p| p.materials.clone());
    let die_vocab = vocab(&|p| vec![p.die.clone()]);

    let spec_of = |name: &str| -> SignalSpec {
        let (unit, kind, vocabulary) = match name {
            "pressure_barrel" | "pressure_die" => ("bar", SignalKind::Continuous, vec![]),
            n if n.starts_with("temp_") => ("degC", SignalKind::Continuous, vec![]),
            n if n.starts_with("speed_") => ("rpm", SignalKind::Continuous, vec![]),
            "profilometer" | "profilometer_setpoint" => ("mm", SignalKind::Continuous, vec![]),
            "cut" => ("", SignalKind::Boolean, vec![]),
            "product" => ("", SignalKind::Categorical, product_vocab.clone()),
            "material" => ("", SignalKind::Categorical, material_vocab.clone()),
            _ => ("", SignalKind::Categorical, die_vocab.clone()),
        };
        SignalSpec {
            name: name.to_string(),
            unit: unit.to_string(),
            kind,
            vocabulary,
        }
    };
    let signal_specs: Vec<SignalSpec> = names.iter().map(|n| spec_of(n)).collect();
    let signals = signal_specs
        .iter()
        .map(|s| RawSignal {
            name: s.name.clone(),
            unit: s.unit.clone(),
            kind: s.kind,
            vocabulary: s.vocabulary.clone(),
            samples: em.signals.remove(s.name.as_str()).unwrap_or_default(),
        })
        .collect();
    let manifest = Manifest {
        roles: PlantRoles {
            commander: EXTRUDER_NAMES[0].into(),
            features: FeatureRoles {
                properties: PROPERTIES.iter().map(|s| s.to_string()).collect(),
                extruders: EXTRUDER_NAMES.iter().map(|s| s.to_string()).collect(),
                material: Some("material".into()),
                die: Some("die".into()),
            },
            profilometer: "profilometer".into(),
            setpoint: "profilometer_setpoint".into(),
            cut: "cut".into(),
            product: "product".into(),
            steadiness: None,
        },
        signals: signal_specs,
    };
    Ok(SyntheticPlant {
        manifest,
        signals,
        truth: GroundTruth {
            spec: spec.clone(),
            class_rule: rule,
            products,
            extrusions,
        },
    })
}

/// Writes the plant's signals and manifest to `signal_dir` and the ground
/// truth to `truth_dir`, which must be a different directory.
pub fn generate_history(spec: &PlantSpec, signal_dir: &Path, truth_dir: &Path) -> Result<GroundTruth> {
    let same = signal_dir == truth_dir
        || matches!((signal_dir.canonicalize(), truth_dir.canonicalize()), (Ok(a), Ok(b)) if a == b);
    if same {
        return Err(Error::InvalidConfig(
            "ground truth must not live next to the signals".into(),
        ));
    }
    let plant = simulate(spec)?;
    for dir in [signal_dir, truth_dir] {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    for s in &plant.signals {
        write_signal(&signal_dir.join(format!("{}.csv", s.name)), &s.samples)?;
    }
    plant.manifest.save(&signal_dir.join(MANIFEST_FILE))?;
    plant.truth.save(&truth_dir.join(GROUND_TRUTH_FILE))?;
    Ok(plant.truth)
}
