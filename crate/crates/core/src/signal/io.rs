//! On-disk formats: the signal directory (per-signal `timestamp,value` CSVs
//! plus a TOML manifest) and the labeled-extrusion table.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{
    CategoricalTrace, Class, ExtruderStart, LabeledExtrusion, PlantRoles, PropertyStats, RawSignal, Sample,
    SearchPoint, SignalKind, Value,
};
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub name: String,
    #[serde(default)]
    pub unit: String,
    pub kind: SignalKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vocabulary: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub roles: PlantRoles,
    pub signals: Vec<SignalSpec>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let manifest: Manifest = toml::from_str(&text)?;
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text =
            toml::to_string_pretty(self).map_err(|e| Error::InvalidConfig(format!("manifest serialization: {e}")))?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    fn validate(&self) -> Result<()> {
        let r = &self.roles;
        let mut required: Vec<&String> = vec![&r.commander, &r.profilometer, &r.setpoint, &r.cut, &r.product];
        required.extend(&r.features.properties);
        required.extend(&r.features.extruders);
        required.extend(r.features.material.iter());
        required.extend(r.features.die.iter());
        for name in required {
            if !self.signals.iter().any(|s| &s.name == name) {
                return Err(Error::InvalidConfig(format!(
                    "role signal `{name}` not declared in manifest"
                )));
            }
        }
        if !r.features.extruders.contains(&r.commander) {
            return Err(Error::InvalidConfig("commander must be one of the extruders".into()));
        }
        Ok(())
    }
}

/// Reads every signal declared in `<dir>/manifest.toml` from `<dir>/<name>.csv`.
pub fn read_signal_dir(dir: &Path) -> Result<(Manifest, Vec<RawSignal>)> {
    let manifest = Manifest::load(&dir.join(MANIFEST_FILE))?;
    let signals = manifest
        .signals
        .iter()
        .map(|spec| read_signal(&dir.join(format!("{}.csv", spec.name)), spec))
        .collect::<Result<Vec<_>>>()?;
    Ok((manifest, signals))
}

fn read_signal(path: &Path, spec: &SignalSpec) -> Result<RawSignal> {
    let curation = |reason: String| Error::Curation {
        signal: spec.name.clone(),
        reason,
    };
    let mut reader = csv::Reader::from_path(path).map_err(|e| curation(e.to_string()))?;
    let headers = reader.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "timestamp" || &headers[1] != "value" {
        return Err(curation(format!("expected `timestamp,value` header, got {headers:?}")));
    }
    let mut samples = Vec::new();
    for record in reader.records() {
        let record = record?;
        let t: f64 = record[0]
            .trim()
            .parse()
            .map_err(|_| curation(format!("bad timestamp `{}`", &record[0])))?;
        let raw = record[1].trim();
        let value = match spec.kind {
            SignalKind::Continuous => Value::Num(
                raw.parse()
                    .map_err(|_| curation(format!("bad value `{raw}` at t={t}")))?,
            ),
            SignalKind::Boolean => Value::Num(match raw {
                "1" | "true" | "True" => 1.0,
                "0" | "false" | "False" => 0.0,
                other => return Err(curation(format!("bad boolean `{other}` at t={t}"))),
            }),
            SignalKind::Categorical => Value::Cat(raw.to_string()),
        };
        samples.push(Sample { t, value });
    }
    let signal = RawSignal {
        name: spec.name.clone(),
        unit: spec.unit.clone(),
        kind: spec.kind,
        vocabulary: spec.vocabulary.clone(),
        samples,
    };
    signal.validate()?;
    Ok(signal)
}

/// Writes one `timestamp,value` CSV.
pub fn write_signal(path: &Path, samples: &[Sample]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    w.write_record(["timestamp", "value"])?;
    for s in samples {
        let v = match &s.value {
            Value::Num(x) => fmt_f64(*x),
            Value::Cat(c) => c.clone(),
        };
        w.write_record([fmt_f64(s.t), v])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// The common span over which every signal is defined.
pub fn common_span(signals: &[RawSignal]) -> Result<(i64, i64)> {
    let mut t0 = i64::MIN;
    let mut t1 = i64::MIN;
    for s in signals {
        let (Some(first), Some(last)) = (s.samples.first(), s.samples.last()) else {
            return Err(Error::Curation {
                signal: s.name.clone(),
                reason: "signal has no samples".into(),
            });
        };
        t0 = t0.max(first.t.floor() as i64);
        t1 = t1.max(last.t.floor() as i64);
    }
    if signals.is_empty() {
        return Err(Error::InsufficientData("no signals".into()));
    }
    Ok((t0, t1))
}

pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

pub(crate) fn csv_io(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::InvalidConfig(format!("{}: {other:?}", path.display())),
    }
}

fn labeled_header(properties: &[String], n_extruders: usize, material: bool, die: bool) -> Vec<String> {
    let mut h: Vec<String> = vec!["id".into(), "start_time".into(), "product_type".into()];
    if material {
        h.extend(["material_first", "material_last", "material_changed"].map(String::from));
    }
    if die {
        h.extend(["die_first", "die_last", "die_changed"].map(String::from));
    }
    for p in properties {
        for stat in ["min", "max", "mean", "std", "first", "last"] {
            h.push(format!("{p}_{stat}"));
        }
    }
    for k in 1..=n_extruders {
        h.push(format!("usage_{k}"));
        h.push(format!("target_speed_{k}"));
        h.push(format!("acceleration_{k}"));
    }
    h.push("steadiness_time".into());
    h.push("class".into());
    h
}

/// Writes the labeled-extrusion table, one row per extrusion.
pub fn write_labeled_csv(path: &Path, rows: &[LabeledExtrusion]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    let Some(first) = rows.first() else {
        w.flush().map_err(|e| Error::io(path, e))?;
        return Ok(());
    };
    let sp = &first.search_point;
    let names: Vec<String> = sp.properties.iter().map(|p| p.name.clone()).collect();
    w.write_record(labeled_header(
        &names,
        sp.extruders.len(),
        sp.material.is_some(),
        sp.die.is_some(),
    ))?;
    for row in rows {
        let sp = &row.search_point;
        let mut rec: Vec<String> = vec![row.id.to_string(), row.start_time.to_string(), sp.product_type.clone()];
        for trace in [&sp.material, &sp.die].into_iter().flatten() {
            rec.extend([
                trace.first.clone(),
                trace.last.clone(),
                (trace.changed as u8).to_string(),
            ]);
        }
        for p in &sp.properties {
            rec.extend([p.min, p.max, p.mean, p.std, p.first, p.last].map(fmt_f64));
        }
        for e in &sp.extruders {
            rec.push((e.usage as u8).to_string());
            rec.push(fmt_f64(e.target_speed));
            rec.push(fmt_f64(e.acceleration));
        }
        rec.push(row.steadiness_time.map(fmt_f64).unwrap_or_default());
        rec.push(row.class.to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a table written by [`write_labeled_csv`].
pub fn read_labeled_csv(path: &Path) -> Result<Vec<LabeledExtrusion>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_io(path, e))?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if headers.is_empty() {
        return Ok(Vec::new());
    }
    let col = |name: &str| headers.iter().position(|h| h == name);
    let bad = |what: String| Error::InvalidConfig(format!("{}: {what}", path.display()));

    let properties: Vec<String> = headers
        .iter()
        .filter_map(|h| h.strip_suffix("_std").map(str::to_string))
        .filter(|p| col(&format!("{p}_min")).is_some())
        .collect();
    let n_extruders = headers.iter().filter(|h| h.starts_with("usage_")).count();
    let has_material = col("material_first").is_some();
    let has_die = col("die_first").is_some();
    if labeled_header(&properties, n_extruders, has_material, has_die) != headers {
        return Err(bad("unrecognised labeled-extrusion header".into()));
    }

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let mut it = record.iter();
        let mut next = || it.next().ok_or_else(|| bad("short row".into()));
        let num = |s: &str| -> Result<f64> { s.parse().map_err(|_| bad(format!("bad number `{s}`"))) };
        let flag = |s: &str| -> Result<bool> {
            match s {
                "1" => Ok(true),
                "0" => Ok(false),
                other => Err(bad(format!("bad flag `{other}`"))),
            }
        };
        let id: usize = next()?.parse().map_err(|_| bad("bad id".into()))?;
        let start_time: i64 = next()?.parse().map_err(|_| bad("bad start_time".into()))?;
        let product_type = next()?.to_string();
        let mut trace = |present: bool| -> Result<Option<CategoricalTrace>> {
            if !present {
                return Ok(None);
            }
            Ok(Some(CategoricalTrace {
                first: next()?.to_string(),
                last: next()?.to_string(),
                changed: flag(next()?)?,
            }))
        };
        let material = trace(has_material)?;
        let die = trace(has_die)?;
        let mut props = Vec::with_capacity(properties.len());
        for name in &properties {
            let mut v = [0.0; 6];
            for slot in &mut v {
                *slot = num(next()?)?;
            }
            props.push(PropertyStats {
                name: name.clone(),
                min: v[0],
                max: v[1],
                mean: v[2],
                std: v[3],
                first: v[4],
                last: v[5],
            });
        }
        let mut extruders = Vec::with_capacity(n_extruders);
        for _ in 0..n_extruders {
            extruders.push(ExtruderStart {
                usage: flag(next()?)?,
                target_speed: num(next()?)?,
                acceleration: num(next()?)?,
            });
        }
        let st = next()?;
        let steadiness_time = if st.is_empty() { None } else { Some(num(st)?) };
        let class_code: u8 = next()?.parse().map_err(|_| bad("bad class".into()))?;
        let class = Class::try_from(class_code).map_err(bad)?;
        if steadiness_time.is_some() != (class == Class::Steady) {
            return Err(bad(format!(
                "row {id}: steadiness time must be present exactly for class 1"
            )));
        }
        rows.push(LabeledExtrusion {
            id,
            start_time,
            search_point: SearchPoint {
                properties: props,
                extruders,
                material,
                die,
                product_type,
            },
            steadiness_time,
            class,
        });
    }
    Ok(rows)
}

/// Output paths produced by labeling a signal directory.
pub fn labeled_outputs(out: &Path) -> (PathBuf, PathBuf) {
    (out.join("labeled.csv"), out.join("segmentation.json"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(id: usize, class: Class) -> LabeledExtrusion {
        LabeledExtrusion {
            id,
            start_time: 100 + id as i64,
            search_point: SearchPoint {
                properties: vec![PropertyStats {
                    name: "temp_die".into(),
                    min: 79.5,
                    max: 80.25,
                    mean: 0.1 + 0.2,
                    std: 0.3,
                    first: 80.0,
                    last: 80.1,
                }],
                extruders: vec![
                    ExtruderStart {
                        usage: true,
                        target_speed: 30.0,
                        acceleration: 7.5,
                    },
                    ExtruderStart::UNUSED,
                ],
                material: Some(CategoricalTrace {
                    first: "M1".into(),
                    last: "M2".into(),
                    changed: true,
                }),
                die: None,
                product_type: "A".into(),
            },
            steadiness_time: (class == Class::Steady).then_some(12.0),
            class,
        }
    }

    #[test]
    fn labeled_table_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("labeled.csv");
        let rows = vec![row(0, Class::Steady), row(1, Class::Cut)];
        write_labeled_csv(&path, &rows).unwrap();
        assert_eq!(read_labeled_csv(&path).unwrap(), rows);
    }

    #[test]
    fn missing_manifest_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(read_signal_dir(dir.path()).is_err());
    }
}
