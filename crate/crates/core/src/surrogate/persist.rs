//! Versioned JSON envelopes for trained artifacts.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FORMAT: &str = "ddde-artifact";
pub const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Envelope<M> {
    format: String,
    version: u32,
    kind: String,
    payload: M,
}

#[derive(Deserialize)]
struct Header {
    format: String,
    version: u32,
    kind: String,
}

/// Writes `payload` wrapped in a header naming its `kind`.
pub fn save<M: Serialize>(path: &Path, kind: &str, payload: &M) -> Result<()> {
    let env = Envelope {
        format: FORMAT.to_string(),
        version: VERSION,
        kind: kind.to_string(),
        payload,
    };
    let text = serde_json::to_string_pretty(&env)?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reads an artifact written by [`save`], checking format, version and kind.
pub fn load<M: DeserializeOwned>(path: &Path, kind: &str) -> Result<M> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let header: Header = serde_json::from_str(&text).map_err(|e| Error::artifact(path, format!("bad header: {e}")))?;
    if header.format != FORMAT {
        return Err(Error::artifact(path, format!("unknown format `{}`", header.format)));
    }
    if header.version != VERSION {
        return Err(Error::artifact(
            path,
            format!("version {} not supported (expected {VERSION})", header.version),
        ));
    }
    if header.kind != kind {
        return Err(Error::artifact(
            path,
            format!("holds a `{}`, expected `{kind}`", header.kind),
        ));
    }
    let env: Envelope<M> = serde_json::from_str(&text).map_err(|e| Error::artifact(path, e.to_string()))?;
    Ok(env.payload)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::Class;
    use crate::surrogate::{
        train_constraint_classifier, train_objective_regressor, BoostParams, Dataset, ForestParams,
    };
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x: Vec<Vec<f64>> = (0..120)
            .map(|_| vec![rng.random(), rng.random::<f64>() * 1e-3, rng.random()])
            .collect();
        let yc: Vec<Class> = x
            .iter()
            .map(|r| if r[0] + r[2] > 1.0 { Class::Steady } else { Class::Cut })
            .collect();
        let yr: Vec<f64> = x.iter().map(|r| (1.0 + 9.0 * r[0]) * (1.0 + r[1])).collect();
        let forest = train_constraint_classifier(
            &Dataset::new(x.clone(), yc).unwrap(),
            &ForestParams {
                n_trees: 10,
                ..Default::default()
            },
        )
        .unwrap();
        let (boost, _) =
            train_objective_regressor(&Dataset::new(x.clone(), yr).unwrap(), &BoostParams::default()).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let (pf, pb) = (dir.path().join("f.json"), dir.path().join("sub/b.json"));
        save(&pf, "constraint", &forest).unwrap();
        save(&pb, "objective", &boost).unwrap();
        let forest2: crate::surrogate::ConstraintModel<f64> = load(&pf, "constraint").unwrap();
        let boost2: crate::surrogate::ObjectiveModel<f64> = load(&pb, "objective").unwrap();
        assert_eq!(forest, forest2);
        assert_eq!(boost, boost2);
        for r in &x {
            assert_eq!(forest.predict_class(r).unwrap(), forest2.predict_class(r).unwrap());
            assert_eq!(
                boost.predict_objective(r).unwrap().to_bits(),
                boost2.predict_objective(r).unwrap().to_bits()
            );
        }
        assert!(matches!(
            load::<crate::surrogate::ObjectiveModel<f64>>(&pf, "objective"),
            Err(Error::ModelArtifact { .. })
        ));
    }

    #[test]
    fn wrong_version_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        std::fs::write(&p, r#"{"format":"ddde-artifact","version":99,"kind":"x","payload":1}"#).unwrap();
        assert!(matches!(load::<u32>(&p, "x"), Err(Error::ModelArtifact { .. })));
    }
}
