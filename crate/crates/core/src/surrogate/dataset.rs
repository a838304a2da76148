use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::signal::{CategoricalTrace, Class, LabeledExtrusion, SearchPoint};

/// Feature rows with one target per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T, Y> {
    pub x: Vec<Vec<T>>,
    pub y: Vec<Y>,
}

pub type ClassDataset<T> = Dataset<T, Class>;
pub type RegressionDataset<T> = Dataset<T, T>;

impl<T: Scalar, Y: Clone> Dataset<T, Y> {
    pub fn new(x: Vec<Vec<T>>, y: Vec<Y>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidConfig(format!(
                "{} feature rows but {} targets",
                x.len(),
                y.len()
            )));
        }
        if let Some(d) = x.first().map(Vec::len) {
            if x.iter().any(|r| r.len() != d) {
                return Err(Error::InvalidConfig("ragged feature matrix".into()));
            }
            if x.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::InvalidConfig("non-finite feature cell".into()));
            }
        }
        Ok(Dataset { x, y })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }

    pub fn subset(&self, idx: &[usize]) -> Self {
        Dataset {
            x: idx.iter().map(|&i| self.x[i].clone()).collect(),
            y: idx.iter().map(|&i| self.y[i].clone()).collect(),
        }
    }
}

impl<T: Scalar> ClassDataset<T> {
    pub fn class_counts(&self) -> [usize; 3] {
        let mut c = [0; 3];
        for y in &self.y {
            c[y.index()] += 1;
        }
        c
    }
}

/// Categorical context that stays fixed while the optimizer moves the
/// continuous coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchContext {
    pub usage: Vec<bool>,
    pub material: Option<CategoricalTrace>,
    pub die: Option<CategoricalTrace>,
    pub product_type: String,
}

impl SearchContext {
    pub fn of(sp: &SearchPoint) -> Self {
        SearchContext {
            usage: sp.usage(),
            material: sp.material.clone(),
            die: sp.die.clone(),
            product_type: sp.product_type.clone(),
        }
    }
}

/// Maps a search point to the model input row:
/// decision coordinates, usage flags, one-hot material/die first and last
/// plus their change flags, and one-hot product type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureEncoder {
    pub properties: Vec<String>,
    pub n_extruders: usize,
    pub has_material: bool,
    pub has_die: bool,
    pub materials: Vec<String>,
    pub dies: Vec<String>,
    pub products: Vec<String>,
}

impl FeatureEncoder {
    pub fn fit(rows: &[LabeledExtrusion]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::InsufficientData("no labeled extrusions".into()))?;
        let sp = &first.search_point;
        let mut materials = Vec::new();
        let mut dies = Vec::new();
        let mut products = Vec::new();
        for r in rows {
            let sp = &r.search_point;
            for t in sp.material.iter() {
                materials.extend([t.first.clone(), t.last.clone()]);
            }
            for t in sp.die.iter() {
                dies.extend([t.first.clone(), t.last.clone()]);
            }
            products.push(sp.product_type.clone());
        }
        for v in [&mut materials, &mut dies, &mut products] {
            v.sort();
            v.dedup();
        }
        Ok(FeatureEncoder {
            properties: sp.properties.iter().map(|p| p.name.clone()).collect(),
            n_extruders: sp.extruders.len(),
            has_material: sp.material.is_some(),
            has_die: sp.die.is_some(),
            materials,
            dies,
            products,
        })
    }

    pub fn decision_dim(&self) -> usize {
        self.properties.len() * 3 + self.n_extruders * 2
    }

    pub fn n_features(&self) -> usize {
        self.feature_names().len()
    }

    pub fn feature_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for p in &self.properties {
            for s in ["min", "max", "mean"] {
                names.push(format!("{p}_{s}"));
            }
        }
        for k in 1..=self.n_extruders {
            names.push(format!("target_speed_{k}"));
            names.push(format!("acceleration_{k}"));
        }
        for k in 1..=self.n_extruders {
            names.push(format!("usage_{k}"));
        }
        let mut cat = |prefix: &str, vocab: &[String], present: bool| {
            if !present {
                return;
            }
            for edge in ["first", "last"] {
                for v in vocab {
                    names.push(format!("{prefix}_{edge}={v}"));
                }
            }
            names.push(format!("{prefix}_changed"));
        };
        cat("material", &self.materials, self.has_material);
        cat("die", &self.dies, self.has_die);
        for p in &self.products {
            names.push(format!("product={p}"));
        }
        names
    }

    /// Context columns that follow the decision coordinates.
    pub fn context_tail<T: Scalar>(&self, ctx: &SearchContext) -> Result<Vec<T>> {
        if ctx.usage.len() != self.n_extruders {
            return Err(Error::Prediction(format!(
                "context has {} extruders, schema expects {}",
                ctx.usage.len(),
                self.n_extruders
            )));
        }
        let flag = |b: bool| if b { T::one() } else { T::zero() };
        let mut out: Vec<T> = ctx.usage.iter().map(|&u| flag(u)).collect();
        let mut cat = |trace: &Option<CategoricalTrace>, vocab: &[String], present: bool| {
            if !present {
                return;
            }
            for value in trace.iter().flat_map(|t| [&t.first, &t.last]) {
                out.extend(vocab.iter().map(|v| flag(v == value)));
            }
            if trace.is_none() {
                out.extend(std::iter::repeat_n(T::zero(), 2 * vocab.len()));
            }
            out.push(flag(trace.as_ref().is_some_and(|t| t.changed)));
        };
        cat(&ctx.material, &self.materials, self.has_material);
        cat(&ctx.die, &self.dies, self.has_die);
        out.extend(self.products.iter().map(|p| flag(*p == ctx.product_type)));
        Ok(out)
    }

    pub fn encode_decision<T: Scalar>(&self, decision: &[T], tail: &[T]) -> Result<Vec<T>> {
        if decision.len() != self.decision_dim() {
            return Err(Error::Prediction(format!(
                "decision vector has {} coordinates, schema expects {}",
                decision.len(),
                self.decision_dim()
            )));
        }
        let mut row = Vec::with_capacity(decision.len() + tail.len());
        row.extend_from_slice(decision);
        row.extend_from_slice(tail);
        Ok(row)
    }

    pub fn encode<T: Scalar>(&self, sp: &SearchPoint) -> Result<Vec<T>> {
        let decision: Vec<T> = sp.decision_vector().into_iter().map(T::of).collect();
        let tail = self.context_tail(&SearchContext::of(sp))?;
        self.encode_decision(&decision, &tail)
    }

    pub fn class_dataset<T: Scalar>(&self, rows: &[LabeledExtrusion]) -> Result<ClassDataset<T>> {
        let x = rows
            .iter()
            .map(|r| self.encode(&r.search_point))
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(x, rows.iter().map(|r| r.class).collect())
    }

    /// Class-1 rows with their steadiness time in seconds.
    pub fn regression_dataset<T: Scalar>(&self, rows: &[LabeledExtrusion]) -> Result<RegressionDataset<T>> {
        let feasible: Vec<&LabeledExtrusion> = rows.iter().filter(|r| r.class == Class::Steady).collect();
        let x = feasible
            .iter()
            .map(|r| self.encode(&r.search_point))
            .collect::<Result<Vec<_>>>()?;
        let y = feasible
            .iter()
            .map(|r| T::of(r.steadiness_time.expect("class 1 rows carry a time")))
            .collect();
        Dataset::new(x, y)
    }
}
