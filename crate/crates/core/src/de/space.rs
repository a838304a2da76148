use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::signal::{Class, LabeledExtrusion};
use crate::surrogate::{ScalerParams, SearchContext};

/// Per-coordinate box `[lower, upper]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Bounds<T: Scalar> {
    pub lower: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Scalar> Bounds<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::InvalidConfig("bound vectors differ in length".into()));
        }
        if lower
            .iter()
            .zip(&upper)
            .any(|(l, u)| !l.is_finite() || !u.is_finite() || l > u)
        {
            return Err(Error::InvalidConfig("bounds must be finite with min <= max".into()));
        }
        Ok(Bounds { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn clamp(&self, x: &mut [T]) {
        for ((v, &l), &u) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.max(l).min(u);
        }
    }

    pub fn contains(&self, x: &[T]) -> bool {
        x.iter()
            .zip(&self.lower)
            .zip(&self.upper)
            .all(|((v, l), u)| l <= v && v <= u)
    }
}

/// Clips every trial vector into `bounds`.
pub fn check_ranges<T: Scalar>(u: &[Vec<T>], bounds: &Bounds<T>) -> Vec<Vec<T>> {
    u.iter()
        .map(|row| {
            let mut row = row.clone();
            bounds.clamp(&mut row);
            row
        })
        .collect()
}

/// What the optimizer knows about one product: its frozen categorical
/// context, historical bounds on the decision coordinates, and the scaler
/// fitted to the product's decision vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SearchSpace<T: Scalar> {
    pub context: SearchContext,
    pub n_properties: usize,
    pub bounds: Bounds<T>,
    pub scaler: ScalerParams<T>,
}

impl<T: Scalar> SearchSpace<T> {
    /// Context is the most frequent one among the product's class-1 rows
    /// (ties: earliest occurrence). Property bounds span every row of the
    /// product; extruder bounds span the rows that used that extruder, and
    /// extruders outside the context's usage set are pinned to zero.
    pub fn from_history(history: &[LabeledExtrusion], product: &str) -> Result<Self> {
        let rows: Vec<&LabeledExtrusion> = history.iter().filter(|r| r.product() == product).collect();
        let steady: Vec<&LabeledExtrusion> = rows.iter().copied().filter(|r| r.class == Class::Steady).collect();
        if steady.is_empty() {
            return Err(Error::Initialization(format!(
                "product `{product}` has no class-1 history"
            )));
        }
        let mut tally: BTreeMap<String, (usize, usize, SearchContext)> = BTreeMap::new();
        for (pos, r) in steady.iter().enumerate() {
            let ctx = SearchContext::of(&r.search_point);
            let key = serde_json::to_string(&ctx)?;
            tally.entry(key).or_insert((0, pos, ctx)).0 += 1;
        }
        let context = tally
            .into_values()
            .min_by_key(|(count, first, _)| (std::cmp::Reverse(*count), *first))
            .map(|(_, _, c)| c)
            .expect("non-empty");

        let sp = &steady[0].search_point;
        let n_properties = sp.properties.len();
        let dim = sp.decision_vector().len();
        let decisions: Vec<Vec<T>> = rows
            .iter()
            .map(|r| r.search_point.decision_vector().into_iter().map(T::of).collect())
            .collect();
        let mut lower = vec![T::infinity(); dim];
        let mut upper = vec![T::neg_infinity(); dim];
        let prop_dims = 3 * n_properties;
        for (r, x) in rows.iter().zip(&decisions) {
            let usage = r.search_point.usage();
            for j in 0..dim {
                let used = j < prop_dims || usage[(j - prop_dims) / 2];
                if used {
                    lower[j] = lower[j].min(x[j]);
                    upper[j] = upper[j].max(x[j]);
                }
            }
        }
        for (k, &used) in context.usage.iter().enumerate() {
            for j in [prop_dims + 2 * k, prop_dims + 2 * k + 1] {
                if !used {
                    lower[j] = T::zero();
                    upper[j] = T::zero();
                }
            }
        }
        Ok(SearchSpace {
            context,
            n_properties,
            bounds: Bounds::new(lower, upper)?,
            scaler: ScalerParams::fit(&decisions)?,
        })
    }

    pub fn product_type(&self) -> &str {
        &self.context.product_type
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    /// Indices of the used extruders (the set K).
    pub fn used_extruders(&self) -> Vec<usize> {
        (0..self.context.usage.len())
            .filter(|&k| self.context.usage[k])
            .collect()
    }

    /// Coordinates of extruder `k`'s target speed and acceleration.
    pub fn extruder_coords(&self, k: usize) -> (usize, usize) {
        let base = 3 * self.n_properties + 2 * k;
        (base, base + 1)
    }
}
