use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{persist, ConstraintModel, FeatureEncoder, ObjectiveModel, SearchContext};
use crate::error::Result;
use crate::scalar::Scalar;
use crate::signal::Class;

pub const BUNDLE_KIND: &str = "surrogates";

/// Everything needed to score a decision vector: the encoder and both models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Surrogates<T: Scalar> {
    pub encoder: FeatureEncoder,
    pub constraint: ConstraintModel<T>,
    pub objective: ObjectiveModel<T>,
}

impl<T: Scalar> Surrogates<T> {
    pub fn save(&self, path: &Path) -> Result<()> {
        persist::save(path, BUNDLE_KIND, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        persist::load(path, BUNDLE_KIND)
    }

    /// Binds the models to a fixed categorical context.
    pub fn bind(&self, context: &SearchContext) -> Result<BoundSurrogates<'_, T>> {
        Ok(BoundSurrogates {
            models: self,
            tail: self.encoder.context_tail(context)?,
        })
    }
}

/// Surrogates with the context columns precomputed.
#[derive(Debug, Clone)]
pub struct BoundSurrogates<'a, T: Scalar> {
    models: &'a Surrogates<T>,
    tail: Vec<T>,
}

impl<T: Scalar> BoundSurrogates<'_, T> {
    pub fn row(&self, decision: &[T]) -> Result<Vec<T>> {
        self.models.encoder.encode_decision(decision, &self.tail)
    }

    pub fn predict_class(&self, decision: &[T]) -> Result<Class> {
        self.models.constraint.predict_class(&self.row(decision)?)
    }

    pub fn predict_objective(&self, decision: &[T]) -> Result<T> {
        self.models.objective.predict_objective(&self.row(decision)?)
    }

    /// Objective and class from a single encoding of `decision`.
    pub fn predict_both(&self, decision: &[T]) -> Result<(T, Class)> {
        let row = self.row(decision)?;
        Ok((
            self.models.objective.predict_objective(&row)?,
            self.models.constraint.predict_class(&row)?,
        ))
    }
}
