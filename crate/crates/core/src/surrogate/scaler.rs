use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};

/// Standard scaler. Constant columns are not scaled: they are dropped from
/// the scaled representation and restored from `mean` on the way back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ScalerParams<T: Scalar> {
    pub mean: Vec<T>,
    pub std: Vec<T>,
    /// Indices of the scaled (non-constant) columns.
    pub active: Vec<usize>,
}

impl<T: Scalar> ScalerParams<T> {
    pub fn fit(rows: &[Vec<T>]) -> Result<Self> {
        let d = rows
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InsufficientData("cannot fit a scaler on zero rows".into()))?;
        let mut mean = Vec::with_capacity(d);
        let mut std = Vec::with_capacity(d);
        let mut active = Vec::new();
        let mut column = Vec::with_capacity(rows.len());
        for j in 0..d {
            column.clear();
            column.extend(rows.iter().map(|r| r[j]));
            let m = scalar::mean(&column);
            let s = scalar::std_dev(&column);
            let constant = column.iter().all(|&v| v == column[0]);
            mean.push(if constant { column[0] } else { m });
            std.push(if constant { T::zero() } else { s });
            if !constant && s > T::zero() {
                active.push(j);
            }
        }
        Ok(ScalerParams { mean, std, active })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn scaled_dim(&self) -> usize {
        self.active.len()
    }

    pub fn transform(&self, row: &[T]) -> Vec<T> {
        self.active
            .iter()
            .map(|&j| (row[j] - self.mean[j]) / self.std[j])
            .collect()
    }

    pub fn inverse(&self, scaled: &[T]) -> Vec<T> {
        let mut out = self.mean.clone();
        for (k, &j) in self.active.iter().enumerate() {
            out[j] = scaled[k] * self.std[j] + self.mean[j];
        }
        out
    }

    pub fn transform_all(&self, rows: &[Vec<T>]) -> Vec<Vec<T>> {
        rows.iter().map(|r| self.transform(r)).collect()
    }

    pub fn inverse_all(&self, rows: &[Vec<T>]) -> Vec<Vec<T>> {
        rows.iter().map(|r| self.inverse(r)).collect()
    }
}
