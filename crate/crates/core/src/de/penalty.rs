use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::space::SearchSpace;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::signal::Class;
use crate::surrogate::BoundSurrogates;

/// Time for every used extruder to reach its target speed:
/// `max_k speed_k / acceleration_k`.
pub fn t_setpoint<T: Scalar>(x: &[T], space: &SearchSpace<T>) -> Result<T> {
    let used = space.used_extruders();
    if used.is_empty() {
        return Err(Error::Consistency("no extruder is used".into()));
    }
    let mut t = T::neg_infinity();
    for k in used {
        let (s, a) = space.extruder_coords(k);
        if !(x[a] > T::zero()) {
            return Err(Error::Consistency(format!("extruder {k} has acceleration {}", x[a])));
        }
        t = t.max(x[s] / x[a]);
    }
    Ok(t)
}

/// `5 (g+1)^(g+1)` for infeasible classes, 1 otherwise.
pub fn penalty_factor(g: Class) -> f64 {
    match g {
        Class::Steady => 1.0,
        g => {
            let e = g.code() as i32 + 1;
            5.0 * (e as f64).powi(e)
        }
    }
}

/// Scored individual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Evaluation<T: Scalar> {
    /// Surrogate objective `ŷ` in seconds.
    pub raw: T,
    pub class: Class,
    pub t_setpoint: T,
    /// `ŷ'` after the feasibility penalty.
    pub penalized: T,
    /// `ŷ''`, the value the optimizer minimises.
    pub fitness: T,
}

impl<T: Scalar> Evaluation<T> {
    pub fn consistent(&self) -> bool {
        self.fitness == self.penalized
    }

    pub fn is_feasible(&self) -> bool {
        self.class.is_feasible() && self.consistent()
    }
}

/// Applies both penalty levels to one prediction: the class factor, then
/// `t_setpoint + 10` when `t_setpoint ≥ (1+δ)·ŷ'`.
pub fn multi_level_penalty<T: Scalar>(raw: T, class: Class, t_set: T, delta: T) -> Evaluation<T> {
    let penalized = raw * T::of(penalty_factor(class));
    let fitness = if t_set < (T::one() + delta) * penalized {
        penalized
    } else {
        t_set + T::of(10.0)
    };
    Evaluation {
        raw,
        class,
        t_setpoint: t_set,
        penalized,
        fitness,
    }
}

/// Anything that can predict the objective and class of a decision vector.
pub trait Surrogate<T: Scalar>: Sync {
    fn predict(&self, decision: &[T]) -> Result<(T, Class)>;
}

impl<T: Scalar> Surrogate<T> for BoundSurrogates<'_, T> {
    fn predict(&self, decision: &[T]) -> Result<(T, Class)> {
        self.predict_both(decision)
    }
}

/// Surrogate objective per row followed by the penalties; rows are scored in parallel.
pub fn fitness<T: Scalar, S: Surrogate<T> + ?Sized>(
    pop: &[Vec<T>],
    surrogate: &S,
    space: &SearchSpace<T>,
    delta: T,
) -> Result<Vec<Evaluation<T>>> {
    pop.par_iter()
        .map(|x| {
            let (raw, class) = surrogate.predict(x)?;
            Ok(multi_level_penalty(raw, class, t_setpoint(x, space)?, delta))
        })
        .collect()
}
