use rand::seq::index;
use rand::Rng;

use super::config::Strategy;
use crate::error::{Error, Result};
use crate::scalar::{mean, std_dev, Scalar};
use crate::surrogate::ScalerParams;

/// Three distinct indices in `0..n`, all different from `i`.
pub fn draw_indices<R: Rng + ?Sized>(n: usize, i: usize, rng: &mut R) -> [usize; 3] {
    let s = index::sample(rng, n - 1, 3);
    let shift = |j: usize| if j >= i { j + 1 } else { j };
    [shift(s.index(0)), shift(s.index(1)), shift(s.index(2))]
}

/// Donor vector for one individual.
pub fn donor<T: Scalar>(strategy: Strategy, f: T, xi: &[T], r1: &[T], r2: &[T], r3: &[T]) -> Vec<T> {
    (0..xi.len())
        .map(|j| match strategy {
            Strategy::Rand1 => r1[j] + f * (r2[j] - r3[j]),
            Strategy::CurrentToRand1 => xi[j] + f * (r1[j] - xi[j]) + f * (r2[j] - r3[j]),
        })
        .collect()
}

pub fn mutate<T: Scalar, R: Rng + ?Sized>(
    pop: &[Vec<T>],
    f: T,
    strategy: Strategy,
    rng: &mut R,
) -> Result<Vec<Vec<T>>> {
    let n = pop.len();
    if n < 4 {
        return Err(Error::InvalidConfig(format!("mutation needs 4 individuals, got {n}")));
    }
    Ok((0..n)
        .map(|i| {
            let [a, b, c] = draw_indices(n, i, rng);
            donor(strategy, f, &pop[i], &pop[a], &pop[b], &pop[c])
        })
        .collect())
}

/// Binomial crossover: each coordinate comes from the donor with probability
/// `cr`, and one uniformly chosen coordinate always does.
pub fn crossover_binomial<T: Scalar, R: Rng + ?Sized>(
    pop: &[Vec<T>],
    donors: &[Vec<T>],
    cr: f64,
    rng: &mut R,
) -> Vec<Vec<T>> {
    pop.iter()
        .zip(donors)
        .map(|(x, v)| {
            let j_rand = rng.random_range(0..x.len());
            (0..x.len())
                .map(|j| {
                    let take = rng.random::<f64>() < cr;
                    if take || j == j_rand {
                        v[j]
                    } else {
                        x[j]
                    }
                })
                .collect()
        })
        .collect()
}

/// Keeps a trial only when it is strictly better than its parent.
pub fn select_greedy<T: Scalar>(
    pop: &[Vec<T>],
    trials: &[Vec<T>],
    f_pop: &[T],
    f_trials: &[T],
) -> (Vec<Vec<T>>, Vec<T>) {
    pop.iter()
        .zip(trials)
        .zip(f_pop.iter().zip(f_trials))
        .map(
            |((x, u), (&fx, &fu))| {
                if fu < fx {
                    (u.clone(), fu)
                } else {
                    (x.clone(), fx)
                }
            },
        )
        .unzip()
}

/// Mean over columns of the per-column standard deviation (ddof 0).
pub fn mean_feature_std<T: Scalar>(rows: &[Vec<T>]) -> T {
    let d = rows.first().map_or(0, Vec::len);
    if d == 0 {
        return T::zero();
    }
    let stds: Vec<T> = (0..d)
        .map(|j| std_dev(&rows.iter().map(|r| r[j]).collect::<Vec<_>>()))
        .collect();
    mean(&stds)
}

/// Population spread in the product's standard-scaled space.
pub fn dispersion<T: Scalar>(pop: &[Vec<T>], scaler: &ScalerParams<T>) -> T {
    mean_feature_std(&scaler.transform_all(pop))
}
