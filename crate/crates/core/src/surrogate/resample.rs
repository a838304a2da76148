use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dataset::{ClassDataset, Dataset};
use super::scaler::ScalerParams;
use crate::error::{Error, Result};
use crate::scalar::{squared_distance, Scalar};
use crate::signal::Class;

/// Indices of the `k` nearest rows to `rows[of]` among `pool` (excluding
/// itself). Ties go to the lower index.
fn k_nearest<T: Scalar>(rows: &[Vec<T>], pool: &[usize], of: usize, k: usize) -> Vec<usize> {
    let mut d: Vec<(T, usize)> = pool
        .iter()
        .filter(|&&j| j != of)
        .map(|&j| (squared_distance(&rows[of], &rows[j]), j))
        .collect();
    d.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite").then(a.1.cmp(&b.1)));
    d.truncate(k);
    d.into_iter().map(|(_, j)| j).collect()
}

/// SMOTE: grows every class in `target_classes` (default: every class
/// smaller than the largest) to the majority count with points
/// `x + u·(x_nn − x)`, `u ~ U(0,1)`, where `x_nn` is one of the `k` nearest
/// same-class neighbours of a uniformly drawn member `x`.
///
/// Original rows keep their order; synthetic rows are appended.
pub fn smote_oversample<T: Scalar, R: Rng + ?Sized>(
    data: &ClassDataset<T>,
    target_classes: Option<&[Class]>,
    k: usize,
    rng: &mut R,
) -> Result<ClassDataset<T>> {
    let counts = data.class_counts();
    let majority = counts.iter().copied().max().unwrap_or(0);
    let targets: Vec<Class> = match target_classes {
        Some(t) => t.to_vec(),
        None => Class::ALL
            .into_iter()
            .filter(|c| counts[c.index()] > 0 && counts[c.index()] < majority)
            .collect(),
    };
    let mut out = data.clone();
    for class in targets {
        let members: Vec<usize> = (0..data.len()).filter(|&i| data.y[i] == class).collect();
        if members.len() < k + 1 {
            return Err(Error::Resampling {
                class: class.code(),
                reason: format!("{} members, SMOTE with k={k} needs at least {}", members.len(), k + 1),
            });
        }
        let neighbours: Vec<Vec<usize>> = members.iter().map(|&i| k_nearest(&data.x, &members, i, k)).collect();
        for _ in members.len()..majority {
            let m = rng.random_range(0..members.len());
            let base = &data.x[members[m]];
            let nn = &data.x[neighbours[m][rng.random_range(0..k)]];
            let u = T::of(rng.random::<f64>());
            let point = base.iter().zip(nn).map(|(&a, &b)| a + u * (b - a)).collect();
            out.x.push(point);
            out.y.push(class);
        }
    }
    Ok(out)
}

fn nearest_neighbours<T: Scalar>(rows: &[Vec<T>]) -> Vec<Option<usize>> {
    (0..rows.len())
        .map(|i| {
            let mut best: Option<(T, usize)> = None;
            for (j, r) in rows.iter().enumerate() {
                if j == i {
                    continue;
                }
                let d = squared_distance(&rows[i], r);
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, j));
                }
            }
            best.map(|(_, j)| j)
        })
        .collect()
}

/// Removes `majority` rows that form a Tomek link (mutual nearest neighbours
/// of different classes). Rows of every other class are kept.
pub fn tomek_undersample_class<T: Scalar>(data: &ClassDataset<T>, majority: Class) -> ClassDataset<T> {
    let nn = nearest_neighbours(&data.x);
    let keep: Vec<usize> = (0..data.len())
        .filter(|&i| {
            let linked = nn[i].is_some_and(|j| nn[j] == Some(i) && data.y[j] != data.y[i]);
            !(linked && data.y[i] == majority)
        })
        .collect();
    data.subset(&keep)
}

/// Tomek-link undersampling of the most frequent class.
pub fn tomek_undersample<T: Scalar>(data: &ClassDataset<T>) -> ClassDataset<T> {
    let counts = data.class_counts();
    if counts.iter().filter(|&&c| c > 0).count() < 2 {
        return data.clone();
    }
    let majority = (0..3).rev().max_by_key(|&i| counts[i]).map(Class::from_index).unwrap();
    tomek_undersample_class(data, majority)
}

/// SMOTE on the minority classes, then Tomek links on the original majority
/// class. Neighbour searches run in standard-scaled space; the returned rows
/// are back in native units.
pub fn rebalance<T: Scalar>(data: &ClassDataset<T>, k: usize, seed: u64) -> Result<ClassDataset<T>> {
    let counts = data.class_counts();
    let majority = (0..3).rev().max_by_key(|&i| counts[i]).map(Class::from_index).unwrap();
    let scaler = ScalerParams::fit(&data.x)?;
    let scaled = Dataset {
        x: scaler.transform_all(&data.x),
        y: data.y.clone(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let over = smote_oversample(&scaled, None, k, &mut rng)?;
    let cleaned = tomek_undersample_class(&over, majority);
    Ok(Dataset {
        x: scaler.inverse_all(&cleaned.x),
        y: cleaned.y,
    })
}
