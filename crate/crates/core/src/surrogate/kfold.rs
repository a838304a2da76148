use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::signal::Class;

/// `(train, validation)` row indices.
pub type Split = (Vec<usize>, Vec<usize>);

fn fold_assignment(labels: &[Class], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!("k-fold needs k >= 2, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold = vec![0; labels.len()];
    let mut next = 0;
    for class in Class::ALL {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.is_empty() {
            continue;
        }
        if members.len() < k {
            return Err(Error::InsufficientData(format!(
                "class {class} has {} rows, fewer than {k} folds",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        for i in members {
            fold[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(fold)
}

fn splits_from(fold: &[usize], k: usize) -> Vec<Split> {
    (0..k)
        .map(|f| {
            let (val, train): (Vec<usize>, Vec<usize>) = (0..fold.len()).partition(|&i| fold[i] == f);
            (train, val)
        })
        .collect()
}

/// Stratified k-fold: each class is shuffled and dealt round-robin, the
/// dealing pointer carrying over between classes so fold sizes differ by at
/// most one.
pub fn stratified_kfold(labels: &[Class], k: usize, seed: u64) -> Result<Vec<Split>> {
    Ok(splits_from(&fold_assignment(labels, k, seed)?, k))
}

/// Plain shuffled k-fold.
pub fn kfold(n: usize, k: usize, seed: u64) -> Result<Vec<Split>> {
    if k < 2 || n < k {
        return Err(Error::InsufficientData(format!("{n} rows for {k} folds")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold = vec![0; n];
    for (pos, i) in idx.into_iter().enumerate() {
        fold[i] = pos % k;
    }
    Ok(splits_from(&fold, k))
}

/// Stratified holdout: per class, the first `round(n_c·test_fraction)`
/// shuffled members go to the test side.
pub fn stratified_split(labels: &[Class], test_fraction: f64, seed: u64) -> Result<Split> {
    if !(0.0..1.0).contains(&test_fraction) {
        return Err(Error::InvalidConfig(format!("test fraction {test_fraction}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for class in Class::ALL {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        let n_test = (members.len() as f64 * test_fraction).round() as usize;
        test.extend_from_slice(&members[..n_test]);
        train.extend_from_slice(&members[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}
