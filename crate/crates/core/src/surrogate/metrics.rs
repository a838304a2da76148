use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::Class;

/// `m[truth][pred]` counts, classes in code order.
pub fn confusion_matrix(pred: &[Class], truth: &[Class]) -> [[usize; 3]; 3] {
    let mut m = [[0; 3]; 3];
    for (p, t) in pred.iter().zip(truth) {
        m[t.index()][p.index()] += 1;
    }
    m
}

/// Macro-averaged F1 over the classes present in either `pred` or `truth`.
pub fn f1_score(pred: &[Class], truth: &[Class]) -> Result<f64> {
    if pred.is_empty() {
        return Err(Error::InsufficientData("F1 of an empty label set".into()));
    }
    if pred.len() != truth.len() {
        return Err(Error::InvalidConfig(format!(
            "{} predictions for {} labels",
            pred.len(),
            truth.len()
        )));
    }
    let m = confusion_matrix(pred, truth);
    let mut sum = 0.0;
    let mut n = 0;
    for c in 0..3 {
        let tp = m[c][c];
        let fn_: usize = m[c].iter().sum::<usize>() - tp;
        let fp: usize = (0..3).map(|t| m[t][c]).sum::<usize>() - tp;
        if tp + fn_ + fp == 0 {
            continue;
        }
        sum += (2 * tp) as f64 / (2 * tp + fp + fn_) as f64;
        n += 1;
    }
    Ok(sum / n as f64)
}

/// Pair counts behind tau-b. `n0` is the number of pairs, `ties_a`/`ties_b`
/// the pairs tied in one list, `ties_joint` the pairs tied in both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KendallCounts {
    pub n0: u64,
    pub ties_a: u64,
    pub ties_b: u64,
    pub ties_joint: u64,
    pub discordant: u64,
}

impl KendallCounts {
    pub fn concordant(&self) -> u64 {
        self.n0 + self.ties_joint - self.ties_a - self.ties_b - self.discordant
    }

    pub fn tau_b(&self) -> Result<f64> {
        let da = self.n0 - self.ties_a;
        let db = self.n0 - self.ties_b;
        if da == 0 || db == 0 {
            return Err(Error::UndefinedCorrelation("one input is constant".into()));
        }
        let s = self.concordant() as f64 - self.discordant as f64;
        Ok(s / ((da as f64) * (db as f64)).sqrt())
    }

    /// Knight's O(n log n) counting.
    pub fn of(a: &[f64], b: &[f64]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::InvalidConfig(format!("lengths {} and {}", a.len(), b.len())));
        }
        if a.len() < 2 {
            return Err(Error::InsufficientData("Kendall tau needs at least two pairs".into()));
        }
        if a.iter().chain(b).any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("non-finite value in Kendall input".into()));
        }
        let n = a.len() as u64;
        let mut idx: Vec<usize> = (0..a.len()).collect();
        idx.sort_by(|&i, &j| a[i].total_cmp(&a[j]).then(b[i].total_cmp(&b[j])));

        let pairs = |run: u64| run * (run - 1) / 2;
        let (mut ties_a, mut ties_joint) = (0, 0);
        let (mut run_a, mut run_ab) = (1u64, 1u64);
        for w in idx.windows(2) {
            let (i, j) = (w[0], w[1]);
            if a[i] == a[j] {
                run_a += 1;
                if b[i] == b[j] {
                    run_ab += 1;
                } else {
                    ties_joint += pairs(run_ab);
                    run_ab = 1;
                }
            } else {
                ties_a += pairs(run_a);
                ties_joint += pairs(run_ab);
                run_a = 1;
                run_ab = 1;
            }
        }
        ties_a += pairs(run_a);
        ties_joint += pairs(run_ab);

        let mut keys: Vec<f64> = idx.iter().map(|&i| b[i]).collect();
        let mut buf = keys.clone();
        let discordant = merge_count(&mut keys, &mut buf);

        let mut ties_b = 0;
        let mut run_b = 1u64;
        for w in keys.windows(2) {
            if w[0] == w[1] {
                run_b += 1;
            } else {
                ties_b += pairs(run_b);
                run_b = 1;
            }
        }
        ties_b += pairs(run_b);

        Ok(KendallCounts {
            n0: pairs(n),
            ties_a,
            ties_b,
            ties_joint,
            discordant,
        })
    }
}

/// Stable merge sort returning the number of strict inversions.
fn merge_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = {
        let (l, r) = v.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        merge_count(l, bl) + merge_count(r, br)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..].copy_from_slice(&v[j..]);
    v.copy_from_slice(&buf[..n]);
    swaps
}

/// Kendall rank correlation, tau-b.
pub fn kendall_tau(a: &[f64], b: &[f64]) -> Result<f64> {
    KendallCounts::of(a, b)?.tau_b()
}
