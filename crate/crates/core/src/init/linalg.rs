//! Small dense routines for the mixture model; matrices are row-major `Vec<Vec<T>>`.

use crate::scalar::Scalar;

/// Lower Cholesky factor of a symmetric positive-definite matrix, or `None`
/// if a pivot is not strictly positive.
pub fn cholesky<T: Scalar>(a: &[Vec<T>]) -> Option<Vec<Vec<T>>> {
    let n = a.len();
    let mut l = vec![vec![T::zero(); n]; n];
    for j in 0..n {
        let mut d = a[j][j];
        for k in 0..j {
            d -= l[j][k] * l[j][k];
        }
        if !(d > T::zero()) || !d.is_finite() {
            return None;
        }
        let djj = d.sqrt();
        l[j][j] = djj;
        for i in j + 1..n {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            l[i][j] = s / djj;
        }
    }
    Some(l)
}

/// Cholesky factor of a positive semi-definite matrix; columns whose pivot
/// vanishes (relative to the largest diagonal entry) are left at zero.
pub fn cholesky_psd<T: Scalar>(a: &[Vec<T>]) -> Vec<Vec<T>> {
    let n = a.len();
    let scale = (0..n).map(|i| a[i][i].abs()).fold(T::zero(), T::max);
    let eps = scale * T::epsilon() * T::of_usize(n.max(1)) * T::of(16.0);
    let mut l = vec![vec![T::zero(); n]; n];
    for j in 0..n {
        let mut d = a[j][j];
        for k in 0..j {
            d -= l[j][k] * l[j][k];
        }
        if d <= eps {
            continue;
        }
        let djj = d.sqrt();
        l[j][j] = djj;
        for i in j + 1..n {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            l[i][j] = s / djj;
        }
    }
    l
}

/// `log det(A)` from its Cholesky factor.
pub fn log_det_from_cholesky<T: Scalar>(l: &[Vec<T>]) -> T {
    T::of(2.0) * (0..l.len()).map(|i| l[i][i].ln()).sum::<T>()
}

/// Solves `L y = b` by forward substitution.
pub fn forward_solve<T: Scalar>(l: &[Vec<T>], b: &[T]) -> Vec<T> {
    let mut y = Vec::with_capacity(b.len());
    for i in 0..b.len() {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * y[k];
        }
        y.push(s / l[i][i]);
    }
    y
}

/// `L z` for lower-triangular `L`.
pub fn lower_mul<T: Scalar>(l: &[Vec<T>], z: &[T]) -> Vec<T> {
    (0..l.len()).map(|i| (0..=i).map(|k| l[i][k] * z[k]).sum()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gram(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = m.len();
        (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| m[i][k] * m[j][k]).sum()).collect())
            .collect()
    }

    #[test]
    fn known_factor() {
        let a = vec![vec![4.0, 2.0], vec![2.0, 3.0]];
        let l = cholesky(&a).unwrap();
        assert_eq!(l[0][0], 2.0);
        assert_eq!(l[1][0], 1.0);
        assert!((l[1][1] - 2f64.sqrt()).abs() < 1e-15);
        assert!((log_det_from_cholesky(&l) - 8f64.ln()).abs() < 1e-14);
        let y = forward_solve(&l, &[2.0, 1.0 + 2f64.sqrt()]);
        assert!((y[0] - 1.0).abs() < 1e-15 && (y[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn singular_rejected_but_psd_factor_exists() {
        let a = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        assert!(cholesky(&a).is_none());
        let l = cholesky_psd(&a);
        assert_eq!(gram(&l), a);
        assert!(cholesky_psd(&vec![vec![0.0; 3]; 3]).iter().flatten().all(|&v| v == 0.0));
    }

    proptest! {
        #[test]
        fn reconstructs_gram_matrices(m in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 4), 4)) {
            let mut a = gram(&m);
            for (i, row) in a.iter_mut().enumerate() {
                row[i] += 0.1;
            }
            let l = cholesky(&a).unwrap();
            let back = gram(&l);
            for i in 0..4 {
                for j in 0..4 {
                    prop_assert!((back[i][j] - a[i][j]).abs() < 1e-9);
                }
            }
        }
    }
}
