use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::linalg::{cholesky, cholesky_psd, forward_solve, log_det_from_cholesky, lower_mul};
use crate::error::{Error, Result};
use crate::scalar::{squared_distance, Scalar};

/// Full-covariance Gaussian mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct GaussianMixture<T: Scalar> {
    pub weights: Vec<T>,
    pub means: Vec<Vec<T>>,
    pub covariances: Vec<Vec<Vec<T>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmConfig {
    /// Stop once the mean per-sample log-likelihood gains less than this.
    pub tol: f64,
    pub max_iter: usize,
    /// Added to every covariance diagonal.
    pub reg_covar: f64,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig {
            tol: 1e-6,
            max_iter: 200,
            reg_covar: 1e-6,
        }
    }
}

/// Mean per-sample log-likelihood after each E-step; the last entry belongs
/// to the returned parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmTrace {
    pub log_likelihood: Vec<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BicScore {
    pub n_components: usize,
    pub bic: f64,
}

struct Factored<T> {
    log_norm: Vec<T>,
    chol: Vec<Vec<Vec<T>>>,
}

impl<T: Scalar> GaussianMixture<T> {
    pub fn n_components(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    /// Free parameters: weights, means and symmetric covariances.
    pub fn n_parameters(&self) -> usize {
        let (k, d) = (self.n_components(), self.dim());
        k - 1 + k * d + k * d * (d + 1) / 2
    }

    fn factor(&self) -> Result<Factored<T>> {
        let d = T::of_usize(self.dim());
        let half_log_2pi = T::of(0.5 * (2.0 * std::f64::consts::PI).ln());
        let mut out = Factored {
            log_norm: Vec::with_capacity(self.n_components()),
            chol: Vec::with_capacity(self.n_components()),
        };
        for (j, cov) in self.covariances.iter().enumerate() {
            let l = cholesky(cov).ok_or_else(|| Error::Fit(format!("component {j} covariance is singular")))?;
            let log_det = log_det_from_cholesky(&l);
            out.log_norm
                .push(self.weights[j].ln() - d * half_log_2pi - T::of(0.5) * log_det);
            out.chol.push(l);
        }
        Ok(out)
    }

    /// Per-component weighted log-densities of `x`, `log(w_j N(x|j))`.
    fn component_log_probs(&self, f: &Factored<T>, x: &[T], out: &mut [T]) {
        let mut diff = vec![T::zero(); x.len()];
        for j in 0..self.n_components() {
            for (t, (&a, &m)) in diff.iter_mut().zip(x.iter().zip(&self.means[j])) {
                *t = a - m;
            }
            let y = forward_solve(&f.chol[j], &diff);
            let maha: T = y.iter().map(|&v| v * v).sum();
            out[j] = f.log_norm[j] - T::of(0.5) * maha;
        }
    }

    /// Mean per-sample log-likelihood of `data`.
    pub fn mean_log_likelihood(&self, data: &[Vec<T>]) -> Result<f64> {
        let f = self.factor()?;
        let mut lp = vec![T::zero(); self.n_components()];
        let mut total = 0.0;
        for x in data {
            self.component_log_probs(&f, x, &mut lp);
            total += log_sum_exp(&lp).as_f64();
        }
        Ok(total / data.len() as f64)
    }

    /// Bayesian information criterion; lower is better.
    pub fn bic(&self, data: &[Vec<T>]) -> Result<f64> {
        let n = data.len() as f64;
        Ok(-2.0 * n * self.mean_log_likelihood(data)? + self.n_parameters() as f64 * n.ln())
    }

    /// Draws `n` points: a component by weight, then a multivariate normal
    /// draw `mean + L z`. Degenerate covariances are allowed.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Vec<T>> {
        let factors: Vec<Vec<Vec<T>>> = self.covariances.iter().map(|c| cholesky_psd(c)).collect();
        let total: f64 = self.weights.iter().map(|w| w.as_f64()).sum();
        (0..n)
            .map(|_| {
                let u = rng.random::<f64>() * total;
                let mut acc = 0.0;
                let mut j = self.n_components() - 1;
                for (i, w) in self.weights.iter().enumerate() {
                    acc += w.as_f64();
                    if u < acc {
                        j = i;
                        break;
                    }
                }
                let z: Vec<T> = (0..self.dim())
                    .map(|_| T::of(rng.sample::<f64, _>(StandardNormal)))
                    .collect();
                lower_mul(&factors[j], &z)
                    .into_iter()
                    .zip(&self.means[j])
                    .map(|(a, &m)| a + m)
                    .collect()
            })
            .collect()
    }

    /// Index of the most responsible component for `x`.
    pub fn predict(&self, x: &[T]) -> Result<usize> {
        let f = self.factor()?;
        let mut lp = vec![T::zero(); self.n_components()];
        self.component_log_probs(&f, x, &mut lp);
        Ok((0..lp.len()).fold(0, |b, j| if lp[j] > lp[b] { j } else { b }))
    }
}

fn log_sum_exp<T: Scalar>(v: &[T]) -> T {
    let m = v.iter().copied().fold(T::neg_infinity(), T::max);
    if m == T::neg_infinity() {
        return m;
    }
    m + v.iter().map(|&a| (a - m).exp()).sum::<T>().ln()
}

/// Seeds centres with k-means++ and returns a hard assignment to the nearest.
fn kmeans_pp_assignment<T: Scalar, R: Rng + ?Sized>(data: &[Vec<T>], k: usize, rng: &mut R) -> Vec<usize> {
    let n = data.len();
    let mut centres = vec![rng.random_range(0..n)];
    let mut d2: Vec<f64> = data
        .iter()
        .map(|x| squared_distance(x, &data[centres[0]]).as_f64())
        .collect();
    while centres.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let u = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if u < acc {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        centres.push(next);
        for (i, x) in data.iter().enumerate() {
            d2[i] = d2[i].min(squared_distance(x, &data[next]).as_f64());
        }
    }
    data.iter()
        .map(|x| {
            let mut best = 0;
            let mut best_d = T::infinity();
            for (c, &idx) in centres.iter().enumerate() {
                let d = squared_distance(x, &data[idx]);
                if d < best_d {
                    best = c;
                    best_d = d;
                }
            }
            best
        })
        .collect()
}

fn m_step<T: Scalar>(data: &[Vec<T>], resp: &[Vec<T>], reg: T) -> GaussianMixture<T> {
    let (n, d, k) = (data.len(), data[0].len(), resp[0].len());
    let tiny = T::of(10.0) * T::epsilon();
    let mut nk = vec![tiny; k];
    let mut means = vec![vec![T::zero(); d]; k];
    for (x, r) in data.iter().zip(resp) {
        for j in 0..k {
            nk[j] += r[j];
            for (m, &v) in means[j].iter_mut().zip(x) {
                *m += r[j] * v;
            }
        }
    }
    for j in 0..k {
        for m in &mut means[j] {
            *m /= nk[j];
        }
    }
    let mut covs = vec![vec![vec![T::zero(); d]; d]; k];
    let mut diff = vec![T::zero(); d];
    for (x, r) in data.iter().zip(resp) {
        for j in 0..k {
            for ((t, &a), &m) in diff.iter_mut().zip(x).zip(&means[j]) {
                *t = a - m;
            }
            let c = &mut covs[j];
            for a in 0..d {
                let ra = r[j] * diff[a];
                for b in 0..=a {
                    c[a][b] += ra * diff[b];
                }
            }
        }
    }
    for j in 0..k {
        let c = &mut covs[j];
        for a in 0..d {
            for b in 0..=a {
                c[a][b] /= nk[j];
                c[b][a] = c[a][b];
            }
            c[a][a] += reg;
        }
    }
    let weights = nk.iter().map(|&v| v / T::of_usize(n)).collect();
    GaussianMixture {
        weights,
        means,
        covariances: covs,
    }
}

/// E-step: fills responsibilities and returns the mean log-likelihood.
fn e_step<T: Scalar>(gmm: &GaussianMixture<T>, data: &[Vec<T>], resp: &mut [Vec<T>]) -> Result<f64> {
    let f = gmm.factor()?;
    let mut total = 0.0;
    for (x, r) in data.iter().zip(resp.iter_mut()) {
        gmm.component_log_probs(&f, x, r);
        let lse = log_sum_exp(r);
        total += lse.as_f64();
        for v in r.iter_mut() {
            *v = (*v - lse).exp();
        }
    }
    Ok(total / data.len() as f64)
}

/// Expectation-maximisation for a `k`-component full-covariance mixture.
pub fn fit_gmm_em_with<T: Scalar>(
    data: &[Vec<T>],
    k: usize,
    seed: u64,
    cfg: &EmConfig,
) -> Result<(GaussianMixture<T>, EmTrace)> {
    let n = data.len();
    let d = data.first().map_or(0, Vec::len);
    if k == 0 || d == 0 {
        return Err(Error::Fit(format!("{k} components over {d} dimensions")));
    }
    if n <= k * (d + 1) {
        return Err(Error::Fit(format!(
            "{n} rows cannot support {k} components in {d} dimensions"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = kmeans_pp_assignment(data, k, &mut rng);
    let mut resp: Vec<Vec<T>> = labels
        .iter()
        .map(|&c| (0..k).map(|j| if j == c { T::one() } else { T::zero() }).collect())
        .collect();
    let reg = T::of(cfg.reg_covar);
    let mut gmm = m_step(data, &resp, reg);
    let mut trace = EmTrace {
        log_likelihood: Vec::new(),
        converged: false,
    };
    for _ in 0..cfg.max_iter {
        let ll = e_step(&gmm, data, &mut resp)?;
        let gain = trace.log_likelihood.last().map(|&prev| ll - prev);
        trace.log_likelihood.push(ll);
        if gain.is_some_and(|g| g < cfg.tol) {
            trace.converged = true;
            break;
        }
        gmm = m_step(data, &resp, reg);
    }
    Ok((gmm, trace))
}

pub fn fit_gmm_em<T: Scalar>(data: &[Vec<T>], k: usize, seed: u64) -> Result<(GaussianMixture<T>, EmTrace)> {
    fit_gmm_em_with(data, k, seed, &EmConfig::default())
}

/// Fits every admissible component count in `1..=max_k` and keeps the
/// lowest BIC. Counts that fail to fit are skipped.
pub fn select_by_bic<T: Scalar>(
    data: &[Vec<T>],
    max_k: usize,
    seed: u64,
) -> Result<(GaussianMixture<T>, Vec<BicScore>)> {
    let d = data.first().map_or(0, Vec::len);
    let mut best: Option<(f64, GaussianMixture<T>)> = None;
    let mut scores = Vec::new();
    let mut last_err = None;
    for k in (1..=max_k).filter(|&k| data.len() > k * (d + 1)) {
        let fitted = fit_gmm_em(data, k, seed).and_then(|(g, _)| g.bic(data).map(|b| (b, g)));
        match fitted {
            Ok((bic, g)) => {
                scores.push(BicScore { n_components: k, bic });
                if best.as_ref().is_none_or(|(b, _)| bic < *b) {
                    best = Some((bic, g));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    match best {
        Some((_, g)) => Ok((g, scores)),
        None => Err(last_err.unwrap_or_else(|| {
            Error::Fit(format!(
                "{} rows are too few for a mixture in {d} dimensions",
                data.len()
            ))
        })),
    }
}

/// `n` draws from `gmm` on a stream seeded by `seed`.
pub fn sample_gmm<T: Scalar>(gmm: &GaussianMixture<T>, n: usize, seed: u64) -> Vec<Vec<T>> {
    gmm.sample(n, &mut ChaCha8Rng::seed_from_u64(seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(rng: &mut ChaCha8Rng, n: usize, centre: &[f64], sd: f64) -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| {
                centre
                    .iter()
                    .map(|&c| c + sd * rng.sample::<f64, _>(StandardNormal))
                    .collect()
            })
            .collect()
    }

    #[test]
    fn single_cloud_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let data = cloud(&mut rng, 400, &[1.0, -2.0], 0.3);
        let (g, trace) = fit_gmm_em(&data, 1, 0).unwrap();
        for dim in 0..2 {
            let col: Vec<f64> = data.iter().map(|r| r[dim]).collect();
            let m = crate::scalar::mean(&col);
            let bound = 3.0 * crate::scalar::std_dev(&col) / (col.len() as f64).sqrt();
            assert!((g.means[0][dim] - m).abs() <= bound);
        }
        assert!(trace.converged);
    }

    #[test]
    fn two_clouds_weights_and_monotone_ll() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut data = cloud(&mut rng, 300, &[-5.0, 0.0], 0.5);
        data.extend(cloud(&mut rng, 100, &[5.0, 1.0], 0.5));
        let (g, trace) = fit_gmm_em(&data, 2, 3).unwrap();
        let mut w: Vec<f64> = g.weights.clone();
        w.sort_by(f64::total_cmp);
        assert!((w[0] - 0.25).abs() < 0.05 && (w[1] - 0.75).abs() < 0.05);
        assert!((g.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        for pair in trace.log_likelihood.windows(2) {
            assert!(pair[1] >= pair[0] - 1e-9);
        }
        let (best, scores) = select_by_bic(&data, 5, 3).unwrap();
        assert_eq!(scores.len(), 5);
        assert!(best.n_components() >= 2);
    }

    #[test]
    fn too_few_rows() {
        let data = vec![vec![0.0, 1.0]; 3];
        assert!(matches!(fit_gmm_em(&data, 1, 0), Err(Error::Fit(_))));
    }

    #[test]
    fn degenerate_component_samples_its_mean() {
        let g = GaussianMixture {
            weights: vec![1.0],
            means: vec![vec![3.0, -1.0]],
            covariances: vec![vec![vec![0.0; 2]; 2]],
        };
        assert!(sample_gmm(&g, 20, 9).iter().all(|x| x == &vec![3.0, -1.0]));
    }

    #[test]
    fn sampling_frequencies_and_determinism() {
        let g = GaussianMixture {
            weights: vec![0.2, 0.5, 0.3],
            means: vec![vec![-100.0], vec![0.0], vec![100.0]],
            covariances: vec![vec![vec![1.0]]; 3],
        };
        let s = sample_gmm(&g, 10_000, 4);
        assert_eq!(s, sample_gmm(&g, 10_000, 4));
        let freq = |f: &dyn Fn(f64) -> bool| s.iter().filter(|x| f(x[0])).count() as f64 / 1e4;
        assert!((freq(&|v| v < -50.0) - 0.2).abs() < 0.02);
        assert!((freq(&|v| v.abs() < 50.0) - 0.5).abs() < 0.02);
        assert!((freq(&|v| v > 50.0) - 0.3).abs() < 0.02);
    }

    #[test]
    fn f32_fit() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let data: Vec<Vec<f32>> = cloud(&mut rng, 200, &[0.0, 0.0, 0.0], 1.0)
            .into_iter()
            .map(|r| r.into_iter().map(|v| v as f32).collect())
            .collect();
        let (g, _) = fit_gmm_em(&data, 2, 0).unwrap();
        assert!((g.weights.iter().sum::<f32>() - 1.0).abs() < 1e-5);
    }
}
