//! Monte Carlo estimators and quadrature rules shared across the library:
//! sample cumulants with batch-means standard errors, the exact empirical
//! Wasserstein-1 distance, a dictionary lower bound for the smooth
//! Wasserstein-3 distance, and Gauss-Laguerre / Gauss-Legendre rules.

use serde::{Deserialize, Serialize};

use crate::bg::CumulantVector;
use crate::error::{Error, Result};
use crate::linalg;
use crate::testfn::TestFunction;

/// Monte Carlo run configuration. `n_samples` must be divisible by
/// `n_batches` so batch means are well defined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MCConfig {
    pub n_samples: usize,
    pub seed: u64,
    pub n_batches: usize,
}

impl MCConfig {
    pub fn new(n_samples: usize, seed: u64, n_batches: usize) -> Result<Self> {
        if n_batches < 8 {
            return Err(Error::ConfigInvalid(format!(
                "need at least 8 batches, got {n_batches}"
            )));
        }
        if n_samples == 0 || !n_samples.is_multiple_of(n_batches) {
            return Err(Error::ConfigInvalid(format!(
                "n_samples ({n_samples}) must be a positive multiple of n_batches ({n_batches})"
            )));
        }
        Ok(MCConfig {
            n_samples,
            seed,
            n_batches,
        })
    }

    /// Default batching (32 batches) for a sample count divisible by 32.
    pub fn with_defaults(n_samples: usize, seed: u64) -> Result<Self> {
        MCConfig::new(n_samples, seed, 32)
    }
}

/// A point estimate with its standard error and sample count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorReport {
    pub estimate: f64,
    pub se: f64,
    pub n: usize,
}

/// Cumulant estimates of orders `2..=max_order` via the moment-to-cumulant
/// polynomial on central moments; order 1 is the sample mean and orders above
/// `max_order` are left at zero. Standard errors come from batch means over
/// `cfg.n_batches` contiguous batches.
pub fn sample_cumulants(
    samples: &[f64],
    max_order: usize,
    cfg: &MCConfig,
) -> Result<CumulantVector> {
    if !(2..=6).contains(&max_order) {
        return Err(Error::OrderOutOfRange {
            order: max_order as i64,
            min: 2,
            max: 6,
        });
    }
    let n = samples.len();
    let need = 1000 * max_order;
    if n < need {
        return Err(Error::TooFewSamples { got: n, need });
    }
    if !n.is_multiple_of(cfg.n_batches) {
        return Err(Error::ConfigInvalid(format!(
            "sample count {n} not divisible by n_batches {}",
            cfg.n_batches
        )));
    }

    let global = cumulants_of(samples, max_order);

    let batch_len = n / cfg.n_batches;
    let mut batch_kappas = vec![[0.0f64; 6]; cfg.n_batches];
    for (b, chunk) in samples.chunks_exact(batch_len).enumerate() {
        batch_kappas[b] = cumulants_of(chunk, max_order);
    }
    let mut se = [0.0f64; 6];
    for j in 0..6 {
        let vals: Vec<f64> = batch_kappas.iter().map(|k| k[j]).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
            / (vals.len() - 1) as f64;
        se[j] = (var / vals.len() as f64).sqrt();
    }

    Ok(CumulantVector::estimated(global, se))
}

/// Biased (plug-in) cumulants through `max_order`, with kappa_1 = mean.
fn cumulants_of(samples: &[f64], max_order: usize) -> [f64; 6] {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let mut m = [0.0f64; 7];
    for &x in samples {
        let d = x - mean;
        let d2 = d * d;
        let d3 = d2 * d;
        m[2] += d2;
        m[3] += d3;
        if max_order >= 4 {
            m[4] += d2 * d2;
        }
        if max_order >= 5 {
            m[5] += d2 * d3;
        }
        if max_order >= 6 {
            m[6] += d3 * d3;
        }
    }
    for v in m.iter_mut().skip(2) {
        *v /= n;
    }
    let mut kappa = [0.0f64; 6];
    kappa[0] = mean;
    kappa[1] = m[2];
    if max_order >= 3 {
        kappa[2] = m[3];
    }
    if max_order >= 4 {
        kappa[3] = m[4] - 3.0 * m[2] * m[2];
    }
    if max_order >= 5 {
        kappa[4] = m[5] - 10.0 * m[2] * m[3];
    }
    if max_order >= 6 {
        kappa[5] = m[6] - 15.0 * m[2] * m[4] - 10.0 * m[3] * m[3] + 30.0 * m[2].powi(3);
    }
    kappa
}

/// Exact Wasserstein-1 distance between the empirical laws of `a` and `b`.
///
/// For equal sample counts this is the mean absolute difference of sorted
/// samples; for unequal counts the quantile functions are integrated over the
/// merged quantile breakpoints, which is the exact optimal coupling in one
/// dimension.
pub fn wasserstein1_empirical(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| x.partial_cmp(y).expect("samples must not contain NaN"));
    b.sort_by(|x, y| x.partial_cmp(y).expect("samples must not contain NaN"));

    let (m, n) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut covered = 0.0;
    let mut total = 0.0;
    while i < m && j < n {
        let qa = (i + 1) as f64 / m as f64;
        let qb = (j + 1) as f64 / n as f64;
        let q = qa.min(qb);
        total += (a[i] - b[j]).abs() * (q - covered);
        covered = q;
        if qa <= q {
            i += 1;
        }
        if qb <= q {
            j += 1;
        }
    }
    Ok(total)
}

/// Dictionary lower bound for the smooth Wasserstein-3 distance between the
/// laws behind `a` and `b`: the largest `|mean_a h - mean_b h|` over the
/// dictionary, with the CLT standard error of the maximizing difference.
///
/// Every dictionary member must certify membership in W3.
pub fn smooth_w3_lower_bound(
    a: &[f64],
    b: &[f64],
    dictionary: &[TestFunction],
) -> Result<EstimatorReport> {
    if dictionary.is_empty() {
        return Err(Error::EmptyDictionary);
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput);
    }
    for h in dictionary {
        if !h.is_w3() {
            return Err(Error::DomainError(format!(
                "dictionary member {} is not in W3",
                h.label()
            )));
        }
    }

    let mut best = f64::NEG_INFINITY;
    let mut best_se = 0.0;
    for h in dictionary {
        let (ma, va) = mean_var(a, |x| h.eval(x));
        let (mb, vb) = mean_var(b, |x| h.eval(x));
        let diff = (ma - mb).abs();
        if diff > best {
            best = diff;
            best_se = (va / a.len() as f64 + vb / b.len() as f64).sqrt();
        }
    }
    Ok(EstimatorReport {
        estimate: best,
        se: best_se,
        n: a.len().min(b.len()),
    })
}

fn mean_var(samples: &[f64], f: impl Fn(f64) -> f64) -> (f64, f64) {
    let n = samples.len() as f64;
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for &x in samples {
        let v = f(x);
        sum += v;
        sumsq += v * v;
    }
    let mean = sum / n;
    let var = ((sumsq / n - mean * mean) * n / (n - 1.0).max(1.0)).max(0.0);
    (mean, var)
}

const MAX_QUADRATURE_ORDER: usize = 256;

/// Gauss-Laguerre nodes and weights: exact for
/// `int_0^inf e^{-x} p(x) dx` over polynomials of degree `<= 2n - 1`.
///
/// Nodes ascend. Eigenvalues of the Jacobi matrix seed Newton iterations on
/// the exponentially scaled Laguerre recurrence, and weights come from the
/// closed form `w_i = x_i / ((n+1) L_{n+1}(x_i))^2`.
pub fn gauss_laguerre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(1..=MAX_QUADRATURE_ORDER).contains(&n) {
        return Err(Error::OrderOutOfRange {
            order: n as i64,
            min: 1,
            max: MAX_QUADRATURE_ORDER as i64,
        });
    }
    let mut jac = vec![0.0; n * n];
    for i in 0..n {
        jac[i * n + i] = (2 * i + 1) as f64;
        if i + 1 < n {
            let off = (i + 1) as f64;
            jac[i * n + i + 1] = off;
            jac[(i + 1) * n + i] = off;
        }
    }
    let (mut nodes, _) = golub_welsch(&jac, n, 1.0)?;

    let mut weights = vec![0.0; n];
    for (node, weight) in nodes.iter_mut().zip(weights.iter_mut()) {
        let mut x = *node;
        for _ in 0..6 {
            let (ln, ln_prev) = scaled_laguerre(n, x);
            // L_n'(x) e^{-x/2} = n (l_n - l_{n-1}) / x in the scaled basis.
            let derivative = n as f64 * (ln - ln_prev) / x;
            if derivative == 0.0 {
                break;
            }
            let step = ln / derivative;
            x -= step;
            if step.abs() <= 1e-15 * x.abs() {
                break;
            }
        }
        *node = x;
        let (lnext, _) = scaled_laguerre(n + 1, x);
        let denom = (n + 1) as f64 * lnext;
        *weight = x * (-x).exp() / (denom * denom);
    }
    Ok((nodes, weights))
}

/// `(L_n(x) e^{-x/2}, L_{n-1}(x) e^{-x/2})` by the three-term recurrence;
/// scaling keeps the values representable for all nodes.
fn scaled_laguerre(n: usize, x: f64) -> (f64, f64) {
    let scale = (-0.5 * x).exp();
    let mut prev = scale; // L_0
    let mut current = (1.0 - x) * scale; // L_1
    if n == 0 {
        return (prev, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - x) * current - kf * prev) / (kf + 1.0);
        prev = current;
        current = next;
    }
    (current, prev)
}

/// Gauss-Legendre nodes and weights on `(-1, 1)`: exact for polynomials of
/// degree `<= 2n - 1`.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(1..=MAX_QUADRATURE_ORDER).contains(&n) {
        return Err(Error::OrderOutOfRange {
            order: n as i64,
            min: 1,
            max: MAX_QUADRATURE_ORDER as i64,
        });
    }
    let mut jac = vec![0.0; n * n];
    for k in 1..n {
        let kf = k as f64;
        let off = kf / (4.0 * kf * kf - 1.0).sqrt();
        jac[(k - 1) * n + k] = off;
        jac[k * n + k - 1] = off;
    }
    golub_welsch(&jac, n, 2.0)
}

/// Gauss-Legendre rule mapped to `(0, 1)`.
pub fn gauss_legendre_01(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let (nodes, weights) = gauss_legendre(n)?;
    Ok((
        nodes.iter().map(|x| 0.5 * (x + 1.0)).collect(),
        weights.iter().map(|w| 0.5 * w).collect(),
    ))
}

fn golub_welsch(jacobi_matrix: &[f64], n: usize, mu0: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let eigen = linalg::jacobi_eigen(jacobi_matrix, n)?;
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let v0 = eigen.vector_entry(0, k);
            (eigen.values[k], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite nodes"));
    Ok(pairs.into_iter().unzip())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn config_requires_divisibility() {
        assert!(MCConfig::new(1000, 0, 32).is_err());
        assert!(MCConfig::new(1024, 0, 32).is_ok());
        assert!(MCConfig::new(64, 0, 4).is_err());
    }

    #[test]
    fn constant_samples_have_zero_cumulants() {
        let samples = vec![3.25; 32_000];
        let cfg = MCConfig::with_defaults(samples.len(), 0).unwrap();
        let cum = sample_cumulants(&samples, 6, &cfg).unwrap();
        assert_abs_diff_eq!(cum.kappa(1), 3.25, epsilon = 1e-12);
        for j in 2..=6 {
            assert_abs_diff_eq!(cum.kappa(j), 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(cum.se(j).unwrap(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn too_few_samples_rejected() {
        let samples = vec![0.0; 512];
        let cfg = MCConfig::new(512, 0, 8).unwrap();
        assert!(matches!(
            sample_cumulants(&samples, 6, &cfg),
            Err(Error::TooFewSamples { .. })
        ));
    }

    #[test]
    fn wasserstein_identical_and_shifted() {
        let a: Vec<f64> = (0..100).map(|i| (i as f64 * 0.77).sin()).collect();
        assert_abs_diff_eq!(wasserstein1_empirical(&a, &a).unwrap(), 0.0, epsilon = 0.0);
        let b: Vec<f64> = a.iter().map(|x| x + 2.5).collect();
        assert_relative_eq!(
            wasserstein1_empirical(&a, &b).unwrap(),
            2.5,
            max_relative = 1e-12
        );
    }

    #[test]
    fn wasserstein_tiny_exact_coupling() {
        let w = wasserstein1_empirical(&[0.0, 1.0], &[0.0, 2.0]).unwrap();
        assert_abs_diff_eq!(w, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn wasserstein_unequal_sizes_matches_refined_equal_version() {
        // {0, 1} as a 2-sample vs the same law as a 4-sample.
        let w = wasserstein1_empirical(&[0.0, 1.0], &[0.0, 0.0, 1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(w, 0.0, epsilon = 1e-15);
        assert!(matches!(
            wasserstein1_empirical(&[], &[1.0]),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn gauss_laguerre_small_orders() {
        let (nodes, weights) = gauss_laguerre(1).unwrap();
        assert_abs_diff_eq!(nodes[0], 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(weights[0], 1.0, epsilon = 1e-13);

        let (nodes, weights) = gauss_laguerre(2).unwrap();
        let r2 = 2.0f64.sqrt();
        assert_abs_diff_eq!(nodes[0], 2.0 - r2, epsilon = 1e-12);
        assert_abs_diff_eq!(nodes[1], 2.0 + r2, epsilon = 1e-12);
        assert_abs_diff_eq!(weights[0], (2.0 + r2) / 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(weights[1], (2.0 - r2) / 4.0, epsilon = 1e-12);

        // Degree-3 exactness with two nodes: integral of x^3 e^{-x} = 6.
        let cubic: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| w * x.powi(3))
            .sum();
        assert_relative_eq!(cubic, 6.0, max_relative = 1e-13);

        assert!(matches!(
            gauss_laguerre(0),
            Err(Error::OrderOutOfRange { .. })
        ));
        assert!(gauss_laguerre(257).is_err());
    }

    #[test]
    fn gauss_legendre_basics() {
        let (nodes, weights) = gauss_legendre(5).unwrap();
        assert_relative_eq!(weights.iter().sum::<f64>(), 2.0, max_relative = 1e-13);
        // Odd polynomial integrates to zero by symmetry.
        let v: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| w * x.powi(7))
            .sum();
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-14);
        // Degree-8 exactness: integral of x^8 over (-1,1) = 2/9.
        let v: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| w * x.powi(8))
            .sum();
        assert_relative_eq!(v, 2.0 / 9.0, max_relative = 1e-12);
    }

    #[test]
    fn lower_bound_separates_distant_laws() {
        use rand::SeedableRng;
        use rand_distr::Distribution;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(5);
        let normal = rand_distr::Normal::new(0.0, 1.0).unwrap();
        let a: Vec<f64> = (0..200_000).map(|_| normal.sample(&mut rng)).collect();
        let b: Vec<f64> = a.iter().map(|x| x + 10.0).collect();
        let dict = TestFunction::dictionary();
        let report = smooth_w3_lower_bound(&a, &b, &dict).unwrap();
        assert!(report.estimate > 0.5, "estimate {}", report.estimate);

        let same = smooth_w3_lower_bound(&a, &a, &dict).unwrap();
        assert!(same.estimate <= 5.0 * same.se.max(1e-12));

        assert!(matches!(
            smooth_w3_lower_bound(&a, &b, &[]),
            Err(Error::EmptyDictionary)
        ));
    }
}
