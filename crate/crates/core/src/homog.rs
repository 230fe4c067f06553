//! Homogeneous sums of order two over independent centered innovations,
//! influence functionals, and the pairwise-product U-statistic.
//!
//! `H_2(N, f, Y) = sum_{i != j} f(i, j) Y_i Y_j` for a symmetric coefficient
//! table vanishing on the diagonal. With standard-normal innovations the sum
//! has the law of the second-chaos element whose kernel is the same table,
//! which bridges sample statistics of the sum to exact kernel cumulants.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::chaos::ChaosKernel;
use crate::error::{Error, Result};
use crate::mc::EstimatorReport;

/// Innovation law for the independent sequence `Y`. All built-in laws have
/// mean zero and unit variance; `rho` is the (sup of the) third absolute
/// moment, which the invariance error term needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InnovationLaw {
    StandardNormal,
    Rademacher,
    CenteredUniform,
    /// Carries an explicit third-absolute-moment bound for laws the library
    /// cannot sample.
    UserMoments { rho: f64 },
}

impl InnovationLaw {
    /// Third absolute moment `E |Y|^3`.
    pub fn rho(&self) -> f64 {
        match *self {
            // E|Z|^3 = 2 sqrt(2/pi)
            InnovationLaw::StandardNormal => 2.0 * (2.0 / std::f64::consts::PI).sqrt(),
            InnovationLaw::Rademacher => 1.0,
            // Uniform on [-sqrt(3), sqrt(3)]: E|Y|^3 = 3 sqrt(3) / 4
            InnovationLaw::CenteredUniform => 0.75 * 3.0f64.sqrt(),
            InnovationLaw::UserMoments { rho } => rho,
        }
    }

    fn fill(&self, rng: &mut ChaCha12Rng, out: &mut [f64]) -> Result<()> {
        match *self {
            InnovationLaw::StandardNormal => {
                for slot in out.iter_mut() {
                    *slot = StandardNormal.sample(rng);
                }
            }
            InnovationLaw::Rademacher => {
                for slot in out.iter_mut() {
                    *slot = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                }
            }
            InnovationLaw::CenteredUniform => {
                let half = 3.0f64.sqrt();
                let dist = Uniform::new_inclusive(-half, half);
                for slot in out.iter_mut() {
                    *slot = dist.sample(rng);
                }
            }
            InnovationLaw::UserMoments { .. } => {
                return Err(Error::DomainError(
                    "user-moments innovation law has no sampler".into(),
                ));
            }
        }
        Ok(())
    }
}

/// A homogeneous sum of order two: variable count, symmetric diagonal-free
/// coefficient table, and the innovation law.
#[derive(Debug, Clone)]
pub struct HomogSumSpec {
    table: ChaosKernel,
    innovation: InnovationLaw,
    /// Off-diagonal constant when the table is `c (J - I)`; enables an O(N)
    /// evaluation `c ((sum y)^2 - sum y^2)`.
    uniform_offdiag: Option<f64>,
}

impl HomogSumSpec {
    /// Builds a spec from a row-major `n x n` table. Rejects tables that are
    /// asymmetric or carry nonzero diagonal entries.
    pub fn new(n_vars: usize, table: Vec<f64>, innovation: InnovationLaw) -> Result<Self> {
        if n_vars < 2 {
            return Err(Error::DomainError(
                "homogeneous sums need at least 2 variables".into(),
            ));
        }
        let kernel = ChaosKernel::new(n_vars, table)?;
        for i in 0..n_vars {
            if kernel.entry(i, i) != 0.0 {
                return Err(Error::DomainError(format!(
                    "coefficient table must vanish on the diagonal, entry ({i},{i}) = {}",
                    kernel.entry(i, i)
                )));
            }
        }
        Ok(HomogSumSpec::from_kernel(kernel, innovation))
    }

    fn from_kernel(kernel: ChaosKernel, innovation: InnovationLaw) -> Self {
        let n = kernel.dim();
        let first = kernel.entry(0, 1);
        let uniform = (0..n)
            .all(|i| (0..n).all(|j| i == j || kernel.entry(i, j) == first))
            .then_some(first);
        HomogSumSpec {
            table: kernel,
            innovation,
            uniform_offdiag: uniform,
        }
    }

    pub fn n_vars(&self) -> usize {
        self.table.dim()
    }

    pub fn innovation(&self) -> InnovationLaw {
        self.innovation
    }

    pub fn table(&self) -> &ChaosKernel {
        &self.table
    }

    /// `sum_{i != j} f(i, j) y_i y_j`.
    pub fn eval(&self, y: &[f64]) -> Result<f64> {
        let n = self.n_vars();
        if y.len() != n {
            return Err(Error::DimMismatch {
                left: y.len(),
                right: n,
            });
        }
        if let Some(c) = self.uniform_offdiag {
            let sum: f64 = y.iter().sum();
            let sumsq: f64 = y.iter().map(|v| v * v).sum();
            return Ok(c * (sum * sum - sumsq));
        }
        let mut total = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for (j, yj) in y.iter().enumerate() {
                row += self.table.entry(i, j) * yj;
            }
            total += y[i] * row;
        }
        Ok(total)
    }

    /// Influence of variable `i`: `sum_{j != i} f(i, j)^2`.
    pub fn influence(&self, i: usize) -> Result<f64> {
        let n = self.n_vars();
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, dim: n });
        }
        Ok((0..n).map(|j| self.table.entry(i, j).powi(2)).sum())
    }

    pub fn max_influence(&self) -> f64 {
        (0..self.n_vars())
            .map(|i| self.influence(i).expect("index in range"))
            .fold(0.0, f64::max)
    }

    /// The same coefficient table as a second-chaos kernel, so the sum with
    /// standard-normal innovations shares its law with the chaos element.
    pub fn bridge_kernel(&self) -> ChaosKernel {
        self.table.clone()
    }

    /// Variance of the sum under unit-variance innovations:
    /// `2 sum_{i,j} f(i,j)^2`.
    pub fn variance(&self) -> f64 {
        2.0 * self.table.hs_norm_sq()
    }

    pub fn scaled(&self, c: f64) -> HomogSumSpec {
        HomogSumSpec::from_kernel(self.table.scaled(c), self.innovation)
    }

    /// Rescales the table so the sum has the given variance.
    pub fn scaled_to_variance(&self, target: f64) -> Result<HomogSumSpec> {
        let var = self.variance();
        if var <= 0.0 {
            return Err(Error::DomainError(
                "cannot rescale a zero table to positive variance".into(),
            ));
        }
        Ok(self.scaled((target / var).sqrt()))
    }

    /// `n_samples` i.i.d. draws of the sum; deterministic per seed.
    pub fn sample(&self, n_samples: usize, seed: u64) -> Result<Vec<f64>> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut y = vec![0.0; self.n_vars()];
        let mut out = Vec::with_capacity(n_samples);
        for _ in 0..n_samples {
            self.innovation.fill(&mut rng, &mut y)?;
            out.push(self.eval(&y).expect("dimensions agree"));
        }
        Ok(out)
    }

    /// Monte Carlo estimate of `E[ Var(H | Y_k, k != i) ]`, the variance left
    /// after freezing all variables but `i`. For unit-variance innovations
    /// this equals `4 * influence(i)`.
    pub fn conditional_variance(
        &self,
        i: usize,
        n_draws: usize,
        seed: u64,
    ) -> Result<EstimatorReport> {
        let n = self.n_vars();
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, dim: n });
        }
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut y = vec![0.0; n];
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n_draws {
            self.innovation.fill(&mut rng, &mut y)?;
            let mut row = 0.0;
            for (j, yj) in y.iter().enumerate() {
                if j != i {
                    row += self.table.entry(i, j) * yj;
                }
            }
            let v = 4.0 * row * row;
            sum += v;
            sumsq += v * v;
        }
        let nf = n_draws as f64;
        let mean = sum / nf;
        let var = ((sumsq / nf - mean * mean) * nf / (nf - 1.0).max(1.0)).max(0.0);
        Ok(EstimatorReport {
            estimate: mean,
            se: (var / nf).sqrt(),
            n: n_draws,
        })
    }
}

/// The pairwise-product U-statistic table: `f(i, j) = 1 / (n (n-1))` off the
/// diagonal, so the sum equals the normalized pairwise product statistic.
pub fn ustat_kernel(n: usize, innovation: InnovationLaw) -> Result<HomogSumSpec> {
    if n < 2 {
        return Err(Error::DomainError(
            "the pairwise U-statistic needs n >= 2".into(),
        ));
    }
    let c = 1.0 / (n as f64 * (n - 1) as f64);
    let mut table = vec![c; n * n];
    for i in 0..n {
        table[i * n + i] = 0.0;
    }
    HomogSumSpec::new(n, table, innovation)
}

/// Influence of any variable of the pairwise U-statistic under the
/// `(q!)^2 (q-1)`-normalized convention, which works out to `1 / (4n)`.
///
/// The invariance error term for U-statistic experiments is driven with this
/// value; the raw squared-coefficient influence of [`ustat_kernel`] is
/// `1 / (n^2 (n-1))` and is what [`HomogSumSpec::influence`] returns.
pub fn ustat_influence(n: usize) -> f64 {
    let q_norm = 4.0; // (2!)^2 * (2 - 1)
    (n as f64 - 1.0) / (q_norm * n as f64 * (n as f64 - 1.0))
}
