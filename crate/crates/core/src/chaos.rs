//! Finite-rank second-chaos elements `G = sum_j lambda_j (Z_j^2 - 1)`.
//!
//! A chaos element is represented by a symmetric coefficient matrix in an
//! orthonormal basis; its eigenvalues drive every cumulant. Iterated
//! 1-contractions of the kernel are matrix powers, which gives two
//! independent routes to each cumulant (trace of a power vs a contraction
//! inner product) that the implementation cross-checks.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::bg::{factorial, CumulantVector};
use crate::error::{Error, Result};
use crate::linalg;

/// Symmetric coefficient matrix of a second-chaos element.
#[derive(Debug, Clone, PartialEq)]
pub struct ChaosKernel {
    dim: usize,
    coeffs: Vec<f64>,
}

/// Eigenvalues of a chaos kernel, in descending absolute value with ties
/// broken positive-first.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    lambdas: Vec<f64>,
}

const SYMMETRY_TOL: f64 = 1e-12;

impl ChaosKernel {
    /// Builds a kernel from a row-major `dim x dim` buffer, enforcing
    /// symmetry to a relative tolerance of 1e-12.
    pub fn new(dim: usize, coeffs: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DomainError("kernel dimension must be >= 1".into()));
        }
        if coeffs.len() != dim * dim {
            return Err(Error::DimMismatch {
                left: coeffs.len(),
                right: dim * dim,
            });
        }
        let scale = coeffs.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
        for i in 0..dim {
            for j in i + 1..dim {
                let defect = (coeffs[i * dim + j] - coeffs[j * dim + i]).abs();
                if defect > SYMMETRY_TOL * scale {
                    return Err(Error::NotSymmetric { i, j, defect });
                }
            }
        }
        Ok(ChaosKernel { dim, coeffs })
    }

    pub fn zero(dim: usize) -> Self {
        ChaosKernel {
            dim,
            coeffs: vec![0.0; dim * dim],
        }
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let dim = diag.len();
        let mut coeffs = vec![0.0; dim * dim];
        for (i, &d) in diag.iter().enumerate() {
            coeffs[i * dim + i] = d;
        }
        ChaosKernel { dim, coeffs }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.coeffs[i * self.dim + j]
    }

    /// Hilbert-Schmidt squared norm `<f, f> = sum of squared coefficients`.
    pub fn hs_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|x| x * x).sum()
    }

    /// Scales every coefficient by `c`.
    pub fn scaled(&self, c: f64) -> ChaosKernel {
        ChaosKernel {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|x| c * x).collect(),
        }
    }

    /// Eigenvalues in the canonical order.
    pub fn spectrum(&self) -> Result<Spectrum> {
        let eigen = linalg::jacobi_eigen(&self.coeffs, self.dim)?;
        self.checked_spectrum(eigen.values)
    }

    /// Eigenvalues with an explicit sweep budget for the iterative solver.
    pub fn spectrum_with_budget(&self, max_sweeps: usize) -> Result<Spectrum> {
        let eigen = linalg::jacobi_eigen_with_budget(&self.coeffs, self.dim, max_sweeps)?;
        self.checked_spectrum(eigen.values)
    }

    /// Energy conservation: the eigenvalue squares must reproduce the
    /// Hilbert-Schmidt norm of the kernel.
    fn checked_spectrum(&self, values: Vec<f64>) -> Result<Spectrum> {
        let norm = self.hs_norm_sq();
        let energy: f64 = values.iter().map(|l| l * l).sum();
        if (energy - norm).abs() > 1e-10 * norm.max(1e-300) {
            return Err(Error::EigenFailure {
                sweeps: 0,
                offdiag: (energy - norm).abs(),
            });
        }
        Ok(Spectrum::new(values))
    }

    /// Iterated 1-contraction of the kernel with itself, realized as the p-th
    /// matrix power; `contract(1)` is the kernel itself.
    pub fn contract(&self, p: usize) -> ChaosKernel {
        assert!(p >= 1, "contraction order must be >= 1");
        let mut out = self.coeffs.clone();
        for _ in 1..p {
            out = linalg::matmul(&out, &self.coeffs, self.dim);
        }
        // The power of a symmetric matrix is symmetric; remove rounding drift.
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                let avg = 0.5 * (out[i * self.dim + j] + out[j * self.dim + i]);
                out[i * self.dim + j] = avg;
                out[j * self.dim + i] = avg;
            }
        }
        ChaosKernel {
            dim: self.dim,
            coeffs: out,
        }
    }

    /// Hilbert-Schmidt inner product of two kernels of equal dimension.
    pub fn inner(&self, other: &ChaosKernel) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b)
            .sum())
    }

    /// The p-th cumulant `2^{p-1} (p-1)! sum_j lambda_j^p`, `p = 2..=6`,
    /// cross-checked against the contraction route
    /// `2^{p-1} (p-1)! <contract(p-1), f>`.
    pub fn cumulant(&self, p: usize) -> Result<f64> {
        if !(2..=6).contains(&p) {
            return Err(Error::OrderOutOfRange {
                order: p as i64,
                min: 2,
                max: 6,
            });
        }
        let spectrum = self.spectrum()?;
        let prefactor = 2f64.powi(p as i32 - 1) * factorial(p - 1);
        let via_trace = prefactor * spectrum.sum_power(p);
        let via_contraction = prefactor * self.contract(p - 1).inner(self).expect("same dim");
        let scale = prefactor
            * spectrum
                .lambdas
                .iter()
                .map(|l| l.abs().powi(p as i32))
                .sum::<f64>();
        assert!(
            (via_trace - via_contraction).abs() <= 1e-9 * scale.max(1e-300),
            "cumulant routes disagree at order {p}: trace {via_trace} vs contraction {via_contraction}"
        );
        Ok(via_trace)
    }

    /// Exact cumulant vector of the chaos element (order 1 is zero).
    pub fn cumulant_vector(&self) -> Result<CumulantVector> {
        let mut kappa = [0.0; 6];
        for p in 2..=6 {
            kappa[p - 1] = self.cumulant(p)?;
        }
        Ok(CumulantVector::exact(kappa))
    }
}

impl Spectrum {
    /// Canonicalizes the ordering: descending |lambda|, positive sign first
    /// on ties.
    pub fn new(mut lambdas: Vec<f64>) -> Self {
        lambdas.sort_by(|a, b| {
            b.abs()
                .partial_cmp(&a.abs())
                .expect("finite eigenvalues")
                .then(b.partial_cmp(a).expect("finite eigenvalues"))
        });
        Spectrum { lambdas }
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    pub fn sum_power(&self, p: usize) -> f64 {
        self.lambdas.iter().map(|l| l.powi(p as i32)).sum()
    }

    /// The p-th cumulant `2^{p-1} (p-1)! sum lambda^p` for `p = 2..=6`.
    pub fn cumulant(&self, p: usize) -> Result<f64> {
        if !(2..=6).contains(&p) {
            return Err(Error::OrderOutOfRange {
                order: p as i64,
                min: 2,
                max: 6,
            });
        }
        Ok(2f64.powi(p as i32 - 1) * factorial(p - 1) * self.sum_power(p))
    }

    pub fn cumulant_vector(&self) -> CumulantVector {
        let mut kappa = [0.0; 6];
        for p in 2..=6 {
            kappa[p - 1] = self.cumulant(p).expect("orders 2..=6 valid");
        }
        CumulantVector::exact(kappa)
    }

    /// The diagonal kernel whose spectrum is exactly this one.
    pub fn diagonal_kernel(&self) -> ChaosKernel {
        ChaosKernel::from_diag(&self.lambdas)
    }

    /// Variance `2 sum lambda^2`.
    pub fn variance(&self) -> f64 {
        2.0 * self.sum_power(2)
    }

    /// Streams `n` i.i.d. paths through `visit(sample_value, z)` where
    /// `z` holds the standard-normal coordinates of the path. The stream is
    /// deterministic per seed and shared with [`Spectrum::sample`].
    pub fn for_each_path(&self, n: usize, seed: u64, mut visit: impl FnMut(f64, &[f64])) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut z = vec![0.0f64; self.lambdas.len()];
        for _ in 0..n {
            for slot in z.iter_mut() {
                *slot = StandardNormal.sample(&mut rng);
            }
            let value: f64 = self
                .lambdas
                .iter()
                .zip(&z)
                .map(|(l, zj)| l * (zj * zj - 1.0))
                .sum();
            visit(value, &z);
        }
    }

    /// `n` i.i.d. draws of `sum_j lambda_j (Z_j^2 - 1)`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut out = Vec::with_capacity(n);
        self.for_each_path(n, seed, |value, _| out.push(value));
        out
    }

    /// Draws together with the retained normal coordinates, so Gamma-operator
    /// functionals can be evaluated pathwise on the same randomness.
    pub fn sample_with_paths(&self, n: usize, seed: u64) -> (Vec<f64>, Vec<Vec<f64>>) {
        let mut values = Vec::with_capacity(n);
        let mut paths = Vec::with_capacity(n);
        self.for_each_path(n, seed, |value, z| {
            values.push(value);
            paths.push(z.to_vec());
        });
        (values, paths)
    }
}

/// Parses the plain-text kernel format: first line `N`, then `N` rows of `N`
/// space-separated reals.
pub fn kernel_from_str(text: &str) -> Result<ChaosKernel> {
    let mut tokens = text.split_whitespace();
    let dim: usize = tokens
        .next()
        .ok_or_else(|| Error::ConfigInvalid("empty kernel file".into()))?
        .parse()
        .map_err(|e| Error::ConfigInvalid(format!("bad kernel dimension: {e}")))?;
    if dim == 0 {
        return Err(Error::ConfigInvalid("kernel dimension must be >= 1".into()));
    }
    let mut coeffs = Vec::with_capacity(dim * dim);
    for token in tokens {
        let v: f64 = token
            .parse()
            .map_err(|e| Error::ConfigInvalid(format!("bad kernel entry `{token}`: {e}")))?;
        coeffs.push(v);
    }
    if coeffs.len() != dim * dim {
        return Err(Error::ConfigInvalid(format!(
            "kernel has {} entries, expected {}",
            coeffs.len(),
            dim * dim
        )));
    }
    ChaosKernel::new(dim, coeffs)
}

/// Serializes a kernel in the plain-text format (full precision).
pub fn kernel_to_string(kernel: &ChaosKernel) -> String {
    let mut out = format!("{}\n", kernel.dim());
    for i in 0..kernel.dim() {
        let row: Vec<String> = (0..kernel.dim())
            .map(|j| format!("{:?}", kernel.entry(i, j)))
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn read_kernel(path: &std::path::Path) -> Result<ChaosKernel> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::ConfigInvalid(format!("cannot read kernel file {path:?}: {e}")))?;
    kernel_from_str(&text)
}

pub fn write_kernel(path: &std::path::Path, kernel: &ChaosKernel) -> Result<()> {
    std::fs::write(path, kernel_to_string(kernel))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn spectrum_of_simple_kernels() {
        let k = ChaosKernel::from_diag(&[1.0, -1.0]);
        assert_eq!(k.spectrum().unwrap().lambdas(), &[1.0, -1.0]);

        let k = ChaosKernel::new(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let s = k.spectrum().unwrap();
        assert_abs_diff_eq!(s.lambdas()[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.lambdas()[1], -1.0, epsilon = 1e-14);

        let z = ChaosKernel::zero(3);
        assert!(z.spectrum().unwrap().lambdas().iter().all(|l| *l == 0.0));
    }

    #[test]
    fn asymmetric_kernel_rejected() {
        let r = ChaosKernel::new(2, vec![0.0, 1.0, 0.5, 0.0]);
        assert!(matches!(r, Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn eigen_budget_failure_surfaces() {
        let k = ChaosKernel::new(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!(matches!(
            k.spectrum_with_budget(0),
            Err(Error::EigenFailure { .. })
        ));
    }

    #[test]
    fn contraction_is_matrix_power() {
        let k = ChaosKernel::from_diag(&[1.0, -1.0]);
        assert_eq!(k.contract(1).coeffs(), k.coeffs());
        assert_eq!(k.contract(2).coeffs(), &[1.0, 0.0, 0.0, 1.0]);

        let k = ChaosKernel::from_diag(&[2.0, -3.0]);
        assert_eq!(k.contract(3).coeffs(), &[8.0, 0.0, 0.0, -27.0]);
    }

    #[test]
    fn inner_product_and_contraction_identity() {
        let k = ChaosKernel::from_diag(&[1.0, -1.0]);
        assert_abs_diff_eq!(k.inner(&k).unwrap(), 2.0, epsilon = 0.0);
        assert_abs_diff_eq!(
            ChaosKernel::zero(2).inner(&k).unwrap(),
            0.0,
            epsilon = 0.0
        );
        assert!(matches!(
            k.inner(&ChaosKernel::zero(3)),
            Err(Error::DimMismatch { .. })
        ));

        // <contract(2), contract(2)> equals <contract(3), f>.
        let coeffs = vec![
            0.3, 0.1, -0.4, 0.2, //
            0.1, -0.7, 0.05, 0.6, //
            -0.4, 0.05, 0.9, -0.2, //
            0.2, 0.6, -0.2, 0.11,
        ];
        let k = ChaosKernel::new(4, coeffs).unwrap();
        let lhs = k.contract(2).inner(&k.contract(2)).unwrap();
        let rhs = k.contract(3).inner(&k).unwrap();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-10);
    }

    #[test]
    fn cumulant_worked_values() {
        let k = ChaosKernel::from_diag(&[1.0, -1.0]);
        assert_relative_eq!(k.cumulant(2).unwrap(), 4.0, max_relative = 1e-12);
        assert_abs_diff_eq!(k.cumulant(3).unwrap(), 0.0, epsilon = 1e-12);
        assert_relative_eq!(k.cumulant(4).unwrap(), 96.0, max_relative = 1e-12);
        assert!(k.cumulant(7).is_err());
        assert!(k.cumulant(1).is_err());

        // kappa_2 = 2 <f, f> exactly.
        let coeffs = vec![0.5, -0.25, -0.25, 1.5];
        let k = ChaosKernel::new(2, coeffs).unwrap();
        assert_relative_eq!(
            k.cumulant(2).unwrap(),
            2.0 * k.hs_norm_sq(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn spectrum_ordering_convention() {
        let s = Spectrum::new(vec![0.5, -2.0, 2.0, -0.5, 1.0]);
        assert_eq!(s.lambdas(), &[2.0, -2.0, 1.0, 0.5, -0.5]);
    }

    #[test]
    fn sampling_determinism_and_zero_spectrum() {
        let s = Spectrum::new(vec![0.7, -0.2]);
        assert_eq!(s.sample(100, 9), s.sample(100, 9));

        let zero = Spectrum::new(vec![0.0, 0.0, 0.0]);
        assert!(zero.sample(50, 1).iter().all(|x| *x == 0.0));
    }

    #[test]
    fn single_lambda_moments() {
        let s = Spectrum::new(vec![1.0]);
        let n = 1_000_000;
        let draws = s.sample(n, 3);
        let mean = draws.iter().sum::<f64>() / n as f64;
        // Var(z^2 - 1) = 2, fourth moment large; SE of mean = sqrt(2/n).
        let se_mean = (2.0 / n as f64).sqrt();
        assert!(mean.abs() <= 4.0 * se_mean, "mean {mean}");
        let var = draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        // Var of the variance estimator ~ (kappa4 + 2 kappa2^2)/n = 56/n.
        let se_var = (56.0f64 / n as f64).sqrt();
        assert!((var - 2.0).abs() <= 4.0 * se_var, "var {var}");
    }

    #[test]
    fn kernel_text_roundtrip() {
        let k = ChaosKernel::new(2, vec![0.25, -1.5, -1.5, 3.0e-7]).unwrap();
        let text = kernel_to_string(&k);
        let back = kernel_from_str(&text).unwrap();
        assert_eq!(back.coeffs(), k.coeffs());

        assert!(kernel_from_str("2\n1 0 0").is_err());
        assert!(kernel_from_str("").is_err());
        assert!(kernel_from_str("1\nnot_a_number").is_err());
    }
}
