//! Pathwise Gamma-operator functionals on the second chaos and their exact
//! moment identities.
//!
//! On a finite spectrum, `Gamma_1(G) = G` and for `m >= 2`
//! `Gamma_m(G) = 2^{m-1} sum_j lambda_j^m Z_j^2`, equivalently
//! `kappa_m / (m-1)!` plus the centered fluctuation
//! `2^{m-1} sum_j lambda_j^m (Z_j^2 - 1)`. Expectations of products of
//! Gamma-operators reduce to cumulants, which is what the error bounds
//! consume.

use crate::bg::{factorial, BGParams};
use crate::chaos::{ChaosKernel, Spectrum};
use crate::error::{Error, Result};

/// A single sampled path: the normal coordinates plus the values of
/// `Gamma_1..Gamma_3` along it (`gamma[m-1]` is `Gamma_m`).
#[derive(Debug, Clone)]
pub struct GammaPath {
    pub z: Vec<f64>,
    pub gamma: [f64; 3],
}

impl GammaPath {
    /// `Gamma_1`, which equals the chaos sample value itself.
    pub fn sample_value(&self) -> f64 {
        self.gamma[0]
    }
}

/// Precomputed per-spectrum constants for evaluating many paths.
pub struct GammaEvaluator<'a> {
    spectrum: &'a Spectrum,
    /// `kappa_m / (m-1)!` for m = 1..=3 (zero for m = 1).
    mean_part: [f64; 3],
}

impl<'a> GammaEvaluator<'a> {
    pub fn new(spectrum: &'a Spectrum) -> Self {
        let mean_part = [
            0.0,
            2.0 * spectrum.sum_power(2),
            4.0 * spectrum.sum_power(3),
        ];
        GammaEvaluator {
            spectrum,
            mean_part,
        }
    }

    /// Evaluates `Gamma_1..Gamma_3` along the path `z`.
    pub fn path(&self, z: &[f64]) -> Result<GammaPath> {
        let lambdas = self.spectrum.lambdas();
        if z.len() != lambdas.len() {
            return Err(Error::DimMismatch {
                left: z.len(),
                right: lambdas.len(),
            });
        }
        let mut fluct = [0.0f64; 3];
        for (l, zj) in lambdas.iter().zip(z) {
            let centered = zj * zj - 1.0;
            let l2 = l * l;
            fluct[0] += l * centered;
            fluct[1] += 2.0 * l2 * centered;
            fluct[2] += 4.0 * l2 * l * centered;
        }
        Ok(GammaPath {
            z: z.to_vec(),
            gamma: [
                fluct[0] + self.mean_part[0],
                fluct[1] + self.mean_part[1],
                fluct[2] + self.mean_part[2],
            ],
        })
    }
}

/// `Gamma_m` along a single path, `m = 1..=3`.
pub fn gamma_pathwise(spectrum: &Spectrum, z: &[f64], m: usize) -> Result<f64> {
    if !(1..=3).contains(&m) {
        return Err(Error::OrderOutOfRange {
            order: m as i64,
            min: 1,
            max: 3,
        });
    }
    let path = GammaEvaluator::new(spectrum).path(z)?;
    Ok(path.gamma[m - 1])
}

/// `E Gamma_m(G) = kappa_m(G) / (m-1)!`, `m = 1..=6`.
pub fn expected_gamma(kernel: &ChaosKernel, m: usize) -> Result<f64> {
    if !(1..=6).contains(&m) {
        return Err(Error::OrderOutOfRange {
            order: m as i64,
            min: 1,
            max: 6,
        });
    }
    if m == 1 {
        return Ok(0.0);
    }
    Ok(kernel.cumulant(m)? / factorial(m - 1))
}

/// `E[G Gamma_m(G)] = kappa_{m+1}(G) / m!`, `m = 1..=5`.
pub fn cross_moment_g_gamma(kernel: &ChaosKernel, m: usize) -> Result<f64> {
    if !(1..=5).contains(&m) {
        return Err(Error::OrderOutOfRange {
            order: m as i64,
            min: 1,
            max: 5,
        });
    }
    Ok(kernel.cumulant(m + 1)? / factorial(m))
}

/// `E[Gamma_m(G) Gamma_p(G)] = kappa_{m+p}/(m+p-1)! + kappa_m kappa_p /
/// ((m-1)!(p-1)!)` for `m, p >= 1`, `m + p <= 6` (kappa_1 = 0).
pub fn cross_moment_gamma_gamma(kernel: &ChaosKernel, m: usize, p: usize) -> Result<f64> {
    if m < 1 || p < 1 || m + p > 6 {
        return Err(Error::OrderOutOfRange {
            order: (m + p) as i64,
            min: 2,
            max: 6,
        });
    }
    let lead = kernel.cumulant(m + p)? / factorial(m + p - 1);
    let km = if m == 1 { 0.0 } else { kernel.cumulant(m)? };
    let kp = if p == 1 { 0.0 } else { kernel.cumulant(p)? };
    Ok(lead + km * kp / (factorial(m - 1) * factorial(p - 1)))
}

/// The exact second moment
/// `E[(G/(a1 a2) + alpha13 Gamma_2(G) - Gamma_3(G))^2]`, expanded through the
/// Gamma-moment identities into cumulants of `G`. Always nonnegative.
pub fn gstar_l2(kernel: &ChaosKernel, params: &BGParams) -> Result<f64> {
    let constants = params.bound_constants()?;
    let a = 1.0 / (params.alpha1 * params.alpha2);
    let b = constants.alpha13;

    let g_sq = kernel.cumulant(2)?;
    let g_gamma2 = cross_moment_g_gamma(kernel, 2)?;
    let g_gamma3 = cross_moment_g_gamma(kernel, 3)?;
    let gamma2_sq = cross_moment_gamma_gamma(kernel, 2, 2)?;
    let gamma3_sq = cross_moment_gamma_gamma(kernel, 3, 3)?;
    let gamma23 = cross_moment_gamma_gamma(kernel, 2, 3)?;

    let value = a * a * g_sq + b * b * gamma2_sq + gamma3_sq + 2.0 * a * b * g_gamma2
        - 2.0 * a * g_gamma3
        - 2.0 * b * gamma23;
    let scale = (a * a * g_sq + b * b * gamma2_sq.abs() + gamma3_sq.abs()).max(1.0);
    assert!(
        value >= -1e-12 * scale,
        "second moment came out negative: {value}"
    );
    Ok(value.max(0.0))
}
