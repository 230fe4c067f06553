//! Bilateral-gamma distribution analytics and sampling.
//!
//! `BG(alpha1, p1, alpha2, p2)` is the law of `X1 - X2` for independent gamma
//! variables `X1 ~ Ga(alpha1, p1)` and `X2 ~ Ga(alpha2, p2)` (rate/shape
//! convention). The family nests variance-gamma (`p1 = p2`), symmetric
//! variance-gamma (additionally `alpha1 = alpha2`) and Laplace (additionally
//! `p = 1`), with normal and one-sided gamma laws as limits.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Classification of a parameter point within the nested family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BGClass {
    General,
    VarianceGamma,
    SymmetricVarianceGamma,
    Laplace,
}

/// Parameters of a bilateral-gamma law: rates `alpha1, alpha2` and shapes
/// `p1, p2` of the positive and negative gamma parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BGParams {
    pub alpha1: f64,
    pub p1: f64,
    pub alpha2: f64,
    pub p2: f64,
}

/// Constants entering every closed-form error bound:
/// `alpha12 = a1 a2 / (a1 a2 - (1 + |a1 - a2|))` and `alpha13 = 1/a1 - 1/a2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub alpha12: f64,
    pub alpha13: f64,
}

/// Cumulants of orders 1..=6, optionally with standard errors when estimated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CumulantVector {
    kappa: [f64; 6],
    se: Option<[f64; 6]>,
}

impl CumulantVector {
    pub fn exact(kappa: [f64; 6]) -> Self {
        CumulantVector { kappa, se: None }
    }

    pub fn estimated(kappa: [f64; 6], se: [f64; 6]) -> Self {
        assert!(se.iter().all(|s| *s >= 0.0), "standard errors must be >= 0");
        CumulantVector {
            kappa,
            se: Some(se),
        }
    }

    /// The j-th cumulant, `j = 1..=6`.
    pub fn kappa(&self, j: usize) -> f64 {
        assert!((1..=6).contains(&j), "cumulant order must be 1..=6");
        self.kappa[j - 1]
    }

    /// Standard error of the j-th cumulant when this vector was estimated.
    pub fn se(&self, j: usize) -> Option<f64> {
        assert!((1..=6).contains(&j));
        self.se.map(|s| s[j - 1])
    }

    pub fn is_estimated(&self) -> bool {
        self.se.is_some()
    }
}

impl BGParams {
    pub fn new(alpha1: f64, p1: f64, alpha2: f64, p2: f64) -> Result<Self> {
        for (name, value) in [
            ("alpha1", alpha1),
            ("p1", p1),
            ("alpha2", alpha2),
            ("p2", p2),
        ] {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::NonPositiveParameter { name, value });
            }
        }
        Ok(BGParams {
            alpha1,
            p1,
            alpha2,
            p2,
        })
    }

    /// Symmetric variance-gamma parameters `(alpha, p, alpha, p)`.
    pub fn svg(alpha: f64, p: f64) -> Result<Self> {
        BGParams::new(alpha, p, alpha, p)
    }

    /// Laplace parameters `(alpha, 1, alpha, 1)`.
    pub fn laplace(alpha: f64) -> Result<Self> {
        BGParams::new(alpha, 1.0, alpha, 1.0)
    }

    /// Tag within the nested family: Laplace within SVG within VG.
    pub fn classify(&self) -> BGClass {
        if self.p1 == self.p2 {
            if self.alpha1 == self.alpha2 {
                if self.p1 == 1.0 {
                    BGClass::Laplace
                } else {
                    BGClass::SymmetricVarianceGamma
                }
            } else {
                BGClass::VarianceGamma
            }
        } else {
            BGClass::General
        }
    }

    /// Characteristic function `(a1/(a1-iz))^p1 (a2/(a2+iz))^p2` using
    /// principal logarithms; the bases never cross the negative real axis.
    pub fn char_fn(&self, z: f64) -> Complex64 {
        let i = Complex64::new(0.0, 1.0);
        let log1 = Complex64::new(self.alpha1.ln(), 0.0) - (self.alpha1 - i * z).ln();
        let log2 = Complex64::new(self.alpha2.ln(), 0.0) - (self.alpha2 + i * z).ln();
        (self.p1 * log1 + self.p2 * log2).exp()
    }

    /// Density of the jump measure at `u != 0`:
    /// `(p1/u) e^{-a1 u}` for `u > 0` and `-(p2/u) e^{-a2 |u|}` for `u < 0`.
    pub fn levy_density(&self, u: f64) -> Result<f64> {
        if u == 0.0 {
            return Err(Error::DomainError(
                "jump density is undefined at u = 0".into(),
            ));
        }
        Ok(if u > 0.0 {
            self.p1 / u * (-self.alpha1 * u).exp()
        } else {
            -self.p2 / u * (-self.alpha2 * u.abs()).exp()
        })
    }

    /// The tilted weight `u * levy_density(u)`: `p1 e^{-a1 u}` for `u > 0`,
    /// `-p2 e^{-a2 |u|}` for `u < 0`. This is the weight all Stein-type
    /// integrals use.
    pub fn tilted_levy_weight(&self, u: f64) -> Result<f64> {
        if u == 0.0 {
            return Err(Error::DomainError(
                "tilted jump weight is undefined at u = 0".into(),
            ));
        }
        Ok(if u > 0.0 {
            self.p1 * (-self.alpha1 * u).exp()
        } else {
            -self.p2 * (-self.alpha2 * u.abs()).exp()
        })
    }

    /// The j-th cumulant `(j-1)! (p1/a1^j + (-1)^j p2/a2^j)`, `j = 1..=6`.
    pub fn cumulant(&self, j: usize) -> Result<f64> {
        if !(1..=6).contains(&j) {
            return Err(Error::OrderOutOfRange {
                order: j as i64,
                min: 1,
                max: 6,
            });
        }
        let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
        Ok(factorial(j - 1)
            * (self.p1 / self.alpha1.powi(j as i32) + sign * self.p2 / self.alpha2.powi(j as i32)))
    }

    /// All six cumulants as an exact vector.
    pub fn cumulant_vector(&self) -> CumulantVector {
        let mut kappa = [0.0; 6];
        for (j, slot) in kappa.iter_mut().enumerate() {
            *slot = self.cumulant(j + 1).expect("orders 1..=6 are valid");
        }
        CumulantVector::exact(kappa)
    }

    pub fn mean(&self) -> f64 {
        self.p1 / self.alpha1 - self.p2 / self.alpha2
    }

    pub fn variance(&self) -> f64 {
        self.p1 / (self.alpha1 * self.alpha1) + self.p2 / (self.alpha2 * self.alpha2)
    }

    /// Raw moment `E X^k` via the binomial expansion of `(X1 - X2)^k` and
    /// gamma moment ratios (rising factorials, no gamma-function evaluation).
    pub fn moment(&self, k: usize) -> f64 {
        assert!(k >= 1, "moment order must be >= 1");
        let mut total = 0.0;
        for j in 0..=k {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let term = binomial(k, j)
                * rising_factorial(self.p1, k - j)
                * rising_factorial(self.p2, j)
                / (self.alpha1.powi((k - j) as i32) * self.alpha2.powi(j as i32));
            total += sign * term;
        }
        total
    }

    /// `n` i.i.d. draws as differences of two independent gamma draws.
    /// Deterministic for a fixed seed.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let g1 = Gamma::new(self.p1, 1.0 / self.alpha1).expect("validated shape/scale");
        let g2 = Gamma::new(self.p2, 1.0 / self.alpha2).expect("validated shape/scale");
        (0..n)
            .map(|_| g1.sample(&mut rng) - g2.sample(&mut rng))
            .collect()
    }

    /// Bound constants, available only under `a1 a2 > 1 + |a1 - a2|`.
    pub fn bound_constants(&self) -> Result<BoundConstants> {
        let prod = self.alpha1 * self.alpha2;
        let gap = 1.0 + (self.alpha1 - self.alpha2).abs();
        if prod <= gap {
            return Err(Error::BoundInapplicable(format!(
                "need alpha1*alpha2 > 1 + |alpha1 - alpha2|: {prod} <= {gap}"
            )));
        }
        Ok(BoundConstants {
            alpha12: prod / (prod - gap),
            alpha13: 1.0 / self.alpha1 - 1.0 / self.alpha2,
        })
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k.min(n));
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}

/// `Gamma(p + m) / Gamma(p) = p (p+1) ... (p+m-1)`.
fn rising_factorial(p: f64, m: usize) -> f64 {
    (0..m).map(|i| p + i as f64).product()
}
