//! Smooth test functions with certified derivative bounds.
//!
//! Members of the fixed dictionary are three-times differentiable with
//! `sup |h^(k)| <= 1` for `k = 0..=3`, so sup over the dictionary of
//! `|E h(Y) - E h(Z)|` is a valid lower bound for the smooth Wasserstein
//! distance of order 3.

use serde::{Deserialize, Serialize};

/// Largest attained values of |sigma^(k)| for the logistic sigmoid.
const LOGISTIC_SUP: [f64; 4] = [0.5, 0.25, 0.09622504486493764, 0.125];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TestFunction {
    /// `x -> sin(a x + b) / max(1, a)^3`.
    Sine { a: f64, b: f64 },
    /// `x -> amp * (sigmoid(scale x) - 1/2)`.
    Logistic { scale: f64, amp: f64 },
}

impl TestFunction {
    pub fn eval(&self, x: f64) -> f64 {
        self.derivative(0, x)
    }

    /// k-th derivative at `x`, for `k = 0..=3`.
    pub fn derivative(&self, k: usize, x: f64) -> f64 {
        assert!(k <= 3, "derivatives available up to order 3");
        match *self {
            TestFunction::Sine { a, b } => {
                let scale = a.powi(k as i32) / a.max(1.0).powi(3);
                let arg = a * x + b;
                let v = match k % 4 {
                    0 => arg.sin(),
                    1 => arg.cos(),
                    2 => -arg.sin(),
                    _ => -arg.cos(),
                };
                scale * v
            }
            TestFunction::Logistic { scale, amp } => {
                let s = sigmoid(scale * x);
                let sp = s * (1.0 - s);
                let v = match k {
                    0 => s - 0.5,
                    1 => sp,
                    2 => sp * (1.0 - 2.0 * s),
                    _ => sp * (1.0 - 6.0 * s + 6.0 * s * s),
                };
                amp * scale.powi(k as i32) * v
            }
        }
    }

    /// Analytic bound on `sup_x |h^(k)(x)|`.
    pub fn sup_bound(&self, k: usize) -> f64 {
        assert!(k <= 3);
        match *self {
            TestFunction::Sine { a, .. } => a.abs().powi(k as i32) / a.abs().max(1.0).powi(3),
            TestFunction::Logistic { scale, amp } => {
                amp.abs() * scale.abs().powi(k as i32) * LOGISTIC_SUP[k]
            }
        }
    }

    /// Whether all derivative bounds through order 3 are at most 1.
    pub fn is_w3(&self) -> bool {
        (0..=3).all(|k| self.sup_bound(k) <= 1.0 + 1e-12)
    }

    pub fn label(&self) -> String {
        match *self {
            TestFunction::Sine { a, b } => format!("sine(a={a},b={b:.4})"),
            TestFunction::Logistic { scale, amp } => format!("logistic(scale={scale},amp={amp})"),
        }
    }

    /// The fixed W3 dictionary: eight sinusoids and two scaled logistics.
    pub fn dictionary() -> Vec<TestFunction> {
        let mut dict = Vec::new();
        for &a in &[0.5, 1.0, 2.0, 4.0] {
            for &b in &[0.0, std::f64::consts::FRAC_PI_3] {
                dict.push(TestFunction::Sine { a, b });
            }
        }
        dict.push(TestFunction::Logistic {
            scale: 1.0,
            amp: 1.0,
        });
        dict.push(TestFunction::Logistic {
            scale: 2.0,
            amp: 0.125,
        });
        dict
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
