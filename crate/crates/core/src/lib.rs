//! Bilateral-gamma approximation machinery on the second Wiener chaos.
//!
//! The crate provides, end to end:
//!
//! - exact analytics and sampling for bilateral-gamma laws and their nested
//!   special cases (variance-gamma, symmetric variance-gamma, Laplace) and
//!   normal/gamma limits ([`bg`]);
//! - finite-rank second-chaos elements with kernel/spectrum algebra,
//!   contractions, exact cumulants and pathwise sampling ([`chaos`]);
//! - Gamma-operator functionals and their exact moment identities
//!   ([`gamma_ops`]);
//! - every closed-form smooth-Wasserstein-3 error bound for bilateral-gamma,
//!   variance-gamma, Laplace, normal and gamma targets, with itemized terms
//!   ([`bounds`]);
//! - an integral Stein operator, a semigroup-based solver for the Stein
//!   equation on a spatial grid, and residual/regularity verifiers
//!   ([`stein`]);
//! - homogeneous sums of order two, influence functionals and the pairwise
//!   product U-statistic bridge ([`homog`]);
//! - shared Monte Carlo estimators (sample cumulants, empirical
//!   Wasserstein-1, dictionary lower bounds) and quadrature rules ([`mc`]);
//! - a batch experiment driver behind the `bgchaos` binary ([`cli`]).
//!
//! Everything is deterministic for fixed seeds: samplers take explicit seeds
//! and estimators reduce in a fixed order.

pub mod bg;
pub mod bounds;
pub mod chaos;
pub mod cli;
pub mod error;
pub mod gamma_ops;
pub mod homog;
mod linalg;
pub mod mc;
pub mod stein;
pub mod testfn;

pub use bg::{BGClass, BGParams, BoundConstants, CumulantVector};
pub use bounds::{BoundReport, BoundVariant};
pub use chaos::{ChaosKernel, Spectrum};
pub use error::{Error, Result};
pub use homog::{HomogSumSpec, InnovationLaw};
pub use mc::{EstimatorReport, MCConfig};
pub use stein::SteinGrid;
pub use testfn::TestFunction;
