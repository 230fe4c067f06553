//! Gamma-operator functionals along sampled paths and their exact moment
//! identities: E[G Gamma_m] and E[Gamma_m Gamma_p] reduce to cumulants.
//!
//! Run with `cargo run --release --example gamma_identities`.

use bgchaos::chaos::ChaosKernel;
use bgchaos::gamma_ops::{self, GammaEvaluator};

fn main() {
    let kernel = ChaosKernel::from_diag(&[0.6, -0.4, 0.3, -0.2]);
    let spectrum = kernel.spectrum().unwrap();
    let evaluator = GammaEvaluator::new(&spectrum);

    println!("expected Gamma_m = kappa_m / (m-1)!:");
    for m in 1..=4 {
        println!("  m = {m}: {:+.6}", gamma_ops::expected_gamma(&kernel, m).unwrap());
    }

    let closed = [
        ("E[G Gamma_2]", gamma_ops::cross_moment_g_gamma(&kernel, 2).unwrap()),
        ("E[G Gamma_3]", gamma_ops::cross_moment_g_gamma(&kernel, 3).unwrap()),
        ("E[Gamma_2^2]", gamma_ops::cross_moment_gamma_gamma(&kernel, 2, 2).unwrap()),
        ("E[Gamma_2 Gamma_3]", gamma_ops::cross_moment_gamma_gamma(&kernel, 2, 3).unwrap()),
        ("E[Gamma_3^2]", gamma_ops::cross_moment_gamma_gamma(&kernel, 3, 3).unwrap()),
    ];

    let n = 1_000_000usize;
    let mut sums = [0.0f64; 5];
    spectrum.for_each_path(n, 99, |value, z| {
        let path = evaluator.path(z).unwrap();
        sums[0] += value * path.gamma[1];
        sums[1] += value * path.gamma[2];
        sums[2] += path.gamma[1] * path.gamma[1];
        sums[3] += path.gamma[1] * path.gamma[2];
        sums[4] += path.gamma[2] * path.gamma[2];
    });

    println!("\npathwise averages over {n} paths vs closed forms:");
    for ((label, exact), sum) in closed.iter().zip(&sums) {
        println!("  {label}: {:+.5} vs {exact:+.5}", sum / n as f64);
    }

    // The second moment behind the fluctuation term of the master bound.
    let params = bgchaos::BGParams::new(2.0, 1.0, 3.0, 1.5).unwrap();
    let second_moment = gamma_ops::gstar_l2(&kernel, &params).unwrap();
    println!("\nE[(G/(a1 a2) + alpha13 Gamma_2 - Gamma_3)^2] = {second_moment:.6}");
}
