//! Homogeneous sums of order two: the pairwise U-statistic, influence
//! functionals, the Gaussian bridge to the second chaos, and the invariance
//! of low-order cumulants across innovation laws.
//!
//! Run with `cargo run --release --example homogeneous_sums`.

use bgchaos::homog::{self, HomogSumSpec, InnovationLaw};
use bgchaos::MCConfig;

fn main() {
    let n = 50;
    let spec = homog::ustat_kernel(n, InnovationLaw::Rademacher).unwrap();
    println!("pairwise U-statistic with n = {n}:");
    println!("  off-diagonal coefficient      {:.6}", spec.table().entry(0, 1));
    println!("  squared-coefficient influence {:.3e}", spec.influence(0).unwrap());
    println!("  normalized influence 1/(4n)   {:.3e}", homog::ustat_influence(n));
    println!("  variance of the sum           {:.3e}", spec.variance());

    // Conditional-variance identity: freezing all but one variable leaves
    // variance 4 * influence.
    let report = spec.conditional_variance(0, 100_000, 2).unwrap();
    println!(
        "  E[Var(H | rest)] = {:.4e} vs 4 Inf = {:.4e} (se {:.1e})",
        report.estimate,
        4.0 * spec.influence(0).unwrap(),
        report.se
    );

    // Universality: rescale to unit variance and compare cumulants under
    // Rademacher and Gaussian innovations.
    let unit = spec.scaled_to_variance(1.0).unwrap();
    let gaussian = HomogSumSpec::new(
        unit.table().dim(),
        unit.table().coeffs().to_vec(),
        InnovationLaw::StandardNormal,
    )
    .unwrap();
    let samples = 1_000_000;
    let cfg = MCConfig::with_defaults(samples, 0).unwrap();
    let r = bgchaos::mc::sample_cumulants(&unit.sample(samples, 10).unwrap(), 4, &cfg).unwrap();
    let g =
        bgchaos::mc::sample_cumulants(&gaussian.sample(samples, 11).unwrap(), 4, &cfg).unwrap();
    println!("\ncumulants under Rademacher vs Gaussian innovations ({samples} draws):");
    for j in 2..=4 {
        println!(
            "  kappa_{j}: {:+.4} vs {:+.4}",
            r.kappa(j),
            g.kappa(j)
        );
    }

    // The bridge kernel gives the exact Gaussian-innovation cumulants.
    let bridge = unit.bridge_kernel();
    println!("\nexact cumulants of the Gaussian bridge:");
    for j in 2..=4 {
        println!("  kappa_{j} = {:+.5}", bridge.cumulant(j).unwrap());
    }
    println!(
        "\nthird absolute moments: rademacher {:.4}, gaussian {:.4}, uniform {:.4}",
        InnovationLaw::Rademacher.rho(),
        InnovationLaw::StandardNormal.rho(),
        InnovationLaw::CenteredUniform.rho()
    );
}
