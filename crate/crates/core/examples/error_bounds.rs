//! Closed-form distance bounds with itemized terms: the master
//! bilateral-gamma bound, its family specializations, the normal and gamma
//! targets, and the homogeneous-sum bound with an invariance term.
//!
//! Run with `cargo run --release --example error_bounds`.

use bgchaos::bounds::{self, BoundFamily};
use bgchaos::chaos::Spectrum;
use bgchaos::homog;
use bgchaos::{BGParams, BoundReport};

fn show(label: &str, report: &BoundReport) {
    println!("{label}:");
    for (name, value) in &report.terms {
        println!("    {name:<18} {value:.6}");
    }
    println!("    {:<18} {:.6}", "total", report.total);
}

fn main() {
    // A spectrum two steps away from the matching profile for BG(2,1,2,1).
    let params = BGParams::new(2.0, 1.0, 2.0, 1.0).unwrap();
    let spectrum = Spectrum::new(vec![0.35, 0.35, -0.35, -0.35]);
    let cum = spectrum.cumulant_vector();

    show(
        "bilateral-gamma target",
        &bounds::d3_bound_cumulants(&cum, &params).unwrap(),
    );
    show(
        "same target through the SVG specialization",
        &bounds::d3_bound_family(&cum, BoundFamily::Svg { alpha: 2.0, p: 1.0 }).unwrap(),
    );
    show(
        "Laplace specialization (alpha = 2)",
        &bounds::d3_bound_family(&cum, BoundFamily::Laplace { alpha: 2.0 }).unwrap(),
    );
    show(
        "normal target N(0, 2)",
        &bounds::d3_bound_normal(&cum, 2.0).unwrap(),
    );
    show(
        "gamma target Ga(2, 1)",
        &bounds::d3_bound_gamma_dist(&spectrum.diagonal_kernel(), 2.0, 1.0).unwrap(),
    );
    show(
        "decomposed form in cumulant gaps",
        &bounds::d3_bound_decomposed(&cum, &params).unwrap(),
    );

    // Homogeneous-sum bound for the pairwise U-statistic with Rademacher
    // innovations at n = 100.
    let n = 100;
    let rho = homog::InnovationLaw::Rademacher.rho();
    let report =
        bounds::d3_bound_homog(&cum, &params, rho, homog::ustat_influence(n)).unwrap();
    show(&format!("homogeneous-sum bound (U-statistic, n = {n})"), &report);

    // The Monte Carlo route for the fluctuation term is sharper than the
    // Cauchy-Schwarz route.
    let kernel = spectrum.diagonal_kernel();
    let mc = bounds::d3_bound_gammaop_mc(&kernel, &params, 400_000, 5).unwrap();
    let cs = bounds::d3_bound_cumulants(&cum, &params).unwrap();
    println!(
        "\nfluctuation term: MC route {:.6} vs Cauchy-Schwarz route {:.6}",
        mc.term("fluctuation").unwrap(),
        cs.term("fluctuation").unwrap()
    );
}
