//! Second-chaos kernel algebra: spectra, contractions, and the two exact
//! cumulant routes (trace of a matrix power vs a contraction inner product),
//! cross-checked by Monte Carlo.
//!
//! Run with `cargo run --release --example chaos_cumulants`.

use bgchaos::{ChaosKernel, MCConfig};

fn main() {
    let coeffs = vec![
        0.40, 0.10, -0.20, 0.05, //
        0.10, -0.30, 0.15, 0.00, //
        -0.20, 0.15, 0.25, -0.10, //
        0.05, 0.00, -0.10, 0.20,
    ];
    let kernel = ChaosKernel::new(4, coeffs).unwrap();
    let spectrum = kernel.spectrum().unwrap();
    println!("eigenvalues: {:?}", spectrum.lambdas());
    println!("<f, f> = {:.6}", kernel.hs_norm_sq());

    println!("\ncumulants by both routes:");
    for p in 2..=6 {
        let prefactor = 2f64.powi(p as i32 - 1) * (1..p).map(|i| i as f64).product::<f64>();
        let via_trace = prefactor * spectrum.sum_power(p);
        let via_contraction = prefactor * kernel.contract(p - 1).inner(&kernel).unwrap();
        println!(
            "  kappa_{p}: trace route {via_trace:+.8}, contraction route {via_contraction:+.8}"
        );
    }

    // Contraction identity: <A^m, A^p> telescopes to <A^{m+p-1}, A>.
    let lhs = kernel.contract(2).inner(&kernel.contract(3)).unwrap();
    let rhs = kernel.contract(4).inner(&kernel).unwrap();
    println!("\n<A^2, A^3> = {lhs:.10} vs <A^4, A> = {rhs:.10}");

    // Monte Carlo agreement for the first few orders.
    let n = 2_000_000;
    let draws = spectrum.sample(n, 7);
    let cfg = MCConfig::with_defaults(n, 7).unwrap();
    let est = bgchaos::mc::sample_cumulants(&draws, 4, &cfg).unwrap();
    println!("\nsample cumulants from {n} chaos draws:");
    for p in 2..=4 {
        println!(
            "  kappa_{p}: {:.5} vs exact {:.5} (se {:.5})",
            est.kappa(p),
            kernel.cumulant(p).unwrap(),
            est.se(p).unwrap()
        );
    }

    // The kernel text format round-trips through a string.
    let text = bgchaos::chaos::kernel_to_string(&kernel);
    let back = bgchaos::chaos::kernel_from_str(&text).unwrap();
    assert_eq!(back.coeffs(), kernel.coeffs());
    println!("\nkernel file format round-trip: ok ({} bytes)", text.len());
}
