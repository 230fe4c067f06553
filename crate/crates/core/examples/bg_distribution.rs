//! Bilateral-gamma basics: classification, characteristic function,
//! cumulants, moments and seeded sampling.
//!
//! Run with `cargo run --release --example bg_distribution`.

use bgchaos::{BGParams, MCConfig};

fn main() {
    let params = BGParams::new(2.0, 3.0, 4.0, 5.0).unwrap();
    println!("params: {params:?}");
    println!("class:  {:?}", params.classify());
    println!("mean {:.4}, variance {:.4}", params.mean(), params.variance());

    println!("\ncumulants (j, exact):");
    for j in 1..=6 {
        println!("  kappa_{j} = {:.6}", params.cumulant(j).unwrap());
    }

    println!("\nraw moments via the gamma-difference expansion:");
    for k in 1..=4 {
        println!("  E X^{k} = {:.6}", params.moment(k));
    }

    let z = 1.5;
    let phi = params.char_fn(z);
    println!("\ncharacteristic function at z = {z}: {:.6} + {:.6}i (|phi| = {:.6})",
        phi.re, phi.im, phi.norm());

    // Sample cumulants agree with the closed form.
    let n = 1_000_000;
    let draws = params.sample(n, 42);
    let cfg = MCConfig::with_defaults(n, 42).unwrap();
    let est = bgchaos::mc::sample_cumulants(&draws, 4, &cfg).unwrap();
    println!("\nsample cumulants from {n} draws (estimate vs exact, se):");
    for j in 1..=4 {
        println!(
            "  kappa_{j}: {:.5} vs {:.5} (se {:.5})",
            est.kappa(j),
            params.cumulant(j).unwrap(),
            est.se(j).unwrap()
        );
    }

    // The symmetric family approaches a centered normal as the shape grows.
    println!("\nnormal limit along the symmetric family (sigma = 1):");
    for p in [1.0f64, 10.0, 100.0] {
        let alpha = (2.0 * p).sqrt();
        let limit = BGParams::svg(alpha, p).unwrap();
        println!(
            "  p = {p:>5}: kappa_2 = {:.4}, excess kurtosis kappa_4 = {:.5}",
            limit.cumulant(2).unwrap(),
            limit.cumulant(4).unwrap()
        );
    }
}
