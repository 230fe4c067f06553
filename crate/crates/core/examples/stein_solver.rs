//! The integral Stein equation end to end: characterizing-identity
//! residuals by Monte Carlo, the semigroup solver, regularity of the
//! solution, and the equation residual on the grid.
//!
//! Run with `cargo run --release --example stein_solver`.

use bgchaos::stein::{self, IdentityTestFunction, SteinGrid};
use bgchaos::{BGParams, TestFunction};

fn main() {
    let params = BGParams::new(2.0, 1.0, 2.0, 1.0).unwrap();

    println!("characterizing identity E[X f(X) - integral f(X+u) u nu(du)] = 0:");
    for f in IdentityTestFunction::all() {
        let report = stein::stein_residual(&params, 400_000, 1, 64, |x| f.eval(x)).unwrap();
        println!(
            "  f = {:<14} residual {:+.6e} (se {:.2e})",
            f.label(),
            report.estimate,
            report.se
        );
    }

    let grid = SteinGrid::for_params(&params).unwrap();
    println!(
        "\ngrid: [{:.3}, {:.3}] with {} points",
        grid.x_min(),
        grid.x_max(),
        grid.n_x()
    );

    println!("\nsolved Stein equation over the dictionary (central half):");
    println!(
        "  {:<24} {:>9} {:>9} {:>9} {:>12}",
        "h", "|f|", "|f'|", "|f''|", "residual"
    );
    for h in TestFunction::dictionary() {
        let f_h = stein::solve_stein(&params, &h, &grid).unwrap();
        let sups = stein::derivative_sup_norms(&f_h, &grid, 0.5);
        let residual = stein::verify_solution(&params, &f_h, &h, &grid).unwrap();
        println!(
            "  {:<24} {:>9.4} {:>9.4} {:>9.4} {:>12.2e}",
            h.label(),
            sups[0],
            sups[1],
            sups[2],
            residual
        );
    }
    println!("  regularity targets:      <= 1     <= 1/2    <= 1/3");

    // Semigroup behavior on a single dictionary member.
    let h = TestFunction::Sine { a: 1.0, b: 0.0 };
    let values = grid.evaluate(&h);
    let at_zero = stein::semigroup_apply(&params, 0.0, &values, &grid).unwrap();
    let identity: f64 = values
        .iter()
        .zip(&at_zero)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let flat = stein::semigroup_apply(&params, 20.0, &values, &grid).unwrap();
    let expectation = stein::expectation_quadrature(&params, &h, &grid).unwrap();
    println!("\nsemigroup: identity defect at t = 0 is {identity:.2e}");
    println!(
        "long-horizon value {:.6} vs E h(X) = {:.6}",
        flat[grid.n_x() / 2],
        expectation
    );
}
