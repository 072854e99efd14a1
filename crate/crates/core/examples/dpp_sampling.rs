//! Samples the half-support process on the κ = 2 ball of radius 8 and checks
//! one- and two-point inclusion probabilities against the kernel minors.

use std::time::Instant;

use cayley_toeplitz::dpp::{sample, standard_test_sets, validate_kernel, verify_correlations, SampleConfig};
use cayley_toeplitz::polynomials::{make_quadrature, support_radius};
use cayley_toeplitz::SymbolFunction;

fn main() -> cayley_toeplitz::Result<()> {
    let (kappa, radius) = (2, 8);
    let rule = make_quadrature(kappa, 256)?;
    let phi = SymbolFunction::indicator(0.0, support_radius(kappa));

    let start = Instant::now();
    let kernel = validate_kernel(&phi, kappa, radius, &rule)?;
    println!(
        "ball of {} vertices, spectrum in [{:.3e}, {:.6}], E[#xi] = {:.3}",
        kernel.dim(),
        kernel.min_eigenvalue(),
        kernel.max_eigenvalue(),
        kernel.expected_cardinality()
    );

    let samples = sample(&kernel, &SampleConfig::new(7, 20_000));
    println!("sampled in {:.1?}", start.elapsed());

    let sets = standard_test_sets(kernel.ball(), 2);
    let report = verify_correlations(&kernel, &samples, &sets)?;
    println!(
        "{} inclusion events checked, max |z| = {:.2}, {}",
        report.rows.len(),
        report.max_z(),
        if report.pass { "PASS" } else { "FAIL" }
    );
    Ok(())
}
