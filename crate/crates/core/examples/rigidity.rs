//! Count variance of the half-support process in B_{R-2}(o) against the size
//! of its boundary sphere.

use cayley_toeplitz::dpp::rigidity_probe;
use cayley_toeplitz::polynomials::{make_quadrature, support_radius};

fn main() -> cayley_toeplitz::Result<()> {
    let kappa = 2;
    let rule = make_quadrature(kappa, 256)?;
    let rows = rigidity_probe(kappa, (0.0, support_radius(kappa)), &[3, 4, 5, 6, 7, 8], &rule)?;
    println!(" R  |B_R-2|  |S_R-2|      mean   variance  variance/|S_R-2|");
    for r in rows {
        println!(
            "{:2} {:8} {:8} {:9.3} {:10.4} {:17.5}",
            r.radius, r.region_size, r.boundary_sphere, r.mean, r.variance, r.variance_per_boundary
        );
    }
    Ok(())
}
