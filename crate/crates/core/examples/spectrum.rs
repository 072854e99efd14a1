//! Spectra of T[t] on growing balls of T_2 approach the support of Π_2.

use cayley_toeplitz::blocks::block_eigen;
use cayley_toeplitz::polynomials::support_radius;
use cayley_toeplitz::transform::monomial_transform;
use cayley_toeplitz::tree::enumerate_ball;
use cayley_toeplitz::RadialSymbol;

fn main() -> cayley_toeplitz::Result<()> {
    let kappa = 2;
    let alpha = RadialSymbol::exact(kappa, monomial_transform(kappa, 1));
    println!("supp Π_2 = [-{0:.6}, {0:.6}]", support_radius(kappa));
    for radius in [2, 4, 6, 8, 10, 12] {
        let ball = enumerate_ball(kappa, radius)?;
        let eig = block_eigen(&alpha, &ball)?;
        let max = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        println!("R = {radius:2}: {:6} vertices, max |eigenvalue| = {max:.6}", ball.len());
    }
    Ok(())
}
