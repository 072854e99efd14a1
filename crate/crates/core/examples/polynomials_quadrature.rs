//! Evaluates Cartier-Dunau polynomials and checks their orthogonality under
//! Gauss-Legendre quadrature against Π_κ.

use cayley_toeplitz::polynomials::{eval_p, l2_norm_sq, make_quadrature, support_radius};

fn main() -> cayley_toeplitz::Result<()> {
    for kappa in 1..=3 {
        let rule = make_quadrature(kappa, 128)?;
        let c = support_radius(kappa);
        println!("kappa = {kappa}: supp Π = [-{c:.6}, {c:.6}], total mass {:.15}", rule.integrate(|_| 1.0));
        let mut off: f64 = 0.0;
        for n in 0..=8 {
            for m in 0..n {
                off = off.max(rule.integrate(|t| eval_p(kappa, n, t) * eval_p(kappa, m, t)).abs());
            }
            let norm = rule.integrate(|t| eval_p(kappa, n, t).powi(2));
            println!("  ||P_{n}||^2 = {norm:.15} (exact {})", l2_norm_sq(kappa, n));
        }
        println!("  largest off-diagonal Gram entry {off:.1e}");
    }
    Ok(())
}
