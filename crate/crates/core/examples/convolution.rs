//! The convolution of radial symbols, checked against a direct sum over tree
//! vertices, and multiplicativity of the transform on monomials.

use cayley_toeplitz::transform::{brute_force_convolve, convolve, monomial_transform};
use cayley_toeplitz::RadialSymbol;

fn main() -> cayley_toeplitz::Result<()> {
    let kappa = 3;
    let a = RadialSymbol::from_i64(kappa, &[1, -2, 0, 3]);
    let b = RadialSymbol::from_i64(kappa, &[2, 1, 1]);
    let ab = convolve(&a, &b)?;
    for n in 0..ab.len() {
        let direct = brute_force_convolve(&a, &b, n)?;
        println!("(a * b)({n}) = {:>6}  vertex sum {:>6}", ab.get(n), direct.to_f64());
    }

    let hat = |m| RadialSymbol::exact(kappa, monomial_transform(kappa, m));
    let lhs = convolve(&hat(3), &hat(4))?;
    println!("hat(t^3) * hat(t^4) == hat(t^7): {}", lhs == hat(7));
    Ok(())
}
