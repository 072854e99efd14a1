//! Spectral transforms: exact coefficients of a polynomial symbol and
//! quadrature coefficients of the sine-kernel step symbol on T_1.

use cayley_toeplitz::polynomials::make_quadrature;
use cayley_toeplitz::transform::{hat_numeric, hat_polynomial_exact};
use cayley_toeplitz::SymbolFunction;

fn main() -> cayley_toeplitz::Result<()> {
    let SymbolFunction::Polynomial(coeffs) = SymbolFunction::parse("poly:1/2,0,1", 2)? else {
        unreachable!()
    };
    let exact = hat_polynomial_exact(&coeffs, 2)?;
    let values: Vec<String> = exact.exact_values().unwrap_or(&[]).iter().map(ToString::to_string).collect();
    println!("hat(1/2 + t^2) on T_2 = ({})", values.join(", "));

    let rule = make_quadrature(1, 256)?;
    let phi = SymbolFunction::parse("step:a=0.5", 1)?;
    let alpha = hat_numeric(&phi, 1, 10, &rule)?;
    for n in 0..=10 {
        let sine = if n == 0 { 0.5 } else { (n as f64 * std::f64::consts::FRAC_PI_2).sin() / (n as f64 * std::f64::consts::PI) };
        println!("n = {n:2}: {:+.15} (sine kernel {sine:+.15})", alpha.get(n));
    }
    println!("tail energy beyond n = 10: {:.3e}", alpha.tail_energy());
    Ok(())
}
