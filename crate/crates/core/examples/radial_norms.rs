//! The norm of a radial kernel on a ball can exceed its norm on radial
//! vectors; the classic example on T_1 and a kernel with no gap.

use cayley_toeplitz::operator::{operator_norm_estimate, radial_norm_check};
use cayley_toeplitz::symbol::parse_alpha;

fn main() -> cayley_toeplitz::Result<()> {
    let alpha = parse_alpha("1,0,-1/2", 1)?;
    let rep = radial_norm_check(&alpha, 1)?;
    println!(
        "kappa 1, alpha = delta_0 - delta_2/2, R = 1: full {:.12} (sqrt 2.5 = {:.12}), radial {:.12} (sqrt 1.5 = {:.12})",
        rep.full_norm,
        2.5f64.sqrt(),
        rep.radial_norm,
        1.5f64.sqrt()
    );

    let adjacency = parse_alpha("0,1/3", 2)?;
    for r in [2, 4, 6] {
        let rep = radial_norm_check(&adjacency, r)?;
        println!("kappa 2, T[t], R = {r}: full {:.9}, radial {:.9}, gap {:.1e}", rep.full_norm, rep.radial_norm, rep.gap);
    }
    for (r, norm) in operator_norm_estimate(&adjacency, &[2, 4, 6])? {
        println!("||T_{r}|| = {norm:.9}");
    }
    Ok(())
}
