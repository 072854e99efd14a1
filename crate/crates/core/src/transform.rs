//! The symbol transform φ ↦ φ̂, φ̂(n) = ∫ P_n φ dΠ_κ, and the radial
//! convolution ⊛_κ that realizes T_α T_β = T_{α ⊛ β}.
//!
//! Polynomials have two independent routes to φ̂: quadrature, and an exact
//! rational recursion on the moments t^m. Convolution likewise has the closed
//! three-case formula and a brute-force sum over tree vertices.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::polynomials::{eval_p_all, QuadratureRule, DEFAULT_DEGREE_CAP};
use crate::symbol::{sphere_weight, RadialSymbol, SymbolFunction};
use crate::tree::{check_kappa, distance, enumerate_ball_with_budget, geodesic_ray, vertex_budget};

/// Largest tail bound [`convolve`] accepts for numeric inputs.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-8;

/// φ̂(0..=n_max) by quadrature against Π_κ.
///
/// Polynomial and grid symbols are evaluated on the nodes of `rule`. Step
/// symbols get one rule of the same size per constant piece, so the jumps sit
/// on panel ends and the integrals keep spectral accuracy.
pub fn hat_numeric(
    phi: &SymbolFunction,
    kappa: u32,
    n_max: usize,
    rule: &QuadratureRule,
) -> Result<RadialSymbol> {
    check_kappa(kappa)?;
    if rule.kappa() != kappa {
        return Err(Error::KappaMismatch(kappa, rule.kappa()));
    }
    if n_max > DEFAULT_DEGREE_CAP {
        return Err(Error::InvalidArgument(format!(
            "n_max {n_max} exceeds recursion cap {DEFAULT_DEGREE_CAP}"
        )));
    }
    phi.validate(kappa)?;

    let mut alpha = vec![0.0; n_max + 1];
    let mut mass = 0.0;
    let mut p = vec![0.0; n_max + 1];
    let mut accumulate = |t: f64, w: f64, f: f64| {
        eval_p_all(kappa, t, &mut p);
        for (a, pn) in alpha.iter_mut().zip(&p) {
            *a += w * f * pn;
        }
        mass += w * f * f;
    };

    match phi {
        SymbolFunction::Polynomial(_) => {
            for (&t, &w) in rule.nodes().iter().zip(rule.weights()) {
                accumulate(t, w, phi.eval(t).expect("polynomial"));
            }
        }
        SymbolFunction::Grid(values) => {
            if values.len() != rule.len() {
                return Err(Error::DimensionMismatch(format!(
                    "grid has {} values, rule has {} nodes",
                    values.len(),
                    rule.len()
                )));
            }
            for ((&t, &w), &f) in rule.nodes().iter().zip(rule.weights()).zip(values) {
                accumulate(t, w, f);
            }
        }
        SymbolFunction::Step(pieces) => {
            for piece in pieces {
                let sub = QuadratureRule::on_interval(kappa, piece.lo, piece.hi, rule.len())?;
                for (&t, &w) in sub.nodes().iter().zip(sub.weights()) {
                    accumulate(t, w, piece.value);
                }
            }
        }
    }

    let finite = matches!(phi, SymbolFunction::Polynomial(c) if c.len() <= n_max + 1);
    let tail = if finite {
        0.0
    } else {
        let head: f64 = alpha
            .iter()
            .enumerate()
            .map(|(l, a)| sphere_weight(kappa, l) * a * a)
            .sum();
        // Parseval: ‖φ‖² = Σ #S_l φ̂(l)², since ‖P_l‖⁻² = #S_l.
        (mass - head).max(0.0)
    };
    Ok(RadialSymbol::numeric_with_tail(
        kappa,
        alpha,
        Some(rule.len()),
        tail,
    ))
}

/// Exact coefficients of t^m: β_0 = δ_0, β_{m+1}(0) = β_m(1),
/// β_{m+1}(n) = κ/(κ+1) β_m(n+1) + 1/(κ+1) β_m(n-1).
pub fn monomial_transform(kappa: u32, m: usize) -> Vec<BigRational> {
    let a = BigRational::new(BigInt::from(kappa), BigInt::from(kappa + 1));
    let b = BigRational::new(BigInt::one(), BigInt::from(kappa + 1));
    let mut beta = vec![BigRational::one()];
    for deg in 0..m {
        let get = |n: usize| beta.get(n).cloned().unwrap_or_else(BigRational::zero);
        let mut next = vec![BigRational::zero(); deg + 2];
        next[0] = get(1);
        for (n, slot) in next.iter_mut().enumerate().skip(1) {
            *slot = &a * get(n + 1) + &b * get(n - 1);
        }
        beta = next;
    }
    beta
}

/// Exact φ̂ for a polynomial with rational coefficients (ascending degree).
pub fn hat_polynomial_exact(coeffs: &[BigRational], kappa: u32) -> Result<RadialSymbol> {
    check_kappa(kappa)?;
    let mut alpha = vec![BigRational::zero(); coeffs.len()];
    for (m, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        for (n, beta) in monomial_transform(kappa, m).into_iter().enumerate() {
            alpha[n] += c * beta;
        }
    }
    Ok(RadialSymbol::exact(kappa, alpha))
}

/// Arithmetic shared by the exact and floating-point convolution paths.
trait Ring: Clone + Zero {
    fn mul(&self, other: &Self) -> Self;
    fn add_assign(&mut self, other: Self);
    fn kappa_pow(kappa: u32, l: usize) -> Self;
    fn from_u32(v: u32) -> Self;
}

impl Ring for BigRational {
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn add_assign(&mut self, other: Self) {
        *self += other;
    }
    fn kappa_pow(kappa: u32, l: usize) -> Self {
        BigRational::from_integer(Pow::pow(BigInt::from(kappa), l as u64))
    }
    fn from_u32(v: u32) -> Self {
        BigRational::from_integer(v.into())
    }
}

impl Ring for f64 {
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn add_assign(&mut self, other: Self) {
        *self += other;
    }
    fn kappa_pow(kappa: u32, l: usize) -> Self {
        (kappa as f64).powi(l as i32)
    }
    fn from_u32(v: u32) -> Self {
        v as f64
    }
}

/// Closed-form convolution, one output coefficient.
fn convolve_at<T: Ring>(kappa: u32, a: &[T], b: &[T], n: usize) -> T {
    let zero = T::zero();
    let at = |v: &[T], i: usize| v.get(i).cloned().unwrap_or_else(|| zero.clone());
    let reach = a.len().max(b.len());
    let mut acc = T::zero();
    match n {
        0 => {
            acc.add_assign(at(a, 0).mul(&at(b, 0)));
            let kp1 = T::from_u32(kappa + 1);
            for l in 1..reach {
                let w = kp1.mul(&T::kappa_pow(kappa, l - 1));
                acc.add_assign(w.mul(&at(a, l).mul(&at(b, l))));
            }
        }
        _ => {
            // κ^l [a(l) b(l+n) + a(l+n) b(l)]
            for l in 0..reach {
                let cross = {
                    let mut s = at(a, l).mul(&at(b, l + n));
                    s.add_assign(at(a, l + n).mul(&at(b, l)));
                    s
                };
                if !cross.is_zero() {
                    acc.add_assign(T::kappa_pow(kappa, l).mul(&cross));
                }
            }
            if n >= 2 {
                let km1 = T::from_u32(kappa - 1);
                for i in 1..n {
                    acc.add_assign(at(a, i).mul(&at(b, n - i)));
                    if kappa > 1 {
                        for l in 1..reach {
                            let term = at(a, l + i).mul(&at(b, l + n - i));
                            if !term.is_zero() {
                                acc.add_assign(km1.mul(&T::kappa_pow(kappa, l - 1)).mul(&term));
                            }
                        }
                    }
                }
            }
        }
    }
    acc
}

fn same_kappa(a: &RadialSymbol, b: &RadialSymbol) -> Result<u32> {
    if a.kappa() != b.kappa() {
        return Err(Error::KappaMismatch(a.kappa(), b.kappa()));
    }
    Ok(a.kappa())
}

/// α₁ ⊛_κ α₂ together with a uniform bound on the error each output coefficient
/// carries from truncated inputs.
///
/// Writing a_i(x) = α_i(d(v₀, x)) as vectors on the tree, (α₁ ⊛ α₂)(n) is an
/// inner product ⟨a₁, a₂(· , v_n)⟩, so dropping the tails changes it by at most
/// ‖tail₁‖·‖a₂‖ + ‖head₁‖·‖tail₂‖ (Cauchy-Schwarz).
pub fn convolve_with_bound(a: &RadialSymbol, b: &RadialSymbol) -> Result<(RadialSymbol, f64)> {
    let kappa = same_kappa(a, b)?;
    if a.is_empty() || b.is_empty() {
        let empty = if a.is_exact() && b.is_exact() {
            RadialSymbol::exact(kappa, Vec::new())
        } else {
            RadialSymbol::numeric(kappa, Vec::new())
        };
        return Ok((empty, 0.0));
    }
    let out_len = a.len() + b.len() - 1;
    if let (Some(x), Some(y)) = (a.exact_values(), b.exact_values()) {
        let values = (0..out_len).map(|n| convolve_at(kappa, x, y, n)).collect();
        return Ok((RadialSymbol::exact(kappa, values), 0.0));
    }
    let x = a.to_f64_vec();
    let y = b.to_f64_vec();
    let values: Vec<f64> = (0..out_len).map(|n| convolve_at(kappa, &x, &y, n)).collect();
    let (ha, ta) = (a.row_energy(), a.tail_energy());
    let (hb, tb) = (b.row_energy(), b.tail_energy());
    let bound = ta.sqrt() * (hb + tb).sqrt() + ha.sqrt() * tb.sqrt();
    let tail = if bound == 0.0 { 0.0 } else { f64::INFINITY };
    Ok((
        RadialSymbol::numeric_with_tail(kappa, values, None, tail),
        bound,
    ))
}

/// α₁ ⊛_κ α₂, rejecting numeric inputs whose truncation bound exceeds `tolerance`.
pub fn convolve_checked(a: &RadialSymbol, b: &RadialSymbol, tolerance: f64) -> Result<RadialSymbol> {
    let (out, bound) = convolve_with_bound(a, b)?;
    if bound > tolerance {
        return Err(Error::InsufficientDecay { bound, tolerance });
    }
    Ok(out)
}

pub fn convolve(a: &RadialSymbol, b: &RadialSymbol) -> Result<RadialSymbol> {
    convolve_checked(a, b, DEFAULT_TAIL_TOLERANCE)
}

/// A single coefficient, exact when both operands were exact.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficient {
    Exact(BigRational),
    Float(f64),
}

impl Coefficient {
    pub fn to_f64(&self) -> f64 {
        match self {
            Coefficient::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Coefficient::Float(x) => *x,
        }
    }
}

/// (α₁ ⊛ α₂)(n) = Σ_x α₁(d(v₀, x)) α₂(d(x, v_n)) summed over tree vertices.
///
/// Only vertices within min(D₁, n + D₂) of v₀ can contribute (D_i the support
/// radii), so that ball is enumerated and everything else is skipped.
pub fn brute_force_convolve(a: &RadialSymbol, b: &RadialSymbol, n: usize) -> Result<Coefficient> {
    brute_force_convolve_with_budget(a, b, n, vertex_budget()?)
}

pub fn brute_force_convolve_with_budget(
    a: &RadialSymbol,
    b: &RadialSymbol,
    n: usize,
    budget: usize,
) -> Result<Coefficient> {
    let kappa = same_kappa(a, b)?;
    if !a.has_finite_support() || !b.has_finite_support() {
        return Err(Error::InvalidArgument(
            "brute-force convolution needs finite-support symbols".into(),
        ));
    }
    if a.is_empty() || b.is_empty() {
        return Ok(if a.is_exact() && b.is_exact() {
            Coefficient::Exact(BigRational::zero())
        } else {
            Coefficient::Float(0.0)
        });
    }
    let (d1, d2) = (a.len() - 1, b.len() - 1);
    let radius = d1.min(n + d2);
    let ball = enumerate_ball_with_budget(kappa, radius, budget)?;
    let ray = geodesic_ray(kappa, n)?;
    let (v0, vn) = (&ray[0], &ray[n]);
    match (a.exact_values(), b.exact_values()) {
        (Some(x), Some(y)) => {
            let mut sum = BigRational::zero();
            for v in ball.vertices() {
                let (i, j) = (distance(v0, v), distance(v, vn));
                if let (Some(p), Some(q)) = (x.get(i), y.get(j)) {
                    sum += p * q;
                }
            }
            Ok(Coefficient::Exact(sum))
        }
        _ => {
            let sum = ball
                .vertices()
                .iter()
                .map(|v| a.get(distance(v0, v)) * b.get(distance(v, vn)))
                .sum();
            Ok(Coefficient::Float(sum))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polynomials::{make_quadrature, support_radius};
    use std::f64::consts::PI;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn hat_of_one_is_delta() {
        for kappa in 1..=3 {
            let rule = make_quadrature(kappa, 256).unwrap();
            let a = hat_numeric(&SymbolFunction::constant(1), kappa, 12, &rule).unwrap();
            assert!((a.get(0) - 1.0).abs() < 1e-10);
            for n in 1..=12 {
                assert!(a.get(n).abs() < 1e-10);
            }
            assert_eq!(a.tail_energy(), 0.0);
        }
    }

    #[test]
    fn hat_of_t() {
        let rule = make_quadrature(2, 256).unwrap();
        let a = hat_numeric(&SymbolFunction::monomial(1), 2, 8, &rule).unwrap();
        assert!((a.get(1) - 1.0 / 3.0).abs() < 1e-10);
        for n in (0..=8).filter(|&n| n != 1) {
            assert!(a.get(n).abs() < 1e-10);
        }
        for kappa in 1..=4 {
            let exact = hat_polynomial_exact(&[q(0, 1), q(1, 1)], kappa).unwrap();
            assert_eq!(exact, RadialSymbol::exact(kappa, vec![q(0, 1), q(1, kappa as i64 + 1)]));
        }
        let one = hat_polynomial_exact(&[q(1, 1)], 3).unwrap();
        assert_eq!(one, RadialSymbol::delta(3, 0));
    }

    #[test]
    fn hat_of_t_squared() {
        // β_2 = (β_1(1), κ/(κ+1) β_1(2) + β_1(0)/(κ+1), β_1(1)/(κ+1)) = (1/3, 0, 1/9) for κ = 2
        let exact = hat_polynomial_exact(&[q(0, 1), q(0, 1), q(1, 1)], 2).unwrap();
        assert_eq!(exact, RadialSymbol::exact(2, vec![q(1, 3), q(0, 1), q(1, 9)]));
        let rule = make_quadrature(2, 256).unwrap();
        let num = hat_numeric(&SymbolFunction::monomial(2), 2, 6, &rule).unwrap();
        for n in 0..=6 {
            assert!((num.get(n) - exact.get(n)).abs() < 1e-10);
        }
    }

    #[test]
    fn exact_and_quadrature_routes_agree() {
        for kappa in 1..=3 {
            let rule = make_quadrature(kappa, 128).unwrap();
            for m in 0..=12 {
                let exact = RadialSymbol::exact(kappa, monomial_transform(kappa, m));
                let num = hat_numeric(&SymbolFunction::monomial(m), kappa, 14, &rule).unwrap();
                for n in 0..=14 {
                    assert!((exact.get(n) - num.get(n)).abs() < 1e-10, "κ={kappa} m={m} n={n}");
                }
                // P_0..P_m span the degree-m polynomials
                assert!(exact.len() <= m + 1);
            }
        }
    }

    #[test]
    fn sine_kernel_coefficients() {
        let rule = make_quadrature(1, 256).unwrap();
        let a = 0.5;
        let phi = SymbolFunction::indicator((a * PI).cos(), 1.0);
        let alpha = hat_numeric(&phi, 1, 10, &rule).unwrap();
        assert!((alpha.get(0) - a).abs() < 1e-12);
        assert!((alpha.get(1) - 1.0 / PI).abs() < 1e-6);
        for n in 1..=10 {
            let expect = (n as f64 * a * PI).sin() / (n as f64 * PI);
            assert!((alpha.get(n) - expect).abs() < 1e-12);
        }
        assert!(alpha.tail_energy() > 0.0);
    }

    #[test]
    fn tail_energy_is_parseval_remainder() {
        let kappa = 2;
        let rule = make_quadrature(kappa, 256).unwrap();
        let phi = SymbolFunction::indicator(0.0, support_radius(kappa));
        let short = hat_numeric(&phi, kappa, 8, &rule).unwrap();
        let long = hat_numeric(&phi, kappa, 40, &rule).unwrap();
        // ‖φ‖² = 1/2
        assert!((short.row_energy() + short.tail_energy() - 0.5).abs() < 1e-12);
        assert!(long.tail_energy() < short.tail_energy());
    }

    #[test]
    fn hat_rejects_bad_input() {
        let rule = make_quadrature(2, 32).unwrap();
        assert!(matches!(
            hat_numeric(&SymbolFunction::constant(1), 3, 4, &rule),
            Err(Error::KappaMismatch(3, 2))
        ));
        assert!(hat_numeric(&SymbolFunction::constant(1), 2, 65, &rule).is_err());
        assert!(hat_numeric(&SymbolFunction::Grid(vec![1.0; 31]), 2, 4, &rule).is_err());
        let grid = hat_numeric(&SymbolFunction::Grid(vec![1.0; 32]), 2, 4, &rule).unwrap();
        assert!((grid.get(0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn convolution_small_cases() {
        for kappa in 1..=4u32 {
            let d1 = RadialSymbol::delta(kappa, 1);
            let sq = convolve(&d1, &d1).unwrap();
            assert_eq!(
                sq,
                RadialSymbol::from_i64(kappa, &[kappa as i64 + 1, 0, 1])
            );
            let alpha = RadialSymbol::exact(kappa, vec![q(1, 2), q(-3, 7), q(2, 5)]);
            assert_eq!(convolve(&RadialSymbol::delta(kappa, 0), &alpha).unwrap(), alpha);
            let zero = RadialSymbol::exact(kappa, Vec::new());
            assert!(convolve(&zero, &alpha).unwrap().is_empty());
        }
        assert!(matches!(
            convolve(&RadialSymbol::delta(1, 0), &RadialSymbol::delta(2, 0)),
            Err(Error::KappaMismatch(1, 2))
        ));
    }

    #[test]
    fn brute_force_small_cases() {
        let d1 = RadialSymbol::delta(2, 1);
        assert_eq!(
            brute_force_convolve(&d1, &d1, 0).unwrap(),
            Coefficient::Exact(q(3, 1))
        );
        let alpha = RadialSymbol::exact(2, vec![q(1, 2), q(-3, 7), q(2, 5)]);
        for n in 0..4 {
            let v = brute_force_convolve(&RadialSymbol::delta(2, 0), &alpha, n).unwrap();
            assert_eq!(v.to_f64(), alpha.get(n));
        }
        let d6 = RadialSymbol::delta(3, 6);
        let err = brute_force_convolve_with_budget(&d6, &d6, 6, 100);
        assert!(matches!(err, Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn numeric_convolution_reports_bound() {
        let rule = make_quadrature(2, 256).unwrap();
        let phi = SymbolFunction::indicator(0.0, support_radius(2));
        let a = hat_numeric(&phi, 2, 16, &rule).unwrap();
        let (_, bound) = convolve_with_bound(&a, &a).unwrap();
        assert!(bound > 0.0 && bound.is_finite());
        assert!(matches!(convolve(&a, &a), Err(Error::InsufficientDecay { .. })));
        let t = hat_numeric(&SymbolFunction::monomial(1), 2, 4, &rule).unwrap();
        let (tt, bound) = convolve_with_bound(&t, &t).unwrap();
        assert_eq!(bound, 0.0);
        assert!((tt.get(0) - 1.0 / 3.0).abs() < 1e-12);
        assert!((tt.get(2) - 1.0 / 9.0).abs() < 1e-12);
    }
}
