use cayley_toeplitz::operator::{build_matrix, radial_compress, radial_norm_check, spectrum, RadialBasis};
use cayley_toeplitz::polynomials::{eval_p, l2_norm_sq_f64, make_quadrature, support_radius, QuadratureRule};
use cayley_toeplitz::transform::{convolve, hat_numeric};
use cayley_toeplitz::tree::{enumerate_ball, BranchRelabeling};
use cayley_toeplitz::{RadialSymbol, SymbolFunction};

fn test_symbols(kappa: u32) -> Vec<SymbolFunction> {
    let c = support_radius(kappa);
    vec![
        SymbolFunction::monomial(1),
        SymbolFunction::monomial(2),
        SymbolFunction::indicator(0.0, c),
        SymbolFunction::parse("step:(-0.9,-0.1)=0.3;(-0.1,0.5)=1;(0.5,0.94)=0.6", kappa)
            .unwrap_or_else(|_| SymbolFunction::indicator(-c / 3.0, c / 2.0)),
        SymbolFunction::parse("poly:1/2,-1,0,1", kappa).unwrap(),
    ]
}

#[test]
fn matrices_are_symmetric_and_radial() {
    for (kappa, radius) in [(1, 6), (2, 4), (3, 3)] {
        let ball = enumerate_ball(kappa, radius).unwrap();
        let alpha = RadialSymbol::from_i64(kappa, &[3, -1, 4, 1, -5, 9, 2, 6, 5]);
        let op = build_matrix(&alpha, &ball).unwrap();
        let m = op.matrix();
        for i in 0..ball.len() {
            for j in 0..ball.len() {
                assert_eq!(m[(i, j)], m[(j, i)]);
                assert_eq!(m[(i, j)], alpha.get(ball.distance(i, j)));
            }
        }
    }
}

#[test]
fn product_of_matrices_is_convolution_away_from_the_boundary() {
    for (kappa, radius) in [(1, 7), (2, 5), (3, 4)] {
        let a = RadialSymbol::from_i64(kappa, &[1, 2, -1]);
        let b = RadialSymbol::from_i64(kappa, &[0, 1, 3]);
        let ball = enumerate_ball(kappa, radius).unwrap();
        let ma = build_matrix(&a, &ball).unwrap();
        let mb = build_matrix(&b, &ball).unwrap();
        let prod = ma.matrix() * mb.matrix();
        let ab = convolve(&a, &b).unwrap();
        let interior = ball.inner_ball(radius - 2);
        for x in interior.clone() {
            for y in 0..ball.len() {
                let expected = ab.get(ball.distance(x, y));
                assert!((prod[(x, y)] - expected).abs() < 1e-12, "kappa {kappa}, ({x}, {y})");
            }
        }
    }
}

#[test]
fn relabeling_commutes_with_the_operator() {
    let kappa = 3;
    let ball = enumerate_ball(kappa, 4).unwrap();
    let alpha = RadialSymbol::from_i64(kappa, &[2, -3, 1, 0, 7, 1, -1, 4, 2]);
    let op = build_matrix(&alpha, &ball).unwrap();
    for (root, child) in [(vec![1, 0, 3, 2], vec![0, 2, 1]), (vec![3, 2, 1, 0], vec![2, 0, 1])] {
        let g = BranchRelabeling::new(kappa, root, child).unwrap();
        let perm = g.index_permutation(&ball);
        assert_eq!(op.permuted(&perm).unwrap().matrix(), op.matrix());
    }
}

#[test]
fn nonnegative_symbols_give_positive_operators() {
    for (kappa, radius) in [(1, 10), (2, 5), (3, 3)] {
        let rule = make_quadrature(kappa, 256).unwrap();
        let ball = enumerate_ball(kappa, radius).unwrap();
        for phi in test_symbols(kappa) {
            let (lo, _) = phi.value_range(kappa);
            if lo < 0.0 {
                continue;
            }
            let alpha = hat_numeric(&phi, kappa, 2 * radius, &rule).unwrap();
            let min = spectrum(&build_matrix(&alpha, &ball).unwrap()).unwrap()[0];
            assert!(min >= -1e-9, "kappa {kappa}: min eigenvalue {min}");
        }
    }
}

#[test]
fn spectrum_lies_in_the_range_of_the_symbol() {
    for (kappa, radius) in [(1, 10), (2, 5), (3, 3)] {
        let rule = make_quadrature(kappa, 256).unwrap();
        let ball = enumerate_ball(kappa, radius).unwrap();
        for phi in test_symbols(kappa) {
            let (lo, hi) = phi.value_range(kappa);
            let alpha = hat_numeric(&phi, kappa, 2 * radius, &rule).unwrap();
            let eig = spectrum(&build_matrix(&alpha, &ball).unwrap()).unwrap();
            assert!(eig[0] >= lo - 1e-8 && eig[eig.len() - 1] <= hi + 1e-8);
        }
    }
}

#[test]
fn radial_compression_is_multiplication_by_the_symbol() {
    let (kappa, radius) = (3, 4);
    let rule = make_quadrature(kappa, 256).unwrap();
    let ball = enumerate_ball(kappa, radius).unwrap();
    let basis = RadialBasis::new(&ball);
    for phi in test_symbols(kappa) {
        let alpha = hat_numeric(&phi, kappa, 2 * radius, &rule).unwrap();
        let c = radial_compress(&build_matrix(&alpha, &ball).unwrap(), &basis).unwrap();
        for n in 0..=radius {
            for m in 0..=radius {
                let pnm = |t: f64| eval_p(kappa, n, t) * eval_p(kappa, m, t);
                let integral = match &phi {
                    SymbolFunction::Step(pieces) => pieces
                        .iter()
                        .map(|p| p.value * QuadratureRule::on_interval(kappa, p.lo, p.hi, 64).unwrap().integrate(pnm))
                        .sum(),
                    _ => rule.integrate(|t| phi.eval(t).unwrap() * pnm(t)),
                };
                let expected = integral / (l2_norm_sq_f64(kappa, n) * l2_norm_sq_f64(kappa, m)).sqrt();
                assert!((c[(n, m)] - expected).abs() < 1e-10, "({n}, {m}): {} vs {expected}", c[(n, m)]);
            }
        }
    }
}

#[test]
fn radial_norm_never_exceeds_full_norm() {
    for (kappa, alpha) in [(1, vec![1, 0, -1]), (2, vec![2, 1, -3]), (3, vec![0, 1, 1, -1])] {
        let alpha = RadialSymbol::from_i64(kappa, &alpha);
        for radius in 1..=3 {
            let rep = radial_norm_check(&alpha, radius).unwrap();
            assert!(rep.radial_norm <= rep.full_norm + 1e-12);
            assert!((rep.gap - (rep.full_norm - rep.radial_norm)).abs() < 1e-15);
        }
    }
}
