use cayley_toeplitz::dpp::{
    inclusion_probability, sample, validate_kernel, write_jsonl, Configuration, DppKernel, SampleConfig,
};
use cayley_toeplitz::polynomials::{make_quadrature, support_radius};
use cayley_toeplitz::tree::BranchRelabeling;
use cayley_toeplitz::SymbolFunction;
use rand::seq::index::sample as choose;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn kernel(kappa: u32, radius: usize, phi: &SymbolFunction) -> DppKernel {
    let rule = make_quadrature(kappa, 256).unwrap();
    validate_kernel(phi, kappa, radius, &rule).unwrap()
}

fn half_support(kappa: u32) -> SymbolFunction {
    SymbolFunction::indicator(0.0, support_radius(kappa))
}

fn mean_and_variance(xs: impl Iterator<Item = f64>) -> (f64, f64, usize) {
    let v: Vec<f64> = xs.collect();
    let n = v.len();
    let mean = v.iter().sum::<f64>() / n as f64;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    (mean, var, n)
}

#[test]
fn cardinality_follows_the_eigenvalues() {
    let cases = [
        (1, 10, half_support(1)),
        (2, 5, half_support(2)),
        (2, 5, SymbolFunction::monomial(2)),
    ];
    for (kappa, radius, phi) in cases {
        let k = kernel(kappa, radius, &phi);
        let n = 5000;
        let samples = sample(&k, &SampleConfig::new(11, n));
        let (mean, var, _) = mean_and_variance(samples.iter().map(|s| s.len() as f64));
        let se = (k.cardinality_variance() / n as f64).sqrt();
        assert!(
            (mean - k.expected_cardinality()).abs() <= 4.0 * se,
            "kappa {kappa}: mean {mean} vs {}",
            k.expected_cardinality()
        );
        // sample variance of a variance estimate: loose 25% band
        assert!((var - k.cardinality_variance()).abs() <= 0.25 * k.cardinality_variance());
    }
}

#[test]
fn law_is_invariant_under_relabeling() {
    let (kappa, radius) = (2, 5);
    let k = kernel(kappa, radius, &half_support(kappa));
    let g = BranchRelabeling::new(kappa, vec![2, 0, 1], vec![1, 0]).unwrap();
    let perm = g.index_permutation(k.ball());
    let moved = k.relabeled(&perm).unwrap();
    for x in 0..k.dim() {
        for y in 0..k.dim() {
            assert_eq!(moved.entry(perm[x], perm[y]), k.entry(x, y));
        }
    }

    let n = 6000;
    let config = SampleConfig::new(5, n);
    let a = sample(&k, &config);
    let b = sample(&moved, &config);
    let ball = k.ball();
    // occupancy of each sphere and of the first branch at each depth
    let classes: Vec<Box<dyn Fn(usize) -> bool>> = (0..=radius)
        .flat_map(|l| {
            let sphere = ball.sphere(l);
            let s2 = sphere.clone();
            [
                Box::new(move |x| sphere.contains(&x)) as Box<dyn Fn(usize) -> bool>,
                Box::new(move |x| s2.contains(&x) && ball.vertex(x).word().first() == Some(&0)),
            ]
        })
        .collect();
    for (c, class) in classes.iter().enumerate() {
        let count = |s: &Configuration| s.points.iter().filter(|&&x| class(x)).count() as f64;
        let (ma, va, _) = mean_and_variance(a.iter().map(count));
        let (mb, vb, _) = mean_and_variance(b.iter().map(count));
        let se = ((va + vb) / n as f64).sqrt();
        assert!((ma - mb).abs() <= 4.0 * se + 1e-12, "class {c}: {ma} vs {mb}");
    }
}

#[test]
fn minors_are_probabilities() {
    let (kappa, radius) = (2, 4);
    let k = kernel(kappa, radius, &SymbolFunction::parse("step:(-0.9,-0.3)=1;(0.2,0.8)=0.7", kappa).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for size in 1..=5 {
        for _ in 0..200 {
            let points = choose(&mut rng, k.dim(), size).into_vec();
            let p = inclusion_probability(&k, &Configuration::new(points.clone())).unwrap();
            let hadamard: f64 = points.iter().map(|&x| k.entry(x, x)).product();
            assert!(p >= -1e-12 && p <= hadamard + 1e-12, "{points:?}: {p}");
        }
    }
}

#[test]
fn sample_files_are_byte_identical_across_runs() {
    let k = kernel(1, 8, &half_support(1));
    let write = |seed| {
        let mut buf = Vec::new();
        write_jsonl(&mut buf, &sample(&k, &SampleConfig::new(seed, 500))).unwrap();
        buf
    };
    assert_eq!(write(9), write(9));
    assert_ne!(write(9), write(10));
}

#[test]
fn symbols_outside_the_unit_interval_are_refused() {
    let rule = make_quadrature(2, 64).unwrap();
    for spec in ["poly:0,3", "const:-1/2", "step:(-0.5,0.5)=1.5"] {
        let phi = SymbolFunction::parse(spec, 2).unwrap();
        assert!(validate_kernel(&phi, 2, 3, &rule).is_err(), "{spec}");
    }
}
