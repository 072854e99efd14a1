//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use cayley_toeplitz::cli::{self, RunConfig};
use cayley_toeplitz::dpp::{
    sample, standard_test_sets, validate_kernel, verify_correlations, write_jsonl, SampleConfig,
};
use cayley_toeplitz::operator::{build_matrix, radial_compress, radial_norm_check, spectrum, RadialBasis};
use cayley_toeplitz::polynomials::{eval_p, make_quadrature, support_radius, QuadratureRule};
use cayley_toeplitz::transform::{
    brute_force_convolve, convolve, hat_numeric, hat_polynomial_exact, monomial_transform, Coefficient,
};
use cayley_toeplitz::tree::enumerate_ball;
use cayley_toeplitz::{RadialSymbol, Result, SymbolFunction};
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 7;
const SAMPLES: usize = 20_000;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Result<Verdict> {
    Ok(Verdict {
        pass,
        detail: detail.into(),
    })
}

fn rational(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Every output coefficient n ≤ 6 of the fast convolution against the vertex sum.
fn convolution_agrees(a: &RadialSymbol, b: &RadialSymbol) -> Result<bool> {
    let fast = convolve(a, b)?;
    let fast = fast.exact_values().expect("exact inputs");
    for n in 0..=6 {
        let expected = fast.get(n).cloned().unwrap_or_else(|| rational(0, 1));
        if brute_force_convolve(a, b, n)? != Coefficient::Exact(expected) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn criterion_1() -> Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut checked = 0;
    for kappa in 1..=3 {
        let delta = |i: usize| RadialSymbol::delta(kappa, i);
        for i in 0..=4 {
            for j in 0..=4 {
                if !convolution_agrees(&delta(i), &delta(j))? {
                    return verdict(false, format!("kappa {kappa}: delta_{i} * delta_{j} differs"));
                }
                checked += 1;
            }
        }
        for _ in 0..40 {
            let mut random = || {
                let len = rng.random_range(1..=5);
                let v = (0..len).map(|_| rational(rng.random_range(-9..=9), rng.random_range(1..=7))).collect();
                RadialSymbol::exact(kappa, v)
            };
            let (a, b) = (random(), random());
            if !convolution_agrees(&a, &b)? {
                return verdict(false, format!("kappa {kappa}: random pair differs"));
            }
            checked += 1;
        }
    }
    verdict(true, format!("{checked} pairs (all basis pairs plus random), n <= 6, exact"))
}

fn criterion_2() -> Result<Verdict> {
    let mut checked = 0;
    for kappa in 1..=3 {
        let hat = |m: usize| RadialSymbol::exact(kappa, monomial_transform(kappa, m));
        for l in 0..=10 {
            for m in 0..=10 - l {
                if convolve(&hat(l), &hat(m))? != hat(l + m) {
                    return verdict(false, format!("kappa {kappa}: l = {l}, m = {m}"));
                }
                checked += 1;
            }
        }
    }
    verdict(true, format!("{checked} monomial pairs, exact"))
}

fn criterion_3() -> Result<Verdict> {
    let mut worst_off: f64 = 0.0;
    let mut worst_diag: f64 = 0.0;
    for kappa in 1..=3u32 {
        let rule = make_quadrature(kappa, 128)?;
        for n in 0..=12 {
            for m in n..=12 {
                let g = rule.integrate(|t| eval_p(kappa, n, t) * eval_p(kappa, m, t));
                if n == m {
                    let k = kappa as f64;
                    let expected = if n == 0 { 1.0 } else { 1.0 / (k.powi(n as i32 - 1) * (k + 1.0)) };
                    worst_diag = worst_diag.max((g - expected).abs());
                } else {
                    worst_off = worst_off.max(g.abs());
                }
            }
        }
    }
    verdict(
        worst_off <= 1e-9 && worst_diag <= 1e-9,
        format!("max off-diagonal {worst_off:.1e}, max diagonal error {worst_diag:.1e}"),
    )
}

fn criterion_4() -> Result<Verdict> {
    let mut worst: f64 = 0.0;
    let mut identity = true;
    for kappa in 1..=3 {
        let rule = make_quadrature(kappa, 256)?;
        let alpha = hat_numeric(&SymbolFunction::constant(1), kappa, 16, &rule)?;
        for n in 0..=16 {
            let expected = if n == 0 { 1.0 } else { 0.0 };
            worst = worst.max((alpha.get(n) - expected).abs());
        }
        let exact = hat_polynomial_exact(&[rational(1, 1)], kappa)?;
        let ball = enumerate_ball(kappa, 4)?;
        let op = build_matrix(&exact, &ball)?;
        identity &= op.matrix() == &DMatrix::identity(ball.len(), ball.len());
    }
    verdict(
        worst <= 1e-10 && identity,
        format!("max |hat(1) - delta_0| {worst:.1e}, exact matrix is identity: {identity}"),
    )
}

fn criterion_5() -> Result<Verdict> {
    let (kappa, radius) = (2, 8);
    let c = support_radius(kappa);
    let ball = enumerate_ball(kappa, radius)?;
    let basis = RadialBasis::new(&ball);
    let rule = make_quadrature(kappa, 256)?;
    let symbols = [
        SymbolFunction::monomial(1),
        SymbolFunction::monomial(2),
        SymbolFunction::indicator(0.0, c),
    ];
    let mut worst: f64 = 0.0;
    for phi in &symbols {
        let alpha = hat_numeric(phi, kappa, 2 * radius, &rule)?;
        let compressed = radial_compress(&build_matrix(&alpha, &ball)?, &basis)?;
        // the step integrand is smooth on [0, c]; polynomials are integrated over the whole support
        let oracle = match phi {
            SymbolFunction::Step(_) => QuadratureRule::on_interval(kappa, 0.0, c, 128)?,
            _ => make_quadrature(kappa, 128)?,
        };
        let k = kappa as f64;
        let norm = |n: usize| if n == 0 { 1.0 } else { (1.0 / (k.powi(n as i32 - 1) * (k + 1.0))).sqrt() };
        for n in 0..=radius {
            for m in 0..=radius {
                let integral = oracle.integrate(|t| phi.eval(t).unwrap_or(0.0) * eval_p(kappa, n, t) * eval_p(kappa, m, t));
                let expected = integral / (norm(n) * norm(m));
                worst = worst.max((compressed[(n, m)] - expected).abs());
            }
        }
    }
    verdict(worst <= 1e-8, format!("max entry error {worst:.1e} over n, m <= 8"))
}

fn criterion_6() -> Result<Verdict> {
    let alpha = RadialSymbol::exact(1, vec![rational(1, 1), rational(0, 1), rational(-1, 2)]);
    let rep = radial_norm_check(&alpha, 1)?;
    let full = (rep.full_norm - 2.5f64.sqrt()).abs();
    let radial = (rep.radial_norm - 1.5f64.sqrt()).abs();
    verdict(
        full <= 1e-12 && radial <= 1e-12,
        format!(
            "full {:.15} (err {full:.1e}), radial {:.15} (err {radial:.1e})",
            rep.full_norm, rep.radial_norm
        ),
    )
}

fn criterion_7() -> Result<Verdict> {
    let kappa = 2;
    let limit = support_radius(kappa);
    let alpha = hat_polynomial_exact(&[rational(0, 1), rational(1, 1)], kappa)?;
    let mut maxima = Vec::new();
    let mut contained = true;
    for radius in [4, 6, 8] {
        let eig = spectrum(&build_matrix(&alpha, &enumerate_ball(kappa, radius)?)?)?;
        contained &= eig.iter().all(|l| l.abs() <= limit + 1e-8);
        maxima.push(eig.iter().fold(0.0f64, |m, l| m.max(l.abs())));
    }
    let monotone = maxima.windows(2).all(|w| w[1] > w[0]);
    let gap = limit - maxima[2];
    verdict(
        monotone && contained && gap.abs() <= 0.02,
        format!(
            "max |eigenvalue| {:.4} / {:.4} / {:.4} at R = 4 / 6 / 8, monotone {monotone}, \
             contained {contained}, distance to {limit:.4} at R = 8 is {gap:.4} (tolerance 0.02)",
            maxima[0], maxima[1], maxima[2]
        ),
    )
}

/// The two sample files of criterion 10 are compared against the criterion-8 run.
struct SampleRun {
    bytes: Vec<u8>,
}

fn criterion_8(reference: &mut Option<SampleRun>) -> Result<Verdict> {
    let mut details = Vec::new();
    let mut pass = true;
    for (kappa, radius) in [(1, 12), (2, 8)] {
        let rule = make_quadrature(kappa, 256)?;
        let phi = SymbolFunction::parse("step:a=0.5", kappa)?;
        let kernel = validate_kernel(&phi, kappa, radius, &rule)?;
        let samples = sample(&kernel, &SampleConfig::new(SEED, SAMPLES));
        let report = verify_correlations(&kernel, &samples, &standard_test_sets(kernel.ball(), 2))?;
        pass &= report.pass;
        details.push(format!(
            "kappa {kappa}, R {radius}: {} events, {} outside 4 SE, max |z| {:.2}",
            report.rows.len(),
            report.failures().count(),
            report.max_z()
        ));
        if kappa == 2 {
            let mut bytes = Vec::new();
            write_jsonl(&mut bytes, &samples)?;
            *reference = Some(SampleRun { bytes });
        }
    }
    verdict(pass, details.join("; "))
}

fn criterion_9() -> Result<Verdict> {
    let (kappa, radius, a) = (1, 10, 0.5);
    let rule = make_quadrature(kappa, 256)?;
    let phi = SymbolFunction::parse("step:a=0.5", kappa)?;
    let alpha = hat_numeric(&phi, kappa, 2 * radius, &rule)?;
    let sine = |n: i64| if n == 0 { a } else { (n as f64 * a * PI).sin() / (n as f64 * PI) };
    let coeff_err = (0..=10).map(|n| (alpha.get(n) - sine(n as i64)).abs()).fold(0.0, f64::max);

    // on T_1 the ball is the integer segment [-R, R]
    let ball = enumerate_ball(kappa, radius)?;
    let position = |i: usize| {
        let w = ball.vertex(i).word();
        let sign = if w.first() == Some(&1) { -1 } else { 1 };
        sign * w.len() as i64
    };
    let op = build_matrix(&alpha, &ball)?;
    let mut entry_err: f64 = 0.0;
    for i in 0..ball.len() {
        for j in 0..ball.len() {
            entry_err = entry_err.max((op.matrix()[(i, j)] - sine(position(i) - position(j))).abs());
        }
    }
    verdict(
        coeff_err <= 1e-6 && entry_err <= 1e-6,
        format!("coefficient error {coeff_err:.1e}, kernel entry error {entry_err:.1e}"),
    )
}

fn criterion_10(reference: &Option<SampleRun>) -> Result<Verdict> {
    let Some(reference) = reference else {
        return verdict(false, "criterion 8 produced no samples");
    };
    let mut files = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(cayley_toeplitz::Error::from)?;
        let config = RunConfig {
            command: Some(cli::CommandKind::Sample),
            kappa: Some(2),
            radius: Some(8),
            phi: Some("step:a=0.5".into()),
            samples: Some(SAMPLES),
            seed: Some(SEED),
            out: Some(dir.path().to_path_buf()),
            ..RunConfig::default()
        };
        let outcome = cli::run(&config)?;
        let path = dir.path().join(cli::samples_file_name(&outcome.config_hash));
        files.push(std::fs::read(path).map_err(cayley_toeplitz::Error::from)?);
    }
    let identical = files[0] == files[1] && files[0] == reference.bytes;
    verdict(
        identical,
        format!(
            "two command-line runs and the library run: {} bytes each, identical: {identical}",
            files[0].len()
        ),
    )
}

type Criterion = Box<dyn FnMut() -> Result<Verdict>>;

fn main() {
    let mut samples = None;
    let criteria: Vec<(u32, Duration, Criterion)> = vec![
        (1, Duration::from_secs(30), Box::new(criterion_1)),
        (2, Duration::from_secs(5), Box::new(criterion_2)),
        (3, Duration::from_secs(1), Box::new(criterion_3)),
        (4, Duration::from_secs(1), Box::new(criterion_4)),
        (5, Duration::from_secs(10), Box::new(criterion_5)),
        (6, Duration::from_secs(1), Box::new(criterion_6)),
        (7, Duration::from_secs(20), Box::new(criterion_7)),
    ];
    let mut failed = 0;
    let mut report = |id: u32, budget: Duration, elapsed: Duration, outcome: Result<Verdict>| {
        let (pass, detail) = match outcome {
            Ok(v) => (v.pass && elapsed <= budget, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        let status = if pass { "PASS" } else { "FAIL" };
        println!("criterion {id:2}: {status} [{elapsed:.2?} of {budget:?}] {detail}");
    };
    for (id, budget, mut f) in criteria {
        let start = Instant::now();
        let outcome = f();
        report(id, budget, start.elapsed(), outcome);
    }

    // criteria 8 and 10 share one five-minute budget
    let budget = Duration::from_secs(300);
    let start = Instant::now();
    let outcome = criterion_8(&mut samples);
    let elapsed_8 = start.elapsed();
    report(8, budget, elapsed_8, outcome);

    let start = Instant::now();
    let outcome = criterion_9();
    report(9, Duration::from_secs(1), start.elapsed(), outcome);

    let start = Instant::now();
    let outcome = criterion_10(&samples);
    report(10, budget, elapsed_8 + start.elapsed(), outcome);

    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
