//! Cartier-Dunau polynomials and their orthogonality measure Π_κ.
//!
//! P_0 = 1, P_1 = t and t P_n = κ/(κ+1) P_{n+1} + 1/(κ+1) P_{n-1}. They are the
//! spherical functions of the tree and are orthogonal for
//!
//! dΠ_κ(t) = (κ+1)/(2π) · sqrt(4κ/(κ+1)² - t²) / (1 - t²) dt  on |t| <= 2√κ/(κ+1).
//!
//! For κ = 1 this is the arcsine law and P_n(cos θ) = cos nθ.

use std::f64::consts::PI;
use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow};

use crate::error::{Error, Result};
use crate::tree::check_kappa;

/// Highest degree evaluated by the forward recursion unless raised explicitly.
pub const DEFAULT_DEGREE_CAP: usize = 64;

/// Default number of nodes for quadrature against Π_κ.
pub const DEFAULT_QUAD_NODES: usize = 256;

/// Right end of the support of Π_κ, 2√κ/(κ+1).
pub fn support_radius(kappa: u32) -> f64 {
    2.0 * (kappa as f64).sqrt() / (kappa as f64 + 1.0)
}

/// P_n(t) by forward recursion.
pub fn eval_p(kappa: u32, n: usize, t: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let k = kappa as f64;
    let (mut prev, mut cur) = (1.0, t);
    for _ in 1..n {
        let next = ((k + 1.0) * t * cur - prev) / k;
        prev = cur;
        cur = next;
    }
    cur
}

/// Fills `out[m]` with P_m(t) for every slot of `out`.
pub fn eval_p_all(kappa: u32, t: f64, out: &mut [f64]) {
    let k = kappa as f64;
    let (mut prev, mut cur) = (1.0, t);
    for (m, slot) in out.iter_mut().enumerate() {
        *slot = match m {
            0 => 1.0,
            1 => t,
            _ => {
                let next = ((k + 1.0) * t * cur - prev) / k;
                prev = cur;
                cur = next;
                next
            }
        };
    }
}

/// P_n(t) with the degree cap enforced and non-finite values reported.
pub fn eval_p_checked(kappa: u32, n: usize, t: f64, cap: usize) -> Result<f64> {
    check_kappa(kappa)?;
    if n > cap {
        return Err(Error::InvalidArgument(format!(
            "degree {n} exceeds recursion cap {cap}"
        )));
    }
    let v = eval_p(kappa, n, t);
    if !v.is_finite() {
        return Err(Error::Overflow("Cartier-Dunau recursion"));
    }
    Ok(v)
}

/// Monic companion: Q_0 = (κ+1)/κ, Q_n = P_n / k_n for n >= 1.
pub fn eval_q(kappa: u32, n: usize, t: f64) -> f64 {
    let k = kappa as f64;
    if n == 0 {
        return (k + 1.0) / k;
    }
    // Q_{n+1} = t Q_n - κ/(κ+1)² Q_{n-1}, started from Q_1 = t and Q_0.
    let c = k / ((k + 1.0) * (k + 1.0));
    let (mut prev, mut cur) = ((k + 1.0) / k, t);
    for _ in 1..n {
        let next = t * cur - c * prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn rational(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Leading coefficient k_n of P_n: 1 for n = 0, ((κ+1)/κ)^(n-1) otherwise.
pub fn leading_coeff(kappa: u32, n: usize) -> BigRational {
    if n <= 1 {
        return BigRational::one();
    }
    let ratio = rational(kappa as u64 + 1, kappa as u64);
    Pow::pow(&ratio, (n - 1) as u64)
}

/// ‖P_n‖² in L²(Π_κ): 1 for n = 0, 1/(κ^(n-1)(κ+1)) otherwise.
pub fn l2_norm_sq(kappa: u32, n: usize) -> BigRational {
    if n == 0 {
        return BigRational::one();
    }
    let den = Pow::pow(BigInt::from(kappa), (n - 1) as u64) * BigInt::from(kappa + 1);
    BigRational::new(BigInt::one(), den)
}

/// ‖P_n‖² as a float.
pub fn l2_norm_sq_f64(kappa: u32, n: usize) -> f64 {
    if n == 0 {
        1.0
    } else {
        1.0 / ((kappa as f64).powi(n as i32 - 1) * (kappa as f64 + 1.0))
    }
}

/// Density of Π_κ with respect to Lebesgue measure.
pub fn density(kappa: u32, t: f64) -> f64 {
    let c = support_radius(kappa);
    if t.abs() > c || t.abs() >= 1.0 {
        return 0.0;
    }
    let k = kappa as f64;
    (k + 1.0) / (2.0 * PI) * (c * c - t * t).sqrt() / (1.0 - t * t)
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let (p, pm1) = if n == 1 { (x, 1.0) } else { (p1, p0) };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Nodes and positive weights approximating integrals against Π_κ (or a piece of it).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    kappa: u32,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Full-support rule with `n` nodes.
///
/// Substituting t = c cos θ (c the support radius) turns dΠ_κ into
/// (κ+1)/(2π) · c² sin²θ / (1 - c² cos²θ) dθ on [0, π], which is analytic, so
/// plain Gauss-Legendre in θ converges geometrically.
pub fn make_quadrature(kappa: u32, n: usize) -> Result<QuadratureRule> {
    check_kappa(kappa)?;
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "quadrature needs at least 2 nodes, got {n}"
        )));
    }
    Ok(QuadratureRule::on_theta_interval(kappa, 0.0, PI, n))
}

impl QuadratureRule {
    /// Rule for ∫_{[a,b]} f dΠ_κ; the interval is clipped to the support.
    pub fn on_interval(kappa: u32, a: f64, b: f64, n: usize) -> Result<QuadratureRule> {
        check_kappa(kappa)?;
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "quadrature needs at least 2 nodes, got {n}"
            )));
        }
        if !(a <= b) {
            return Err(Error::InvalidArgument(format!("empty interval [{a}, {b}]")));
        }
        let c = support_radius(kappa);
        let theta = |t: f64| (t / c).clamp(-1.0, 1.0).acos();
        // θ is decreasing in t
        let (lo, hi) = (theta(b), theta(a));
        Ok(QuadratureRule::on_theta_interval(kappa, lo, hi, n))
    }

    fn on_theta_interval(kappa: u32, lo: f64, hi: f64, n: usize) -> QuadratureRule {
        let (x, w) = gauss_legendre(n);
        let c = support_radius(kappa);
        let k = kappa as f64;
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for (xi, wi) in x.iter().zip(&w) {
            let th = mid + half * xi;
            let s2 = th.sin().powi(2);
            let jac = (k + 1.0) / (2.0 * PI) * c * c * s2 / ((1.0 - c * c) + c * c * s2);
            nodes.push(c * th.cos());
            weights.push(wi * half * jac);
        }
        QuadratureRule {
            kappa,
            nodes,
            weights,
        }
    }

    pub fn kappa(&self) -> u32 {
        self.kappa
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "node,weight")?;
        for (t, w) in self.nodes.iter().zip(&self.weights) {
            writeln!(out, "{t:.17e},{w:.17e}")?;
        }
        Ok(())
    }
}
