//! Symbols on the spectral side (functions φ on supp Π_κ) and on the tree side
//! (radial kernels α: ℕ₀ → ℝ).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::polynomials::{support_radius, DEFAULT_DEGREE_CAP};
use crate::tree::{check_kappa, sphere_size};

/// Constant piece `value` on `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPiece {
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
}

/// A bounded function φ on the support of Π_κ.
#[derive(Debug, Clone, PartialEq)]
pub enum SymbolFunction {
    /// Exact coefficients, ascending degree.
    Polynomial(Vec<BigRational>),
    /// Sorted, disjoint pieces; zero outside them.
    Step(Vec<StepPiece>),
    /// Values sampled on the nodes of the quadrature rule used for the transform.
    Grid(Vec<f64>),
}

fn parse_rational(tok: &str) -> Result<BigRational> {
    let err = |reason: &str| Error::Parse {
        token: tok.to_string(),
        reason: reason.to_string(),
    };
    let tok = tok.trim();
    if let Some((n, d)) = tok.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| err("bad numerator"))?;
        let d: BigInt = d.trim().parse().map_err(|_| err("bad denominator"))?;
        if d.is_zero() {
            return Err(err("zero denominator"));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Ok(n) = tok.parse::<BigInt>() {
        return Ok(BigRational::from_integer(n));
    }
    // Decimal literal: exact value of the decimal string, not of the nearest f64.
    let (int, frac) = tok.split_once('.').ok_or_else(|| err("not a rational"))?;
    if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return Err(err("not a rational"));
    }
    let neg = int.starts_with('-');
    let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
    let mag: BigInt = digits.parse().map_err(|_| err("not a rational"))?;
    let den = num_traits::Pow::pow(BigInt::from(10), frac.len() as u64);
    let r = BigRational::new(mag, den);
    Ok(if neg { -r } else { r })
}

fn parse_f64(tok: &str) -> Result<f64> {
    tok.trim().parse::<f64>().map_err(|_| Error::Parse {
        token: tok.to_string(),
        reason: "not a number".into(),
    })
}

/// `(a,b)` → (a, b)
fn parse_interval(tok: &str) -> Result<(f64, f64)> {
    let inner = tok
        .trim()
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| Error::Parse {
            token: tok.to_string(),
            reason: "expected (a,b)".into(),
        })?;
    let (a, b) = inner.split_once(',').ok_or_else(|| Error::Parse {
        token: tok.to_string(),
        reason: "expected (a,b)".into(),
    })?;
    Ok((parse_f64(a)?, parse_f64(b)?))
}

impl SymbolFunction {
    pub fn constant(c: i64) -> Self {
        SymbolFunction::Polynomial(vec![BigRational::from_integer(c.into())])
    }

    /// φ(t) = t^m
    pub fn monomial(m: usize) -> Self {
        let mut c = vec![BigRational::zero(); m + 1];
        c[m] = BigRational::from_integer(1.into());
        SymbolFunction::Polynomial(c)
    }

    pub fn indicator(lo: f64, hi: f64) -> Self {
        SymbolFunction::Step(vec![StepPiece { lo, hi, value: 1.0 }])
    }

    /// Parses the symbol mini-grammar:
    ///
    /// * `poly:c0,c1,...` with exact rationals (`p/q` or decimals)
    /// * `step:(a,b)=v;(b,c)=w`
    /// * `step:a=F`: indicator of [c·cos(Fπ), c], c the support radius
    /// * `indicator:(a,b)`
    /// * `const:v`
    pub fn parse(spec: &str, kappa: u32) -> Result<Self> {
        let (kind, body) = spec.split_once(':').ok_or_else(|| Error::Parse {
            token: spec.to_string(),
            reason: "expected <kind>:<body>".into(),
        })?;
        let phi = match kind.trim() {
            "poly" => SymbolFunction::Polynomial(
                body.split(',').map(parse_rational).collect::<Result<_>>()?,
            ),
            "const" => SymbolFunction::Polynomial(vec![parse_rational(body)?]),
            "indicator" => {
                let (a, b) = parse_interval(body)?;
                SymbolFunction::indicator(a, b)
            }
            "step" if body.trim_start().starts_with("a=") => {
                let frac = parse_f64(&body.trim_start()[2..])?;
                if !(0.0..=1.0).contains(&frac) {
                    return Err(Error::Parse {
                        token: body.to_string(),
                        reason: "arc fraction must lie in [0, 1]".into(),
                    });
                }
                let c = support_radius(kappa);
                SymbolFunction::indicator(c * (frac * std::f64::consts::PI).cos(), c)
            }
            "step" => {
                let mut pieces = Vec::new();
                for part in body.split(';').filter(|p| !p.trim().is_empty()) {
                    let (iv, v) = part.split_once('=').ok_or_else(|| Error::Parse {
                        token: part.to_string(),
                        reason: "expected (a,b)=v".into(),
                    })?;
                    let (lo, hi) = parse_interval(iv)?;
                    pieces.push(StepPiece {
                        lo,
                        hi,
                        value: parse_f64(v)?,
                    });
                }
                SymbolFunction::Step(pieces)
            }
            other => {
                return Err(Error::Parse {
                    token: other.to_string(),
                    reason: "unknown symbol kind (poly, const, step, indicator)".into(),
                })
            }
        };
        phi.validate(kappa)?;
        Ok(phi)
    }

    /// Checks the structural invariants for use with Π_κ.
    pub fn validate(&self, kappa: u32) -> Result<()> {
        check_kappa(kappa)?;
        match self {
            SymbolFunction::Polynomial(c) => {
                if c.len() > DEFAULT_DEGREE_CAP + 1 {
                    return Err(Error::InvalidArgument(format!(
                        "polynomial degree {} exceeds cap {DEFAULT_DEGREE_CAP}",
                        c.len() - 1
                    )));
                }
            }
            SymbolFunction::Step(pieces) => {
                let c = support_radius(kappa) + 1e-12;
                let mut last = f64::NEG_INFINITY;
                for p in pieces {
                    if !(p.lo < p.hi) || !p.value.is_finite() {
                        return Err(Error::InvalidArgument(format!(
                            "bad step piece [{}, {}) = {}",
                            p.lo, p.hi, p.value
                        )));
                    }
                    if p.lo < last {
                        return Err(Error::InvalidArgument(
                            "step breakpoints must be increasing and disjoint".into(),
                        ));
                    }
                    if p.lo < -c || p.hi > c {
                        return Err(Error::InvalidArgument(format!(
                            "step piece [{}, {}) leaves the support [-{c}, {c}]",
                            p.lo, p.hi
                        )));
                    }
                    last = p.hi;
                }
            }
            SymbolFunction::Grid(v) => {
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidArgument("grid values must be finite".into()));
                }
            }
        }
        Ok(())
    }

    /// Pointwise value; `None` for grid symbols.
    pub fn eval(&self, t: f64) -> Option<f64> {
        match self {
            SymbolFunction::Polynomial(c) => {
                let cf: Vec<f64> = c.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect();
                Some(cf.iter().rev().fold(0.0, |acc, &a| acc * t + a))
            }
            SymbolFunction::Step(pieces) => Some(
                pieces
                    .iter()
                    .find(|p| p.lo <= t && t < p.hi)
                    .map_or(0.0, |p| p.value),
            ),
            SymbolFunction::Grid(_) => None,
        }
    }

    /// (inf, sup) of φ over supp Π_κ. Polynomials are sampled densely, so the
    /// result is accurate to roughly 1e-6 relative.
    pub fn value_range(&self, kappa: u32) -> (f64, f64) {
        let c = support_radius(kappa);
        match self {
            SymbolFunction::Polynomial(_) => {
                let n = 20_001;
                (0..n)
                    .map(|i| self.eval(-c + 2.0 * c * i as f64 / (n - 1) as f64).unwrap())
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
            }
            SymbolFunction::Step(pieces) => {
                let mut covered = 0.0;
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for p in pieces {
                    covered += p.hi.min(c) - p.lo.max(-c);
                    lo = lo.min(p.value);
                    hi = hi.max(p.value);
                }
                if covered < 2.0 * c - 1e-12 {
                    lo = lo.min(0.0);
                    hi = hi.max(0.0);
                }
                (lo, hi)
            }
            SymbolFunction::Grid(v) => v
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x))),
        }
    }

    /// Pointwise product; defined for two polynomials or two step functions.
    pub fn product(&self, other: &SymbolFunction) -> Result<SymbolFunction> {
        match (self, other) {
            (SymbolFunction::Polynomial(a), SymbolFunction::Polynomial(b)) => {
                if a.is_empty() || b.is_empty() {
                    return Ok(SymbolFunction::Polynomial(Vec::new()));
                }
                let mut c = vec![BigRational::zero(); a.len() + b.len() - 1];
                for (i, x) in a.iter().enumerate() {
                    for (j, y) in b.iter().enumerate() {
                        c[i + j] += x * y;
                    }
                }
                Ok(SymbolFunction::Polynomial(c))
            }
            (SymbolFunction::Step(a), SymbolFunction::Step(b)) => {
                let mut out = Vec::new();
                for p in a {
                    for q in b {
                        let lo = p.lo.max(q.lo);
                        let hi = p.hi.min(q.hi);
                        if lo < hi {
                            out.push(StepPiece {
                                lo,
                                hi,
                                value: p.value * q.value,
                            });
                        }
                    }
                }
                out.sort_by(|x, y| x.lo.total_cmp(&y.lo));
                Ok(SymbolFunction::Step(out))
            }
            (SymbolFunction::Grid(a), SymbolFunction::Grid(b)) if a.len() == b.len() => Ok(
                SymbolFunction::Grid(a.iter().zip(b).map(|(x, y)| x * y).collect()),
            ),
            _ => Err(Error::InvalidArgument(
                "product needs two symbols of the same representation".into(),
            )),
        }
    }
}

/// Stored coefficients of a radial kernel.
#[derive(Debug, Clone, PartialEq)]
pub enum SymbolValues {
    /// Exact values; α(n) = 0 past the end.
    Exact(Vec<BigRational>),
    /// Floating-point values on 0..=n_max.
    ///
    /// `tail_energy` bounds Σ_{l > n_max} #S_l · α(l)², the ℓ² mass of one
    /// kernel row that was cut off; zero means α vanishes past n_max.
    Numeric {
        values: Vec<f64>,
        quad_nodes: Option<usize>,
        tail_energy: f64,
    },
}

/// A radial kernel α on T_κ, the kernel of T_α(x, y) = α(d(x, y)).
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSymbol {
    kappa: u32,
    values: SymbolValues,
}

impl RadialSymbol {
    /// Exact symbol; trailing zeros are dropped so equal kernels compare equal.
    pub fn exact(kappa: u32, mut values: Vec<BigRational>) -> Self {
        while values.last().is_some_and(|v| v.is_zero()) {
            values.pop();
        }
        RadialSymbol {
            kappa,
            values: SymbolValues::Exact(values),
        }
    }

    /// Finite-support numeric symbol.
    pub fn numeric(kappa: u32, values: Vec<f64>) -> Self {
        RadialSymbol {
            kappa,
            values: SymbolValues::Numeric {
                values,
                quad_nodes: None,
                tail_energy: 0.0,
            },
        }
    }

    pub(crate) fn numeric_with_tail(
        kappa: u32,
        values: Vec<f64>,
        quad_nodes: Option<usize>,
        tail_energy: f64,
    ) -> Self {
        RadialSymbol {
            kappa,
            values: SymbolValues::Numeric {
                values,
                quad_nodes,
                tail_energy: tail_energy.max(0.0),
            },
        }
    }

    /// The Kronecker symbol δ_n (exact).
    pub fn delta(kappa: u32, n: usize) -> Self {
        let mut v = vec![BigRational::zero(); n + 1];
        v[n] = BigRational::from_integer(1.into());
        RadialSymbol::exact(kappa, v)
    }

    pub fn from_i64(kappa: u32, values: &[i64]) -> Self {
        RadialSymbol::exact(
            kappa,
            values.iter().map(|&v| BigRational::from_integer(v.into())).collect(),
        )
    }

    pub fn kappa(&self) -> u32 {
        self.kappa
    }

    pub fn values(&self) -> &SymbolValues {
        &self.values
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.values, SymbolValues::Exact(_))
    }

    /// Number of stored coefficients.
    pub fn len(&self) -> usize {
        match &self.values {
            SymbolValues::Exact(v) => v.len(),
            SymbolValues::Numeric { values, .. } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// True when α(n) = 0 for every n past the stored coefficients.
    pub fn has_finite_support(&self) -> bool {
        match &self.values {
            SymbolValues::Exact(_) => true,
            SymbolValues::Numeric { tail_energy, .. } => *tail_energy == 0.0,
        }
    }

    pub fn tail_energy(&self) -> f64 {
        match &self.values {
            SymbolValues::Exact(_) => 0.0,
            SymbolValues::Numeric { tail_energy, .. } => *tail_energy,
        }
    }

    pub fn exact_values(&self) -> Option<&[BigRational]> {
        match &self.values {
            SymbolValues::Exact(v) => Some(v),
            SymbolValues::Numeric { .. } => None,
        }
    }

    /// α(n) as a float, zero past the stored range.
    pub fn get(&self, n: usize) -> f64 {
        match &self.values {
            SymbolValues::Exact(v) => v.get(n).map_or(0.0, |x| x.to_f64().unwrap_or(f64::NAN)),
            SymbolValues::Numeric { values, .. } => values.get(n).copied().unwrap_or(0.0),
        }
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        (0..self.len()).map(|n| self.get(n)).collect()
    }

    /// Retained part of the row mass, Σ_{l ≤ n_max} κ^l α(l)².
    pub fn weighted_energy(&self) -> f64 {
        let k = self.kappa as f64;
        (0..self.len()).map(|l| k.powi(l as i32) * self.get(l).powi(2)).sum()
    }

    /// ‖T_α δ_x‖² restricted to the stored coefficients: Σ #S_l α(l)².
    pub fn row_energy(&self) -> f64 {
        (0..self.len())
            .map(|l| sphere_weight(self.kappa, l) * self.get(l).powi(2))
            .sum()
    }

    pub fn to_json(&self) -> Value {
        let values: Vec<Value> = match &self.values {
            SymbolValues::Exact(v) => v.iter().map(|x| Value::String(x.to_string())).collect(),
            SymbolValues::Numeric { values, .. } => values.iter().map(|&x| json!(x)).collect(),
        };
        json!({ "kappa": self.kappa, "exact": self.is_exact(), "values": values })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::InvalidArgument(format!("radial symbol json: {m}"));
        let obj = v.as_object().ok_or_else(|| bad("expected object"))?;
        if let Some(k) = obj.keys().find(|k| !["kappa", "exact", "values"].contains(&k.as_str())) {
            return Err(bad(&format!("unknown key `{k}`")));
        }
        let kappa = obj
            .get("kappa")
            .and_then(Value::as_u64)
            .and_then(|k| u32::try_from(k).ok())
            .ok_or_else(|| bad("missing kappa"))?;
        check_kappa(kappa)?;
        let exact = obj.get("exact").and_then(Value::as_bool).ok_or_else(|| bad("missing exact"))?;
        let values = obj.get("values").and_then(Value::as_array).ok_or_else(|| bad("missing values"))?;
        if exact {
            let v = values
                .iter()
                .map(|x| match x {
                    Value::String(s) => parse_rational(s),
                    Value::Number(n) => parse_rational(&n.to_string()),
                    _ => Err(bad("exact values must be rationals")),
                })
                .collect::<Result<_>>()?;
            Ok(RadialSymbol::exact(kappa, v))
        } else {
            let v = values
                .iter()
                .map(|x| x.as_f64().ok_or_else(|| bad("numeric values must be numbers")))
                .collect::<Result<_>>()?;
            Ok(RadialSymbol::numeric(kappa, v))
        }
    }
}

/// #S_l as a float (used as a weight).
pub(crate) fn sphere_weight(kappa: u32, l: usize) -> f64 {
    match sphere_size(kappa, l) {
        Ok(s) => s as f64,
        Err(_) => (kappa as f64 + 1.0) * (kappa as f64).powi(l as i32 - 1),
    }
}

/// Parses a comma-separated list of rationals into an exact radial symbol.
pub fn parse_alpha(spec: &str, kappa: u32) -> Result<RadialSymbol> {
    check_kappa(kappa)?;
    Ok(RadialSymbol::exact(
        kappa,
        spec.split(',').map(parse_rational).collect::<Result<_>>()?,
    ))
}
