//! Determinantal point processes with radial Toeplitz kernels.
//!
//! The process on B_R(o) is the DPP of the compressed kernel T[φ] restricted
//! to the ball, which is the restriction of the infinite-volume process.
//! Samples are drawn with the Hough-Krishnapur-Peres-Virág scheme on the
//! sparse eigenvectors from [`crate::blocks`].
//!
//! Random streams: sample `i` of a run with seed `s` uses
//! `ChaCha8Rng::seed_from_u64(s)` switched to stream `i`.

use std::io::Write;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::blocks::{block_eigen, EigenSystem};
use crate::error::{Error, Result};
use crate::operator::{build_matrix, TruncatedOperator};
use crate::polynomials::QuadratureRule;
use crate::symbol::{RadialSymbol, SymbolFunction};
use crate::transform::hat_numeric;
use crate::tree::{enumerate_ball, Ball};

/// Eigenvalues outside [-ERR, 1 + ERR] are rejected.
pub const EIGEN_RANGE_ERROR: f64 = 1e-6;
/// Eigenvalues inside [-CERT, 1 + CERT] are certified.
pub const EIGEN_RANGE_CERT: f64 = 1e-9;
/// Residual diagonals below this are treated as exhausted.
pub const DIAGONAL_FLOOR: f64 = 1e-14;
/// Minimum number of samples for a correlation check.
pub const MIN_VERIFY_SAMPLES: usize = 10_000;
/// Acceptance width in standard errors.
pub const SIGMA_WIDTH: f64 = 4.0;

/// A certified kernel 0 ≤ K ≤ 1 together with its eigen-data.
#[derive(Debug, Clone)]
pub struct DppKernel {
    operator: TruncatedOperator,
    eigen: EigenSystem,
    probabilities: Vec<f64>,
    min_eigenvalue: f64,
    max_eigenvalue: f64,
    certified: bool,
}

/// Builds T[φ] on B_R(o), decomposes it and certifies its spectrum.
pub fn validate_kernel(
    phi: &SymbolFunction,
    kappa: u32,
    radius: usize,
    rule: &QuadratureRule,
) -> Result<DppKernel> {
    let ball = enumerate_ball(kappa, radius)?;
    validate_kernel_on(phi, &ball, rule)
}

/// [`validate_kernel`] on an already enumerated ball.
pub fn validate_kernel_on(phi: &SymbolFunction, ball: &Ball, rule: &QuadratureRule) -> Result<DppKernel> {
    let (lo, hi) = phi.value_range(ball.kappa());
    if lo < -EIGEN_RANGE_ERROR || hi > 1.0 + EIGEN_RANGE_ERROR {
        return Err(Error::Certification(format!(
            "symbol takes values in [{lo}, {hi}], outside [0, 1]"
        )));
    }
    let alpha = hat_numeric(phi, ball.kappa(), 2 * ball.radius(), rule)?;
    DppKernel::from_symbol(&alpha, ball)
}

impl DppKernel {
    /// Kernel with entries α(d(x, y)) on `ball`.
    pub fn from_symbol(alpha: &RadialSymbol, ball: &Ball) -> Result<Self> {
        let operator = build_matrix(alpha, ball)?;
        let eigen = block_eigen(alpha, ball)?;
        Self::certify(operator, eigen)
    }

    /// Kernel from an arbitrary symmetric matrix, decomposed densely.
    pub fn from_operator(operator: TruncatedOperator) -> Result<Self> {
        let dense = operator.eigen()?;
        let eigen = EigenSystem::from_dense(&dense.values, &dense.vectors);
        Self::certify(operator, eigen)
    }

    fn certify(operator: TruncatedOperator, eigen: EigenSystem) -> Result<Self> {
        let min_eigenvalue = eigen.values.iter().copied().fold(f64::INFINITY, f64::min);
        let max_eigenvalue = eigen.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if min_eigenvalue < -EIGEN_RANGE_ERROR || max_eigenvalue > 1.0 + EIGEN_RANGE_ERROR {
            return Err(Error::Certification(format!(
                "kernel spectrum [{min_eigenvalue}, {max_eigenvalue}] leaves [0, 1]"
            )));
        }
        let certified = eigen.values.is_empty()
            || (min_eigenvalue >= -EIGEN_RANGE_CERT && max_eigenvalue <= 1.0 + EIGEN_RANGE_CERT);
        let probabilities = eigen.values.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        Ok(DppKernel {
            operator,
            eigen,
            probabilities,
            min_eigenvalue,
            max_eigenvalue,
            certified,
        })
    }

    /// The same process with vertex `i` renamed `perm[i]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        let n = self.dim();
        let mut inverse = vec![usize::MAX; n];
        for (i, &p) in perm.iter().enumerate() {
            if p >= n || inverse[p] != usize::MAX {
                return Err(Error::InvalidArgument("not a permutation of the ball".into()));
            }
            inverse[p] = i;
        }
        if perm.len() != n {
            return Err(Error::DimensionMismatch("permutation length".into()));
        }
        let operator = self.operator.permuted(&inverse)?;
        let mut eigen = self.eigen.clone();
        for v in &mut eigen.vectors {
            for e in &mut v.entries {
                e.0 = perm[e.0];
            }
        }
        Ok(DppKernel {
            operator,
            eigen,
            ..self.clone()
        })
    }

    pub fn operator(&self) -> &TruncatedOperator {
        &self.operator
    }

    pub fn ball(&self) -> &Ball {
        self.operator.ball()
    }

    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    pub fn entry(&self, x: usize, y: usize) -> f64 {
        self.operator.matrix()[(x, y)]
    }

    pub fn eigen(&self) -> &EigenSystem {
        &self.eigen
    }

    /// Eigenvalues clamped to [0, 1], in the order of [`Self::eigen`].
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.max_eigenvalue
    }

    /// Whether the raw spectrum lies in [0, 1] up to 1e-9.
    pub fn is_certified(&self) -> bool {
        self.certified
    }

    /// E[#ξ] = tr K.
    pub fn expected_cardinality(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    /// Var[#ξ] = Σ λ(1 - λ).
    pub fn cardinality_variance(&self) -> f64 {
        self.probabilities.iter().map(|p| p * (1.0 - p)).sum()
    }
}

/// How the projection DPP left after the eigenvector selection is sampled.
/// Both are exact and give the same law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProjectionMethod {
    /// Visit vertices in depth-first order and include each with its
    /// conditional probability given the decisions so far.
    #[default]
    Sequential,
    /// Pick points with probability proportional to the residual diagonal
    /// and project them out, one per selected eigenvector.
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct SampleConfig {
    pub seed: u64,
    pub n_samples: usize,
    pub method: ProjectionMethod,
}

impl SampleConfig {
    pub fn new(seed: u64, n_samples: usize) -> Self {
        SampleConfig {
            seed,
            n_samples,
            method: ProjectionMethod::default(),
        }
    }

    pub fn with_method(self, method: ProjectionMethod) -> Self {
        SampleConfig { method, ..self }
    }
}

/// A point configuration: sorted ball indices.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Configuration {
    pub points: Vec<usize>,
}

impl Configuration {
    pub fn new(mut points: Vec<usize>) -> Self {
        points.sort_unstable();
        points.dedup();
        Configuration { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.points.binary_search(&x).is_ok()
    }
}

/// Random stream for one sample.
pub fn sample_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Eigenvector entries grouped by vertex.
struct RowTable {
    offsets: Vec<usize>,
    entries: Vec<(u32, f64)>,
}

impl RowTable {
    fn new(eigen: &EigenSystem) -> Self {
        let rows = eigen.rows(|_| true);
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        offsets.push(0);
        let mut entries = Vec::new();
        for r in rows {
            entries.extend(r);
            offsets.push(entries.len());
        }
        RowTable { offsets, entries }
    }
}

/// Vertex visiting order for the sequential method, with the points where
/// each eigenvector coordinate enters and leaves play.
struct Schedule {
    order: Vec<usize>,
    /// eigenvectors whose first support vertex is at this position
    enter: Vec<Vec<u32>>,
    /// eigenvectors whose last support vertex is at this position
    leave: Vec<Vec<u32>>,
    /// most coordinates live at once
    width: usize,
}

impl Schedule {
    fn new(ball: &Ball, table: &RowTable, n_vectors: usize) -> Self {
        let order = depth_first_order(ball);
        let mut first = vec![usize::MAX; n_vectors];
        let mut last = vec![0; n_vectors];
        for (t, &x) in order.iter().enumerate() {
            for &(e, _) in &table.entries[table.offsets[x]..table.offsets[x + 1]] {
                first[e as usize] = first[e as usize].min(t);
                last[e as usize] = t;
            }
        }
        let n = order.len();
        let mut enter = vec![Vec::new(); n];
        let mut leave = vec![Vec::new(); n];
        for e in 0..n_vectors {
            if first[e] != usize::MAX {
                enter[first[e]].push(e as u32);
                leave[last[e]].push(e as u32);
            }
        }
        let mut live = 0usize;
        let mut width = 0usize;
        for t in 0..n {
            live += enter[t].len();
            width = width.max(live);
            live -= leave[t].len();
        }
        Schedule {
            order,
            enter,
            leave,
            width,
        }
    }
}

/// Ball indices in depth-first pre-order.
fn depth_first_order(ball: &Ball) -> Vec<usize> {
    let mut order = Vec::with_capacity(ball.len());
    let mut stack = vec![0usize];
    while let Some(i) = stack.pop() {
        order.push(i);
        let v = ball.vertex(i);
        if v.depth() < ball.radius() {
            let fanout = if v.is_root() { ball.kappa() + 1 } else { ball.kappa() };
            for b in (0..fanout).rev() {
                stack.push(ball.index_of(&v.child(b)).expect("child within radius"));
            }
        }
    }
    order
}

/// Draws `config.n_samples` configurations, in sample order.
///
/// Each draw first keeps eigenvector e with probability λ_e, then samples the
/// projection DPP onto the kept vectors with `config.method`.
pub fn sample(kernel: &DppKernel, config: &SampleConfig) -> Vec<Configuration> {
    let table = RowTable::new(&kernel.eigen);
    let schedule = match config.method {
        ProjectionMethod::Sequential => Some(Schedule::new(kernel.ball(), &table, kernel.probabilities.len())),
        ProjectionMethod::Greedy => None,
    };
    (0..config.n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(config.seed, i);
            let selected: Vec<bool> = kernel.probabilities.iter().map(|&p| rng.random::<f64>() < p).collect();
            match &schedule {
                Some(s) => sequential_projection(&table, s, &selected, &mut rng),
                None => greedy_projection(&table, &selected, &mut rng),
            }
        })
        .collect()
}

/// Chain rule over vertices for the projection onto the selected eigenvectors.
///
/// The conditional kernel after deciding some vertices is V M Vᵀ with V the
/// selected eigenvectors. Including x with probability p = r_xᵀ M r_x and then
/// conditioning is the rank-one update M -= u uᵀ / (p or p - 1), u = M r_x.
/// A coordinate matters only between the first and last vertex of its
/// eigenvector's support, so M is kept on the live coordinates only.
fn sequential_projection(
    table: &RowTable,
    schedule: &Schedule,
    selected: &[bool],
    rng: &mut ChaCha8Rng,
) -> Configuration {
    let a = schedule.width;
    let mut m = vec![0.0; a * a];
    let mut slot = vec![u32::MAX; selected.len()];
    let mut free: Vec<u32> = (0..a as u32).rev().collect();
    let mut high = 0usize;
    let mut r: Vec<(usize, f64)> = Vec::new();
    let mut u = vec![0.0; a];
    let mut points = Vec::new();

    for (t, &x) in schedule.order.iter().enumerate() {
        for &e in &schedule.enter[t] {
            if selected[e as usize] {
                let s = free.pop().expect("schedule width") as usize;
                slot[e as usize] = s as u32;
                high = high.max(s + 1);
                for i in 0..a {
                    m[s * a + i] = 0.0;
                    m[i * a + s] = 0.0;
                }
                m[s * a + s] = 1.0;
            }
        }

        r.clear();
        r.extend(
            table.entries[table.offsets[x]..table.offsets[x + 1]]
                .iter()
                .filter(|(e, _)| selected[*e as usize])
                .map(|&(e, v)| (slot[e as usize] as usize, v)),
        );
        let u = &mut u[..high];
        u.iter_mut().for_each(|v| *v = 0.0);
        for &(s, v) in &r {
            u.iter_mut().zip(&m[s * a..s * a + high]).for_each(|(y, z)| *y += v * z);
        }
        let p: f64 = r.iter().map(|&(s, v)| v * u[s]).sum::<f64>().clamp(0.0, 1.0);
        let include = rng.random::<f64>() < p;
        let denom = if include { p } else { p - 1.0 };
        if include {
            points.push(x);
        }
        if denom.abs() > DIAGONAL_FLOOR {
            for i in 0..high {
                let c = u[i] / denom;
                if c != 0.0 {
                    m[i * a..i * a + high].iter_mut().zip(&*u).for_each(|(y, z)| *y -= c * z);
                }
            }
        }

        let released = free.len();
        for &e in &schedule.leave[t] {
            let s = slot[e as usize];
            if s != u32::MAX {
                free.push(s);
                slot[e as usize] = u32::MAX;
            }
        }
        if free.len() != released {
            free.sort_unstable_by(|x, y| y.cmp(x));
            high = free_high(&free, a);
        }
    }
    Configuration::new(points)
}

/// One past the largest slot in use.
fn free_high(free: &[u32], a: usize) -> usize {
    // `free` is sorted descending; slots above the in-use maximum form a run a-1, a-2, ..
    let mut high = a;
    for &s in free {
        if s as usize + 1 == high {
            high -= 1;
        } else {
            break;
        }
    }
    high
}

/// The classical second stage: pick a vertex with probability proportional to
/// the residual diagonal, project it out, repeat once per selected vector.
///
/// Vertex x is the row r_x of the N×k matrix of selected eigenvectors and the
/// residual diagonal is |r_x|² minus its squared projection on the span of the
/// rows already picked, kept as an orthonormal basis q_0, q_1, .. . Coordinates
/// are numbered in the order picked rows first touch them, so each q_l lives on
/// a prefix of the coordinates and the updates run over that prefix only.
fn greedy_projection(table: &RowTable, selected: &[bool], rng: &mut ChaCha8Rng) -> Configuration {
    let k = selected.iter().filter(|&&s| s).count();
    if k == 0 {
        return Configuration::default();
    }
    let n = table.offsets.len() - 1;

    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    let mut entries: Vec<(u32, f64)> = Vec::with_capacity(table.entries.len());
    for x in 0..n {
        let row = &table.entries[table.offsets[x]..table.offsets[x + 1]];
        entries.extend(row.iter().filter(|(e, _)| selected[*e as usize]));
        offsets.push(entries.len());
    }
    let row = |x: usize| &entries[offsets[x]..offsets[x + 1]];
    let mut diag: Vec<f64> = (0..n).map(|x| row(x).iter().map(|(_, v)| v * v).sum()).collect();

    // coordinate k is a permanent zero for eigenvectors not yet touched
    let mut coord = vec![k as u32; selected.len()];
    let mut width = 0usize;
    let mut basis: Vec<f64> = Vec::with_capacity(k * k / 2);
    let mut starts: Vec<usize> = Vec::with_capacity(k + 1);
    let mut lens: Vec<usize> = Vec::with_capacity(k);
    let mut coeff = vec![0.0; k];
    let mut w = vec![0.0; k + 1];
    let mut points = Vec::with_capacity(k);

    for j in 0..k {
        let total: f64 = diag.iter().sum();
        if total <= DIAGONAL_FLOOR {
            break;
        }
        let mut target = rng.random::<f64>() * total;
        let mut pick = n - 1;
        for (x, &d) in diag.iter().enumerate() {
            if target < d {
                pick = x;
                break;
            }
            target -= d;
        }
        while diag[pick] <= 0.0 {
            pick -= 1;
        }
        points.push(pick);

        for &(e, _) in row(pick) {
            if coord[e as usize] == k as u32 {
                coord[e as usize] = width as u32;
                width += 1;
            }
        }
        w[..width].iter_mut().for_each(|v| *v = 0.0);
        for &(e, v) in row(pick) {
            w[coord[e as usize] as usize] = v;
        }
        for l in 0..j {
            let q = &basis[starts[l]..starts[l] + lens[l]];
            coeff[l] = row(pick)
                .iter()
                .map(|&(e, v)| {
                    let c = coord[e as usize] as usize;
                    if c < q.len() { v * q[c] } else { 0.0 }
                })
                .sum();
        }
        subtract_projections(&mut w, &basis, &starts, &lens, &coeff[..j]);
        let norm = w[..width].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= DIAGONAL_FLOOR {
            break;
        }
        w[..width].iter_mut().for_each(|v| *v /= norm);
        starts.push(basis.len());
        lens.push(width);
        basis.extend_from_slice(&w[..width]);

        for (x, d) in diag.iter_mut().enumerate() {
            if *d <= 0.0 {
                continue;
            }
            let c: f64 = row(x).iter().map(|&(e, v)| v * w[coord[e as usize] as usize]).sum();
            let r = *d - c * c;
            *d = if r < DIAGONAL_FLOOR { 0.0 } else { r };
        }
        diag[pick] = 0.0;
    }
    Configuration::new(points)
}

/// w -= Σ_l coeff[l] q_l, four basis vectors per pass.
fn subtract_projections(w: &mut [f64], basis: &[f64], starts: &[usize], lens: &[usize], coeff: &[f64]) {
    let mut l = 0;
    while l + 4 <= coeff.len() {
        let q = |i: usize| &basis[starts[l + i]..starts[l + i] + lens[l + i]];
        let (q0, q1, q2, q3) = (q(0), q(1), q(2), q(3));
        let (c0, c1, c2, c3) = (coeff[l], coeff[l + 1], coeff[l + 2], coeff[l + 3]);
        let m = q0.len();
        for ((((a, b0), b1), b2), b3) in w[..m].iter_mut().zip(q0).zip(&q1[..m]).zip(&q2[..m]).zip(&q3[..m]) {
            *a -= c0 * b0 + c1 * b1 + c2 * b2 + c3 * b3;
        }
        for (i, qi) in [q1, q2, q3].into_iter().enumerate() {
            let c = coeff[l + 1 + i];
            w[m..qi.len()].iter_mut().zip(&qi[m..]).for_each(|(a, b)| *a -= c * b);
        }
        l += 4;
    }
    for (i, &c) in coeff.iter().enumerate().skip(l) {
        let q = &basis[starts[i]..starts[i] + lens[i]];
        w[..q.len()].iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
    }
}

/// Writes one `{"sample": i, "points": [...]}` object per line.
pub fn write_jsonl<W: Write>(mut out: W, samples: &[Configuration]) -> Result<()> {
    #[derive(Serialize)]
    struct Line<'a> {
        sample: usize,
        points: &'a [usize],
    }
    for (i, c) in samples.iter().enumerate() {
        let line = serde_json::to_string(&Line {
            sample: i,
            points: &c.points,
        })
        .map_err(|e| Error::Io(e.to_string()))?;
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn check_points(kernel: &DppKernel, points: &[usize]) -> Result<()> {
    match points.iter().find(|&&x| x >= kernel.dim()) {
        Some(x) => Err(Error::InvalidArgument(format!(
            "vertex index {x} outside ball of {} vertices",
            kernel.dim()
        ))),
        None => Ok(()),
    }
}

/// P(ξ ⊃ Λ) = det K_Λ.
pub fn inclusion_probability(kernel: &DppKernel, lambda: &Configuration) -> Result<f64> {
    check_points(kernel, &lambda.points)?;
    let p = &lambda.points;
    Ok(DMatrix::from_fn(p.len(), p.len(), |i, j| kernel.entry(p[i], p[j])).determinant())
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrelationRow {
    pub points: Vec<usize>,
    pub determinant: f64,
    pub empirical: f64,
    pub standard_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrelationReport {
    pub n_samples: usize,
    pub rows: Vec<CorrelationRow>,
    pub pass: bool,
}

impl CorrelationReport {
    pub fn failures(&self) -> impl Iterator<Item = &CorrelationRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    /// Largest |empirical - det| / SE over rows with positive SE.
    pub fn max_z(&self) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.standard_error > 0.0)
            .map(|r| (r.empirical - r.determinant).abs() / r.standard_error)
            .fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut out: W, config_hash: &str) -> Result<()> {
        writeln!(out, "# config_hash={config_hash}")?;
        writeln!(out, "points,determinant,empirical,standard_error,pass")?;
        for r in &self.rows {
            let pts: Vec<String> = r.points.iter().map(usize::to_string).collect();
            writeln!(
                out,
                "{},{:.12e},{:.12e},{:.12e},{}",
                pts.join(" "),
                r.determinant,
                r.empirical,
                r.standard_error,
                r.pass
            )?;
        }
        Ok(())
    }
}

/// Membership bitsets, one per sample.
struct Occupancy {
    words: usize,
    bits: Vec<u64>,
}

impl Occupancy {
    fn new(dim: usize, samples: &[Configuration]) -> Self {
        let words = dim.div_ceil(64).max(1);
        let mut bits = vec![0u64; words * samples.len()];
        for (s, c) in samples.iter().enumerate() {
            for &x in &c.points {
                bits[s * words + x / 64] |= 1 << (x % 64);
            }
        }
        Occupancy { words, bits }
    }

    fn count_containing(&self, points: &[usize]) -> usize {
        self.bits
            .chunks_exact(self.words)
            .filter(|b| points.iter().all(|&x| b[x / 64] >> (x % 64) & 1 == 1))
            .count()
    }
}

/// Compares the frequency of {ξ ⊃ Λ} with det K_Λ for each Λ, at 4 binomial
/// standard errors √(p(1 - p)/n) with p = det K_Λ.
pub fn verify_correlations(
    kernel: &DppKernel,
    samples: &[Configuration],
    lambdas: &[Configuration],
) -> Result<CorrelationReport> {
    let n = samples.len();
    if n < MIN_VERIFY_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "{n} samples, at least {MIN_VERIFY_SAMPLES} required"
        )));
    }
    if let Some(l) = lambdas.iter().find(|l| l.len() > 3) {
        return Err(Error::InvalidArgument(format!("|Λ| = {} exceeds 3", l.len())));
    }
    for s in samples {
        check_points(kernel, &s.points)?;
    }
    let occupancy = Occupancy::new(kernel.dim(), samples);
    let rows = lambdas
        .par_iter()
        .map(|l| {
            let determinant = inclusion_probability(kernel, l)?;
            let empirical = occupancy.count_containing(&l.points) as f64 / n as f64;
            let p = determinant.clamp(0.0, 1.0);
            let standard_error = (p * (1.0 - p) / n as f64).sqrt();
            let pass = (empirical - determinant).abs() <= SIGMA_WIDTH * standard_error + 1e-12;
            Ok(CorrelationRow {
                points: l.points.clone(),
                determinant,
                empirical,
                standard_error,
                pass,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pass = rows.iter().all(|r| r.pass);
    Ok(CorrelationReport {
        n_samples: n,
        rows,
        pass,
    })
}

/// All singletons and all pairs {x, y} with 1 ≤ d(x, y) ≤ `max_pair_distance`.
pub fn standard_test_sets(ball: &Ball, max_pair_distance: usize) -> Vec<Configuration> {
    let n = ball.len();
    let mut sets: Vec<Configuration> = (0..n).map(|x| Configuration::new(vec![x])).collect();
    for x in 0..n {
        for y in x + 1..n {
            if ball.distance(x, y) <= max_pair_distance {
                sets.push(Configuration::new(vec![x, y]));
            }
        }
    }
    sets
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountStatistics {
    pub mean: f64,
    pub variance: f64,
}

/// Mean Σ K(x,x) and variance mean - Σ K(x,y)² of #(ξ ∩ region).
pub fn count_statistics(kernel: &DppKernel, region: &Configuration) -> Result<CountStatistics> {
    check_points(kernel, &region.points)?;
    let p = &region.points;
    let mean: f64 = p.iter().map(|&x| kernel.entry(x, x)).sum();
    let square: f64 = p
        .iter()
        .map(|&x| p.iter().map(|&y| kernel.entry(x, y).powi(2)).sum::<f64>())
        .sum();
    Ok(CountStatistics {
        mean,
        variance: mean - square,
    })
}

/// Sample mean and unbiased sample variance of #(ξ ∩ region).
pub fn empirical_count_statistics(samples: &[Configuration], region: &Configuration) -> CountStatistics {
    let counts: Vec<f64> = samples
        .iter()
        .map(|s| s.points.iter().filter(|&&x| region.contains(x)).count() as f64)
        .collect();
    let n = counts.len() as f64;
    if counts.is_empty() {
        return CountStatistics {
            mean: 0.0,
            variance: 0.0,
        };
    }
    let mean = counts.iter().sum::<f64>() / n;
    let variance = if counts.len() > 1 {
        counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    CountStatistics { mean, variance }
}

/// Σ K(x, y)² over x in the region and y in the rest of the ball.
pub fn boundary_energy(kernel: &DppKernel, region: &Configuration) -> Result<f64> {
    check_points(kernel, &region.points)?;
    Ok(region
        .points
        .iter()
        .map(|&x| {
            (0..kernel.dim())
                .filter(|y| !region.contains(*y))
                .map(|y| kernel.entry(x, y).powi(2))
                .sum::<f64>()
        })
        .sum())
}

/// Vertices of B_r(o) as a configuration.
pub fn ball_region(ball: &Ball, r: usize) -> Configuration {
    Configuration::new(ball.inner_ball(r.min(ball.radius())).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RigidityRow {
    pub radius: usize,
    pub region_radius: usize,
    pub region_size: usize,
    pub boundary_sphere: usize,
    pub mean: f64,
    pub variance: f64,
    pub boundary_energy: f64,
    /// variance / #S_{R-2}
    pub variance_per_boundary: f64,
}

/// Count variance in B_{R-2}(o) for the kernel T[1_J] built on B_R(o), for each R.
pub fn rigidity_probe(
    kappa: u32,
    interval: (f64, f64),
    radii: &[usize],
    rule: &QuadratureRule,
) -> Result<Vec<RigidityRow>> {
    let (lo, hi) = interval;
    let c = crate::polynomials::support_radius(kappa);
    if !(lo < hi) || lo < -c - 1e-12 || hi > c + 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "interval [{lo}, {hi}] is not inside [-{c}, {c}]"
        )));
    }
    let phi = SymbolFunction::indicator(lo.max(-c), hi.min(c));
    radii
        .iter()
        .map(|&radius| {
            if radius < 2 {
                return Err(Error::InvalidArgument("rigidity probe needs R >= 2".into()));
            }
            let kernel = validate_kernel(&phi, kappa, radius, rule)?;
            let region_radius = radius - 2;
            let region = ball_region(kernel.ball(), region_radius);
            let stats = count_statistics(&kernel, &region)?;
            let boundary_sphere = kernel.ball().sphere(region_radius).len();
            Ok(RigidityRow {
                radius,
                region_radius,
                region_size: region.len(),
                boundary_sphere,
                mean: stats.mean,
                variance: stats.variance,
                boundary_energy: boundary_energy(&kernel, &region)?,
                variance_per_boundary: stats.variance / boundary_sphere as f64,
            })
        })
        .collect()
}

pub fn write_rigidity_csv<W: Write>(mut out: W, rows: &[RigidityRow], config_hash: &str) -> Result<()> {
    writeln!(out, "# config_hash={config_hash}")?;
    writeln!(
        out,
        "radius,region_radius,region_size,boundary_sphere,mean,variance,boundary_energy,variance_per_boundary"
    )?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{:.12e},{:.12e},{:.12e},{:.12e}",
            r.radius,
            r.region_radius,
            r.region_size,
            r.boundary_sphere,
            r.mean,
            r.variance,
            r.boundary_energy,
            r.variance_per_boundary
        )?;
    }
    Ok(())
}
