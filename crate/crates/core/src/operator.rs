//! Radial Toeplitz operators restricted to finite balls.
//!
//! The matrix on B_R(o) is the compression of the infinite operator, so
//! its entries are exact; only spectral data feel the boundary.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde_json::json;

use crate::error::{Error, Result};
use crate::symbol::RadialSymbol;
use crate::transform::convolve_with_bound;
use crate::tree::{enumerate_ball, Ball};

/// Relative residual accepted from the eigensolver.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-8;

/// Eigenvalues ascending with matching unit eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
    pub max_residual: f64,
}

/// Decomposes a symmetric matrix and checks ‖Mv − λv‖ ≤ 1e-8 ‖M‖ for every pair.
pub fn symmetric_eigen(matrix: &DMatrix<f64>) -> Result<Eigen> {
    let n = matrix.nrows();
    if n != matrix.ncols() {
        return Err(Error::DimensionMismatch(format!("{}x{} matrix", n, matrix.ncols())));
    }
    if n == 0 {
        return Ok(Eigen {
            values: Vec::new(),
            vectors: DMatrix::zeros(0, 0),
            max_residual: 0.0,
        });
    }
    let eig = SymmetricEigen::new(matrix.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let residuals = matrix * &vectors - &vectors * DMatrix::from_diagonal(&DVector::from_vec(values.clone()));
    let max_residual = residuals
        .column_iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    if !(max_residual <= EIGEN_RESIDUAL_TOL * scale.max(f64::MIN_POSITIVE)) && max_residual > 0.0 {
        return Err(Error::Certification(format!(
            "eigen residual {max_residual:e} exceeds {EIGEN_RESIDUAL_TOL:e} x {scale:e}"
        )));
    }
    Ok(Eigen {
        values,
        vectors,
        max_residual,
    })
}

/// Largest |λ| of a symmetric matrix.
pub fn spectral_norm(matrix: &DMatrix<f64>) -> f64 {
    if matrix.nrows() == 0 {
        return 0.0;
    }
    matrix
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
}

/// T_α on a ball: M[x][y] = α(d(x, y)) in canonical vertex order.
#[derive(Debug, Clone)]
pub struct TruncatedOperator {
    ball: Ball,
    matrix: DMatrix<f64>,
    symbol: RadialSymbol,
    eigen: OnceLock<Eigen>,
}

pub fn build_matrix(alpha: &RadialSymbol, ball: &Ball) -> Result<TruncatedOperator> {
    if alpha.kappa() != ball.kappa() {
        return Err(Error::KappaMismatch(alpha.kappa(), ball.kappa()));
    }
    let diameter = 2 * ball.radius();
    if !alpha.has_finite_support() && alpha.len() <= diameter {
        return Err(Error::SymbolTooShort {
            available: alpha.len(),
            required: diameter + 1,
        });
    }
    let values: Vec<f64> = (0..=diameter).map(|n| alpha.get(n)).collect();
    let n = ball.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| values[ball.distance(i, j)]).collect())
        .collect();
    let matrix = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    Ok(TruncatedOperator {
        ball: ball.clone(),
        matrix,
        symbol: alpha.clone(),
        eigen: OnceLock::new(),
    })
}

impl TruncatedOperator {
    /// Wraps an arbitrary symmetric matrix over `ball` (used for relabeled kernels).
    pub fn from_matrix(ball: &Ball, matrix: DMatrix<f64>, symbol: RadialSymbol) -> Result<Self> {
        if matrix.nrows() != ball.len() || matrix.ncols() != ball.len() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for a ball of {} vertices",
                matrix.nrows(),
                matrix.ncols(),
                ball.len()
            )));
        }
        Ok(TruncatedOperator {
            ball: ball.clone(),
            matrix,
            symbol,
            eigen: OnceLock::new(),
        })
    }

    pub fn ball(&self) -> &Ball {
        &self.ball
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn symbol(&self) -> &RadialSymbol {
        &self.symbol
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Dense eigendecomposition, computed once.
    pub fn eigen(&self) -> Result<&Eigen> {
        if let Some(e) = self.eigen.get() {
            return Ok(e);
        }
        let e = symmetric_eigen(&self.matrix)?;
        Ok(self.eigen.get_or_init(|| e))
    }

    /// Conjugates by a vertex permutation: the result has entry M[perm[i]][perm[j]] at (i, j).
    pub fn permuted(&self, perm: &[usize]) -> Result<TruncatedOperator> {
        let n = self.dim();
        if perm.len() != n {
            return Err(Error::DimensionMismatch("permutation length".into()));
        }
        let m = DMatrix::from_fn(n, n, |i, j| self.matrix[(perm[i], perm[j])]);
        TruncatedOperator::from_matrix(&self.ball, m, self.symbol.clone())
    }

    pub fn write_csv<W: std::io::Write>(&self, mut out: W, config_hash: &str) -> std::io::Result<()> {
        writeln!(out, "# config_hash={config_hash}")?;
        for row in self.matrix.row_iter() {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn metadata(&self) -> Result<serde_json::Value> {
        let e = self.eigen()?;
        Ok(json!({
            "kappa": self.ball.kappa(),
            "radius": self.ball.radius(),
            "symbol": self.symbol.to_json(),
            "min_eigenvalue": e.values.first().copied(),
            "max_eigenvalue": e.values.last().copied(),
        }))
    }
}

/// Orthonormal basis f_n = 1_{S_n(o)} / sqrt(#S_n(o)) of radial vectors on the ball.
#[derive(Debug, Clone)]
pub struct RadialBasis {
    kappa: u32,
    spheres: Vec<std::ops::Range<usize>>,
    dim: usize,
}

impl RadialBasis {
    pub fn new(ball: &Ball) -> Self {
        RadialBasis {
            kappa: ball.kappa(),
            spheres: (0..=ball.radius()).map(|l| ball.sphere(l)).collect(),
            dim: ball.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.spheres.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spheres.is_empty()
    }

    pub fn vector(&self, n: usize) -> DVector<f64> {
        let s = &self.spheres[n];
        let v = 1.0 / (s.len() as f64).sqrt();
        DVector::from_fn(self.dim, |i, _| if s.contains(&i) { v } else { 0.0 })
    }

    /// Columns f_0..f_R.
    pub fn matrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.len());
        for n in 0..self.len() {
            m.set_column(n, &self.vector(n));
        }
        m
    }
}

/// C[n][m] = ⟨T f_m, f_n⟩.
pub fn radial_compress(op: &TruncatedOperator, basis: &RadialBasis) -> Result<DMatrix<f64>> {
    if basis.kappa != op.ball.kappa() || basis.len() != op.ball.radius() + 1 || basis.dim != op.dim() {
        return Err(Error::DimensionMismatch(
            "radial basis was built for a different ball".into(),
        ));
    }
    let r = basis.len();
    let m = &op.matrix;
    Ok(DMatrix::from_fn(r, r, |n, k| {
        let (sn, sk) = (&basis.spheres[n], &basis.spheres[k]);
        let mut sum = 0.0;
        for x in sn.clone() {
            for y in sk.clone() {
                sum += m[(x, y)];
            }
        }
        sum / ((sn.len() * sk.len()) as f64).sqrt()
    }))
}

/// Sorted eigenvalues of the truncated operator.
pub fn spectrum(op: &TruncatedOperator) -> Result<Vec<f64>> {
    Ok(op.eigen()?.values.clone())
}

/// ‖T_R‖ for each radius: spectral norms of compressions to growing balls.
pub fn operator_norm_estimate(alpha: &RadialSymbol, radii: &[usize]) -> Result<Vec<(usize, f64)>> {
    let mut radii = radii.to_vec();
    radii.sort_unstable();
    radii
        .into_iter()
        .map(|r| {
            let ball = enumerate_ball(alpha.kappa(), r)?;
            let op = build_matrix(alpha, &ball)?;
            Ok((r, spectral_norm(op.matrix())))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialNormReport {
    /// sup ‖T_α η‖ / ‖η‖ over η supported in the ball.
    pub full_norm: f64,
    /// The same supremum over radial η only.
    pub radial_norm: f64,
    pub gap: f64,
    /// Bound on the error from truncated (numeric) symbols; zero when exact.
    pub truncation_bound: f64,
}

/// Compares ‖T_α|ℓ²(B_R)‖ with its radial restriction.
///
/// ‖T_α η‖² = ⟨T_α* T_α η, η⟩ and T_α T_α = T_{α ⊛ α}, so both norms are square
/// roots of top eigenvalues of the compression of T_{α ⊛ α}: to the whole ball
/// and to its radial vectors.
pub fn radial_norm_check(alpha: &RadialSymbol, radius: usize) -> Result<RadialNormReport> {
    let ball = enumerate_ball(alpha.kappa(), radius)?;
    let (gram, truncation_bound) = convolve_with_bound(alpha, alpha)?;
    let op = build_matrix(&gram, &ball)?;
    let full = spectral_norm(op.matrix()).sqrt();
    let compressed = radial_compress(&op, &RadialBasis::new(&ball))?;
    let radial = spectral_norm(&compressed).sqrt();
    Ok(RadialNormReport {
        full_norm: full,
        radial_norm: radial,
        gap: full - radial,
        truncation_bound,
    })
}
