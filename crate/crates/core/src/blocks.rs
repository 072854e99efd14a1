//! Symmetry-adapted eigendecomposition of a radial kernel on a ball.
//!
//! ℓ²(B_R(o)) splits into subspaces every radial kernel preserves:
//!
//! * the radial vectors, spanned by f_0..f_R (one block of size R+1);
//! * for each vertex v at depth d < R and each mean-zero function g on the
//!   children of v, the span of h_{v,g,p}, p = d+1..R, where h_{v,g,p} puts
//!   g(c)/sqrt(#descendants of c at depth p) on the depth-p descendants of
//!   each child c (one block of size R-d).
//!
//! The block for (v, g) depends only on d, so the whole spectrum comes from
//! R+1 small dense problems and every eigenvector is supported on a subtree.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::operator::symmetric_eigen;
use crate::symbol::RadialSymbol;
use crate::tree::Ball;

/// A vector stored as (ball index, value) pairs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector {
    pub entries: Vec<(usize, f64)>,
}

impl SparseVector {
    pub fn dot_dense(&self, x: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, v)| v * x[i]).sum()
    }
}

/// Eigenvalues and sparse orthonormal eigenvectors of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub dim: usize,
    pub values: Vec<f64>,
    pub vectors: Vec<SparseVector>,
}

impl EigenSystem {
    /// Wraps a dense decomposition (eigenvectors as columns).
    pub fn from_dense(values: &[f64], vectors: &DMatrix<f64>) -> Self {
        let dim = vectors.nrows();
        let vectors = vectors
            .column_iter()
            .map(|c| SparseVector {
                entries: c.iter().copied().enumerate().filter(|e| e.1 != 0.0).collect(),
            })
            .collect();
        EigenSystem {
            dim,
            values: values.to_vec(),
            vectors,
        }
    }

    /// Row view: for every vertex, the (eigenvector index, entry) pairs touching it.
    pub fn rows(&self, keep: impl Fn(usize) -> bool) -> Vec<Vec<(u32, f64)>> {
        let mut rows = vec![Vec::new(); self.dim];
        for (e, v) in self.vectors.iter().enumerate() {
            if !keep(e) {
                continue;
            }
            for &(i, x) in &v.entries {
                rows[i].push((e as u32, x));
            }
        }
        rows
    }

    /// Σ λ_e v_e v_eᵀ as a dense matrix.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (lambda, v) in self.values.iter().zip(&self.vectors) {
            for &(i, a) in &v.entries {
                for &(j, b) in &v.entries {
                    m[(i, j)] += lambda * a * b;
                }
            }
        }
        m
    }
}

fn kpow(kappa: u32, e: usize) -> f64 {
    (kappa as f64).powi(e as i32)
}

/// Pairs (x, y) of descendants of a fixed vertex w at relative depths s, t
/// whose last common ancestor is w itself (w has κ children).
fn pairs_split_at(kappa: u32, s: usize, t: usize) -> f64 {
    if s == 0 || t == 0 {
        kpow(kappa, s + t)
    } else {
        (kappa as f64 - 1.0) * kpow(kappa, s + t - 1)
    }
}

/// Σ α(d(x, y)) over x at relative depth a, y at relative depth b inside a
/// rooted κ-ary subtree.
fn subtree_pair_sum(kappa: u32, alpha: &[f64], a: usize, b: usize) -> f64 {
    (0..=a.min(b))
        .map(|j| kpow(kappa, j) * pairs_split_at(kappa, a - j, b - j) * alpha[a + b - 2 * j])
        .sum()
}

fn radial_block(kappa: u32, alpha: &[f64], radius: usize) -> DMatrix<f64> {
    let sphere = |l: usize| if l == 0 { 1.0 } else { (kappa as f64 + 1.0) * kpow(kappa, l - 1) };
    DMatrix::from_fn(radius + 1, radius + 1, |p, m| {
        let mut sum = if p == 0 || m == 0 {
            sphere(p) * sphere(m) * alpha[p + m]
        } else {
            // different branches at the root
            sphere(p) * kappa as f64 * kpow(kappa, m - 1) * alpha[p + m]
        };
        for j in 1..=p.min(m) {
            sum += sphere(j) * pairs_split_at(kappa, p - j, m - j) * alpha[p + m - 2 * j];
        }
        sum / (sphere(p) * sphere(m)).sqrt()
    })
}

/// Block for a vertex at depth `d`, indexed by levels d+1..=radius.
fn vertex_block(kappa: u32, alpha: &[f64], radius: usize, d: usize) -> DMatrix<f64> {
    let size = radius - d;
    DMatrix::from_fn(size, size, |i, j| {
        let (np, nm) = (kpow(kappa, i), kpow(kappa, j));
        let within = subtree_pair_sum(kappa, alpha, i, j);
        (within - np * nm * alpha[i + j + 2]) / (np * nm).sqrt()
    })
}

/// Orthonormal mean-zero (Helmert) functions on `n` points.
fn helmert(n: usize) -> Vec<Vec<f64>> {
    (1..n)
        .map(|j| {
            let s = 1.0 / ((j * (j + 1)) as f64).sqrt();
            (0..=j).map(|c| if c < j { s } else { -(j as f64) * s }).collect()
        })
        .collect()
}

/// Eigen-decomposes T_α on `ball` block by block.
pub fn block_eigen(alpha: &RadialSymbol, ball: &Ball) -> Result<EigenSystem> {
    let kappa = ball.kappa();
    if alpha.kappa() != kappa {
        return Err(Error::KappaMismatch(alpha.kappa(), kappa));
    }
    let radius = ball.radius();
    if !alpha.has_finite_support() && alpha.len() <= 2 * radius {
        return Err(Error::SymbolTooShort {
            available: alpha.len(),
            required: 2 * radius + 1,
        });
    }
    let a: Vec<f64> = (0..=2 * radius).map(|n| alpha.get(n)).collect();

    let mut values = Vec::with_capacity(ball.len());
    let mut vectors = Vec::with_capacity(ball.len());

    let radial = symmetric_eigen(&radial_block(kappa, &a, radius))?;
    for (k, &lambda) in radial.values.iter().enumerate() {
        let mut entries = Vec::with_capacity(ball.len());
        for p in 0..=radius {
            let s = ball.sphere(p);
            let w = radial.vectors[(p, k)] / (s.len() as f64).sqrt();
            entries.extend(s.map(|x| (x, w)));
        }
        values.push(lambda);
        vectors.push(SparseVector { entries });
    }

    for d in 0..radius {
        let block = symmetric_eigen(&vertex_block(kappa, &a, radius, d))?;
        let fanout = if d == 0 { kappa as usize + 1 } else { kappa as usize };
        let basis = helmert(fanout);
        for v in ball.sphere(d) {
            let vertex = ball.vertex(v);
            for g in &basis {
                for (k, &lambda) in block.values.iter().enumerate() {
                    let mut entries = Vec::new();
                    for (c, &gc) in g.iter().enumerate() {
                        let child = vertex.child(c as u32);
                        // depth-p descendants of `child` are a contiguous index run
                        for (level, p) in (d + 1..=radius).enumerate() {
                            let count = kpow(kappa, level) as usize;
                            let first = ball
                                .index_of(&descend_first(&child, level))
                                .expect("descendant within radius");
                            let w = gc * block.vectors[(level, k)] / (count as f64).sqrt();
                            debug_assert_eq!(ball.depth_of(first), p);
                            entries.extend((first..first + count).map(|x| (x, w)));
                        }
                    }
                    values.push(lambda);
                    vectors.push(SparseVector { entries });
                }
            }
        }
    }
    debug_assert_eq!(values.len(), ball.len());
    Ok(EigenSystem {
        dim: ball.len(),
        values,
        vectors,
    })
}

/// Leftmost descendant `levels` generations below `v`.
fn descend_first(v: &crate::tree::Vertex, levels: usize) -> crate::tree::Vertex {
    (0..levels).fold(v.clone(), |w, _| w.child(0))
}
