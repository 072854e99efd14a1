//! Cayley tree geometry.
//!
//! A vertex of the (κ+1)-regular tree is stored as the word of branch indices
//! leading to it from a fixed root `o`. The first letter picks one of the κ+1
//! neighbours of the root, every later letter one of the κ forward children.
//! Distances then come from the longest common prefix, no adjacency needed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of vertices a ball may hold.
pub const DEFAULT_VERTEX_BUDGET: usize = 100_000;

/// Environment variable overriding [`DEFAULT_VERTEX_BUDGET`].
pub const VERTEX_BUDGET_ENV: &str = "CAYLEY_VERTEX_BUDGET";

/// The active vertex budget: `CAYLEY_VERTEX_BUDGET` if set, else the default.
pub fn vertex_budget() -> Result<usize> {
    match std::env::var(VERTEX_BUDGET_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| {
            Error::InvalidArgument(format!("{VERTEX_BUDGET_ENV}={v} is not a vertex count"))
        }),
        Err(_) => Ok(DEFAULT_VERTEX_BUDGET),
    }
}

/// A vertex of T_κ, addressed by its word relative to the root.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vertex(Vec<u32>);

impl Vertex {
    pub fn root() -> Self {
        Vertex(Vec::new())
    }

    /// Checked constructor; every letter must be in its allowed range.
    pub fn new(kappa: u32, word: Vec<u32>) -> Result<Self> {
        check_kappa(kappa)?;
        for (i, &b) in word.iter().enumerate() {
            let limit = if i == 0 { kappa + 1 } else { kappa };
            if b >= limit {
                return Err(Error::InvalidArgument(format!(
                    "branch index {b} at position {i} out of range 0..{limit}"
                )));
            }
        }
        Ok(Vertex(word))
    }

    pub fn word(&self) -> &[u32] {
        &self.0
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn parent(&self) -> Option<Vertex> {
        if self.0.is_empty() {
            None
        } else {
            Some(Vertex(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn child(&self, branch: u32) -> Vertex {
        let mut w = self.0.clone();
        w.push(branch);
        Vertex(w)
    }

    /// The vertex `self` truncated to `depth` letters (its ancestor at that depth).
    pub fn ancestor(&self, depth: usize) -> Vertex {
        Vertex(self.0[..depth.min(self.0.len())].to_vec())
    }
}

pub(crate) fn check_kappa(kappa: u32) -> Result<()> {
    if kappa == 0 {
        return Err(Error::InvalidArgument("kappa must be at least 1".into()));
    }
    Ok(())
}

/// Graph distance: depth(u) + depth(v) - 2 * |common prefix|.
pub fn distance(u: &Vertex, v: &Vertex) -> usize {
    let common = u.0.iter().zip(&v.0).take_while(|(a, b)| a == b).count();
    u.depth() + v.depth() - 2 * common
}

/// Number of vertices at distance `l` from any fixed vertex.
pub fn sphere_size(kappa: u32, l: usize) -> Result<u128> {
    check_kappa(kappa)?;
    if l == 0 {
        return Ok(1);
    }
    let exp = u32::try_from(l - 1).map_err(|_| Error::Overflow("sphere size"))?;
    (kappa as u128)
        .checked_pow(exp)
        .and_then(|p| p.checked_mul(kappa as u128 + 1))
        .ok_or(Error::Overflow("sphere size"))
}

/// Number of vertices in a ball of radius `radius`.
pub fn ball_size(kappa: u32, radius: usize) -> Result<u128> {
    let mut total: u128 = 0;
    for l in 0..=radius {
        total = total
            .checked_add(sphere_size(kappa, l)?)
            .ok_or(Error::Overflow("ball size"))?;
    }
    Ok(total)
}

/// The ray v_0 = o, v_1 = [0], v_2 = [0, 0], ... with d(v_k, v_m) = |k - m|.
pub fn geodesic_ray(kappa: u32, n: usize) -> Result<Vec<Vertex>> {
    check_kappa(kappa)?;
    Ok((0..=n).map(|k| Vertex(vec![0; k])).collect())
}

/// All vertices within distance `radius` of the root, in (depth, lexicographic) order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ball {
    kappa: u32,
    radius: usize,
    vertices: Vec<Vertex>,
    #[serde(skip)]
    sphere_offsets: Vec<usize>,
}

/// Enumerates B_R(o) in canonical order under the active [`vertex_budget`].
pub fn enumerate_ball(kappa: u32, radius: usize) -> Result<Ball> {
    enumerate_ball_with_budget(kappa, radius, vertex_budget()?)
}

pub fn enumerate_ball_with_budget(kappa: u32, radius: usize, budget: usize) -> Result<Ball> {
    check_kappa(kappa)?;
    let size = ball_size(kappa, radius)?;
    if size > budget as u128 {
        return Err(Error::BudgetExceeded {
            requested: size,
            budget,
        });
    }
    let mut vertices = Vec::with_capacity(size as usize);
    let mut sphere_offsets = vec![0];
    vertices.push(Vertex::root());
    let mut prev = 0..1;
    for depth in 1..=radius {
        let start = vertices.len();
        sphere_offsets.push(start);
        let fanout = if depth == 1 { kappa + 1 } else { kappa };
        for i in prev.clone() {
            for b in 0..fanout {
                let child = vertices[i].child(b);
                vertices.push(child);
            }
        }
        prev = start..vertices.len();
    }
    sphere_offsets.push(vertices.len());
    Ok(Ball {
        kappa,
        radius,
        vertices,
        sphere_offsets,
    })
}

impl Ball {
    pub fn kappa(&self) -> u32 {
        self.kappa
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, i: usize) -> &Vertex {
        &self.vertices[i]
    }

    /// Index range of the sphere S_l(o), `l <= radius`.
    pub fn sphere(&self, l: usize) -> std::ops::Range<usize> {
        self.sphere_offsets[l]..self.sphere_offsets[l + 1]
    }

    pub fn depth_of(&self, i: usize) -> usize {
        self.vertices[i].depth()
    }

    /// Index of `v` in the canonical order, computed from its word as a mixed-radix rank.
    pub fn index_of(&self, v: &Vertex) -> Option<usize> {
        let d = v.depth();
        if d > self.radius {
            return None;
        }
        let mut rank = 0usize;
        for (i, &b) in v.word().iter().enumerate() {
            let limit = if i == 0 { self.kappa + 1 } else { self.kappa };
            if b >= limit {
                return None;
            }
            rank = rank * limit as usize + b as usize;
        }
        Some(self.sphere_offsets[d] + rank)
    }

    pub fn distance(&self, i: usize, j: usize) -> usize {
        distance(&self.vertices[i], &self.vertices[j])
    }

    /// Indices of the vertices of the sub-ball B_r(o), `r <= radius`.
    pub fn inner_ball(&self, r: usize) -> std::ops::Range<usize> {
        0..self.sphere_offsets[r.min(self.radius) + 1]
    }

    /// Neighbours of vertex `i` that lie inside the ball.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        let v = &self.vertices[i];
        let mut out = Vec::new();
        if let Some(p) = v.parent() {
            out.push(self.index_of(&p).expect("parent of a ball vertex is in the ball"));
        }
        if v.depth() < self.radius {
            let fanout = if v.is_root() { self.kappa + 1 } else { self.kappa };
            for b in 0..fanout {
                out.push(self.index_of(&v.child(b)).expect("child within radius"));
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("ball serializes")
    }

    pub fn from_json(s: &str) -> Result<Ball> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            kappa: u32,
            radius: usize,
            vertices: Vec<Vec<u32>>,
        }
        let raw: Raw = serde_json::from_str(s).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let ball = enumerate_ball_with_budget(raw.kappa, raw.radius, usize::MAX)?;
        let same = ball.vertices.len() == raw.vertices.len()
            && ball.vertices.iter().zip(&raw.vertices).all(|(a, b)| a.word() == b.as_slice());
        if !same {
            return Err(Error::InvalidArgument(
                "vertex list is not the canonical ball enumeration".into(),
            ));
        }
        Ok(ball)
    }
}

/// Relabels branch indices: `root` permutes the κ+1 root letters, `child` the κ
/// letters used at every deeper level. Such relabelings are tree automorphisms
/// fixing the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchRelabeling {
    root: Vec<u32>,
    child: Vec<u32>,
}

impl BranchRelabeling {
    pub fn new(kappa: u32, root: Vec<u32>, child: Vec<u32>) -> Result<Self> {
        fn is_perm(p: &[u32], n: u32) -> bool {
            let mut seen = vec![false; n as usize];
            p.len() == n as usize
                && p.iter().all(|&x| {
                    x < n && !std::mem::replace(&mut seen[x as usize], true)
                })
        }
        if !is_perm(&root, kappa + 1) || !is_perm(&child, kappa) {
            return Err(Error::InvalidArgument("relabeling is not a permutation".into()));
        }
        Ok(BranchRelabeling { root, child })
    }

    pub fn apply(&self, v: &Vertex) -> Vertex {
        Vertex(
            v.word()
                .iter()
                .enumerate()
                .map(|(i, &b)| if i == 0 { self.root[b as usize] } else { self.child[b as usize] })
                .collect(),
        )
    }

    /// `perm[i]` is the ball index of the image of vertex `i`.
    pub fn index_permutation(&self, ball: &Ball) -> Vec<usize> {
        ball.vertices()
            .iter()
            .map(|v| ball.index_of(&self.apply(v)).expect("relabeling preserves depth"))
            .collect()
    }
}
