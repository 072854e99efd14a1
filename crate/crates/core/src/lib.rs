//! Radial Toeplitz operators on the Cayley tree T_κ and the determinantal
//! point processes they induce.
//!
//! A radial kernel K(x, y) = α(d(x, y)) is encoded by its sequence α. Bounded
//! ones are exactly the T[φ] with α = φ̂, φ̂(n) = ∫ P_n φ dΠ_κ, where P_n are the
//! Cartier-Dunau polynomials. For 0 ≤ φ ≤ 1 the operator is the correlation
//! kernel of an automorphism-invariant determinantal point process.
//!
//! * [`tree`]: vertices as words, balls, distances.
//! * [`polynomials`]: P_n, the monic Q_n, Π_κ and quadrature against it.
//! * [`symbol`]: spectral symbols φ and radial symbols α.
//! * [`transform`]: φ ↦ φ̂ (numeric and exact) and the convolution ⊛_κ.
//! * [`operator`]: truncated matrices, radial compression, spectra and norms.
//! * [`blocks`]: symmetry-adapted eigendecomposition of radial kernels on a ball.
//! * [`dpp`]: kernel certification, sampling and Monte-Carlo verification.
//! * [`cli`]: the command-line driver used by the `cayley-toeplitz` binary.

pub mod blocks;
pub mod cli;
pub mod dpp;
pub mod error;
pub mod operator;
pub mod polynomials;
pub mod symbol;
pub mod transform;
pub mod tree;

pub use error::{Error, Result};
pub use symbol::{RadialSymbol, StepPiece, SymbolFunction};
pub use tree::{Ball, Vertex};
