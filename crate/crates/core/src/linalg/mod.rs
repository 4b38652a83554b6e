//! Dense-free linear algebra for the stencil systems: banded Cholesky for
//! variable-coefficient SPD systems and a sine-transform solver for the
//! constant-coefficient shifted Laplacian on rectangles.

mod banded;
mod dst;

pub use banded::{BandedCholesky, SymBanded};
pub use dst::SineTransformSolver;

/// Euclidean inner product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Largest absolute entry.
pub fn sup_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}
