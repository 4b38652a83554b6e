//! Multiple positive solutions of nonlocal semilinear Dirichlet problems
//!
//! ```text
//!   -Δu = f(u, ∫_Ω |u|^p dx)  in Ω,   u > 0 in Ω,   u = 0 on ∂Ω
//! ```
//!
//! where `f(·, α)` may blow up as the nonlocal variable `α` approaches a
//! finite set of singular values `0 = t_0 < t_1 < … < t_K`.
//!
//! The pipeline freezes `α` inside a working interval `(t_{k-1}, t_k)`,
//! solves the truncated local problem for its unique positive solution
//! `u_α`, and looks for fixed points of the norm map
//! `P_k(α) = ∫ u_α^p dx`. Every fixed point is a solution of the nonlocal
//! problem; under the admissibility hypotheses each interval contributes
//! at least two of them.
//!
//! Modules, bottom-up:
//!
//! | module | role |
//! |--------|------|
//! | [`geometry`] | grids, discrete `-Δ`, quadrature, principal eigenpair, `C1` |
//! | [`nonlinearity`] | reaction terms, truncation, slope function `ψ_α`, example families |
//! | [`hypotheses`] | sampled certification of the admissibility hypotheses |
//! | [`solver`] | auxiliary solve, energy, barrier and a-priori bounds |
//! | [`fixedpoint`] | norm map, interval scans, bisection, solution bundle |
//! | [`cli`] | TOML-driven batch front end |

pub mod cli;
pub mod error;
pub mod fixedpoint;
pub mod geometry;
pub mod hypotheses;
pub mod linalg;
pub mod nonlinearity;
pub mod scalar;
pub mod solver;

pub use error::{Error, Result};
