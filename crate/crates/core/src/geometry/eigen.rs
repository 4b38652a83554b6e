use serde::{Deserialize, Serialize};

use super::{h1_norm_sq, integrate_power, Field, Grid};
use crate::error::{Error, Result};
use crate::linalg::{dot, sup_norm};

const EIG_RTOL: f64 = 1e-12;
const EIG_MAX_ITER: usize = 500;

/// Principal Dirichlet eigenpair of `-Δ_h`.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub lambda1: f64,
    /// `H¹₀`-normalised: `∫|∇φ1|² = 1`.
    pub phi1: Field,
    /// Sup-normalised: `max e1 = 1`.
    pub e1: Field,
    pub iterations: usize,
}

/// Inverse power iteration with Rayleigh-quotient stopping at relative
/// eigenvalue change `1e-12`.
pub fn principal_eigenpair(grid: &Grid) -> Result<Eigenpair> {
    let lap = grid.laplacian();
    let spec = grid.spec();
    // positive start vector: product of parabolas vanishing on the boundary
    let mut v = grid.sample(|x| {
        let bounds = match spec.kind {
            super::DomainKind::Interval { a, b } => vec![(a, b)],
            super::DomainKind::Rectangle { ax, bx, ay, by } => vec![(ax, bx), (ay, by)],
        };
        x.iter()
            .zip(bounds)
            .map(|(&t, (lo, hi))| (t - lo) * (hi - t))
            .product()
    })
    .into_vec();
    normalize(&mut v);
    let mut lambda = rayleigh(grid, &v);
    let mut change = f64::INFINITY;
    for it in 1..=EIG_MAX_ITER {
        let mut w = lap.solve_shifted(0.0, &v)?;
        normalize(&mut w);
        let next = rayleigh(grid, &w);
        change = (next - lambda).abs() / next;
        let shift = w
            .iter()
            .zip(&v)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        v = w;
        lambda = next;
        if change <= EIG_RTOL && shift <= 1e-12 {
            let e1 = {
                let m = sup_norm(&v);
                Field::new(v.iter().map(|x| x / m).collect())
            };
            let phi1 = e1.scaled(1.0 / h1_norm_sq(grid, &e1).sqrt());
            return Ok(Eigenpair {
                lambda1: lambda,
                phi1,
                e1,
                iterations: it,
            });
        }
    }
    Err(Error::EigenNotConverged {
        iterations: EIG_MAX_ITER,
        change,
    })
}

fn normalize(v: &mut [f64]) {
    let n = dot(v, v).sqrt();
    // the principal vector is one-signed; fix the sign positive
    let s = if v.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    v.iter_mut().for_each(|x| *x *= s / n);
}

fn rayleigh(grid: &Grid, v: &[f64]) -> f64 {
    dot(v, &grid.laplacian().apply(v)) / dot(v, v)
}

/// Best constant of `H¹₀ ↪ L¹`: `C1 = (∫w)^{1/2}` for the torsion function
/// `-Δw = 1`, `w = 0` on `∂Ω`.
pub fn sobolev_c1(grid: &Grid) -> Result<f64> {
    Ok(torsion(grid)?.1.sqrt())
}

/// Discrete torsion function and `‖∇w‖² = ∫w`, both sides taken in the
/// stencil's own cell quadrature so the identity is exact.
pub fn torsion(grid: &Grid) -> Result<(Field, f64)> {
    let w = grid.laplacian().solve_shifted(0.0, &vec![1.0; grid.len()])?;
    let int = grid.cell_volume() * w.iter().sum::<f64>();
    Ok((Field::new(w), int))
}

/// Everything the pipeline needs from the geometry, for a fixed exponent `p`.
#[derive(Debug, Clone)]
pub struct EigenData {
    pub lambda1: f64,
    pub phi1: Field,
    pub e1: Field,
    pub c1: f64,
    pub p: f64,
    pub int_e1_p: f64,
    pub int_e1_sq: f64,
}

impl EigenData {
    pub fn compute(grid: &Grid, p: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::InvalidArgument(format!("exponent p = {p} must be >= 1")));
        }
        let pair = principal_eigenpair(grid)?;
        let c1 = sobolev_c1(grid)?;
        Ok(Self {
            lambda1: pair.lambda1,
            int_e1_p: integrate_power(grid, &pair.e1, p),
            int_e1_sq: integrate_power(grid, &pair.e1, 2.0),
            phi1: pair.phi1,
            e1: pair.e1,
            c1,
            p,
        })
    }

    pub fn constants(&self, grid: &Grid) -> GeometryConstants {
        GeometryConstants {
            lambda1: self.lambda1,
            c1: self.c1,
            measure: grid.measure(),
            int_e1_p: self.int_e1_p,
            int_e1_sq: self.int_e1_sq,
            p: self.p,
        }
    }
}

/// Scalar geometry constants used by the admissibility conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryConstants {
    pub lambda1: f64,
    pub c1: f64,
    pub measure: f64,
    pub int_e1_p: f64,
    pub int_e1_sq: f64,
    pub p: f64,
}

impl GeometryConstants {
    /// `M = λ1^{1/2} / (2 C1 |Ω|^{1/2})`.
    pub fn m_const(&self) -> f64 {
        self.lambda1.sqrt() / (2.0 * self.c1 * self.measure.sqrt())
    }

    /// Right-hand side of the `(f5)` inequality, `λ1^{1/2} / (C1 |Ω|^{1/2}) = 2M`.
    pub fn f5_threshold(&self) -> f64 {
        self.lambda1.sqrt() / (self.c1 * self.measure.sqrt())
    }

    /// Smallest admissible `U = (K / ∫e1^p)^{1/p}` for `K` intervals.
    pub fn u_min(&self, k_count: usize) -> f64 {
        (k_count as f64 / self.int_e1_p).powf(1.0 / self.p)
    }
}
