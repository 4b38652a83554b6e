//! Discrete solver for the truncated local problem `-Δu = f̂_α(u)` in `Ω`,
//! `u = 0` on `∂Ω`, plus the a-priori bounds its solution obeys.
//!
//! Newton runs in the variable `w = u²`, where the discrete energy
//!
//! ```text
//! E(w) = ½ Σ_edges c_e (√w_i - √w_j)² + ½ Σ b_i w_i - Σ F̂(√w_i)
//! ```
//!
//! is convex whenever `f̂(s)/s` is non-increasing. Its gradient is
//! `R_i / (2 u_i)` with `R = (-Δ_h)u - f̂(u)`, so stationary points are
//! exactly the discrete solutions and every accepted step lowers the
//! discrete energy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{h1_norm_sq, integrate_power, EigenData, Field, Grid};
use crate::linalg::{dot, sup_norm, SymBanded};
use crate::nonlinearity::TruncatedNonlinearity;

/// Rounding allowance, in units of machine epsilon, on the nodal residual.
const ROUNDING_FACTOR: f64 = 16.0;
const STALL_WINDOW: usize = 12;
const BOX_TOL: f64 = 1e-12;
const BARRIER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    pub newton_tol: f64,
    pub max_newton: usize,
    pub damping: f64,
    pub max_halvings: usize,
    pub monotone_fallback: bool,
    /// Shift `λ̄` of the monotone scheme; sampled from `f̂'` when `None`.
    pub lambda_shift: Option<f64>,
    pub max_monotone: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            newton_tol: 1e-10,
            max_newton: 200,
            damping: 0.5,
            max_halvings: 30,
            monotone_fallback: true,
            lambda_shift: None,
            max_monotone: 20_000,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        let ok = self.newton_tol > 0.0
            && self.max_newton >= 1
            && self.damping > 0.0
            && self.damping < 1.0
            && self.max_halvings >= 1
            && self.max_monotone >= 1
            && self.lambda_shift.is_none_or(|l| l > 0.0 && l.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid solver options {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Newton,
    Monotone,
}

#[derive(Debug, Clone)]
pub struct AuxSolveResult {
    pub alpha: f64,
    pub u: Field,
    pub c_alpha: f64,
    /// `sup |(-Δ_h)u - f̂_α(u)|`.
    pub residual: f64,
    /// Acceptance level the residual was held to: `newton_tol` plus the
    /// rounding floor of the stencil and reaction at the solution.
    pub tolerance: f64,
    pub iterations: usize,
    pub method_used: Method,
    pub lp_norm: f64,
    /// `min(u - z_α)` against the lower barrier.
    pub barrier_margin: f64,
    /// Residual after each iteration.
    pub trace: Vec<f64>,
}

/// A local reaction `g(s)` with `g(s)/s` non-increasing on `(0, ∞)`.
pub trait LocalReaction {
    fn value(&self, s: f64) -> f64;
    fn derivative(&self, s: f64) -> f64;
    /// `d/ds (g(s)/s)`, expected `<= 0`.
    fn slope_derivative(&self, s: f64) -> f64;
}

impl LocalReaction for TruncatedNonlinearity {
    fn value(&self, s: f64) -> f64 {
        TruncatedNonlinearity::value(self, s)
    }
    fn derivative(&self, s: f64) -> f64 {
        TruncatedNonlinearity::derivative(self, s)
    }
    fn slope_derivative(&self, s: f64) -> f64 {
        TruncatedNonlinearity::slope_derivative(self, s)
    }
}

/// Nodal residual `(-Δ_h)u - g(u)` and the per-node acceptance level.
pub fn residual_with_floor(
    grid: &Grid,
    g: &impl LocalReaction,
    u: &[f64],
    tol: f64,
) -> (Vec<f64>, Vec<f64>) {
    let lap = grid.laplacian();
    let mut r = lap.apply(u);
    let scale = lap.apply_abs(u);
    let mut level = vec![0.0; u.len()];
    for i in 0..u.len() {
        let gv = g.value(u[i]);
        r[i] -= gv;
        let dg = g.derivative(u[i]).abs() * u[i].abs();
        level[i] = tol + ROUNDING_FACTOR * f64::EPSILON * (scale[i] + dg + gv.abs());
    }
    (r, level)
}

fn worst_ratio(r: &[f64], level: &[f64]) -> f64 {
    r.iter().zip(level).fold(0.0, |m, (a, b)| m.max(a.abs() / b))
}

/// Outcome of an iterative solve from a given start.
#[derive(Debug, Clone)]
pub struct IterationOutcome {
    pub u: Vec<f64>,
    pub residual: f64,
    pub tolerance: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<f64>,
}

/// Damped Newton on the convex energy in `w = u²`, started from `init > 0`.
pub fn newton_sqrt(
    grid: &Grid,
    g: &impl LocalReaction,
    init: &[f64],
    opts: &SolveOptions,
) -> Result<IterationOutcome> {
    let lap = grid.laplacian();
    let n = grid.len();
    let tiny = f64::MIN_POSITIVE.sqrt();
    let mut u: Vec<f64> = init.iter().map(|&v| v.max(tiny)).collect();
    let mut w: Vec<f64> = u.iter().map(|v| v * v).collect();
    let (mut r, mut level) = residual_with_floor(grid, g, &u, opts.newton_tol);
    let mut trace = Vec::new();
    let mut best = (worst_ratio(&r, &level), u.clone(), r.clone(), level.clone());
    let mut since_best = 0;
    let mut iterations = 0;

    while iterations < opts.max_newton && best.0 > 1.0 && since_best < STALL_WINDOW {
        iterations += 1;
        let grad: Vec<f64> = (0..n).map(|i| r[i] / (2.0 * u[i])).collect();
        let mut hess = SymBanded::zeros(n, lap.bandwidth());
        lap.for_each_edge(|i, j, c| {
            let (ui, uj) = (u[i], u[j]);
            hess.add(i, i, 0.25 * c * uj / (ui * ui * ui));
            hess.add(j, j, 0.25 * c * ui / (uj * uj * uj));
            hess.add(j, i, -0.25 * c / (ui * uj));
        });
        for i in 0..n {
            let curv = (-g.slope_derivative(u[i])).max(0.0) / (4.0 * u[i]);
            hess.add(i, i, curv);
        }
        let d = solve_regularised(&hess, &grad)?;
        let d: Vec<f64> = d.iter().map(|v| -v).collect();
        let slope0 = dot(&grad, &d);
        if !(slope0 < 0.0) {
            break;
        }
        // fraction to the boundary w > 0
        let mut t = d
            .iter()
            .zip(&w)
            .filter(|(di, _)| **di < 0.0)
            .fold(1.0_f64, |t, (di, wi)| t.min(-0.95 * wi / di));
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let wt: Vec<f64> = w.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            if wt.iter().all(|v| *v > 0.0) {
                let ut: Vec<f64> = wt.iter().map(|v| v.sqrt()).collect();
                let (rt, lt) = residual_with_floor(grid, g, &ut, opts.newton_tol);
                let slope_t: f64 = (0..n).map(|i| rt[i] / (2.0 * ut[i]) * d[i]).sum();
                if slope_t <= 0.0 {
                    accepted = Some((wt, ut, rt, lt));
                    break;
                }
            }
            t *= opts.damping;
        }
        let Some((wt, ut, rt, lt)) = accepted else {
            break;
        };
        (w, u, r, level) = (wt, ut, rt, lt);
        let ratio = worst_ratio(&r, &level);
        trace.push(sup_norm(&r));
        if ratio < 0.9 * best.0 {
            since_best = 0;
        } else {
            since_best += 1;
        }
        if ratio < best.0 {
            best = (ratio, u.clone(), r.clone(), level.clone());
        }
    }
    let (ratio, u, r, level) = best;
    Ok(IterationOutcome {
        residual: sup_norm(&r),
        tolerance: tolerance_of(&level),
        u,
        iterations,
        converged: ratio <= 1.0,
        trace,
    })
}

fn tolerance_of(level: &[f64]) -> f64 {
    level.iter().cloned().fold(0.0, f64::max)
}

fn solve_regularised(m: &SymBanded, rhs: &[f64]) -> Result<Vec<f64>> {
    match m.cholesky() {
        Ok(ch) => Ok(ch.solve(rhs)),
        Err(_) => {
            let n = m.dim();
            let dmax = (0..n).map(|i| m.get(i, i).abs()).fold(0.0, f64::max);
            let mut ridge = 1e-14 * dmax.max(f64::MIN_POSITIVE);
            loop {
                let mut shifted = m.clone();
                for i in 0..n {
                    shifted.add(i, i, ridge);
                }
                if let Ok(ch) = shifted.cholesky() {
                    return Ok(ch.solve(rhs));
                }
                ridge *= 100.0;
                if ridge > dmax {
                    return shifted.cholesky().map(|c| c.solve(rhs));
                }
            }
        }
    }
}

/// Monotone scheme `(-Δ_h + λ̄)u_{j+1} = f̂(u_j) + λ̄ u_j` from the constant
/// supersolution `s_α`.
pub fn monotone_iteration(
    grid: &Grid,
    tf: &TruncatedNonlinearity,
    opts: &SolveOptions,
) -> Result<IterationOutcome> {
    let shift = opts.lambda_shift.unwrap_or_else(|| lipschitz_shift(tf));
    let lap = grid.laplacian();
    let n = grid.len();
    let mut u = vec![tf.s_alpha(); n];
    let mut trace = Vec::new();
    let factor = if grid.dim() == 1 {
        Some(lap.assemble(&vec![shift; n]).cholesky()?)
    } else {
        None
    };
    let mut out = None;
    for it in 1..=opts.max_monotone {
        let rhs: Vec<f64> = u.iter().map(|&v| tf.value(v) + shift * v).collect();
        u = match &factor {
            Some(ch) => ch.solve(&rhs),
            None => lap.solve_shifted(shift, &rhs)?,
        };
        let (r, level) = residual_with_floor(grid, tf, &u, opts.newton_tol);
        trace.push(sup_norm(&r));
        if worst_ratio(&r, &level) <= 1.0 || it == opts.max_monotone {
            out = Some(IterationOutcome {
                residual: sup_norm(&r),
                tolerance: tolerance_of(&level),
                converged: worst_ratio(&r, &level) <= 1.0,
                u: u.clone(),
                iterations: it,
                trace: std::mem::take(&mut trace),
            });
            break;
        }
    }
    Ok(out.expect("max_monotone >= 1"))
}

/// Twice the largest `|f̂'|` over 64 samples of `[0, s_α]`.
pub fn lipschitz_shift(tf: &TruncatedNonlinearity) -> f64 {
    let sa = tf.s_alpha();
    let lip = (0..64)
        .map(|i| tf.derivative(sa * (i as f64 + 0.5) / 64.0).abs())
        .fold(0.0, f64::max);
    2.0 * lip.max(1.0)
}

/// `I(u) = ½‖u‖² - ∫ F̂_α(u)`.
pub fn energy(grid: &Grid, tf: &TruncatedNonlinearity, u: &[f64]) -> f64 {
    let pot: Vec<f64> = u.iter().map(|&v| tf.primitive(v)).collect();
    0.5 * h1_norm_sq(grid, u) - grid.integrate(&pot)
}

/// `z_α = ψ_α^{-1}(λ1) e1`.
pub fn lower_barrier(tf: &TruncatedNonlinearity, eig: &EigenData) -> Result<Field> {
    Ok(eig.e1.scaled(tf.psi_inverse(eig.lambda1)?))
}

/// Default start `max(z_α, 0.9 s_α e1)` clipped into `(0, s_α]`.
pub fn initial_guess(tf: &TruncatedNonlinearity, eig: &EigenData, z: &[f64]) -> Vec<f64> {
    let sa = tf.s_alpha();
    eig.e1
        .iter()
        .zip(z)
        .map(|(e, zi)| zi.max(0.9 * sa * e).clamp(f64::MIN_POSITIVE, sa))
        .collect()
}

/// Solves the truncated problem from the default start.
pub fn solve_auxiliary(
    grid: &Grid,
    tf: &TruncatedNonlinearity,
    eig: &EigenData,
    opts: &SolveOptions,
) -> Result<AuxSolveResult> {
    let z = lower_barrier(tf, eig)?;
    let init = initial_guess(tf, eig, &z);
    solve_with_barrier(grid, tf, eig, opts, &init, &z)
}

/// Solves the truncated problem from a caller-supplied start.
pub fn solve_auxiliary_from(
    grid: &Grid,
    tf: &TruncatedNonlinearity,
    eig: &EigenData,
    opts: &SolveOptions,
    init: &[f64],
) -> Result<AuxSolveResult> {
    let z = lower_barrier(tf, eig)?;
    solve_with_barrier(grid, tf, eig, opts, init, &z)
}

fn solve_with_barrier(
    grid: &Grid,
    tf: &TruncatedNonlinearity,
    eig: &EigenData,
    opts: &SolveOptions,
    init: &[f64],
    z: &[f64],
) -> Result<AuxSolveResult> {
    opts.validate()?;
    if init.len() != grid.len() {
        return Err(Error::InvalidArgument(format!(
            "initial guess has {} values for {} nodes",
            init.len(),
            grid.len()
        )));
    }
    let sa = tf.s_alpha();
    let start: Vec<f64> = init.iter().map(|v| v.clamp(f64::MIN_POSITIVE, sa)).collect();
    let newton = newton_sqrt(grid, tf, &start, opts)?;
    let (outcome, method) = if newton.converged {
        (newton, Method::Newton)
    } else if opts.monotone_fallback {
        let mono = monotone_iteration(grid, tf, opts)?;
        if !mono.converged {
            let mut trace = newton.trace;
            trace.extend(mono.trace);
            return Err(Error::SolveFailed {
                alpha: tf.alpha(),
                reason: format!(
                    "Newton and monotone iteration stalled at residual {:e} (tolerance {:e})",
                    mono.residual, mono.tolerance
                ),
                trace,
            });
        }
        (mono, Method::Monotone)
    } else {
        return Err(Error::SolveFailed {
            alpha: tf.alpha(),
            reason: format!(
                "Newton stalled at residual {:e} (tolerance {:e})",
                newton.residual, newton.tolerance
            ),
            trace: newton.trace,
        });
    };
    let u = outcome.u;
    let fail = |reason: String| Error::SolveFailed {
        alpha: tf.alpha(),
        reason,
        trace: outcome.trace.clone(),
    };
    if let Some((i, v)) = u
        .iter()
        .enumerate()
        .find(|(_, v)| !(**v > 0.0 && **v <= sa + BOX_TOL))
    {
        return Err(fail(format!("u[{i}] = {v} leaves the box (0, s_α = {sa}]")));
    }
    let (node, barrier_margin) = u
        .iter()
        .zip(z)
        .map(|(a, b)| a - b)
        .enumerate()
        .fold((0, f64::INFINITY), |m, (i, v)| if v < m.1 { (i, v) } else { m });
    if barrier_margin < -BARRIER_TOL * sa {
        return Err(Error::BarrierViolated {
            alpha: tf.alpha(),
            node,
            margin: barrier_margin,
        });
    }
    let c_alpha = energy(grid, tf, &u);
    if !(c_alpha < 0.0) {
        return Err(fail(format!("energy c_α = {c_alpha} is not negative")));
    }
    Ok(AuxSolveResult {
        alpha: tf.alpha(),
        lp_norm: integrate_power(grid, &u, eig.p),
        u: Field::new(u),
        c_alpha,
        residual: outcome.residual,
        tolerance: outcome.tolerance,
        iterations: outcome.iterations,
        method_used: method,
        barrier_margin,
        trace: outcome.trace,
    })
}

/// `-½ ε ψ_α^{-1}(λ1 + ε)² ∫e1²` for `0 < ε < γ_α - λ1`.
pub fn energy_upper_bound(tf: &TruncatedNonlinearity, eig: &EigenData, eps: f64) -> Result<f64> {
    let room = tf.gamma().as_f64() - eig.lambda1;
    if !(eps > 0.0 && eps < room) {
        return Err(Error::OutOfRange {
            what: "ε in (0, γ_α - λ1)",
            value: eps,
            lo: 0.0,
            hi: room,
        });
    }
    let s = tf.psi_inverse(eig.lambda1 + eps)?;
    Ok(-0.5 * eps * s * s * eig.int_e1_sq)
}

/// `(max f̂_α) C1 s_α^{p-1} |Ω|^{1/2} / √λ1`.
pub fn pk_upper_bound(grid: &Grid, tf: &TruncatedNonlinearity, eig: &EigenData) -> f64 {
    tf.max_value() * eig.c1 * tf.s_alpha().powf(eig.p - 1.0) * grid.measure().sqrt()
        / eig.lambda1.sqrt()
}

/// Both sides of `∫u^p = ⟨∇w, ∇u⟩` for `-Δw = u^{p-1}`, in the stencil's
/// cell quadrature.
pub fn norm_identity(grid: &Grid, u: &[f64], p: f64) -> Result<(f64, f64)> {
    let rhs: Vec<f64> = u.iter().map(|v| v.powf(p - 1.0)).collect();
    let w = grid.laplacian().solve_shifted(0.0, &rhs)?;
    let cell = grid.cell_volume();
    let lhs = cell * u.iter().map(|v| v.powf(p)).sum::<f64>();
    let rhs = cell * dot(&w, &grid.laplacian().apply(u));
    Ok((lhs, rhs))
}
