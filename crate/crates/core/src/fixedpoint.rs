//! The norm map `P_k(α) = ∫u_α^p`, its scan over `(t_{k-1}, t_k)` and the
//! fixed points `P_k(α) = α` that solve the nonlocal problem.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{EigenData, Field, Grid};
use crate::nonlinearity::{truncate, NonlocalNonlinearity};
use crate::scalar;
use crate::solver::{
    pk_upper_bound, residual_with_floor, solve_auxiliary, AuxSolveResult, LocalReaction, Method,
    SolveOptions,
};

/// Extra regula falsi steps allowed after bisection closes the bracket.
const POLISH_STEPS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PkSample {
    pub k: usize,
    pub alpha: f64,
    pub pk: f64,
    pub c_alpha: f64,
    pub residual: f64,
    pub iterations: usize,
    pub method: Method,
    /// `ψ_α^{-1}(λ1)^p ∫e1^p`.
    pub pk_floor: f64,
    pub pk_upper_bound: f64,
    pub barrier_margin: f64,
}

impl PkSample {
    /// `g(α) = P_k(α) - α`.
    pub fn g(&self) -> f64 {
        self.pk - self.alpha
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub k: usize,
    pub alpha_star: f64,
    #[serde(skip)]
    pub u: Field,
    pub lp_norm: f64,
    /// `sup |(-Δ_h)u - f(u, ∫u^p)|`.
    pub nonlocal_residual: f64,
    pub residual_limit: f64,
    pub bracket: (f64, f64),
    /// Sign of `g` just left of `α*`: `+1` for a `+ → -` crossing.
    pub crossing: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionBundle {
    pub fixed_points: Vec<FixedPoint>,
    pub ordering_certificate: bool,
}

/// Outcome of one interval scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalScan {
    pub k: usize,
    pub delta: f64,
    pub samples: Vec<PkSample>,
    /// `(α, message)` for failed solves.
    pub failures: Vec<(f64, String)>,
    pub left_positive: bool,
    pub right_positive: bool,
    pub interior_negative: bool,
    /// Consecutive sample pairs where `g` changes sign.
    pub brackets: Vec<(f64, f64)>,
}

impl IntervalScan {
    /// Signs of `g` in sample order.
    pub fn sign_pattern(&self) -> String {
        self.samples
            .iter()
            .map(|s| if s.g() > 0.0 { '+' } else { '-' })
            .collect()
    }

    /// Positive at both offset endpoints and negative somewhere inside.
    pub fn two_crossing_shape(&self) -> bool {
        self.left_positive && self.right_positive && self.interior_negative
    }
}

/// The nonlinearity frozen at a nonlocal value, without truncation.
struct Frozen<'a> {
    f: &'a NonlocalNonlinearity,
    alpha: f64,
}

impl LocalReaction for Frozen<'_> {
    fn value(&self, s: f64) -> f64 {
        self.f.value(s, self.alpha)
    }
    fn derivative(&self, s: f64) -> f64 {
        self.f.derivative_s(s, self.alpha)
    }
    fn slope_derivative(&self, s: f64) -> f64 {
        self.f.term().slope_derivative(s, self.alpha)
    }
}

type CacheKey = (usize, u64, usize);

/// `P_k` on a fixed grid with a cache of completed solves.
pub struct NormMap<'a> {
    pub grid: &'a Grid,
    pub eig: &'a EigenData,
    pub f: &'a NonlocalNonlinearity,
    pub opts: SolveOptions,
    cache: Mutex<HashMap<CacheKey, Arc<AuxSolveResult>>>,
}

impl<'a> NormMap<'a> {
    pub fn new(
        grid: &'a Grid,
        eig: &'a EigenData,
        f: &'a NonlocalNonlinearity,
        opts: SolveOptions,
    ) -> Self {
        Self {
            grid,
            eig,
            f,
            opts,
            cache: Mutex::new(HashMap::new()),
        }
    }

    /// Auxiliary solve at `α`, memoised on `(k, α, resolution)`.
    pub fn solve(&self, k: usize, alpha: f64) -> Result<Arc<AuxSolveResult>> {
        let found = self.f.locate(alpha)?;
        if found != k {
            return Err(Error::AlphaOutOfRange {
                alpha,
                detail: format!("alpha lies in interval {found}, not {k}"),
            });
        }
        let key = (k, alpha.to_bits(), self.grid.resolution());
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let tf = truncate(self.f, alpha)?;
        let res = Arc::new(solve_auxiliary(self.grid, &tf, self.eig, &self.opts)?);
        self.cache.lock().unwrap().insert(key, res.clone());
        Ok(res)
    }

    pub fn evaluate_pk(&self, k: usize, alpha: f64) -> Result<PkSample> {
        let res = self.solve(k, alpha)?;
        let tf = truncate(self.f, alpha)?;
        let floor = tf.psi_inverse(self.eig.lambda1)?.powf(self.eig.p) * self.eig.int_e1_p;
        Ok(PkSample {
            k,
            alpha,
            pk: res.lp_norm,
            c_alpha: res.c_alpha,
            residual: res.residual,
            iterations: res.iterations,
            method: res.method_used,
            pk_floor: floor,
            pk_upper_bound: pk_upper_bound(self.grid, &tf, self.eig),
            barrier_margin: res.barrier_margin,
        })
    }

    /// Offset endpoints `(t_{k-1} + δ, t_k - δ)` for a relative offset.
    pub fn scan_window(&self, k: usize, delta: f64) -> (f64, f64) {
        let (lo, hi) = self.f.interval(k);
        let d = delta * (hi - lo);
        (lo + d, hi - d)
    }

    /// Chebyshev-clustered scan of `g = P_k - α`; `delta` is relative to
    /// the interval length.
    pub fn scan_interval(&self, k: usize, samples: usize, delta: f64) -> Result<IntervalScan> {
        if samples < 8 {
            return Err(Error::InvalidArgument(format!(
                "scan needs at least 8 samples, got {samples}"
            )));
        }
        if !(delta > 0.0 && delta < 0.5) {
            return Err(Error::InvalidArgument(format!(
                "endpoint offset {delta} must lie in (0, 0.5)"
            )));
        }
        if k == 0 || k > self.f.k_count() {
            return Err(Error::InvalidArgument(format!(
                "interval index {k} outside 1..={}",
                self.f.k_count()
            )));
        }
        let (a, b) = self.scan_window(k, delta);
        let grid = scalar::chebyshev_points(a, b, samples);
        let results: Vec<_> = grid
            .par_iter()
            .map(|&alpha| (alpha, self.evaluate_pk(k, alpha)))
            .collect();
        let mut ok = Vec::new();
        let mut failures = Vec::new();
        for (alpha, r) in results {
            match r {
                Ok(s) => ok.push(s),
                Err(e) => failures.push((alpha, e.to_string())),
            }
        }
        let first = grid[0];
        let last = grid[grid.len() - 1];
        let left_positive = ok.first().is_some_and(|s| s.alpha == first && s.g() > 0.0);
        let right_positive = ok.last().is_some_and(|s| s.alpha == last && s.g() > 0.0);
        let interior_negative = ok.iter().any(|s| s.g() < 0.0);
        let brackets = ok
            .windows(2)
            .filter(|w| (w[0].g() > 0.0) != (w[1].g() > 0.0))
            .map(|w| (w[0].alpha, w[1].alpha))
            .collect();
        Ok(IntervalScan {
            k,
            delta: delta * (self.f.interval(k).1 - self.f.interval(k).0),
            samples: ok,
            failures,
            left_positive,
            right_positive,
            interior_negative,
            brackets,
        })
    }

    fn g_at(&self, k: usize, alpha: f64) -> Result<f64> {
        Ok(self.evaluate_pk(k, alpha)?.g())
    }

    /// `g` at `α`, retrying at nearby points inside `(lo, hi)` if the
    /// solve fails there.
    fn g_near(&self, k: usize, alpha: f64, lo: f64, hi: f64) -> Result<(f64, f64)> {
        for a in [alpha, lo + 0.25 * (hi - lo), lo + 0.75 * (hi - lo)] {
            if let Ok(g) = self.g_at(k, a) {
                return Ok((a, g));
            }
        }
        Err(Error::BracketLost { k, lo, hi })
    }

    /// Nodal residual of the nonlocal equation at a candidate solution.
    pub fn nonlocal_residual(&self, u: &[f64], lp_norm: f64) -> (f64, f64, bool) {
        let frozen = Frozen {
            f: self.f,
            alpha: lp_norm,
        };
        let (r, level) = residual_with_floor(self.grid, &frozen, u, 10.0 * self.opts.newton_tol);
        let sup = r.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let ok = r.iter().zip(&level).all(|(a, b)| a.abs() <= *b);
        (sup, level.iter().cloned().fold(0.0, f64::max), ok)
    }

    /// Bisection of `g` on one sign-change bracket down to `tol_fp`, then
    /// regula falsi inside the final bracket until the nonlocal residual
    /// is within its limit.
    pub fn refine_bracket(&self, k: usize, lo: f64, hi: f64, tol_fp: f64) -> Result<FixedPoint> {
        let (mut a, mut b) = (lo, hi);
        let (mut ga, mut gb) = (self.g_at(k, a)?, self.g_at(k, b)?);
        if (ga > 0.0) == (gb > 0.0) {
            return Err(Error::BracketLost { k, lo, hi });
        }
        let crossing: i8 = if ga > 0.0 { 1 } else { -1 };
        while b - a > tol_fp {
            let (m, gm) = self.g_near(k, 0.5 * (a + b), a, b)?;
            if (gm > 0.0) == (ga > 0.0) {
                (a, ga) = (m, gm);
            } else {
                (b, gb) = (m, gm);
            }
        }
        let bracket = (a, b);
        let mut best = if ga.abs() <= gb.abs() { (a, ga) } else { (b, gb) };
        let mut side = 0i8;
        for _ in 0..=POLISH_STEPS {
            let alpha = best.0;
            let res = self.solve(k, alpha)?;
            let (sup, limit, ok) = self.nonlocal_residual(&res.u, res.lp_norm);
            if ok && best.1.abs() <= tol_fp {
                return Ok(FixedPoint {
                    k,
                    alpha_star: alpha,
                    u: res.u.clone(),
                    lp_norm: res.lp_norm,
                    nonlocal_residual: sup,
                    residual_limit: limit,
                    bracket,
                    crossing,
                });
            }
            if b - a <= f64::EPSILON * b.abs() {
                return Err(Error::ResidualBreach {
                    alpha,
                    residual: sup,
                    limit,
                });
            }
            // Illinois variant of regula falsi
            let (wa, wb) = match side {
                1 => (0.5, 1.0),
                -1 => (1.0, 0.5),
                _ => (1.0, 1.0),
            };
            let (fa, fb) = (wa * ga, wb * gb);
            let mut c = b - fb * (b - a) / (fb - fa);
            if !(c > a && c < b) {
                c = 0.5 * (a + b);
            }
            let gc = self.g_at(k, c)?;
            if (gc > 0.0) == (ga > 0.0) {
                (a, ga) = (c, gc);
                side = -1;
            } else {
                (b, gb) = (c, gc);
                side = 1;
            }
            if gc.abs() < best.1.abs() {
                best = (c, gc);
            }
        }
        let res = self.solve(k, best.0)?;
        let (sup, limit, _) = self.nonlocal_residual(&res.u, res.lp_norm);
        Err(Error::ResidualBreach {
            alpha: best.0,
            residual: sup,
            limit,
        })
    }

    /// All fixed points of a scan; needs at least two brackets.
    pub fn bracket_and_bisect(&self, scan: &IntervalScan, tol_fp: f64) -> Result<Vec<FixedPoint>> {
        if scan.brackets.is_empty() {
            return Err(Error::NoBracket { k: scan.k });
        }
        if scan.brackets.len() < 2 {
            return Err(Error::TooFewFixedPoints {
                k: scan.k,
                found: scan.brackets.len(),
            });
        }
        scan.brackets
            .par_iter()
            .map(|&(lo, hi)| self.refine_bracket(scan.k, lo, hi, tol_fp))
            .collect()
    }

    /// Default fixed-point tolerance `1e-8 (t_k - t_{k-1})`.
    pub fn default_tol_fp(&self, k: usize) -> f64 {
        let (lo, hi) = self.f.interval(k);
        1e-8 * (hi - lo)
    }
}

/// Keeps the extreme pair per interval and certifies
/// `0 < n_{1,1} < n_{1,2} < t_1 < … < n_{K,1} < n_{K,2} < t_K`.
pub fn assemble_bundle(
    f: &NonlocalNonlinearity,
    per_interval: Vec<(usize, Vec<FixedPoint>)>,
    tol_fp: impl Fn(usize) -> f64,
) -> Result<SolutionBundle> {
    let mut per_interval = per_interval;
    per_interval.sort_by_key(|(k, _)| *k);
    let mut kept = Vec::new();
    for (k, mut fps) in per_interval {
        fps.sort_by(|x, y| x.alpha_star.total_cmp(&y.alpha_star));
        let tol = tol_fp(k);
        fps.dedup_by(|later, earlier| (later.alpha_star - earlier.alpha_star).abs() <= tol);
        if fps.len() < 2 {
            return Err(Error::TooFewFixedPoints { k, found: fps.len() });
        }
        let last = fps.pop().unwrap();
        let first = fps.swap_remove(0);
        kept.push(first);
        kept.push(last);
    }
    let mut chain: Vec<(String, f64)> = vec![("0".into(), 0.0)];
    for pair in kept.chunks(2) {
        let k = pair[0].k;
        for fp in pair {
            chain.push((format!("norm of fixed point α* = {} (k = {k})", fp.alpha_star), fp.lp_norm));
        }
        chain.push((format!("t_{k}"), f.interval(k).1));
    }
    for w in chain.windows(2) {
        if !(w[0].1 < w[1].1) {
            return Err(Error::Ordering {
                left: format!("{} = {}", w[0].0, w[0].1),
                right: format!("{} = {}", w[1].0, w[1].1),
            });
        }
    }
    kept.sort_by(|x, y| x.lp_norm.total_cmp(&y.lp_norm));
    Ok(SolutionBundle {
        fixed_points: kept,
        ordering_certificate: true,
    })
}
