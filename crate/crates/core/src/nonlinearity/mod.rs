//! Nonlocal reaction terms `f(s, α)`, their truncations `f̂_α`, primitives
//! and slope functions `ψ_α(s) = f(s, α)/s`.

mod families;
mod polynomial;

pub use families::{
    make_family_a, make_family_b, make_family_c, Family, FamilyConstants, FamilyKind, Profile,
    Scaled, SlopeFamily, SlopeLaw,
};
pub use polynomial::PolynomialReaction;

use std::fmt::Debug;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar;

/// Limit `γ_α = lim_{s→0⁺} f(s, α)/s`, which may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Slope {
    Finite(f64),
    PosInfinite,
    NegInfinite,
}

impl Slope {
    pub fn from_value(v: f64) -> Self {
        if v == f64::INFINITY {
            Slope::PosInfinite
        } else if v == f64::NEG_INFINITY {
            Slope::NegInfinite
        } else {
            Slope::Finite(v)
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Slope::Finite(v) => v,
            Slope::PosInfinite => f64::INFINITY,
            Slope::NegInfinite => f64::NEG_INFINITY,
        }
    }

    /// True when `y` lies strictly below the limit.
    pub fn exceeds(self, y: f64) -> bool {
        self.as_f64() > y
    }
}

/// A reaction term `f: ℝ × A → ℝ` with singular set `{t_1, …, t_K}`.
pub trait ReactionTerm: Send + Sync + Debug {
    fn value(&self, s: f64, alpha: f64) -> f64;

    /// `∂f/∂s`; central differences unless overridden.
    fn derivative_s(&self, s: f64, alpha: f64) -> f64 {
        let h = 1e-6 * s.abs().max(1e-3);
        (self.value(s + h, alpha) - self.value(s - h, alpha)) / (2.0 * h)
    }

    /// `d/ds (f(s, α)/s)` for `s > 0`.
    fn slope_derivative(&self, s: f64, alpha: f64) -> f64 {
        (self.derivative_s(s, alpha) * s - self.value(s, alpha)) / (s * s)
    }

    /// Singular points `t_1 < … < t_K` (`t_0 = 0` implicit).
    fn singular_points(&self) -> Vec<f64>;

    /// Positive zero `s_α` bounding the positivity region of `f(·, α)`.
    fn zero_locus(&self, alpha: f64) -> Result<f64>;

    fn gamma(&self, alpha: f64) -> Slope;

    fn describe(&self) -> String;
}

/// Shared handle to a reaction term plus its interval structure.
#[derive(Debug, Clone)]
pub struct NonlocalNonlinearity {
    inner: Arc<dyn ReactionTerm>,
    breakpoints: Vec<f64>,
}

impl NonlocalNonlinearity {
    pub fn new(inner: Arc<dyn ReactionTerm>) -> Result<Self> {
        let mut breakpoints = vec![0.0];
        breakpoints.extend(inner.singular_points());
        if breakpoints.len() < 2 || breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(format!(
                "singular points must satisfy 0 < t_1 < … < t_K, got {:?}",
                &breakpoints[1..]
            )));
        }
        Ok(Self { inner, breakpoints })
    }

    pub fn term(&self) -> &Arc<dyn ReactionTerm> {
        &self.inner
    }

    /// Number of working intervals `K`.
    pub fn k_count(&self) -> usize {
        self.breakpoints.len() - 1
    }

    /// `t_0 = 0, t_1, …, t_K`.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn t_max(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    /// Working interval `(t_{k-1}, t_k)` for `k` in `1..=K`.
    pub fn interval(&self, k: usize) -> (f64, f64) {
        (self.breakpoints[k - 1], self.breakpoints[k])
    }

    /// Index `k` with `α ∈ (t_{k-1}, t_k)`.
    pub fn locate(&self, alpha: f64) -> Result<usize> {
        for k in 1..=self.k_count() {
            let (lo, hi) = self.interval(k);
            if alpha > lo && alpha < hi {
                return Ok(k);
            }
        }
        let detail = if alpha.is_nan() {
            "alpha is NaN".to_string()
        } else if let Some(t) = self.breakpoints.iter().find(|&&t| t == alpha) {
            format!("alpha coincides with singular point {t}")
        } else {
            format!(
                "alpha lies outside (0, {}) where the intervals end",
                self.t_max()
            )
        };
        Err(Error::AlphaOutOfRange { alpha, detail })
    }

    pub fn value(&self, s: f64, alpha: f64) -> f64 {
        self.inner.value(s, alpha)
    }

    pub fn derivative_s(&self, s: f64, alpha: f64) -> f64 {
        self.inner.derivative_s(s, alpha)
    }

    pub fn zero_locus(&self, alpha: f64) -> Result<f64> {
        self.inner.zero_locus(alpha)
    }

    pub fn gamma(&self, alpha: f64) -> Slope {
        self.inner.gamma(alpha)
    }

    /// `ψ_α(s) = f(s, α)/s` without truncation.
    pub fn psi_raw(&self, s: f64, alpha: f64) -> f64 {
        self.inner.value(s, alpha) / s
    }
}

/// `f̂_α`: `f(0, α)` for `s ≤ 0`, `f(s, α)` on `(0, s_α]`, `0` beyond `s_α`.
#[derive(Debug, Clone)]
pub struct TruncatedNonlinearity {
    alpha: f64,
    k: usize,
    s_alpha: f64,
    f_at_zero: f64,
    base: NonlocalNonlinearity,
}

/// Freezes the nonlocal variable at `α` and truncates.
pub fn truncate(f: &NonlocalNonlinearity, alpha: f64) -> Result<TruncatedNonlinearity> {
    let k = f.locate(alpha)?;
    let s_alpha = f.zero_locus(alpha)?;
    if !(s_alpha > 0.0 && s_alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "zero locus s_α = {s_alpha} at α = {alpha} is not a positive number"
        )));
    }
    Ok(TruncatedNonlinearity {
        alpha,
        k,
        s_alpha,
        f_at_zero: f.value(0.0, alpha),
        base: f.clone(),
    })
}

const PRIMITIVE_RTOL: f64 = 1e-10;

impl TruncatedNonlinearity {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Interval index `k`.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn s_alpha(&self) -> f64 {
        self.s_alpha
    }

    pub fn base(&self) -> &NonlocalNonlinearity {
        &self.base
    }

    pub fn value(&self, s: f64) -> f64 {
        if s <= 0.0 {
            self.f_at_zero
        } else if s <= self.s_alpha {
            self.base.value(s, self.alpha)
        } else {
            0.0
        }
    }

    /// Generalised derivative; one-sided from the active piece at the kinks.
    pub fn derivative(&self, s: f64) -> f64 {
        if s <= 0.0 || s > self.s_alpha {
            0.0
        } else {
            self.base.derivative_s(s, self.alpha)
        }
    }

    /// `ψ_α'(s)` on `(0, s_α)`, zero beyond.
    pub fn slope_derivative(&self, s: f64) -> f64 {
        if s > 0.0 && s < self.s_alpha {
            self.base.term().slope_derivative(s, self.alpha)
        } else {
            0.0
        }
    }

    /// `F̂_α(s) = ∫_0^s f̂_α`.
    pub fn primitive(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return self.f_at_zero * s;
        }
        let top = s.min(self.s_alpha);
        let (f, a) = (&self.base, self.alpha);
        scalar::integrate(|t| f.value(t, a), 0.0, top, PRIMITIVE_RTOL)
    }

    pub fn gamma(&self) -> Slope {
        self.base.gamma(self.alpha)
    }

    /// `ψ_α(s) = f(s, α)/s` for `s ∈ (0, s_α)`.
    pub fn psi(&self, s: f64) -> Result<f64> {
        if !(s > 0.0 && s < self.s_alpha) {
            return Err(Error::OutOfRange {
                what: "ψ_α domain (0, s_α)",
                value: s,
                lo: 0.0,
                hi: self.s_alpha,
            });
        }
        Ok(self.base.psi_raw(s, self.alpha))
    }

    /// `ψ_α^{-1}(y)` for `y ∈ (0, γ_α)`, by bisection on the decreasing `ψ_α`
    /// down to floating-point resolution in `s`.
    pub fn psi_inverse(&self, y: f64) -> Result<f64> {
        let gamma = self.gamma();
        if !(y > 0.0) || !gamma.exceeds(y) || !y.is_finite() {
            return Err(Error::OutOfRange {
                what: "ψ_α range (0, γ_α)",
                value: y,
                lo: 0.0,
                hi: gamma.as_f64(),
            });
        }
        let psi = |s: f64| {
            if s <= 0.0 {
                gamma.as_f64()
            } else if s >= self.s_alpha {
                0.0
            } else {
                self.base.psi_raw(s, self.alpha)
            }
        };
        let s = scalar::bisect(|s| psi(s) - y, 0.0, self.s_alpha).ok_or(Error::OutOfRange {
            what: "ψ_α range (0, γ_α)",
            value: y,
            lo: 0.0,
            hi: gamma.as_f64(),
        })?;
        // keep strictly inside the open domain
        Ok(s.clamp(f64::MIN_POSITIVE, self.s_alpha * (1.0 - f64::EPSILON)))
    }

    /// `max_{s ∈ [0, s_α]} f̂_α(s)`.
    pub fn max_value(&self) -> f64 {
        scalar::maximize(|s| self.value(s), 0.0, self.s_alpha, 256).1
    }
}
