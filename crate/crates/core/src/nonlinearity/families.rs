//! The slope-law family `f(s, t) = s · L((S(t) - s)/|sin πt|)` and its
//! two concrete instances with power and rational `L`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{NonlocalNonlinearity, ReactionTerm, Slope};
use crate::error::{Error, Result};
use crate::geometry::GeometryConstants;
use crate::scalar;

/// Profile `S: [0, K] → (U, ∞)`, a polynomial in `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    /// `S(t) = Σ c_j t^j`.
    pub coefficients: Vec<f64>,
}

impl Profile {
    pub fn affine(intercept: f64, slope: f64) -> Self {
        Self {
            coefficients: vec![intercept, slope],
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    /// `(min S, max S)` over `[0, K]`.
    pub fn range(&self, k_count: usize) -> (f64, f64) {
        let k = k_count as f64;
        let (_, hi) = scalar::maximize(|t| self.value(t), 0.0, k, 4096);
        let (_, neg_lo) = scalar::maximize(|t| -self.value(t), 0.0, k, 4096);
        (-neg_lo, hi)
    }
}

/// Increasing slope law `L`, zero on `(-∞, 0]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SlopeLaw {
    /// `β w^n`.
    Power { beta: f64, n: f64 },
    /// `C w/(D - w)` on `[0, B]`, continued linearly with matched slope
    /// beyond `B`.
    Rational { c: f64, d: f64, b: f64 },
}

impl SlopeLaw {
    pub fn value(&self, w: f64) -> f64 {
        if w <= 0.0 {
            return 0.0;
        }
        match *self {
            SlopeLaw::Power { beta, n } => beta * w.powf(n),
            SlopeLaw::Rational { c, d, b } => {
                if w <= b {
                    c * w / (d - w)
                } else {
                    c * b / (d - b) + c * d / ((d - b) * (d - b)) * (w - b)
                }
            }
        }
    }

    pub fn derivative(&self, w: f64) -> f64 {
        if w <= 0.0 {
            return 0.0;
        }
        match *self {
            SlopeLaw::Power { beta, n } => beta * n * w.powf(n - 1.0),
            SlopeLaw::Rational { c, d, b } => {
                let x = w.min(b);
                c * d / ((d - x) * (d - x))
            }
        }
    }
}

/// `f(s, t) = s · L((S(t) - s)/|sin πt|)` with `t_i = i`, `s_α = S(α)`.
#[derive(Debug, Clone)]
pub struct SlopeFamily {
    pub profile: Profile,
    pub law: SlopeLaw,
    pub k_count: usize,
}

impl SlopeFamily {
    fn argument(&self, s: f64, alpha: f64) -> (f64, f64) {
        let sigma = (PI * alpha).sin().abs();
        ((self.profile.value(alpha) - s) / sigma, sigma)
    }
}

impl ReactionTerm for SlopeFamily {
    fn value(&self, s: f64, alpha: f64) -> f64 {
        let (w, _) = self.argument(s, alpha);
        s * self.law.value(w)
    }

    fn derivative_s(&self, s: f64, alpha: f64) -> f64 {
        let (w, sigma) = self.argument(s, alpha);
        self.law.value(w) - s * self.law.derivative(w) / sigma
    }

    fn slope_derivative(&self, s: f64, alpha: f64) -> f64 {
        let (w, sigma) = self.argument(s, alpha);
        -self.law.derivative(w) / sigma
    }

    fn singular_points(&self) -> Vec<f64> {
        (1..=self.k_count).map(|i| i as f64).collect()
    }

    fn zero_locus(&self, alpha: f64) -> Result<f64> {
        Ok(self.profile.value(alpha))
    }

    fn gamma(&self, alpha: f64) -> Slope {
        let (w, _) = self.argument(0.0, alpha);
        Slope::from_value(self.law.value(w))
    }

    fn describe(&self) -> String {
        format!(
            "s·L((S(t)-s)/|sin πt|), S = {:?}, L = {:?}, K = {}",
            self.profile.coefficients, self.law, self.k_count
        )
    }
}

/// `c · f` for a positive constant `c`.
#[derive(Debug, Clone)]
pub struct Scaled {
    pub inner: Arc<dyn ReactionTerm>,
    pub factor: f64,
}

impl ReactionTerm for Scaled {
    fn value(&self, s: f64, alpha: f64) -> f64 {
        self.factor * self.inner.value(s, alpha)
    }
    fn derivative_s(&self, s: f64, alpha: f64) -> f64 {
        self.factor * self.inner.derivative_s(s, alpha)
    }
    fn slope_derivative(&self, s: f64, alpha: f64) -> f64 {
        self.factor * self.inner.slope_derivative(s, alpha)
    }
    fn singular_points(&self) -> Vec<f64> {
        self.inner.singular_points()
    }
    fn zero_locus(&self, alpha: f64) -> Result<f64> {
        self.inner.zero_locus(alpha)
    }
    fn gamma(&self, alpha: f64) -> Slope {
        Slope::from_value(self.factor * self.inner.gamma(alpha).as_f64())
    }
    fn describe(&self) -> String {
        format!("{} × [{}]", self.factor, self.inner.describe())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    A,
    B,
    C,
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FamilyKind::A => "a",
            FamilyKind::B => "b",
            FamilyKind::C => "c",
        };
        f.write_str(s)
    }
}

/// Constants of a constructed family. Fields that a family does not use
/// are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyConstants {
    pub kind: FamilyKind,
    pub k_count: usize,
    pub p: f64,
    pub u: f64,
    pub m: f64,
    pub s_bar: f64,
    pub s_underbar: f64,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub d: Option<f64>,
    pub n: Option<f64>,
    pub beta: Option<f64>,
    /// Upper end of the admissible window for `B` (family b) or `D` (family c).
    pub window_upper: Option<f64>,
    /// `max_{s ∈ [0, S̄]} s·L(S̄ - s)`.
    pub max_sl: f64,
    /// Its maximiser.
    pub s_max: f64,
}

/// A constructed reaction term with its constants.
#[derive(Debug, Clone)]
pub struct Family {
    pub f: NonlocalNonlinearity,
    pub family: SlopeFamily,
    pub constants: FamilyConstants,
}

fn reject(condition: impl Into<String>, witness: impl Into<String>) -> Error {
    Error::Admissibility {
        condition: condition.into(),
        witness: witness.into(),
    }
}

/// Builds `f(s, t) = s·L((S(t)-s)/|sin πt|)` and re-checks the
/// admissibility conditions numerically.
pub fn make_family_a(
    profile: Profile,
    law: SlopeLaw,
    k_count: usize,
    u: f64,
    geom: &GeometryConstants,
) -> Result<Family> {
    build_family(FamilyKind::A, profile, law, k_count, u, geom)
}

fn build_family(
    kind: FamilyKind,
    profile: Profile,
    law: SlopeLaw,
    k_count: usize,
    u: f64,
    geom: &GeometryConstants,
) -> Result<Family> {
    if k_count == 0 {
        return Err(Error::InvalidArgument("K must be at least 1".into()));
    }
    let p = geom.p;
    let u_min = geom.u_min(k_count);
    if !(u >= u_min) {
        return Err(reject(
            "U >= (K / ∫e1^p)^{1/p}",
            format!("U = {u}, lower bound {u_min}"),
        ));
    }
    let (s_underbar, s_bar) = profile.range(k_count);
    if !(s_underbar > u) {
        return Err(reject("min S > U", format!("min S = {s_underbar}, U = {u}")));
    }
    for i in 0..=64 {
        let w = -10.0 * i as f64 / 64.0;
        if law.value(w) != 0.0 {
            return Err(reject("L = 0 on (-∞, 0]", format!("L({w}) = {}", law.value(w))));
        }
    }
    // increasing on (0, ∞), sampled on a log grid
    let mut prev = (0.0, law.value(0.0));
    for i in 0..=512 {
        let w = 10f64.powf(-6.0 + 18.0 * i as f64 / 512.0);
        let v = law.value(w);
        if !(v > prev.1) {
            return Err(reject(
                "L increasing on (0, ∞)",
                format!("L({}) = {} >= L({w}) = {v}", prev.0, prev.1),
            ));
        }
        prev = (w, v);
    }
    let l_at = law.value(s_underbar);
    if !(l_at > geom.lambda1) {
        return Err(reject(
            "L(min S) > λ1",
            format!("L({s_underbar}) = {l_at}, λ1 = {}", geom.lambda1),
        ));
    }
    let m = geom.m_const();
    let (s_max, max_sl) = scalar::maximize(|s| s * law.value(s_bar - s), 0.0, s_bar, 1024);
    let cap = m / s_bar.powf(p - 1.0);
    if !(max_sl < cap) {
        return Err(reject(
            "max s·L(S̄ - s) < M / S̄^{p-1}",
            format!("max = {max_sl} at s = {s_max}, bound {cap}"),
        ));
    }
    let family = SlopeFamily {
        profile,
        law,
        k_count,
    };
    let f = NonlocalNonlinearity::new(Arc::new(family.clone()))?;
    Ok(Family {
        f,
        family,
        constants: FamilyConstants {
            kind,
            k_count,
            p,
            u,
            m,
            s_bar,
            s_underbar,
            a: None,
            b: None,
            c: None,
            d: None,
            n: None,
            beta: None,
            window_upper: None,
            max_sl,
            s_max,
        },
    })
}

/// Power-law instance: `A = U + 1`, smallest integer
/// `n > (λ1+1)(A+1)^p/M - 1`, `β = (λ1+1)/A^n`, `B` the midpoint of its
/// admissible window, `S(t) = A + (B - A)t/K`.
pub fn make_family_b(k_count: usize, u: Option<f64>, geom: &GeometryConstants) -> Result<Family> {
    let u = u.unwrap_or_else(|| geom.u_min(k_count));
    let (lam, p, m) = (geom.lambda1, geom.p, geom.m_const());
    let a = u + 1.0;
    let n_floor = (lam + 1.0) * (a + 1.0).powf(p) / m - 1.0;
    let n = (n_floor.floor() + 1.0).max(1.0);
    let beta = (lam + 1.0) / a.powf(n);
    let upper = (a * ((n + 1.0) * m / ((lam + 1.0) * (a + 1.0).powf(p))).powf(1.0 / n)).min(a + 1.0);
    if !(upper > a) {
        return Err(reject(
            "A < B < min{A((n+1)M/((λ1+1)(A+1)^p))^{1/n}, A+1}",
            format!("empty window (A, {upper}] with A = {a}"),
        ));
    }
    let b = 0.5 * (a + upper);
    let profile = Profile::affine(a, (b - a) / k_count as f64);
    let mut fam = build_family(
        FamilyKind::B,
        profile,
        SlopeLaw::Power { beta, n },
        k_count,
        u,
        geom,
    )?;
    let c = &mut fam.constants;
    c.a = Some(a);
    c.b = Some(b);
    c.n = Some(n);
    c.beta = Some(beta);
    c.window_upper = Some(upper);
    Ok(fam)
}

/// Rational instance: `A = U + 1`, `A < B < D < min{A + MA/((λ1+1)(A+1)^p), A+1}`
/// with `B`, `D` at one and two thirds of the window, `C = (λ1+1)(D-A)/A`.
/// `S` defaults to the affine map from `A` to `B` over `[0, K]`.
pub fn make_family_c(
    k_count: usize,
    u: Option<f64>,
    geom: &GeometryConstants,
    profile: Option<Profile>,
) -> Result<Family> {
    let u = u.unwrap_or_else(|| geom.u_min(k_count));
    let (lam, p, m) = (geom.lambda1, geom.p, geom.m_const());
    let a = u + 1.0;
    let upper = (a + m * a / ((lam + 1.0) * (a + 1.0).powf(p))).min(a + 1.0);
    if !(upper > a) {
        return Err(reject(
            "A < B < D < min{A + MA/((λ1+1)(A+1)^p), A+1}",
            format!("empty window (A, {upper}) with A = {a}"),
        ));
    }
    let b = a + (upper - a) / 3.0;
    let d = a + 2.0 * (upper - a) / 3.0;
    let c = (lam + 1.0) * (d - a) / a;
    let profile = profile.unwrap_or_else(|| Profile::affine(a, (b - a) / k_count as f64));
    let (lo, hi) = profile.range(k_count);
    if lo < a - 1e-12 || hi > b + 1e-12 {
        return Err(reject(
            "S maps [0, K] into [A, B]",
            format!("range [{lo}, {hi}] vs [{a}, {b}]"),
        ));
    }
    let mut fam = build_family(
        FamilyKind::C,
        profile,
        SlopeLaw::Rational { c, d, b },
        k_count,
        u,
        geom,
    )?;
    let k = &mut fam.constants;
    k.a = Some(a);
    k.b = Some(b);
    k.c = Some(c);
    k.d = Some(d);
    k.window_upper = Some(upper);
    Ok(fam)
}
