//! User-supplied reaction `f(s, α) = |sin πα|^{-m} Σ c_j s^j`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{ReactionTerm, Slope};
use crate::error::{Error, Result};
use crate::scalar;

const ROOT_SCAN: usize = 4096;

/// Polynomial in `s` with an `α`-amplitude `|sin πα|^{-m}` and singular
/// points `1, …, K`. The zero locus is the largest sign change from `+`
/// to `-` of the polynomial in `(0, s_upper]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialReaction {
    pub coefficients: Vec<f64>,
    pub amplitude_power: f64,
    pub k_count: usize,
    pub s_upper: f64,
}

impl PolynomialReaction {
    pub fn new(
        coefficients: Vec<f64>,
        amplitude_power: f64,
        k_count: usize,
        s_upper: f64,
    ) -> Result<Self> {
        if coefficients.is_empty() || coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(
                "polynomial coefficients must be finite and non-empty".into(),
            ));
        }
        if !(s_upper > 0.0 && s_upper.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "upper bracket for the zero locus must be positive, got {s_upper}"
            )));
        }
        if k_count == 0 {
            return Err(Error::InvalidArgument("K must be at least 1".into()));
        }
        Ok(Self {
            coefficients,
            amplitude_power,
            k_count,
            s_upper,
        })
    }

    fn poly(&self, s: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * s + c)
    }

    fn poly_derivative(&self, s: f64) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (j, c)| acc * s + j as f64 * c)
    }

    fn amplitude(&self, alpha: f64) -> f64 {
        (PI * alpha).sin().abs().powf(-self.amplitude_power)
    }

    fn root(&self) -> Option<f64> {
        let step = self.s_upper / ROOT_SCAN as f64;
        (0..ROOT_SCAN).rev().find_map(|i| {
            let (a, b) = (i as f64 * step, (i + 1) as f64 * step);
            let (pa, pb) = (self.poly(a.max(step * 1e-6)), self.poly(b));
            (pa > 0.0 && pb <= 0.0).then(|| {
                if pb == 0.0 {
                    b
                } else {
                    scalar::bisect(|s| self.poly(s), a, b).unwrap_or(b)
                }
            })
        })
    }
}

impl ReactionTerm for PolynomialReaction {
    fn value(&self, s: f64, alpha: f64) -> f64 {
        self.amplitude(alpha) * self.poly(s)
    }

    fn derivative_s(&self, s: f64, alpha: f64) -> f64 {
        self.amplitude(alpha) * self.poly_derivative(s)
    }

    fn singular_points(&self) -> Vec<f64> {
        (1..=self.k_count).map(|i| i as f64).collect()
    }

    fn zero_locus(&self, alpha: f64) -> Result<f64> {
        self.root().ok_or_else(|| {
            Error::InvalidArgument(format!(
                "no positive zero of f(·, {alpha}) with a sign change in (0, {}]",
                self.s_upper
            ))
        })
    }

    fn gamma(&self, alpha: f64) -> Slope {
        let c0 = self.coefficients[0];
        if c0 > 0.0 {
            Slope::PosInfinite
        } else if c0 < 0.0 {
            Slope::NegInfinite
        } else {
            let c1 = self.coefficients.get(1).copied().unwrap_or(0.0);
            Slope::from_value(c1 * self.amplitude(alpha))
        }
    }

    fn describe(&self) -> String {
        format!(
            "|sin πα|^-{} · poly{:?}, K = {}",
            self.amplitude_power, self.coefficients, self.k_count
        )
    }
}
