//! Sampled screening of the admissibility hypotheses (f0)–(f5).
//!
//! Limits and infima are checked at finitely many points, so a passing
//! check means "certified on samples", never a proof.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::GeometryConstants;
use crate::nonlinearity::NonlocalNonlinearity;
use crate::scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CheckOptions {
    /// Chebyshev points per interval.
    pub alpha_samples: usize,
    /// Uniform points on `(0, s_α)`.
    pub s_samples: usize,
    /// Offset of the α-grid from the singular points, relative to the
    /// interval length.
    pub alpha_offset: f64,
    /// Closest approach to `t_k` in the (f1) check, relative.
    pub delta_min: f64,
    pub approach_steps: usize,
    pub tol_lim: f64,
    /// Grid seeds for the inner maximisation of (f5).
    pub max_seeds: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            alpha_samples: 64,
            s_samples: 256,
            alpha_offset: 1e-3,
            delta_min: 1e-4,
            approach_steps: 8,
            tol_lim: 1e-6,
            max_seeds: 256,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    CertifiedOnSamples,
    Violated,
    NotCheckable,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::CertifiedOnSamples => "certified-on-samples",
            Status::Violated => "violated",
            Status::NotCheckable => "not-checkable",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub value: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisResult {
    pub hypothesis: String,
    pub status: Status,
    /// Worst slack of the inequality over the samples; negative or zero
    /// when violated.
    pub margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl HypothesisResult {
    fn new(name: &str, margin: f64, samples: usize, witness: Option<Witness>) -> Self {
        let margin = finite(margin);
        let status = if samples == 0 {
            Status::NotCheckable
        } else if witness.is_some() {
            Status::Violated
        } else {
            Status::CertifiedOnSamples
        };
        Self {
            hypothesis: name.to_string(),
            status,
            margin,
            witness,
            samples,
            note: None,
        }
    }

    fn with_note(mut self, note: Option<String>) -> Self {
        self.note = note;
        self
    }

    pub fn is_certified(&self) -> bool {
        self.status == Status::CertifiedOnSamples
    }
}

impl fmt::Display for HypothesisResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}) {} margin={:.6e} samples={}",
            self.hypothesis, self.status, self.margin, self.samples
        )?;
        if let Some(w) = &self.witness {
            write!(f, " witness:")?;
            if let Some(a) = w.alpha {
                write!(f, " alpha={a:.12e}")?;
            }
            if let Some(s) = w.s {
                write!(f, " s={s:.12e}")?;
            }
            write!(f, " value={:.6e} ({})", w.value, w.detail)?;
        }
        if let Some(n) = &self.note {
            write!(f, " note: {n}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub all_certified: bool,
    pub hypotheses: Vec<HypothesisResult>,
}

impl HypothesisReport {
    pub fn get(&self, name: &str) -> Option<&HypothesisResult> {
        self.hypotheses.iter().find(|h| h.hypothesis == name)
    }

    /// Names of violated hypotheses, in index order.
    pub fn violated(&self) -> Vec<&str> {
        self.hypotheses
            .iter()
            .filter(|h| h.status == Status::Violated)
            .map(|h| h.hypothesis.as_str())
            .collect()
    }
}

fn finite(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(-f64::MAX, f64::MAX)
    }
}

/// Checker bound to one nonlinearity and geometry.
pub struct Checker<'a> {
    pub f: &'a NonlocalNonlinearity,
    pub geom: &'a GeometryConstants,
    pub opts: CheckOptions,
}

/// Zero locus sampled at one α.
#[derive(Debug, Clone, Copy)]
struct AlphaSample {
    alpha: f64,
    s_alpha: Option<f64>,
}

impl<'a> Checker<'a> {
    pub fn new(f: &'a NonlocalNonlinearity, geom: &'a GeometryConstants, opts: CheckOptions) -> Self {
        Self { f, geom, opts }
    }

    /// The α-grid of interval `k`.
    pub fn alpha_grid(&self, k: usize) -> Vec<f64> {
        let (lo, hi) = self.f.interval(k);
        let d = self.opts.alpha_offset * (hi - lo);
        scalar::chebyshev_points(lo + d, hi - d, self.opts.alpha_samples)
    }

    fn samples(&self, k: usize) -> Vec<AlphaSample> {
        self.alpha_grid(k)
            .into_iter()
            .map(|alpha| AlphaSample {
                alpha,
                s_alpha: self
                    .f
                    .zero_locus(alpha)
                    .ok()
                    .filter(|s| *s > 0.0 && s.is_finite()),
            })
            .collect()
    }

    fn all_samples(&self) -> Vec<Vec<AlphaSample>> {
        (1..=self.f.k_count()).map(|k| self.samples(k)).collect()
    }

    fn s_grid(&self, s_alpha: f64) -> impl Iterator<Item = f64> {
        let m = self.opts.s_samples;
        (1..=m).map(move |i| s_alpha * i as f64 / (m + 1) as f64)
    }

    pub fn run(&self) -> HypothesisReport {
        let samples = self.all_samples();
        let hypotheses = vec![
            self.check_f0_on(&samples),
            self.check_f1(),
            self.check_f2_on(&samples),
            self.check_f3_on(&samples),
            self.check_f4_on(&samples),
            self.check_f5_on(&samples),
        ];
        HypothesisReport {
            all_certified: hypotheses.iter().all(|h| h.is_certified()),
            hypotheses,
        }
    }

    pub fn check_f0(&self) -> HypothesisResult {
        self.check_f0_on(&self.all_samples())
    }

    pub fn check_f2(&self) -> HypothesisResult {
        self.check_f2_on(&self.all_samples())
    }

    pub fn check_f3(&self) -> HypothesisResult {
        self.check_f3_on(&self.all_samples())
    }

    pub fn check_f4(&self) -> HypothesisResult {
        self.check_f4_on(&self.all_samples())
    }

    pub fn check_f5(&self) -> HypothesisResult {
        self.check_f5_on(&self.all_samples())
    }

    /// Positivity on `(0, s_α)`, `f(s_α, α) = 0`, finite `sup s_α` per interval.
    fn check_f0_on(&self, samples: &[Vec<AlphaSample>]) -> HypothesisResult {
        let flat: Vec<AlphaSample> = samples.iter().flatten().copied().collect();
        let per_alpha: Vec<(f64, usize, Option<Witness>)> = flat
            .par_iter()
            .map(|a| {
                let Some(sa) = a.s_alpha else {
                    return (
                        0.0,
                        1,
                        Some(Witness {
                            s: None,
                            alpha: Some(a.alpha),
                            value: f64::NAN,
                            detail: "no positive zero locus s_α".into(),
                        }),
                    );
                };
                let mut margin = f64::INFINITY;
                let mut scale: f64 = 1.0;
                let mut count = 0;
                for s in self.s_grid(sa) {
                    let v = self.f.value(s, a.alpha);
                    count += 1;
                    scale = scale.max(v.abs());
                    if !(v > 0.0) {
                        return (
                            v,
                            count,
                            Some(Witness {
                                s: Some(s),
                                alpha: Some(a.alpha),
                                value: v,
                                detail: "f(s, α) <= 0 inside (0, s_α)".into(),
                            }),
                        );
                    }
                    margin = margin.min(v);
                }
                let at_zero = self.f.value(sa, a.alpha);
                if !(at_zero.abs() <= 1e-10 * scale) {
                    return (
                        -at_zero.abs(),
                        count + 1,
                        Some(Witness {
                            s: Some(sa),
                            alpha: Some(a.alpha),
                            value: at_zero,
                            detail: "f(s_α, α) != 0".into(),
                        }),
                    );
                }
                (margin, count + 1, None)
            })
            .collect();
        let mut margin = f64::INFINITY;
        let mut count = 0;
        let mut witness = None;
        for (m, c, w) in per_alpha {
            margin = margin.min(m);
            count += c;
            if witness.is_none() {
                witness = w;
            }
        }
        if witness.is_none() {
            for (k, group) in samples.iter().enumerate() {
                let sup = group.iter().filter_map(|a| a.s_alpha).fold(0.0, f64::max);
                if !sup.is_finite() {
                    witness = Some(Witness {
                        s: None,
                        alpha: None,
                        value: sup,
                        detail: format!("sup s_α unbounded on interval {}", k + 1),
                    });
                }
            }
        }
        HypothesisResult::new("f0", margin, count, witness)
    }

    /// Approach points `t ± δ_j`, `δ_j` geometric down to `δ_min`.
    fn approaches(&self) -> Vec<(f64, Vec<f64>)> {
        let bp = self.f.breakpoints();
        let k_count = self.f.k_count();
        let steps = self.opts.approach_steps.max(2);
        let mut out = Vec::new();
        let ladder = |len: f64| -> Vec<f64> {
            let (hi, lo) = (1e-2 * len, self.opts.delta_min * len);
            (0..steps)
                .map(|j| hi * (lo / hi).powf(j as f64 / (steps - 1) as f64))
                .collect()
        };
        for k in 0..=k_count {
            let t = bp[k];
            if k > 0 {
                let len = bp[k] - bp[k - 1];
                out.push((t, ladder(len).iter().map(|d| t - d).collect()));
            }
            if k < k_count {
                let len = bp[k + 1] - bp[k];
                out.push((t, ladder(len).iter().map(|d| t + d).collect()));
            }
        }
        out
    }

    /// `lim_{α→t_k} f(s, α) >= λ1` on a fixed set of small `s`.
    pub fn check_f1(&self) -> HypothesisResult {
        let lam = self.geom.lambda1;
        let tol = self.opts.tol_lim;
        let results: Vec<_> = self
            .approaches()
            .into_par_iter()
            .map(|(t, path)| {
                let s_ref = path
                    .iter()
                    .filter_map(|&a| self.f.zero_locus(a).ok())
                    .fold(f64::INFINITY, f64::min);
                if !(s_ref.is_finite() && s_ref > 0.0) {
                    return (t, t, Vec::new(), 0usize);
                }
                let rows: Vec<(f64, f64, bool)> = (1..=8)
                    .map(|j| {
                        let s = s_ref * j as f64 / 9.0;
                        let vals: Vec<f64> = path.iter().map(|&a| self.f.value(s, a)).collect();
                        let last = *vals.last().unwrap();
                        let trend = vals.windows(2).all(|w| w[1] >= w[0] || w[1] >= lam);
                        (s, last, trend)
                    })
                    .collect();
                (t, *path.last().unwrap(), rows, 8 * path.len())
            })
            .collect();
        let mut margin = f64::INFINITY;
        let mut count = 0;
        let mut witness = None;
        let mut notes = Vec::new();
        for (t, closest, rows, n) in results {
            count += n;
            if rows.is_empty() {
                witness.get_or_insert(Witness {
                    s: None,
                    alpha: Some(t),
                    value: f64::NAN,
                    detail: format!("no zero locus near t = {t}"),
                });
                continue;
            }
            for (s, last, trend) in rows {
                let m = last / lam - 1.0;
                margin = margin.min(if m.is_nan() { f64::NEG_INFINITY } else { m });
                if !(last >= lam * (1.0 - tol)) && witness.is_none() {
                    witness = Some(Witness {
                        s: Some(s),
                        alpha: Some(closest),
                        value: last,
                        detail: format!("f(s, α) below λ1 = {lam} approaching t = {t}"),
                    });
                }
                if !trend && !notes.iter().any(|n: &String| n.contains(&format!("t = {t}"))) {
                    notes.push(format!("non-monotone approach to t = {t}"));
                }
            }
        }
        if witness.is_none() && margin < 1e-3 {
            notes.push("limit within 1e-3 of λ1".into());
        }
        let note = (!notes.is_empty()).then(|| notes.join("; "));
        HypothesisResult::new("f1", margin, count, witness).with_note(note)
    }

    /// Strict decrease of `ψ_α` along the `s`-grid.
    fn check_f2_on(&self, samples: &[Vec<AlphaSample>]) -> HypothesisResult {
        let flat: Vec<(f64, f64)> = samples
            .iter()
            .flatten()
            .filter_map(|a| a.s_alpha.map(|s| (a.alpha, s)))
            .collect();
        let per: Vec<(f64, usize, Option<Witness>)> = flat
            .par_iter()
            .map(|&(alpha, sa)| {
                let mut prev: Option<(f64, f64)> = None;
                let mut worst = f64::INFINITY;
                let mut count = 0;
                for s in self.s_grid(sa) {
                    let psi = self.f.psi_raw(s, alpha);
                    count += 1;
                    if let Some((ps, pv)) = prev {
                        let drop = pv - psi;
                        worst = worst.min(drop);
                        if !(drop > 0.0) {
                            return (
                                drop,
                                count,
                                Some(Witness {
                                    s: Some(ps),
                                    alpha: Some(alpha),
                                    value: drop,
                                    detail: format!("ψ_α({ps}) <= ψ_α({s})"),
                                }),
                            );
                        }
                    }
                    prev = Some((s, psi));
                }
                (worst, count, None)
            })
            .collect();
        fold_results("f2", per)
    }

    /// `inf γ_α > λ1` with a positive margin.
    fn check_f3_on(&self, samples: &[Vec<AlphaSample>]) -> HypothesisResult {
        let lam = self.geom.lambda1;
        let per: Vec<(f64, usize, Option<Witness>)> = samples
            .iter()
            .flatten()
            .map(|a| {
                let g = self.f.gamma(a.alpha).as_f64();
                let gamma = if g == f64::INFINITY {
                    // ψ is decreasing, so any sampled value bounds γ below
                    a.s_alpha
                        .map(|sa| self.f.psi_raw(sa / (self.opts.s_samples + 1) as f64, a.alpha))
                        .unwrap_or(f64::MAX)
                } else {
                    g
                };
                let m = gamma - lam;
                let w = (!(m > 0.0)).then(|| Witness {
                    s: None,
                    alpha: Some(a.alpha),
                    value: g,
                    detail: format!("γ_α <= λ1 = {lam}"),
                });
                (m, 1, w)
            })
            .collect();
        fold_results("f3", per)
    }

    /// `t_K < (inf s_α)^p ∫e1^p`.
    fn check_f4_on(&self, samples: &[Vec<AlphaSample>]) -> HypothesisResult {
        let mut inf = (f64::INFINITY, f64::NAN);
        let mut count = 0;
        for a in samples.iter().flatten() {
            if let Some(s) = a.s_alpha {
                count += 1;
                if s < inf.0 {
                    inf = (s, a.alpha);
                }
            }
        }
        let lhs = inf.0.powf(self.geom.p) * self.geom.int_e1_p;
        let t_k = self.f.t_max();
        let margin = lhs - t_k;
        let witness = (!(margin > 0.0) && count > 0).then(|| Witness {
            s: Some(inf.0),
            alpha: Some(inf.1),
            value: lhs,
            detail: format!("(inf s_α)^p ∫e1^p <= t_K = {t_k}"),
        });
        HypothesisResult::new("f4", margin, count, witness)
    }

    /// `max_s f(s, α) s_α^{p-1}/α` at one α.
    pub fn f5_factor(&self, alpha: f64, s_alpha: f64) -> f64 {
        let (_, m) = scalar::maximize(
            |s| self.f.value(s, alpha),
            0.0,
            s_alpha,
            self.opts.max_seeds,
        );
        m * s_alpha.powf(self.geom.p - 1.0) / alpha
    }

    /// `inf_α max_s f(s, α) s_α^{p-1}/α < λ1^{1/2}/(C1 |Ω|^{1/2})` per interval.
    fn check_f5_on(&self, samples: &[Vec<AlphaSample>]) -> HypothesisResult {
        let threshold = self.geom.f5_threshold();
        let mut margin = f64::INFINITY;
        let mut count = 0;
        let mut witness = None;
        for (k, group) in samples.iter().enumerate() {
            let vals: Vec<(f64, f64)> = group
                .par_iter()
                .filter_map(|a| a.s_alpha.map(|sa| (a.alpha, self.f5_factor(a.alpha, sa))))
                .collect();
            count += vals.len();
            let best = vals
                .iter()
                .copied()
                .fold((f64::NAN, f64::INFINITY), |b, v| if v.1 < b.1 { v } else { b });
            let m = threshold - best.1;
            margin = margin.min(m);
            if !(m > 0.0) && witness.is_none() && !vals.is_empty() {
                witness = Some(Witness {
                    s: None,
                    alpha: Some(best.0),
                    value: best.1,
                    detail: format!(
                        "interval {}: inf max f s_α^(p-1)/α >= {threshold}",
                        k + 1
                    ),
                });
            }
        }
        HypothesisResult::new("f5", margin, count, witness)
    }
}

fn fold_results(name: &str, per: Vec<(f64, usize, Option<Witness>)>) -> HypothesisResult {
    let mut margin = f64::INFINITY;
    let mut count = 0;
    let mut witness = None;
    for (m, c, w) in per {
        margin = margin.min(m);
        count += c;
        if witness.is_none() {
            witness = w;
        }
    }
    HypothesisResult::new(name, margin, count, witness)
}

/// Runs all six checks.
pub fn check_all(
    f: &NonlocalNonlinearity,
    geom: &GeometryConstants,
    opts: CheckOptions,
) -> HypothesisReport {
    Checker::new(f, geom, opts).run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::{make_family_b, make_family_c, PolynomialReaction, Scaled};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn unit() -> GeometryConstants {
        GeometryConstants {
            lambda1: PI * PI,
            c1: 1.0 / 12f64.sqrt(),
            measure: 1.0,
            int_e1_p: 2.0 / PI,
            int_e1_sq: 0.5,
            p: 1.0,
        }
    }

    fn poly(c: Vec<f64>, m: f64) -> NonlocalNonlinearity {
        NonlocalNonlinearity::new(Arc::new(PolynomialReaction::new(c, m, 1, 20.0).unwrap())).unwrap()
    }

    #[test]
    fn constructed_families_pass() {
        let g = unit();
        for k in [1, 2] {
            let b = make_family_b(k, None, &g).unwrap();
            let r = check_all(&b.f, &g, CheckOptions::default());
            assert!(r.all_certified, "{r:#?}");
            let c = make_family_c(k, None, &g, None).unwrap();
            let r = check_all(&c.f, &g, CheckOptions::default());
            assert!(r.all_certified, "{r:#?}");
        }
    }

    #[test]
    fn f3_margin_at_least_one_for_family_b() {
        let g = unit();
        let b = make_family_b(1, None, &g).unwrap();
        let r = Checker::new(&b.f, &g, CheckOptions::default()).check_f3();
        assert!(r.margin >= 1.0 - 1e-9);
    }

    #[test]
    fn f4_family_b_arithmetic() {
        let g = unit();
        let b = make_family_b(1, Some(PI / 2.0), &g).unwrap();
        let r = Checker::new(&b.f, &g, CheckOptions::default()).check_f4();
        let a = PI / 2.0 + 1.0;
        // inf s_α sits at the smallest sampled α, just above A
        assert!((r.margin + 1.0 - a * 2.0 / PI).abs() < 1e-3);
        assert!((a * 2.0 / PI - 1.636).abs() < 1e-3);
        let g2 = GeometryConstants {
            p: 2.0,
            int_e1_p: 0.5,
            ..g
        };
        let r2 = Checker::new(&b.f, &g2, CheckOptions::default()).check_f4();
        assert!((r2.margin + 1.0 - 0.5 * a * a).abs() < 1e-2);
        // s_α ≡ 3.547…, so three intervals push t_K past the bound
        let three = NonlocalNonlinearity::new(Arc::new(
            PolynomialReaction::new(vec![0.0, 20.0, 5.0, -3.0], 1.0, 3, 20.0).unwrap(),
        ))
        .unwrap();
        let r3 = Checker::new(&three, &g, CheckOptions::default()).check_f4();
        assert_eq!(r3.status, Status::Violated);
        let root = (5.0 + 265f64.sqrt()) / 6.0;
        assert!((r3.margin - (root * 2.0 / PI - 3.0)).abs() < 1e-9);
    }

    #[test]
    fn f0_negative_near_zero() {
        let r = Checker::new(&poly(vec![-1.0, 4.0, -1.0], 0.0), &unit(), CheckOptions::default())
            .check_f0();
        assert_eq!(r.status, Status::Violated);
        let w = r.witness.unwrap();
        assert!(w.s.unwrap() < 0.5);
    }

    #[test]
    fn f1_below_threshold() {
        let lam = PI * PI;
        // f = (λ1/2)·s(1 - s/s0)·(s0·4/s0²)… scaled so that f stays near λ1/2
        let f = poly(vec![0.0, 2.0 * lam, -lam], 0.0);
        let r = Checker::new(&f, &unit(), CheckOptions::default()).check_f1();
        assert_eq!(r.status, Status::Violated);
        assert!(r.margin < 0.0);
        assert!(r.witness.unwrap().value < lam);
    }

    #[test]
    fn f2_increasing_psi() {
        let f = poly(vec![0.0, 0.0, 1.0, -0.1], 1.0);
        let r = Checker::new(&f, &unit(), CheckOptions::default()).check_f2();
        assert_eq!(r.status, Status::Violated);
    }

    #[test]
    fn f3_equality_is_violated() {
        let lam = PI * PI;
        let f = poly(vec![0.0, lam, -lam / 3.0], 0.0);
        let r = Checker::new(&f, &unit(), CheckOptions::default()).check_f3();
        assert_eq!(r.status, Status::Violated);
        assert_eq!(r.margin, 0.0);
    }

    #[test]
    fn f5_threshold_and_scaling() {
        let g = unit();
        assert!((g.f5_threshold() - 10.8828).abs() < 1e-4);
        let b = make_family_b(1, None, &g).unwrap();
        let r = Checker::new(&b.f, &g, CheckOptions::default()).check_f5();
        assert!(r.is_certified());
        let midpoint = Checker::new(&b.f, &g, CheckOptions::default())
            .f5_factor(0.5, b.f.zero_locus(0.5).unwrap());
        assert!(midpoint <= 2.0 * b.constants.max_sl * (1.0 + 1e-9));
        let scaled = NonlocalNonlinearity::new(Arc::new(Scaled {
            inner: b.f.term().clone(),
            factor: 1e3,
        }))
        .unwrap();
        let r = Checker::new(&scaled, &g, CheckOptions::default()).check_f5();
        assert_eq!(r.status, Status::Violated);
    }

    #[test]
    fn f5_inner_max_matches_brute_force() {
        let g = unit();
        for b in [make_family_b(2, None, &g).unwrap(), make_family_c(1, None, &g, None).unwrap()] {
            let ch = Checker::new(&b.f, &g, CheckOptions::default());
            for alpha in [0.1, 0.5, 0.77, 1.4] {
                let Ok(sa) = b.f.zero_locus(alpha) else { continue };
                if b.f.locate(alpha).is_err() {
                    continue;
                }
                let brute = (0..=10_000)
                    .map(|i| b.f.value(sa * i as f64 / 1e4, alpha))
                    .fold(0.0, f64::max)
                    / alpha;
                let got = ch.f5_factor(alpha, sa);
                assert!(got >= brute * (1.0 - 1e-12));
                assert!((got - brute).abs() <= 1e-6 * brute, "{got} vs {brute}");
            }
        }
    }

    #[test]
    fn violations_survive_refinement() {
        let g = unit();
        let f = poly(vec![0.0, 20.0, 5.0, -3.0], 1.0);
        let coarse = check_all(&f, &g, CheckOptions::default());
        let fine = check_all(
            &f,
            &g,
            CheckOptions {
                alpha_samples: 127,
                s_samples: 512,
                ..CheckOptions::default()
            },
        );
        for name in coarse.violated() {
            assert!(fine.violated().contains(&name), "{name} lost on refinement");
        }
        let w = coarse.get("f2").unwrap().witness.clone().unwrap();
        let (a, s) = (w.alpha.unwrap(), w.s.unwrap());
        assert!(f.psi_raw(s, a) <= f.psi_raw(s * 1.01, a));
    }

    #[test]
    fn report_json_shape() {
        let g = unit();
        let b = make_family_b(1, None, &g).unwrap();
        let r = check_all(&b.f, &g, CheckOptions::default());
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        let first = &v["hypotheses"][0];
        assert_eq!(first["hypothesis"], "f0");
        assert_eq!(first["status"], "certified-on-samples");
        assert!(first["margin"].is_number());
        assert!(first["samples"].as_u64().unwrap() > 0);
        assert!(first.get("witness").is_none());
    }
}
