//! TOML run configuration.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{build_grid, DomainSpec, EigenData, GeometryConstants, Grid};
use crate::hypotheses::CheckOptions;
use crate::nonlinearity::{
    make_family_a, make_family_b, make_family_c, FamilyConstants, NonlocalNonlinearity,
    PolynomialReaction, Profile, Scaled, SlopeLaw,
};
use crate::solver::SolveOptions;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default = "one")]
    pub p: f64,
    pub domain: DomainSpec,
    pub family: FamilySection,
    #[serde(default)]
    pub solver: SolveOptions,
    #[serde(default)]
    pub scan: ScanOptions,
    #[serde(default)]
    pub check: CheckOptions,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanOptions {
    /// α samples per interval.
    pub samples: usize,
    /// Endpoint offset relative to the interval length.
    pub delta: f64,
    /// Bisection width relative to the interval length.
    pub tol_fp: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            samples: 64,
            delta: 1e-3,
            tol_fp: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoefficientUnits {
    #[default]
    Absolute,
    /// Coefficients are multiples of the discrete `λ1`.
    Lambda1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FamilyConfig {
    /// `s·L((S(t) - s)/|sin πt|)` with user `S` and `L`.
    A {
        k: usize,
        u: f64,
        profile: Vec<f64>,
        law: SlopeLaw,
    },
    B {
        k: usize,
        #[serde(default)]
        u: Option<f64>,
    },
    C {
        k: usize,
        #[serde(default)]
        u: Option<f64>,
        #[serde(default)]
        profile: Option<Vec<f64>>,
    },
    /// `|sin πα|^{-m} Σ c_j s^j`.
    Custom {
        k: usize,
        coefficients: Vec<f64>,
        #[serde(default)]
        amplitude_power: f64,
        s_upper: f64,
        #[serde(default)]
        coefficient_units: CoefficientUnits,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySection {
    #[serde(flatten)]
    pub family: FamilyConfig,
    /// Constant factor applied to `f`.
    #[serde(default = "one")]
    pub scale: f64,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(Error::Config(format!("p = {} must be a finite number >= 1", self.p)));
        }
        self.domain.validate()?;
        self.solver.validate()?;
        let s = &self.scan;
        if s.samples < 8 || !(s.delta > 0.0 && s.delta < 0.5) || !(s.tol_fp > 0.0 && s.tol_fp < 1.0) {
            return Err(Error::Config(format!("invalid scan options {s:?}")));
        }
        if !(self.family.scale > 0.0 && self.family.scale.is_finite()) {
            return Err(Error::Config(format!("scale {} must be positive", self.family.scale)));
        }
        let k = match &self.family.family {
            FamilyConfig::A { k, .. }
            | FamilyConfig::B { k, .. }
            | FamilyConfig::C { k, .. }
            | FamilyConfig::Custom { k, .. } => *k,
        };
        if k == 0 {
            return Err(Error::Config("family K must be at least 1".into()));
        }
        let numbers: Vec<f64> = match &self.family.family {
            FamilyConfig::A { u, profile, .. } => {
                profile.iter().copied().chain(std::iter::once(*u)).collect()
            }
            FamilyConfig::B { u, .. } => u.iter().copied().collect(),
            FamilyConfig::C { u, profile, .. } => {
                u.iter().chain(profile.iter().flatten()).copied().collect()
            }
            FamilyConfig::Custom {
                coefficients,
                amplitude_power,
                s_upper,
                ..
            } => coefficients
                .iter()
                .copied()
                .chain([*amplitude_power, *s_upper])
                .collect(),
        };
        if numbers.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("family parameters must be finite".into()));
        }
        Ok(())
    }
}

/// Geometry shared by every command.
pub struct Setup {
    pub grid: Grid,
    pub eig: EigenData,
    pub geom: GeometryConstants,
}

impl Setup {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        let grid = build_grid(cfg.domain)?;
        let eig = EigenData::compute(&grid, cfg.p)?;
        let geom = eig.constants(&grid);
        Ok(Self { grid, eig, geom })
    }
}

/// The configured nonlinearity, with family constants for the slope-law
/// families.
pub fn build_nonlinearity(
    section: &FamilySection,
    geom: &GeometryConstants,
) -> Result<(NonlocalNonlinearity, Option<FamilyConstants>)> {
    let (f, constants) = match &section.family {
        FamilyConfig::A { k, u, profile, law } => {
            let fam = make_family_a(
                Profile {
                    coefficients: profile.clone(),
                },
                *law,
                *k,
                *u,
                geom,
            )?;
            (fam.f, Some(fam.constants))
        }
        FamilyConfig::B { k, u } => {
            let fam = make_family_b(*k, *u, geom)?;
            (fam.f, Some(fam.constants))
        }
        FamilyConfig::C { k, u, profile } => {
            let profile = profile.clone().map(|coefficients| Profile { coefficients });
            let fam = make_family_c(*k, *u, geom, profile)?;
            (fam.f, Some(fam.constants))
        }
        FamilyConfig::Custom {
            k,
            coefficients,
            amplitude_power,
            s_upper,
            coefficient_units,
        } => {
            let unit = match coefficient_units {
                CoefficientUnits::Absolute => 1.0,
                CoefficientUnits::Lambda1 => geom.lambda1,
            };
            let c = coefficients.iter().map(|v| v * unit).collect();
            let term = PolynomialReaction::new(c, *amplitude_power, *k, *s_upper)?;
            (NonlocalNonlinearity::new(Arc::new(term))?, None)
        }
    };
    if section.scale == 1.0 {
        return Ok((f, constants));
    }
    let scaled = NonlocalNonlinearity::new(Arc::new(Scaled {
        inner: f.term().clone(),
        factor: section.scale,
    }))?;
    Ok((scaled, constants))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
schema_version = 1
[domain]
kind = "interval"
a = 0.0
b = 1.0
resolution = 64
[family]
kind = "b"
k = 2
"#;

    #[test]
    fn minimal_config_defaults() {
        let cfg = RunConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg.p, 1.0);
        assert_eq!(cfg.domain, DomainSpec::interval(0.0, 1.0, 64));
        assert_eq!(cfg.family.family, FamilyConfig::B { k: 2, u: None });
        assert_eq!(cfg.family.scale, 1.0);
        assert_eq!(cfg.scan, ScanOptions::default());
        assert_eq!(cfg.solver, SolveOptions::default());
    }

    #[test]
    fn rejects_bad_configs() {
        let wrong_schema = MINIMAL.replace("schema_version = 1", "schema_version = 7");
        assert!(RunConfig::from_toml(&wrong_schema).is_err());
        let low_p = format!("p = 0.5\n{MINIMAL}");
        assert!(RunConfig::from_toml(&low_p).is_err());
        let coarse = MINIMAL.replace("resolution = 64", "resolution = 4");
        assert!(RunConfig::from_toml(&coarse).is_err());
        assert!(RunConfig::from_toml("schema_version = 1\n[domain").is_err());
        let unknown = format!("bogus = 3\n{MINIMAL}");
        assert!(RunConfig::from_toml(&unknown).is_err());
    }

    #[test]
    fn custom_family_in_lambda1_units() {
        let text = r#"
schema_version = 1
[domain]
kind = "interval"
a = 0.0
b = 1.0
resolution = 64
[family]
kind = "custom"
k = 1
coefficients = [0.0, 1.0, -0.25]
s_upper = 10.0
coefficient_units = "lambda1"
"#;
        let cfg = RunConfig::from_toml(text).unwrap();
        let setup = Setup::new(&cfg).unwrap();
        let (f, constants) = build_nonlinearity(&cfg.family, &setup.geom).unwrap();
        assert!(constants.is_none());
        assert_eq!(f.gamma(0.5).as_f64(), setup.geom.lambda1);
        assert!((f.zero_locus(0.5).unwrap() - 4.0).abs() < 1e-12);
    }
}
