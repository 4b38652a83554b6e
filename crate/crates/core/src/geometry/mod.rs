//! Uniform finite-difference discretisation of intervals and rectangles.
//!
//! Unknowns live on interior nodes only; the zero Dirichlet data is built
//! into the stencil. The second-order operator `-Δ_h` is symmetric positive
//! definite, quadrature uses dual-cell nodal weights (interior weight `h`
//! per axis, boundary-adjacent nodes also own the half cell next to `∂Ω`),
//! so constants integrate exactly and fields vanishing on `∂Ω` integrate to
//! second order.

mod eigen;
mod laplacian;

pub use eigen::{principal_eigenpair, sobolev_c1, EigenData, Eigenpair, GeometryConstants};
pub use laplacian::Laplacian;

use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest accepted number of interior points per axis.
pub const MIN_RESOLUTION: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DomainKind {
    Interval { a: f64, b: f64 },
    Rectangle { ax: f64, bx: f64, ay: f64, by: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    #[serde(flatten)]
    pub kind: DomainKind,
    /// Interior points per axis.
    pub resolution: usize,
}

impl DomainSpec {
    pub fn interval(a: f64, b: f64, resolution: usize) -> Self {
        Self {
            kind: DomainKind::Interval { a, b },
            resolution,
        }
    }

    pub fn rectangle(ax: f64, bx: f64, ay: f64, by: f64, resolution: usize) -> Self {
        Self {
            kind: DomainKind::Rectangle { ax, bx, ay, by },
            resolution,
        }
    }

    pub fn with_resolution(mut self, resolution: usize) -> Self {
        self.resolution = resolution;
        self
    }

    fn extents(&self) -> Vec<(f64, f64)> {
        match self.kind {
            DomainKind::Interval { a, b } => vec![(a, b)],
            DomainKind::Rectangle { ax, bx, ay, by } => vec![(ax, bx), (ay, by)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution < MIN_RESOLUTION {
            return Err(Error::InvalidDomain(format!(
                "resolution {} below minimum {MIN_RESOLUTION}",
                self.resolution
            )));
        }
        for (lo, hi) in self.extents() {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::InvalidDomain(format!(
                    "degenerate extent [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }
}

/// Mesh width and interior node coordinates of `n` points splitting `[a, b]`
/// into `n + 1` equal cells.
pub fn axis_partition(a: f64, b: f64, n: usize) -> (f64, Vec<f64>) {
    let h = (b - a) / (n + 1) as f64;
    let nodes = (1..=n).map(|i| a + i as f64 * h).collect();
    (h, nodes)
}

/// Nodal values of a grid function on the interior nodes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Field(Vec<f64>);

impl Field {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self(vec![c; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self(self.0.iter().map(|v| c * v).collect())
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

impl Deref for Field {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Field {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for Field {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

#[derive(Debug)]
pub struct Grid {
    spec: DomainSpec,
    dims: Vec<usize>,
    h: Vec<f64>,
    axes: Vec<Vec<f64>>,
    measure: f64,
    quad_weights: Vec<f64>,
    laplacian: Laplacian,
}

/// Builds the uniform grid, stencil and quadrature for `spec`.
pub fn build_grid(spec: DomainSpec) -> Result<Grid> {
    spec.validate()?;
    let n = spec.resolution;
    let extents = spec.extents();
    let mut dims = Vec::new();
    let mut h = Vec::new();
    let mut axes = Vec::new();
    let mut axis_weights = Vec::new();
    let mut measure = 1.0;
    for &(lo, hi) in &extents {
        let (hk, nodes) = axis_partition(lo, hi, n);
        let mut w = vec![hk; n];
        w[0] += 0.5 * hk;
        w[n - 1] += 0.5 * hk;
        dims.push(n);
        h.push(hk);
        axes.push(nodes);
        axis_weights.push(w);
        measure *= hi - lo;
    }
    let quad_weights = match axis_weights.as_slice() {
        [wx] => wx.clone(),
        [wx, wy] => wy
            .iter()
            .flat_map(|&b| wx.iter().map(move |&a| a * b))
            .collect(),
        _ => unreachable!(),
    };
    let laplacian = Laplacian::new(&dims, &h);
    Ok(Grid {
        spec,
        dims,
        h,
        axes,
        measure,
        quad_weights,
        laplacian,
    })
}

impl Grid {
    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    /// Spatial dimension (1 or 2).
    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn resolution(&self) -> usize {
        self.spec.resolution
    }

    /// Mesh widths per axis.
    pub fn h(&self) -> &[f64] {
        &self.h
    }

    /// Volume of one stencil cell, `Π h_i`.
    pub fn cell_volume(&self) -> f64 {
        self.h.iter().product()
    }

    /// Lebesgue measure `|Ω|`.
    pub fn measure(&self) -> f64 {
        self.measure
    }

    pub fn quad_weights(&self) -> &[f64] {
        &self.quad_weights
    }

    pub fn laplacian(&self) -> &Laplacian {
        &self.laplacian
    }

    pub fn axis(&self, d: usize) -> &[f64] {
        &self.axes[d]
    }

    /// Coordinates of node `i` (x, and y for rectangles).
    pub fn node(&self, i: usize) -> Vec<f64> {
        match self.dims.as_slice() {
            [_] => vec![self.axes[0][i]],
            [nx, _] => vec![self.axes[0][i % nx], self.axes[1][i / nx]],
            _ => unreachable!(),
        }
    }

    /// Samples a function of the coordinates at the interior nodes.
    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> Field {
        Field::new((0..self.len()).map(|i| f(&self.node(i))).collect())
    }

    /// Quadrature `∫_Ω g dx` of nodal values.
    pub fn integrate(&self, g: &[f64]) -> f64 {
        self.quad_weights.iter().zip(g).map(|(w, v)| w * v).sum()
    }
}

/// `∫_Ω |u|^p dx` by nodal quadrature; `p >= 1`.
pub fn integrate_power(grid: &Grid, u: &[f64], p: f64) -> f64 {
    debug_assert!(p >= 1.0);
    grid.quad_weights
        .iter()
        .zip(u)
        .map(|(w, v)| {
            let a = v.abs();
            w * if p == 1.0 { a } else { a.powf(p) }
        })
        .sum()
}

/// Discrete Dirichlet energy `∫|∇u|²`, i.e. `h^N uᵀ(-Δ_h)u`.
pub fn h1_norm_sq(grid: &Grid, u: &[f64]) -> f64 {
    let au = grid.laplacian.apply(u);
    grid.cell_volume() * crate::linalg::dot(u, &au)
}
