use crate::error::Result;
use crate::linalg::{SineTransformSolver, SymBanded};

/// Second-order centred `-Δ_h` with zero Dirichlet data: 3-point stencil
/// on intervals, 5-point on rectangles. Node `(ix, iy)` is stored at
/// `ix + nx * iy`.
#[derive(Debug)]
pub struct Laplacian {
    dims: Vec<usize>,
    inv_h2: Vec<f64>,
    fast: SineTransformSolver,
}

impl Laplacian {
    pub(crate) fn new(dims: &[usize], h: &[f64]) -> Self {
        Self {
            dims: dims.to_vec(),
            inv_h2: h.iter().map(|h| 1.0 / (h * h)).collect(),
            fast: SineTransformSolver::new(dims, h),
        }
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Stencil coupling `1/h_d²` along axis `d`.
    pub fn coupling(&self, d: usize) -> f64 {
        self.inv_h2[d]
    }

    /// Constant diagonal entry `Σ_d 2/h_d²`.
    pub fn diagonal(&self) -> f64 {
        2.0 * self.inv_h2.iter().sum::<f64>()
    }

    pub fn bandwidth(&self) -> usize {
        match self.dims.as_slice() {
            [_] => 1,
            [nx, _] => *nx,
            _ => unreachable!(),
        }
    }

    /// `(-Δ_h u)_i`, assembled from neighbour differences so that smooth
    /// fields do not lose digits to cancellation.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        match self.dims.as_slice() {
            [n] => {
                let c = self.inv_h2[0];
                for i in 0..*n {
                    let l = if i > 0 { u[i - 1] } else { 0.0 };
                    let r = if i + 1 < *n { u[i + 1] } else { 0.0 };
                    out[i] = c * ((u[i] - l) + (u[i] - r));
                }
            }
            [nx, ny] => {
                let (cx, cy) = (self.inv_h2[0], self.inv_h2[1]);
                for iy in 0..*ny {
                    for ix in 0..*nx {
                        let i = ix + nx * iy;
                        let w = if ix > 0 { u[i - 1] } else { 0.0 };
                        let e = if ix + 1 < *nx { u[i + 1] } else { 0.0 };
                        let s = if iy > 0 { u[i - nx] } else { 0.0 };
                        let nn = if iy + 1 < *ny { u[i + nx] } else { 0.0 };
                        out[i] = cx * ((u[i] - w) + (u[i] - e)) + cy * ((u[i] - s) + (u[i] - nn));
                    }
                }
            }
            _ => unreachable!(),
        }
        out
    }

    /// Row sums of `|(-Δ_h)| |u|`, the scale of rounding in [`apply`](Self::apply).
    pub fn apply_abs(&self, u: &[f64]) -> Vec<f64> {
        let abs: Vec<f64> = u.iter().map(|v| v.abs()).collect();
        let mut out = vec![0.0; u.len()];
        self.for_each_edge(|i, j, c| {
            out[i] += c * (abs[i] + abs[j]);
            out[j] += c * (abs[i] + abs[j]);
        });
        for (i, o) in out.iter_mut().enumerate() {
            *o += self.boundary_coupling(i) * abs[i];
        }
        out
    }

    /// Visits each interior edge `(i, j)`, `i < j`, with its coupling.
    pub fn for_each_edge(&self, mut f: impl FnMut(usize, usize, f64)) {
        match self.dims.as_slice() {
            [n] => {
                for i in 0..n.saturating_sub(1) {
                    f(i, i + 1, self.inv_h2[0]);
                }
            }
            [nx, ny] => {
                for iy in 0..*ny {
                    for ix in 0..*nx {
                        let i = ix + nx * iy;
                        if ix + 1 < *nx {
                            f(i, i + 1, self.inv_h2[0]);
                        }
                        if iy + 1 < *ny {
                            f(i, i + nx, self.inv_h2[1]);
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
    }

    /// Total coupling of node `i` to the boundary.
    pub fn boundary_coupling(&self, i: usize) -> f64 {
        let mut b = 0.0;
        match self.dims.as_slice() {
            [n] => {
                if i == 0 {
                    b += self.inv_h2[0];
                }
                if i + 1 == *n {
                    b += self.inv_h2[0];
                }
            }
            [nx, ny] => {
                let (ix, iy) = (i % nx, i / nx);
                let edges_x = (ix == 0) as u8 + (ix + 1 == *nx) as u8;
                let edges_y = (iy == 0) as u8 + (iy + 1 == *ny) as u8;
                b += edges_x as f64 * self.inv_h2[0] + edges_y as f64 * self.inv_h2[1];
            }
            _ => unreachable!(),
        }
        b
    }

    /// Banded matrix of `-Δ_h + diag(extra)`.
    pub fn assemble(&self, extra: &[f64]) -> SymBanded {
        let n = self.len();
        let mut m = SymBanded::zeros(n, self.bandwidth());
        let d = self.diagonal();
        for (i, e) in extra.iter().enumerate() {
            m.add(i, i, d + e);
        }
        self.for_each_edge(|i, j, c| m.add(j, i, -c));
        m
    }

    /// Solves `(-Δ_h + shift) u = rhs` for a constant `shift > -λ1`.
    pub fn solve_shifted(&self, shift: f64, rhs: &[f64]) -> Result<Vec<f64>> {
        match self.dims.as_slice() {
            [n] => {
                let m = self.assemble(&vec![shift; *n]);
                Ok(m.cholesky()?.solve(rhs))
            }
            _ => Ok(self.fast.solve_shifted(shift, rhs)),
        }
    }
}
