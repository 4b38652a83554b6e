use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

/// Direct solver for `(-Δ_h + c) u = f` on a uniform rectangle grid with
/// zero Dirichlet data, diagonalised by the type-I discrete sine transform.
pub struct SineTransformSolver {
    dims: Vec<usize>,
    /// Eigenvalues of the 1D second-difference operator, per axis.
    axis_eigs: Vec<Vec<f64>>,
    ffts: Vec<Arc<dyn Fft<f64>>>,
}

impl std::fmt::Debug for SineTransformSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SineTransformSolver")
            .field("dims", &self.dims)
            .finish()
    }
}

impl SineTransformSolver {
    pub fn new(dims: &[usize], h: &[f64]) -> Self {
        let mut planner = FftPlanner::new();
        let axis_eigs = dims
            .iter()
            .zip(h)
            .map(|(&n, &h)| {
                (1..=n)
                    .map(|k| {
                        let s = (std::f64::consts::PI * k as f64 / (2.0 * (n + 1) as f64)).sin();
                        4.0 * s * s / (h * h)
                    })
                    .collect()
            })
            .collect();
        let ffts = dims
            .iter()
            .map(|&n| planner.plan_fft_forward(2 * (n + 1)))
            .collect();
        Self {
            dims: dims.to_vec(),
            axis_eigs,
            ffts,
        }
    }

    /// Unnormalised DST-I of `x` in place: `X_k = Σ_j x_j sin(π j k / (n+1))`.
    fn dst1(fft: &dyn Fft<f64>, x: &mut [f64], buf: &mut Vec<Complex<f64>>) {
        let n = x.len();
        let m = 2 * (n + 1);
        buf.clear();
        buf.resize(m, Complex::new(0.0, 0.0));
        for (j, &v) in x.iter().enumerate() {
            buf[j + 1] = Complex::new(v, 0.0);
            buf[m - j - 1] = Complex::new(-v, 0.0);
        }
        fft.process(buf);
        for (k, v) in x.iter_mut().enumerate() {
            *v = -0.5 * buf[k + 1].im;
        }
    }

    fn transform(&self, data: &mut [f64]) {
        let mut buf = Vec::new();
        match self.dims.as_slice() {
            [_] => Self::dst1(self.ffts[0].as_ref(), data, &mut buf),
            [nx, ny] => {
                for row in data.chunks_mut(*nx) {
                    Self::dst1(self.ffts[0].as_ref(), row, &mut buf);
                }
                let mut col = vec![0.0; *ny];
                for ix in 0..*nx {
                    for iy in 0..*ny {
                        col[iy] = data[ix + nx * iy];
                    }
                    Self::dst1(self.ffts[1].as_ref(), &mut col, &mut buf);
                    for iy in 0..*ny {
                        data[ix + nx * iy] = col[iy];
                    }
                }
            }
            _ => unreachable!("grids are one- or two-dimensional"),
        }
    }

    /// Solves `(-Δ_h + shift) u = rhs`. Requires `shift > -λ_min`.
    pub fn solve_shifted(&self, shift: f64, rhs: &[f64]) -> Vec<f64> {
        let mut u = rhs.to_vec();
        self.transform(&mut u);
        let mut norm = 1.0;
        match self.dims.as_slice() {
            [n] => {
                for (k, v) in u.iter_mut().enumerate() {
                    *v /= self.axis_eigs[0][k] + shift;
                }
                norm *= 2.0 / (*n + 1) as f64;
            }
            [nx, ny] => {
                for iy in 0..*ny {
                    for ix in 0..*nx {
                        u[ix + nx * iy] /= self.axis_eigs[0][ix] + self.axis_eigs[1][iy] + shift;
                    }
                }
                norm *= 2.0 / (*nx + 1) as f64 * 2.0 / (*ny + 1) as f64;
            }
            _ => unreachable!(),
        }
        self.transform(&mut u);
        u.iter_mut().for_each(|v| *v *= norm);
        u
    }
}
