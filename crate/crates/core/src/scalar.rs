//! One-dimensional numerical routines: adaptive Gauss–Kronrod quadrature,
//! grid-seeded golden-section maximisation and bracketing bisection.

// 7-point Gauss / 15-point Kronrod nodes on [-1, 1] (positive half).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = r * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * r, ((kron - gauss) * r).abs())
}

/// `∫_a^b f` by adaptive G7K15 bisection to relative tolerance `rtol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, rtol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (whole, err) = gk15(&f, a, b);
    if err <= rtol * whole.abs() || err < f64::MIN_POSITIVE {
        return whole;
    }
    refine(&f, a, b, rtol * whole.abs().max(f64::MIN_POSITIVE), 0)
}

fn refine(f: &impl Fn(f64) -> f64, a: f64, b: f64, atol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (l, el) = gk15(f, a, m);
    let (r, er) = gk15(f, m, b);
    if el + er <= atol || depth >= 48 || m <= a || m >= b {
        return l + r;
    }
    refine(f, a, m, 0.5 * atol, depth + 1) + refine(f, m, b, 0.5 * atol, depth + 1)
}

/// Maximiser of `f` on `[lo, hi]`: `seeds + 1` uniform samples, then golden
/// section on the cell pair around the best sample.
pub fn maximize(f: impl Fn(f64) -> f64, lo: f64, hi: f64, seeds: usize) -> (f64, f64) {
    let seeds = seeds.max(2);
    let step = (hi - lo) / seeds as f64;
    let mut best = (lo, f(lo));
    let mut best_i = 0;
    for i in 1..=seeds {
        let x = if i == seeds { hi } else { lo + i as f64 * step };
        let v = f(x);
        if v > best.1 {
            best = (x, v);
            best_i = i;
        }
    }
    let mut a = lo + best_i.saturating_sub(1) as f64 * step;
    let mut b = (lo + (best_i + 1) as f64 * step).min(hi);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a) <= 1e-14 * (hi - lo).abs().max(f64::MIN_POSITIVE) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    for (x, v) in [(c, fc), (d, fd)] {
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}

/// Bisection for a sign change of `f` on `[lo, hi]` down to floating-point
/// resolution. `f(lo)` and `f(hi)` must have opposite signs (or be zero).
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Option<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() || flo.is_nan() || fhi.is_nan() {
        return None;
    }
    for _ in 0..2200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Chebyshev–Lobatto points on `[lo, hi]`, clustered toward both ends and
/// returned in increasing order. Refining `m -> 2m - 1` nests the grids.
pub fn chebyshev_points(lo: f64, hi: f64, m: usize) -> Vec<f64> {
    if m == 1 {
        return vec![0.5 * (lo + hi)];
    }
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    (0..m)
        .map(|j| {
            if j == 0 {
                lo
            } else if j == m - 1 {
                hi
            } else {
                mid - half * (std::f64::consts::PI * j as f64 / (m - 1) as f64).cos()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_of_smooth_and_kinked() {
        let v = integrate(|x| x.sin(), 0.0, std::f64::consts::PI, 1e-12);
        assert!((v - 2.0).abs() < 1e-12);
        let v = integrate(|x| (x - 0.3).abs(), 0.0, 1.0, 1e-12);
        assert!((v - (0.045 + 0.245)).abs() < 1e-11);
        assert_eq!(integrate(|x| x, 1.0, 1.0, 1e-10), 0.0);
    }

    #[test]
    fn golden_section_finds_interior_max() {
        let (x, v) = maximize(|s| s * (3.0 - s).powi(7), 0.0, 3.0, 64);
        assert!((x - 3.0 / 8.0).abs() < 1e-7);
        let exact = 0.375 * (2.625f64).powi(7);
        assert!((v - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn bisection_root() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0).is_none());
    }

    #[test]
    fn chebyshev_nesting() {
        let coarse = chebyshev_points(0.0, 1.0, 9);
        let fine = chebyshev_points(0.0, 1.0, 17);
        for (i, x) in coarse.iter().enumerate() {
            assert!((fine[2 * i] - x).abs() < 1e-15);
        }
        assert!(fine.windows(2).all(|w| w[0] < w[1]));
    }
}
