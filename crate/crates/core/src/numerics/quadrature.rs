//! Gauss–Kronrod (7, 15) quadrature with adaptive bisection.

use std::sync::Arc;

use super::grid::Grid;
use super::sampled::SampledFunction;
use crate::error::{invalid, Result};

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
    0.209_482_141_084_727_8,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One GK15 panel on `[a, b]`: Kronrod estimate and |Kronrod − Gauss|.
pub fn gauss_kronrod(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive GK15 integral of `f` over `[a, b]`.
///
/// Panels are bisected until each meets its share of
/// `max(abs_tol, rel_tol * |I|)` or the depth limit is reached.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (whole, err) = gauss_kronrod(&f, a, b);
    if err <= abs_tol.max(rel_tol * whole.abs()) {
        return whole;
    }
    let mut total = 0.0;
    let mut stack = vec![(a, b, 0u32)];
    let width = (b - a).abs();
    while let Some((lo, hi, depth)) = stack.pop() {
        let (val, err) = gauss_kronrod(&f, lo, hi);
        let share = (hi - lo).abs() / width;
        let target = abs_tol.max(rel_tol * whole.abs()) * share;
        if err <= target || depth >= 50 {
            total += val;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    total
}

/// High-order antiderivative of a callable on a grid, zero at `anchor`.
///
/// Each grid cell is integrated adaptively, so the result carries no
/// O(h²) trapezoid error. `anchor` may lie outside the grid as long as `f`
/// is integrable between it and the grid.
pub fn antiderivative_on_grid(
    f: impl Fn(f64) -> f64,
    grid: &Arc<Grid>,
    anchor: f64,
) -> Result<SampledFunction> {
    if !anchor.is_finite() {
        return Err(invalid("anchor must be finite"));
    }
    let pts = grid.points();
    let mut acc = vec![0.0; pts.len()];
    for i in 1..pts.len() {
        acc[i] = acc[i - 1] + integrate(&f, pts[i - 1], pts[i], 1e-16, 1e-14);
    }
    let k = grid.nearest_index(anchor);
    let offset = acc[k] + integrate(&f, pts[k], anchor, 1e-16, 1e-14);
    for a in acc.iter_mut() {
        *a -= offset;
    }
    SampledFunction::new(Arc::clone(grid), acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn polynomials_are_exact() {
        let (v, _) = gauss_kronrod(&|x: f64| x.powi(20), -1.0, 1.0);
        assert_relative_eq!(v, 2.0 / 21.0, epsilon = 1e-15);
    }

    #[test]
    fn endpoint_singularity_converges() {
        let v = integrate(f64::sqrt, 0.0, 1.0, 1e-15, 1e-14);
        assert_relative_eq!(v, 2.0 / 3.0, epsilon = 1e-13);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let v = integrate(f64::sin, PI, 0.0, 1e-15, 1e-14);
        assert_relative_eq!(v, -2.0, epsilon = 1e-13);
    }

    #[test]
    fn grid_antiderivative_of_root() {
        let g = Arc::new(Grid::new(0.001, 4.0, 401).unwrap());
        let big_f = antiderivative_on_grid(f64::sqrt, &g, 0.0).unwrap();
        for (x, v) in g.points().iter().zip(big_f.values()) {
            assert!((v - 2.0 / 3.0 * x.powf(1.5)).abs() < 1e-12);
        }
    }
}
