use std::sync::Arc;

use super::grid::same_grid;
use super::sampled::SampledFunction;
use crate::error::{invalid, Error, Result};

/// Finite-difference stencil family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stencil {
    /// Three-point central differences, second-order one-sided at the ends.
    Central2,
    /// Five-point central differences in the interior; falls back to
    /// `Central2` on the two outermost points at each end.
    Central4,
}

/// Central-difference derivative of order 1 or 2.
pub fn derivative(f: &SampledFunction, order: u8) -> Result<SampledFunction> {
    derivative_with(f, order, Stencil::Central2)
}

pub fn derivative_with(f: &SampledFunction, order: u8, stencil: Stencil) -> Result<SampledFunction> {
    let n = f.len();
    if n < 5 {
        return Err(invalid("derivative needs at least 5 points"));
    }
    let h = f.grid().spacing();
    let v = f.values();
    let mut out = vec![0.0; n];
    match order {
        1 => {
            for i in 1..n - 1 {
                out[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
            }
            out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
            out[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
            if stencil == Stencil::Central4 {
                for i in 2..n - 2 {
                    out[i] = (-v[i + 2] + 8.0 * v[i + 1] - 8.0 * v[i - 1] + v[i - 2]) / (12.0 * h);
                }
            }
        }
        2 => {
            let h2 = h * h;
            for i in 1..n - 1 {
                out[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / h2;
            }
            out[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2;
            out[n - 1] = (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / h2;
            if stencil == Stencil::Central4 {
                for i in 2..n - 2 {
                    out[i] = (-v[i + 2] + 16.0 * v[i + 1] - 30.0 * v[i] + 16.0 * v[i - 1]
                        - v[i - 2])
                        / (12.0 * h2);
                }
            }
        }
        _ => return Err(invalid(format!("derivative order must be 1 or 2, got {order}"))),
    }
    SampledFunction::new(Arc::clone(f.grid()), out)
}

/// Trapezoidal antiderivative with `F(anchor) = 0`.
pub fn integrate_cumulative(f: &SampledFunction, anchor: f64) -> Result<SampledFunction> {
    let grid = f.grid();
    if !grid.contains(anchor) {
        return Err(invalid(format!(
            "anchor {anchor} outside [{}, {}]",
            grid.x_min(),
            grid.x_max()
        )));
    }
    let h = grid.spacing();
    let v = f.values();
    let mut acc = Vec::with_capacity(v.len());
    acc.push(0.0);
    for i in 1..v.len() {
        acc.push(acc[i - 1] + 0.5 * h * (v[i - 1] + v[i]));
    }
    let t = (anchor - grid.x_min()) / h;
    let j = (t.floor() as usize).min(v.len() - 2);
    let s = (t - j as f64) * h;
    let fa = f.interpolate(anchor);
    let at_anchor = acc[j] + 0.5 * s * (v[j] + fa);
    for a in acc.iter_mut() {
        *a -= at_anchor;
    }
    SampledFunction::new(Arc::clone(grid), acc)
}

/// `f g' - f' g` using central differences.
pub fn wronskian(f: &SampledFunction, g: &SampledFunction) -> Result<SampledFunction> {
    same_grid(f.grid(), g.grid())?;
    let df = derivative(f, 1)?;
    let dg = derivative(g, 1)?;
    let values = (0..f.len())
        .map(|i| f.values()[i] * dg.values()[i] - df.values()[i] * g.values()[i])
        .collect();
    SampledFunction::new(Arc::clone(f.grid()), values)
}

/// Trapezoidal inner product.
pub fn inner(f: &SampledFunction, g: &SampledFunction) -> Result<f64> {
    same_grid(f.grid(), g.grid())?;
    Ok(trapezoid(f.values().iter().zip(g.values()).map(|(a, b)| a * b), f.grid().spacing()))
}

pub fn norm(f: &SampledFunction) -> f64 {
    trapezoid(f.values().iter().map(|v| v * v), f.grid().spacing()).sqrt()
}

fn trapezoid(terms: impl ExactSizeIterator<Item = f64>, h: f64) -> f64 {
    let n = terms.len();
    let mut sum = 0.0;
    for (i, t) in terms.enumerate() {
        sum += if i == 0 || i + 1 == n { 0.5 * t } else { t };
    }
    sum * h
}

/// Rescales `f` to unit L² norm, positive at its first significant sample.
pub fn l2_normalize(f: &SampledFunction) -> Result<SampledFunction> {
    let n = norm(f);
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::DegenerateFunction(format!(
            "cannot normalize a function with norm {n}"
        )));
    }
    let floor = 1e-8 * f.max_abs();
    let sign = f
        .values()
        .iter()
        .find(|v| v.abs() > floor)
        .map_or(1.0, |v| v.signum());
    Ok(f.scaled(sign / n))
}

/// Root-sum-square of `values` restricted to `keep`, scaled as a discrete L² norm.
pub fn masked_norm(values: &[f64], keep: &[bool], h: f64) -> f64 {
    let sum: f64 = values
        .iter()
        .zip(keep)
        .filter(|(v, &k)| k && v.is_finite())
        .map(|(v, _)| v * v)
        .sum();
    (sum * h).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::build_grid;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn quadratic_derivative_is_exact_inside() {
        let g = build_grid(-1.0, 1.0, 201).unwrap();
        let f = SampledFunction::from_fn(&g, |x| x * x);
        let d = derivative(&f, 1).unwrap();
        for (x, v) in g.points().iter().zip(d.values()).skip(1).take(199) {
            assert!((v - 2.0 * x).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_has_zero_derivatives() {
        let g = build_grid(0.0, 3.0, 40).unwrap();
        let f = SampledFunction::from_fn(&g, |_| 4.2);
        for order in [1, 2] {
            assert!(derivative(&f, order).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn second_derivative_of_sine_converges_at_second_order() {
        let errors: Vec<f64> = [201, 401, 801]
            .iter()
            .map(|&n| {
                let g = build_grid(0.0, PI, n).unwrap();
                let f = SampledFunction::from_fn(&g, f64::sin);
                let d = derivative(&f, 2).unwrap();
                g.points()
                    .iter()
                    .zip(d.values())
                    .map(|(x, v)| (v + x.sin()).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        for w in errors.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!((order - 2.0).abs() < 0.2, "observed order {order}");
        }
    }

    #[test]
    fn fourth_order_stencil_beats_second_order() {
        let g = build_grid(0.0, PI, 201).unwrap();
        let f = SampledFunction::from_fn(&g, f64::sin);
        let err = |s| {
            let d = derivative_with(&f, 2, s).unwrap();
            (2..199)
                .map(|i| (d.values()[i] + g.points()[i].sin()).abs())
                .fold(0.0, f64::max)
        };
        assert!(err(Stencil::Central4) < 1e-3 * err(Stencil::Central2));
    }

    #[test]
    fn antiderivative_of_constant_and_line() {
        let g = build_grid(-1.0, 1.0, 101).unwrap();
        let one = SampledFunction::from_fn(&g, |_| 1.0);
        let big_f = integrate_cumulative(&one, 0.0).unwrap();
        for (x, v) in g.points().iter().zip(big_f.values()) {
            assert!((v - x).abs() < 1e-13);
        }
        let line = SampledFunction::from_fn(&g, |x| 2.0 * x);
        let big_f = integrate_cumulative(&line, 0.0).unwrap();
        let h = g.spacing();
        for (x, v) in g.points().iter().zip(big_f.values()) {
            assert!((v - x * x).abs() < h * h);
        }
    }

    #[test]
    fn antiderivative_of_cosine_over_half_period() {
        let g = build_grid(0.0, PI, 2001).unwrap();
        let f = SampledFunction::from_fn(&g, f64::cos);
        let big_f = integrate_cumulative(&f, 0.0).unwrap();
        assert!(big_f.values()[2000].abs() < 1e-6);
    }

    #[test]
    fn anchor_between_grid_points() {
        let g = build_grid(0.0, 1.0, 17).unwrap();
        let f = SampledFunction::from_fn(&g, |_| 1.0);
        let big_f = integrate_cumulative(&f, 0.3).unwrap();
        assert_relative_eq!(big_f.values()[16], 0.7, epsilon = 1e-13);
        assert!(integrate_cumulative(&f, 1.5).is_err());
    }

    #[test]
    fn wronskian_examples() {
        let g = build_grid(0.0, 2.0 * PI, 4001).unwrap();
        let s = SampledFunction::from_fn(&g, f64::sin);
        let c = SampledFunction::from_fn(&g, f64::cos);
        assert!(wronskian(&s, &s).unwrap().max_abs() < 1e-15);
        let w = wronskian(&s, &c).unwrap();
        let h = g.spacing();
        assert!(w.values().iter().all(|v| (v + 1.0).abs() < h * h));

        let one = SampledFunction::from_fn(&g, |_| 1.0);
        let x = SampledFunction::from_fn(&g, |x| x);
        let w = wronskian(&one, &x).unwrap();
        assert!(w.values().iter().all(|v| (v - 1.0).abs() < 1e-9));
    }

    #[test]
    fn normalization_and_sign() {
        let g = build_grid(0.0, 1.0, 101).unwrap();
        let two = SampledFunction::from_fn(&g, |_| -2.0);
        let n = l2_normalize(&two).unwrap();
        assert!(n.values().iter().all(|v| (v - 1.0).abs() < 1e-14));
        assert!(matches!(
            l2_normalize(&SampledFunction::zeros(&g)),
            Err(Error::DegenerateFunction(_))
        ));
    }
}
