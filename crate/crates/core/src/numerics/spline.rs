use crate::error::{invalid, Error, Result};

/// Natural cubic spline through strictly increasing abscissae.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    // second derivatives at the knots
    curvature: Vec<f64>,
}

impl CubicSpline {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let n = xs.len();
        if n != ys.len() {
            return Err(invalid("spline abscissae and ordinates differ in length"));
        }
        if n < 4 {
            return Err(invalid("spline needs at least 4 knots"));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("spline abscissae must be strictly increasing"));
        }
        // Thomas algorithm for the interior curvatures, natural ends.
        let mut sub = vec![0.0; n];
        let mut diag = vec![1.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = xs[i] - xs[i - 1];
            let h1 = xs[i + 1] - xs[i];
            sub[i] = h0 / 6.0;
            diag[i] = (h0 + h1) / 3.0;
            sup[i] = h1 / 6.0;
            rhs[i] = (ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0;
        }
        for i in 1..n {
            let w = sub[i] / diag[i - 1];
            diag[i] -= w * sup[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        let mut curvature = vec![0.0; n];
        curvature[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            curvature[i] = (rhs[i] - sup[i] * curvature[i + 1]) / diag[i];
        }
        Ok(Self { xs, ys, curvature })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    /// Value, first and second derivative at `x`.
    pub fn eval(&self, x: f64) -> Result<(f64, f64, f64)> {
        let (lo, hi) = self.domain();
        if !(x >= lo && x <= hi) {
            return Err(Error::Domain(format!(
                "spline evaluated at {x} outside [{lo}, {hi}]"
            )));
        }
        let i = match self.xs.partition_point(|&k| k <= x) {
            0 => 0,
            p => (p - 1).min(self.xs.len() - 2),
        };
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        let (c0, c1) = (self.curvature[i], self.curvature[i + 1]);
        let value = a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * c0 + (b * b * b - b) * c1) * h * h / 6.0;
        let slope = (self.ys[i + 1] - self.ys[i]) / h
            - (3.0 * a * a - 1.0) / 6.0 * h * c0
            + (3.0 * b * b - 1.0) / 6.0 * h * c1;
        let curv = a * c0 + b * c1;
        Ok((value, slope, curv))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_lines_exactly() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64 * 0.3).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let s = CubicSpline::new(xs, ys).unwrap();
        let (v, d, c) = s.eval(1.37).unwrap();
        assert!((v - 3.74).abs() < 1e-14);
        assert!((d - 2.0).abs() < 1e-13);
        assert!(c.abs() < 1e-12);
    }

    #[test]
    fn sine_interpolation_error_is_small_inside() {
        let xs: Vec<f64> = (0..=100).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x: &f64| x.sin()).collect();
        let s = CubicSpline::new(xs, ys).unwrap();
        for x in [2.05, 4.33, 7.71] {
            let (v, d, _) = s.eval(x).unwrap();
            assert!((v - f64::sin(x)).abs() < 1e-5);
            assert!((d - f64::cos(x)).abs() < 1e-3);
        }
        assert!(s.eval(10.5).is_err());
    }

    #[test]
    fn rejects_bad_knots() {
        assert!(CubicSpline::new(vec![0.0, 1.0, 1.0, 2.0], vec![1.0; 4]).is_err());
        assert!(CubicSpline::new(vec![0.0, 1.0, 2.0], vec![1.0; 3]).is_err());
    }
}
