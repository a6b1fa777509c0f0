//! Incomplete elliptic integral of the second kind.
//!
//! Uses the *parameter* convention: `E(φ | k) = ∫₀^φ √(1 − k sin²θ) dθ`,
//! i.e. `k` multiplies `sin²θ` directly (it is not squared).

use std::f64::consts::{FRAC_PI_2, PI};

use super::quadrature::integrate;
use crate::error::{invalid, Error, Result};

fn integrand(k: f64) -> impl Fn(f64) -> f64 {
    move |t: f64| {
        let s = t.sin();
        (1.0 - k * s * s).max(0.0).sqrt()
    }
}

fn quad(k: f64, phi: f64) -> f64 {
    integrate(integrand(k), 0.0, phi, 1e-16, 1e-15)
}

/// `E(π/2 | k)`, defined for `k ≤ 1`.
pub fn complete_elliptic_e(k: f64) -> Result<f64> {
    if !k.is_finite() || k > 1.0 {
        return Err(Error::Domain(format!(
            "complete elliptic integral needs parameter k <= 1, got {k}"
        )));
    }
    Ok(quad(k, FRAC_PI_2))
}

/// `E(φ | k)` for any real `φ`.
///
/// For `k ≤ 1` the integral is reduced to `|r| ≤ π/2` with
/// `E(φ + jπ) = E(φ) + 2j E(π/2)`. For `k > 1` the integrand is real only up
/// to the branch point `asin(1/√k)`; beyond it a domain error is returned.
pub fn incomplete_elliptic_e(phi: f64, k: f64) -> Result<f64> {
    if !phi.is_finite() || !k.is_finite() {
        return Err(invalid(format!("non-finite argument E({phi}, {k})")));
    }
    if k > 1.0 {
        let branch = (1.0 / k.sqrt()).asin();
        if phi.abs() > branch {
            return Err(Error::Domain(format!(
                "E(phi, k) with k = {k} > 1 is real only for |phi| <= {branch}"
            )));
        }
        return Ok(quad(k, phi));
    }
    let j = (phi / PI).round();
    let r = phi - j * PI;
    let periodic = if j == 0.0 {
        0.0
    } else {
        2.0 * j * complete_elliptic_e(k)?
    };
    Ok(periodic + quad(k, r))
}
