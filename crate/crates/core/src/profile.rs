//! Mass profiles with analytic derivatives, and von Roos ordering conversions.

use std::fmt;
use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::numerics::{CubicSpline, Grid, SampledFunction, MIN_POINTS};

/// Interval on which a profile may be evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub lower: f64,
    pub upper: f64,
    pub lower_open: bool,
    pub upper_open: bool,
}

impl Domain {
    const REALS: Domain = Domain {
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
        lower_open: true,
        upper_open: true,
    };

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lower_open { x > self.lower } else { x >= self.lower };
        let below = if self.upper_open { x < self.upper } else { x <= self.upper };
        above && below
    }

    /// True when `x` is in the closure of the domain.
    pub fn closure_contains(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }
}

#[derive(Debug, Clone)]
enum Shape {
    Constant(f64),
    Quadratic(f64),
    Cosine(f64),
    Linear,
    Tabulated(Arc<CubicSpline>),
}

/// Value and first two derivatives of `m` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassPoint {
    pub m: f64,
    pub m1: f64,
    pub m2: f64,
}

/// A position-dependent mass `m(x)` together with `m'` and `m''`.
#[derive(Debug, Clone)]
pub struct MassProfile {
    shape: Shape,
    label: String,
}

impl MassProfile {
    pub fn constant(m0: f64) -> Result<Self> {
        if !(m0 > 0.0 && m0.is_finite()) {
            return Err(invalid(format!("constant mass must be positive, got {m0}")));
        }
        Ok(Self {
            shape: Shape::Constant(m0),
            label: format!("constant(m0={m0})"),
        })
    }

    /// `m(x) = x²/2 + m0`.
    pub fn quadratic(m0: f64) -> Result<Self> {
        if !(m0 > 0.0 && m0.is_finite()) {
            return Err(invalid(format!("quadratic profile needs m0 > 0, got {m0}")));
        }
        Ok(Self {
            shape: Shape::Quadratic(m0),
            label: format!("quadratic(m0={m0})"),
        })
    }

    /// `m(x) = cos x + m0`; `m0 > 1` keeps the mass strictly positive.
    pub fn cosine(m0: f64) -> Result<Self> {
        if !(m0 > 1.0 && m0.is_finite()) {
            return Err(invalid(format!("cosine profile needs m0 > 1, got {m0}")));
        }
        Ok(Self {
            shape: Shape::Cosine(m0),
            label: format!("cosine(m0={m0})"),
        })
    }

    /// `m(x) = x` on `(0, ∞)`.
    pub fn linear() -> Self {
        Self {
            shape: Shape::Linear,
            label: "linear".into(),
        }
    }

    /// Cubic-spline profile through `(x, m)` samples.
    pub fn tabulated(samples: &[(f64, f64)]) -> Result<Self> {
        if samples.len() < MIN_POINTS {
            return Err(invalid(format!(
                "tabulated profile needs at least {MIN_POINTS} samples, got {}",
                samples.len()
            )));
        }
        if let Some((x, m)) = samples.iter().find(|(_, m)| !(*m > 0.0)) {
            return Err(invalid(format!("non-positive mass {m} at x = {x}")));
        }
        let xs = samples.iter().map(|s| s.0).collect();
        let ms = samples.iter().map(|s| s.1).collect();
        let spline = CubicSpline::new(xs, ms)?;
        Ok(Self {
            label: format!("tabulated({} samples)", samples.len()),
            shape: Shape::Tabulated(Arc::new(spline)),
        })
    }

    /// Reads a two-column CSV with header `x,m`.
    pub fn from_csv_reader(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Io(e.to_string()))?;
        if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "m" {
            return Err(invalid(format!(
                "mass CSV header must be `x,m`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut samples = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Io(e.to_string()))?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|s| s.parse::<f64>().ok())
                    .ok_or_else(|| invalid(format!("bad number on data line {}", line + 1)))
            };
            samples.push((parse(0)?, parse(1)?));
        }
        Self::tabulated(&samples)
    }

    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())
            .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_csv_reader(file)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain(&self) -> Domain {
        match &self.shape {
            Shape::Linear => Domain {
                lower: 0.0,
                upper: f64::INFINITY,
                lower_open: true,
                upper_open: true,
            },
            Shape::Tabulated(s) => {
                let (lower, upper) = s.domain();
                Domain {
                    lower,
                    upper,
                    lower_open: false,
                    upper_open: false,
                }
            }
            _ => Domain::REALS,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.shape, Shape::Constant(_))
    }

    /// `m`, `m'`, `m''` at `x`, or a domain error.
    pub fn at(&self, x: f64) -> Result<MassPoint> {
        if !self.domain().contains(x) {
            return Err(Error::Domain(format!(
                "{} evaluated at x = {x}, outside its domain",
                self.label
            )));
        }
        Ok(match &self.shape {
            Shape::Constant(m0) => MassPoint { m: *m0, m1: 0.0, m2: 0.0 },
            Shape::Quadratic(m0) => MassPoint {
                m: 0.5 * x * x + m0,
                m1: x,
                m2: 1.0,
            },
            Shape::Cosine(m0) => MassPoint {
                m: x.cos() + m0,
                m1: -x.sin(),
                m2: -x.cos(),
            },
            Shape::Linear => MassPoint { m: x, m1: 1.0, m2: 0.0 },
            Shape::Tabulated(s) => {
                let (m, m1, m2) = s.eval(x)?;
                MassPoint { m, m1, m2 }
            }
        })
    }

    pub fn mass(&self, x: f64) -> Result<f64> {
        self.at(x).map(|p| p.m)
    }

    pub fn mass_derivative(&self, x: f64) -> Result<f64> {
        self.at(x).map(|p| p.m1)
    }

    pub fn mass_second_derivative(&self, x: f64) -> Result<f64> {
        self.at(x).map(|p| p.m2)
    }

    /// Samples of `m`, `m'`, `m''` on every grid point; fails if any point is
    /// outside the domain or has non-positive mass.
    pub fn sample(&self, grid: &Grid) -> Result<MassSamples> {
        let mut out = MassSamples {
            m: Vec::with_capacity(grid.len()),
            m1: Vec::with_capacity(grid.len()),
            m2: Vec::with_capacity(grid.len()),
        };
        for &x in grid.points() {
            let p = self.at(x)?;
            if !(p.m > 0.0) {
                return Err(Error::Domain(format!(
                    "{}: non-positive mass {} at x = {x}",
                    self.label, p.m
                )));
            }
            out.m.push(p.m);
            out.m1.push(p.m1);
            out.m2.push(p.m2);
        }
        Ok(out)
    }
}

impl fmt::Display for MassProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// Tabulated `m`, `m'`, `m''` on a grid.
#[derive(Debug, Clone)]
pub struct MassSamples {
    pub m: Vec<f64>,
    pub m1: Vec<f64>,
    pub m2: Vec<f64>,
}

/// von Roos ordering constants with `α + β + γ = −1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderingParameters {
    alpha: f64,
    beta: f64,
    gamma: f64,
}

impl OrderingParameters {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if (alpha + beta + gamma + 1.0).abs() > 1e-12 {
            return Err(invalid(format!(
                "ordering constants must satisfy alpha + beta + gamma = -1, got {}",
                alpha + beta + gamma
            )));
        }
        Ok(Self { alpha, beta, gamma })
    }

    /// The Ben Daniel–Duke ordering `(0, −1, 0)`.
    pub fn ben_daniel_duke() -> Self {
        Self {
            alpha: 0.0,
            beta: -1.0,
            gamma: 0.0,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    fn correction(&self, p: MassPoint, hbar: f64) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        let first = (1.0 + b) * p.m2 / (4.0 * p.m * p.m);
        let second = p.m1 * p.m1 / (2.0 * p.m.powi(3)) * (a * a + a * b + a + b + 1.0);
        hbar * hbar * (first - second)
    }
}

fn shift_by_correction(
    v: &SampledFunction,
    profile: &MassProfile,
    ordering: &OrderingParameters,
    hbar: f64,
    sign: f64,
) -> Result<SampledFunction> {
    let mut out = v.clone();
    for (x, val) in v.grid().points().iter().zip(out.values_mut()) {
        let p = profile.at(*x)?;
        *val += sign * ordering.correction(p, hbar);
    }
    Ok(out)
}

/// Effective potential of the differential (BDD-form) operator for a given
/// von Roos ordering.
pub fn veff_from_ordering(
    v: &SampledFunction,
    profile: &MassProfile,
    ordering: &OrderingParameters,
    hbar: f64,
) -> Result<SampledFunction> {
    shift_by_correction(v, profile, ordering, hbar, 1.0)
}

/// Inverse of [`veff_from_ordering`].
pub fn v_from_veff(
    v_eff: &SampledFunction,
    profile: &MassProfile,
    ordering: &OrderingParameters,
    hbar: f64,
) -> Result<SampledFunction> {
    shift_by_correction(v_eff, profile, ordering, hbar, -1.0)
}
