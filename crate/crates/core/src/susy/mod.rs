//! First-order, second-order non-confluent and confluent SUSY partners of
//! BDD Hamiltonians.
//!
//! Everything that depends on a seed is evaluated from `(u, u')` pairs. Second
//! derivatives come from the eigenvalue equation
//! `u'' = (m'/m) u' + (2m/ħ²)(V − ε) u`, so partner potentials and mapped
//! states carry no finite-difference error beyond what the seed itself has.
//! Poles are located as sign changes of the relevant denominator and masked
//! by a few cells; each interval between poles is treated as its own
//! Sturm–Liouville problem.

mod first;
mod operators;
mod second;
mod singular;

use std::sync::Arc;

pub use first::{
    first_order_transform, map_state_first, missing_state_first, superpotential_from_seed,
    FirstOrderTransform, MappedState, MissingState, TwoRouteCheck,
};
pub use operators::{
    factorization_residual, intertwining_residual, partner_ladder_apply, Direction,
    Operator, PartnerChain, TransformRef, test_bumps,
};
pub use second::{
    confluent_transform, critical_d, missing_state_second, second_order_nonconfluent,
    CriticalD, SecondOrderTransform, TransformMode,
};
pub use singular::{subdomain_spectra, SingularityReport, SubdomainSpectrum};

use crate::error::{Error, Result};
use crate::hamiltonian::{interior_mask, Hamiltonian};
use crate::ladder::FormalState;
use crate::numerics::{derivative_with, same_grid, SampledFunction, Stencil};
use crate::profile::MassSamples;

/// Default relative eigen-residual a seed must meet.
pub const DEFAULT_SEED_TOLERANCE: f64 = 1e-6;
/// Cells masked on each side of a detected pole.
pub const DEFAULT_MASK_RADIUS: usize = 3;

/// Knobs shared by all transforms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SusyOptions {
    pub seed_tolerance: f64,
    pub mask_radius: usize,
}

impl Default for SusyOptions {
    fn default() -> Self {
        Self {
            seed_tolerance: DEFAULT_SEED_TOLERANCE,
            mask_radius: DEFAULT_MASK_RADIUS,
        }
    }
}

/// A formal eigenfunction with its derivative and eigenvalue.
#[derive(Debug, Clone)]
pub struct Seed {
    pub value: SampledFunction,
    pub slope: SampledFunction,
    pub energy: f64,
}

impl Seed {
    pub fn new(value: SampledFunction, slope: SampledFunction, energy: f64) -> Result<Self> {
        same_grid(value.grid(), slope.grid())?;
        if value.max_abs() == 0.0 {
            return Err(Error::DegenerateSeed("seed is identically zero".into()));
        }
        Ok(Self {
            value,
            slope,
            energy,
        })
    }

    /// Unit-norm ladder state.
    pub fn from_state(state: &FormalState) -> Self {
        Self {
            value: state.wavefunction.clone(),
            slope: state.slope.clone(),
            energy: state.energy,
        }
    }

    /// Ladder state in its unnormalised `(√2 L⁺)ⁿ ψ₀` scaling.
    pub fn from_state_raw(state: &FormalState) -> Self {
        let (value, slope) = state.raw();
        Self {
            value,
            slope,
            energy: state.energy,
        }
    }

    /// Seed from samples only; the slope is taken with five-point differences.
    pub fn from_samples(value: SampledFunction, energy: f64) -> Result<Self> {
        let slope = derivative_with(&value, 1, Stencil::Central4)?;
        Self::new(value, slope, energy)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            value: self.value.scaled(c),
            slope: self.slope.scaled(c),
            energy: self.energy,
        }
    }
}

/// Largest relative change of the mass across one cell, `h |m'/m|`, at which
/// a finite-difference residual is still trusted.
pub const RESOLUTION_LIMIT: f64 = 0.01;

/// Samples away from the two outermost at each end where the grid resolves the
/// mass profile (`h |m'/m| ≤ RESOLUTION_LIMIT`).
pub fn resolved_mask(h: &Hamiltonian) -> Vec<bool> {
    let step = h.grid().spacing();
    let mass = h.mass();
    let mut keep = interior_mask(mass.m.len(), 2);
    for (i, k) in keep.iter_mut().enumerate() {
        *k &= step * (mass.m1[i] / mass.m[i]).abs() <= RESOLUTION_LIMIT;
    }
    keep
}

/// Relative eigen-residual of a seed with respect to `h`, measured with
/// five-point differences on [`resolved_mask`].
///
/// Fails when fewer than half of the samples are resolved.
pub fn seed_residual(h: &Hamiltonian, seed: &Seed) -> Result<f64> {
    let keep = resolved_mask(h);
    let kept = keep.iter().filter(|&&k| k).count();
    if 2 * kept < keep.len() {
        return Err(Error::Domain(format!(
            "grid resolves the mass profile at only {kept} of {} samples",
            keep.len()
        )));
    }
    h.eigen_residual(&seed.value, seed.energy, &keep, Stencil::Central4)
}

pub(crate) fn validate_seed(h: &Hamiltonian, seed: &Seed, tolerance: f64) -> Result<f64> {
    same_grid(h.grid(), seed.value.grid())?;
    if seed.value.max_abs() == 0.0 {
        return Err(Error::DegenerateSeed("seed is identically zero".into()));
    }
    let residual = seed_residual(h, seed)?;
    if !(residual < tolerance) {
        return Err(Error::InvalidSeed {
            residual,
            tolerance,
        });
    }
    Ok(residual)
}

/// A sampled eigenpair of some BDD Hamiltonian sharing `mass`.
#[derive(Debug, Clone)]
pub(crate) struct Pair {
    pub value: Vec<f64>,
    pub slope: Vec<f64>,
    pub energy: f64,
}

impl Pair {
    pub fn of(seed: &Seed) -> Self {
        Self {
            value: seed.value.values().to_vec(),
            slope: seed.slope.values().to_vec(),
            energy: seed.energy,
        }
    }
}

/// `m^{-1/2} W(u, ψ) / u` and its derivative, for eigenpairs `u` (at `ε`) and
/// `ψ` (at `E`) of the same Hamiltonian. This is `(√2/ħ) A ψ` for the
/// first-order intertwiner built on `u`.
pub(crate) fn darboux_map(mass: &MassSamples, hbar: f64, seed: &Pair, state: &Pair) -> Pair {
    let n = seed.value.len();
    let hb2 = hbar * hbar;
    let mut value = vec![0.0; n];
    let mut slope = vec![0.0; n];
    for i in 0..n {
        let (m, m1) = (mass.m[i], mass.m1[i]);
        let (u, du) = (seed.value[i], seed.slope[i]);
        let (p, dp) = (state.value[i], state.slope[i]);
        let w = u * dp - du * p;
        let dw = m1 / m * w + 2.0 * m / hb2 * (seed.energy - state.energy) * u * p;
        let r = m.sqrt();
        let phi = w / (r * u);
        value[i] = phi;
        slope[i] = -0.5 * m1 / m * phi + (dw / u - w * du / (u * u)) / r;
    }
    Pair {
        value,
        slope,
        energy: state.energy,
    }
}

/// Per-sample factors that normalise `values` on each subdomain separately;
/// masked and non-finite samples get factor zero.
pub(crate) fn subdomain_factors(
    values: &[f64],
    mask: &[bool],
    ranges: &[(usize, usize)],
    h: f64,
) -> Vec<f64> {
    let mut factors = vec![0.0; values.len()];
    for &(a, b) in ranges {
        let usable = |i: usize| !mask[i] && values[i].is_finite();
        let sum: f64 = (a..=b).filter(|&i| usable(i)).map(|i| values[i] * values[i]).sum::<f64>() * h;
        if sum > 0.0 && sum.is_finite() {
            let s = 1.0 / sum.sqrt();
            for i in (a..=b).filter(|&i| usable(i)) {
                factors[i] = s;
            }
        }
    }
    factors
}

pub(crate) fn sampled(grid: &Arc<crate::numerics::Grid>, values: Vec<f64>) -> SampledFunction {
    SampledFunction::new(Arc::clone(grid), values).expect("values sampled on this grid")
}
