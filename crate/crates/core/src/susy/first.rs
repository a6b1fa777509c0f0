use std::f64::consts::SQRT_2;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::ladder::LadderSystem;
use crate::numerics::{derivative, same_grid, Grid, SampledFunction, Stencil};
use crate::profile::{MassProfile, MassSamples};

use super::singular::SingularityReport;
use super::{darboux_map, sampled, subdomain_factors, validate_seed, Pair, Seed, SusyOptions};

/// `W = −(ħ/√(2m)) u'/u` from exact `(u, u')`.
pub(crate) fn superpotential_values(mass: &MassSamples, hbar: f64, value: &[f64], slope: &[f64]) -> Vec<f64> {
    (0..value.len())
        .map(|i| -hbar / (2.0 * mass.m[i]).sqrt() * slope[i] / value[i])
        .collect()
}

/// `V₁ = 2W² + 2ε − V₀ − 2ħ W (1/√(2m))' − ħ² (m^{-1/2})'' / (2√m)`.
pub(crate) fn riccati_partner(mass: &MassSamples, hbar: f64, v0: &[f64], w: &[f64], eps: f64) -> Vec<f64> {
    (0..v0.len())
        .map(|i| {
            let (m, m1, m2) = (mass.m[i], mass.m1[i], mass.m2[i]);
            let r = m.sqrt();
            let g1 = -0.5 * m1 / (m * r);
            let g2 = 0.75 * m1 * m1 / (m * m * r) - 0.5 * m2 / (m * r);
            2.0 * w[i] * w[i] + 2.0 * eps - v0[i] - SQRT_2 * hbar * w[i] * g1
                - hbar * hbar * g2 / (2.0 * r)
        })
        .collect()
}

/// `V₁ = V₀ − ħ² m^{-1/2} { m^{-1/2} [log(m^{-1/4} u)]' }'` with `u''` taken as a
/// central difference of the exact slope, sampled every `step` points.
fn log_route_partner(
    mass: &MassSamples,
    hbar: f64,
    h: f64,
    v0: &[f64],
    value: &[f64],
    slope: &[f64],
    step: usize,
) -> Vec<f64> {
    let idx: Vec<usize> = (0..value.len()).step_by(step).collect();
    let hs = h * step as f64;
    let n = idx.len();
    let mut out = vec![f64::NAN; n];
    for j in 1..n - 1 {
        let i = idx[j];
        let (m, m1, m2) = (mass.m[i], mass.m1[i], mass.m2[i]);
        let r = m.sqrt();
        let g1 = -0.5 * m1 / (m * r);
        let d2 = (slope[idx[j + 1]] - slope[idx[j - 1]]) / (2.0 * hs);
        let l = slope[i] / value[i];
        let dy = g1 * (l - 0.25 * m1 / m)
            + (d2 / value[i] - l * l - 0.25 * m2 / m + 0.25 * m1 * m1 / (m * m)) / r;
        out[j] = v0[i] - hbar * hbar * dy / r;
    }
    out
}

/// Comparison of the Riccati and log-derivative evaluations of `V₁`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TwoRouteCheck {
    /// Largest `|V₁(Riccati) − V₁(log route)|` over regular points.
    pub max_discrepancy: f64,
    /// Richardson estimate of the log route's discretisation error (sup norm).
    pub grid_tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct FirstOrderTransform {
    pub seed: Seed,
    pub epsilon1: f64,
    pub superpotential: SampledFunction,
    pub partner_potential: SampledFunction,
    pub profile: MassProfile,
    pub singularities: SingularityReport,
    pub seed_residual: f64,
    pub two_route: TwoRouteCheck,
    pub(crate) base_potential: SampledFunction,
    pub(crate) mass: Arc<MassSamples>,
    pub(crate) hbar: f64,
}

/// Superpotential of a seed together with the poles at its zeros.
pub fn superpotential_from_seed(
    seed: &Seed,
    profile: &MassProfile,
    hbar: f64,
    mask_radius: usize,
) -> Result<(SampledFunction, SingularityReport)> {
    if seed.value.max_abs() == 0.0 {
        return Err(Error::DegenerateSeed("seed is identically zero".into()));
    }
    let grid = seed.value.grid();
    let mass = profile.sample(grid)?;
    let w = superpotential_values(&mass, hbar, seed.value.values(), seed.slope.values());
    let report = SingularityReport::from_denominator(grid, seed.value.values(), mask_radius);
    Ok((sampled(grid, w), report))
}

pub fn first_order_transform(
    sys: &LadderSystem,
    seed: &Seed,
    options: &SusyOptions,
) -> Result<FirstOrderTransform> {
    FirstOrderTransform::new(
        sys.profile(),
        Arc::clone(sys.mass()),
        sys.potential().clone(),
        sys.hbar(),
        seed,
        options,
    )
}

impl FirstOrderTransform {
    /// Transform of the BDD Hamiltonian with potential `v0`; the seed must be
    /// one of its formal eigenfunctions.
    pub fn new(
        profile: &MassProfile,
        mass: Arc<MassSamples>,
        v0: SampledFunction,
        hbar: f64,
        seed: &Seed,
        options: &SusyOptions,
    ) -> Result<Self> {
        same_grid(v0.grid(), seed.value.grid())?;
        let h0 = Hamiltonian::from_samples(Arc::clone(&mass), v0.clone(), hbar);
        let seed_residual = validate_seed(&h0, seed, options.seed_tolerance)?;
        let grid = Arc::clone(v0.grid());
        let (u, du) = (seed.value.values(), seed.slope.values());
        let w = superpotential_values(&mass, hbar, u, du);
        let v1 = riccati_partner(&mass, hbar, v0.values(), &w, seed.energy);
        let singularities = SingularityReport::from_denominator(&grid, u, options.mask_radius);
        let two_route = two_route_check(&grid, &mass, hbar, v0.values(), u, du, &v1, &singularities);
        Ok(Self {
            seed: seed.clone(),
            epsilon1: seed.energy,
            superpotential: sampled(&grid, w),
            partner_potential: sampled(&grid, v1),
            profile: profile.clone(),
            singularities,
            seed_residual,
            two_route,
            base_potential: v0,
            mass,
            hbar,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.base_potential.grid()
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn mass(&self) -> &Arc<MassSamples> {
        &self.mass
    }

    pub fn base_potential(&self) -> &SampledFunction {
        &self.base_potential
    }

    pub fn hamiltonian0(&self) -> Hamiltonian {
        Hamiltonian::from_samples(Arc::clone(&self.mass), self.base_potential.clone(), self.hbar)
    }

    pub fn hamiltonian1(&self) -> Hamiltonian {
        Hamiltonian::from_samples(Arc::clone(&self.mass), self.partner_potential.clone(), self.hbar)
    }

    /// `A₁ψ = (ħ/√(2m)) ψ' + W₁ψ` with a finite-difference `ψ'`.
    pub fn apply_a(&self, psi: &SampledFunction) -> Result<SampledFunction> {
        same_grid(self.grid(), psi.grid())?;
        let d = derivative(psi, 1)?;
        let w = self.superpotential.values();
        Ok(sampled(
            self.grid(),
            (0..psi.len())
                .map(|i| {
                    self.hbar / (2.0 * self.mass.m[i]).sqrt() * d.values()[i] + w[i] * psi.values()[i]
                })
                .collect(),
        ))
    }

    /// `A₁†ψ = −(ħ/√(2m)) ψ' + (W₁ + ħ m'/(2√2 m^{3/2})) ψ`.
    pub fn apply_a_dagger(&self, psi: &SampledFunction) -> Result<SampledFunction> {
        same_grid(self.grid(), psi.grid())?;
        let d = derivative(psi, 1)?;
        let w = self.superpotential.values();
        Ok(sampled(
            self.grid(),
            (0..psi.len())
                .map(|i| {
                    let (m, m1) = (self.mass.m[i], self.mass.m1[i]);
                    -self.hbar / (2.0 * m).sqrt() * d.values()[i]
                        + (w[i] + self.hbar * m1 / (2.0 * SQRT_2 * m * m.sqrt())) * psi.values()[i]
                })
                .collect(),
        ))
    }

    pub(crate) fn seed_pair(&self) -> Pair {
        Pair::of(&self.seed)
    }
}

#[allow(clippy::too_many_arguments)]
fn two_route_check(
    grid: &Grid,
    mass: &MassSamples,
    hbar: f64,
    v0: &[f64],
    u: &[f64],
    du: &[f64],
    v1: &[f64],
    report: &SingularityReport,
) -> TwoRouteCheck {
    let h = grid.spacing();
    let fine = log_route_partner(mass, hbar, h, v0, u, du, 1);
    let coarse = log_route_partner(mass, hbar, h, v0, u, du, 2);
    // keep clear of poles by one extra cell for the doubled stencil
    let keep = report.keep(2);
    let near_pole = |i: usize| {
        let lo = i.saturating_sub(2);
        let hi = (i + 2).min(keep.len() - 1);
        (lo..=hi).any(|j| report.mask()[j])
    };
    let mut tau = 0.0f64;
    for (j, &c) in coarse.iter().enumerate() {
        let i = 2 * j;
        if keep[i] && !near_pole(i) && c.is_finite() && fine[i].is_finite() {
            tau = tau.max((fine[i] - c).abs() / 3.0);
        }
    }
    let mut worst = 0.0f64;
    let mut pass = true;
    for i in 0..u.len() {
        if !(keep[i] && !near_pole(i)) {
            continue;
        }
        let d = (v1[i] - fine[i]).abs();
        if !d.is_finite() {
            pass = false;
            continue;
        }
        worst = worst.max(d);
        if d > 10.0 * tau + 1e-10 * v1[i].abs().max(1.0) {
            pass = false;
        }
    }
    TwoRouteCheck {
        max_discrepancy: worst,
        grid_tolerance: tau,
        pass,
    }
}

/// A state carried into the partner Hamiltonian.
#[derive(Debug, Clone)]
pub struct MappedState {
    /// Unit norm on each regular subdomain; zero on masked samples.
    pub function: SampledFunction,
    /// Exact derivative of `function` (same scaling).
    pub slope: SampledFunction,
    pub energy: f64,
    /// `true` when the input was proportional to the seed and was annihilated.
    pub null: bool,
}

/// `φ ∝ m^{-1/2} u₁^{-1} W(u₁, ψ)`; `state` must be an eigenpair of `H₀`.
pub fn map_state_first(t: &FirstOrderTransform, state: &Seed) -> Result<MappedState> {
    same_grid(t.grid(), state.value.grid())?;
    let seed = t.seed_pair();
    let target = Pair::of(state);
    let wr: Vec<f64> = (0..seed.value.len())
        .map(|i| seed.value[i] * target.slope[i] - seed.slope[i] * target.value[i])
        .collect();
    let max_of = |v: &[f64]| v.iter().filter(|x| x.is_finite()).fold(0.0f64, |a, x| a.max(x.abs()));
    let scale = max_of(&seed.value) * max_of(&target.slope) + max_of(&seed.slope) * max_of(&target.value);
    let keep = t.singularities.keep(0);
    let w_max = (0..wr.len()).filter(|&i| keep[i]).fold(0.0f64, |a, i| a.max(wr[i].abs()));
    let grid = t.grid();
    if w_max <= 1e-8 * scale {
        return Ok(MappedState {
            function: SampledFunction::zeros(grid),
            slope: SampledFunction::zeros(grid),
            energy: state.energy,
            null: true,
        });
    }
    let mapped = darboux_map(&t.mass, t.hbar, &seed, &target);
    Ok(finish_mapped(grid, &t.singularities, mapped))
}

pub(crate) fn finish_mapped(grid: &Arc<Grid>, report: &SingularityReport, p: Pair) -> MappedState {
    let f = subdomain_factors(&p.value, report.mask(), report.ranges(), grid.spacing());
    let scale = |v: &[f64]| v.iter().zip(&f).map(|(v, &s)| if s == 0.0 { 0.0 } else { v * s }).collect();
    MappedState {
        function: sampled(grid, scale(&p.value)),
        slope: sampled(grid, scale(&p.slope)),
        energy: p.energy,
        null: false,
    }
}

/// The partner state at the factorisation energy, outside the image of the map.
#[derive(Debug, Clone)]
pub struct MissingState {
    /// Unit norm on each regular subdomain; zero on masked samples.
    pub function: SampledFunction,
    pub energy: f64,
    /// Relative eigen-residual against the partner Hamiltonian, off the mask.
    pub residual: f64,
    /// Whether the function decays at every end of at least one subdomain.
    pub normalizable: bool,
}

/// `φ_{ε₁} ∝ √m / u₁`.
pub fn missing_state_first(t: &FirstOrderTransform) -> Result<MissingState> {
    let u = t.seed.value.values();
    let raw: Vec<f64> = (0..u.len()).map(|i| t.mass.m[i].sqrt() / u[i]).collect();
    missing_state(t.grid(), &t.singularities, raw, t.epsilon1, &t.hamiltonian1())
}

pub(crate) fn missing_state(
    grid: &Arc<Grid>,
    report: &SingularityReport,
    raw: Vec<f64>,
    energy: f64,
    h: &Hamiltonian,
) -> Result<MissingState> {
    if report.ranges().iter().all(|&(a, b)| b <= a + 1) {
        return Err(Error::NoRegularSubdomain(
            "denominator vanishes throughout the grid".into(),
        ));
    }
    let keep = report.keep(2);
    let raw_fn = sampled(grid, raw.clone());
    let residual = h.eigen_residual(&raw_fn, energy, &keep, Stencil::Central4)?;
    let normalizable = report
        .ranges()
        .iter()
        .any(|&(a, b)| decays_on(&raw, report.mask(), a, b));
    let f = subdomain_factors(&raw, report.mask(), report.ranges(), grid.spacing());
    Ok(MissingState {
        function: sampled(
            grid,
            raw.iter().zip(&f).map(|(v, &s)| if s == 0.0 { 0.0 } else { v * s }).collect(),
        ),
        energy,
        residual,
        normalizable,
    })
}

/// Whether the unmasked samples of `v[a..=b]` are small at both ends relative to their peak.
pub(crate) fn decays_on(v: &[f64], mask: &[bool], a: usize, b: usize) -> bool {
    let idx: Vec<usize> = (a..=b).filter(|&i| !mask[i] && v[i].is_finite()).collect();
    let (Some(&first), Some(&last)) = (idx.first(), idx.last()) else {
        return false;
    };
    let peak = idx.iter().fold(0.0f64, |m, &i| m.max(v[i].abs()));
    peak > 0.0 && v[first].abs() < 1e-3 * peak && v[last].abs() < 1e-3 * peak
}
