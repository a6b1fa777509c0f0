//! Second-order transforms.
//!
//! Both variants are written through one denominator `B` and one auxiliary
//! function `K` with `B' = (m'/m) B + m u₁ K`:
//!
//! ```text
//! non-confluent   B = W(u₁, u₂)      K = (2/ħ²)(ε₁ − ε₂) u₂
//! confluent       B = m w            K = d u₁,   w = (1 − d) + d ∫u₁²
//! ```
//!
//! Then `V₂ = V₀ − ħ² m^{-1/2} q'` with `q = √m u₁ K / B`, the intermediate
//! seed is `v₂ = m^{-1/2} B / u₁`, the missing state is `m u₁ / B`, and an
//! eigenpair `ψ` of `H₀` at `E` maps to `χ = (2/ħ²)(ε₁ − E) ψ − K W(u₁,ψ)/B`,
//! which stays finite at the zeros of `u₁`.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::ladder::LadderSystem;
use crate::numerics::{integrate_cumulative, same_grid, Grid, SampledFunction};

use super::first::{
    finish_mapped, first_order_transform, missing_state, riccati_partner,
    FirstOrderTransform, MappedState, MissingState,
};
use super::singular::SingularityReport;
use super::{sampled, validate_seed, Pair, Seed, SusyOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformMode {
    NonConfluent,
    Confluent,
}

#[derive(Debug, Clone)]
pub struct SecondOrderTransform {
    pub first: FirstOrderTransform,
    pub mode: TransformMode,
    /// `u₂` (non-confluent only).
    pub seed2: Option<Seed>,
    pub epsilon2: f64,
    /// `d` (confluent only).
    pub d_parameter: Option<f64>,
    /// `w(x)` (confluent only).
    pub w_function: Option<SampledFunction>,
    /// Anchor of `∫u₁²` (confluent only).
    pub anchor: Option<f64>,
    /// Second-step superpotential `W₂ = −(ħ/√(2m)) v₂'/v₂`.
    pub superpotential2: SampledFunction,
    pub partner_potential2: SampledFunction,
    pub singularities: SingularityReport,
    /// Largest relative gap between `V₂` and the Riccati step `V₁ → V₂`,
    /// off the poles of both steps.
    pub sequential_discrepancy: f64,
    b: Vec<f64>,
    b1: Vec<f64>,
    k: Vec<f64>,
    k1: Vec<f64>,
}

fn equal_energies(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

pub fn second_order_nonconfluent(
    sys: &LadderSystem,
    u1: &Seed,
    u2: &Seed,
    options: &SusyOptions,
) -> Result<SecondOrderTransform> {
    if equal_energies(u1.energy, u2.energy) {
        return Err(Error::WrongAlgorithm(u1.energy));
    }
    let first = first_order_transform(sys, u1, options)?;
    validate_seed(&first.hamiltonian0(), u2, options.seed_tolerance)?;
    same_grid(first.grid(), u2.value.grid())?;
    let hb2 = sys.hbar() * sys.hbar();
    let mass = Arc::clone(first.mass());
    let (p, dp) = (u1.value.values(), u1.slope.values());
    let (q, dq) = (u2.value.values(), u2.slope.values());
    let n = p.len();
    let c = 2.0 / hb2 * (u1.energy - u2.energy);
    let b: Vec<f64> = (0..n).map(|i| p[i] * dq[i] - dp[i] * q[i]).collect();
    let k: Vec<f64> = q.iter().map(|v| c * v).collect();
    let k1: Vec<f64> = dq.iter().map(|v| c * v).collect();
    let peak = |v: &[f64]| v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let scale = peak(p) * peak(dq) + peak(dp) * peak(q);
    if peak(&b) <= 1e-10 * scale {
        return Err(Error::DegenerateWronskian);
    }
    let b1: Vec<f64> = (0..n)
        .map(|i| mass.m1[i] / mass.m[i] * b[i] + mass.m[i] * p[i] * k[i])
        .collect();
    assemble(
        first,
        TransformMode::NonConfluent,
        Some(u2.clone()),
        u2.energy,
        None,
        None,
        None,
        [b, b1, k, k1],
        options,
    )
}

/// Confluent transform with `w = (1 − d) + d ∫_{anchor}^x u₁²`.
///
/// `anchor` must lie on the grid; `None` uses the left end.
pub fn confluent_transform(
    sys: &LadderSystem,
    u1: &Seed,
    d: f64,
    anchor: Option<f64>,
    options: &SusyOptions,
) -> Result<SecondOrderTransform> {
    if !(0.0..=1.0).contains(&d) {
        return Err(invalid(format!("confluent parameter d must lie in [0, 1], got {d}")));
    }
    let first = first_order_transform(sys, u1, options)?;
    let grid = Arc::clone(first.grid());
    let anchor = anchor.unwrap_or(grid.x_min());
    let big_i = seed_square_integral(u1, anchor)?;
    let mass = Arc::clone(first.mass());
    let (p, dp) = (u1.value.values(), u1.slope.values());
    let n = p.len();
    let w: Vec<f64> = big_i.values().iter().map(|v| (1.0 - d) + d * v).collect();
    let b: Vec<f64> = (0..n).map(|i| mass.m[i] * w[i]).collect();
    let b1: Vec<f64> = (0..n)
        .map(|i| mass.m1[i] * w[i] + mass.m[i] * d * p[i] * p[i])
        .collect();
    let k: Vec<f64> = p.iter().map(|v| d * v).collect();
    let k1: Vec<f64> = dp.iter().map(|v| d * v).collect();
    let eps = u1.energy;
    assemble(
        first,
        TransformMode::Confluent,
        None,
        eps,
        Some(d),
        Some(sampled(&grid, w)),
        Some(anchor),
        [b, b1, k, k1],
        options,
    )
}

fn seed_square_integral(u1: &Seed, anchor: f64) -> Result<SampledFunction> {
    let sq = u1.value.map(|_, v| v * v);
    integrate_cumulative(&sq, anchor)
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    first: FirstOrderTransform,
    mode: TransformMode,
    seed2: Option<Seed>,
    epsilon2: f64,
    d_parameter: Option<f64>,
    w_function: Option<SampledFunction>,
    anchor: Option<f64>,
    [b, b1, k, k1]: [Vec<f64>; 4],
    options: &SusyOptions,
) -> Result<SecondOrderTransform> {
    let grid = Arc::clone(first.grid());
    let mass = Arc::clone(first.mass());
    let hbar = first.hbar();
    let (p, dp) = (first.seed.value.values(), first.seed.slope.values());
    let v0 = first.base_potential().values();
    let n = p.len();

    let mut v2 = vec![0.0; n];
    let mut log_v2 = vec![0.0; n];
    for i in 0..n {
        let (m, m1) = (mass.m[i], mass.m1[i]);
        let r = m.sqrt();
        let dq = 0.5 * m1 / r * p[i] * k[i] / b[i]
            + r * (dp[i] * k[i] + p[i] * k1[i]) / b[i]
            - r * p[i] * k[i] * b1[i] / (b[i] * b[i]);
        v2[i] = v0[i] - hbar * hbar * dq / r;
        log_v2[i] = -0.5 * m1 / m + b1[i] / b[i] - dp[i] / p[i];
    }
    let w2: Vec<f64> = (0..n)
        .map(|i| -hbar / (2.0 * mass.m[i]).sqrt() * log_v2[i])
        .collect();

    let singularities = SingularityReport::from_denominator(&grid, &b, options.mask_radius);
    let sequential = riccati_partner(&mass, hbar, first.partner_potential.values(), &w2, epsilon2);
    let keep1 = first.singularities.keep(1);
    let keep2 = singularities.keep(1);
    let sequential_discrepancy = (0..n)
        .filter(|&i| keep1[i] && keep2[i])
        .map(|i| (sequential[i] - v2[i]).abs() / v2[i].abs().max(1.0))
        .fold(0.0f64, f64::max);

    Ok(SecondOrderTransform {
        first,
        mode,
        seed2,
        epsilon2,
        d_parameter,
        w_function,
        anchor,
        superpotential2: sampled(&grid, w2),
        partner_potential2: sampled(&grid, v2),
        singularities,
        sequential_discrepancy,
        b,
        b1,
        k,
        k1,
    })
}

impl SecondOrderTransform {
    pub fn grid(&self) -> &Arc<Grid> {
        self.first.grid()
    }

    pub fn hamiltonian2(&self) -> Hamiltonian {
        Hamiltonian::from_samples(
            Arc::clone(self.first.mass()),
            self.partner_potential2.clone(),
            self.first.hbar(),
        )
    }

    /// `A₂φ = (ħ/√(2m)) φ' + W₂φ` on functions of `H₁`.
    pub fn apply_a2(&self, phi: &SampledFunction) -> Result<SampledFunction> {
        first_order_apply(&self.first, &self.superpotential2, phi, false)
    }

    /// `A₂†χ = −(ħ/√(2m)) χ' + (W₂ + ħ m'/(2√2 m^{3/2})) χ` on functions of `H₂`.
    pub fn apply_a2_dagger(&self, chi: &SampledFunction) -> Result<SampledFunction> {
        first_order_apply(&self.first, &self.superpotential2, chi, true)
    }

    /// `χ ∝ A₂A₁ψ` for an eigenpair `ψ` of `H₀`, evaluated without dividing by `u₁`.
    pub fn map_state(&self, state: &Seed) -> Result<MappedState> {
        same_grid(self.grid(), state.value.grid())?;
        let hb2 = self.first.hbar() * self.first.hbar();
        let e1 = self.first.epsilon1;
        let mass = self.first.mass();
        let (p, dp) = (self.first.seed.value.values(), self.first.seed.slope.values());
        let (s, ds) = (state.value.values(), state.slope.values());
        let n = p.len();
        let mut value = vec![0.0; n];
        let mut slope = vec![0.0; n];
        for i in 0..n {
            let a = p[i] * ds[i] - dp[i] * s[i];
            let a1 = mass.m1[i] / mass.m[i] * a
                + 2.0 * mass.m[i] / hb2 * (e1 - state.energy) * p[i] * s[i];
            let (b, b1, k, k1) = (self.b[i], self.b1[i], self.k[i], self.k1[i]);
            value[i] = 2.0 / hb2 * (e1 - state.energy) * s[i] - k * a / b;
            slope[i] = 2.0 / hb2 * (e1 - state.energy) * ds[i] - (k1 * a + k * a1) / b
                + k * a * b1 / (b * b);
        }
        let peak = value.iter().filter(|v| v.is_finite()).fold(0.0f64, |m, v| m.max(v.abs()));
        let input = state.value.max_abs() * (2.0 / hb2) * (e1 - state.energy).abs().max(1.0);
        if peak <= 1e-8 * input {
            let g = self.grid();
            return Ok(MappedState {
                function: SampledFunction::zeros(g),
                slope: SampledFunction::zeros(g),
                energy: state.energy,
                null: true,
            });
        }
        Ok(finish_mapped(
            self.grid(),
            &self.singularities,
            Pair {
                value,
                slope,
                energy: state.energy,
            },
        ))
    }

    /// `χ_{ε₂} ∝ m u₁ / B`: `m u₁ / W(u₁,u₂)` or `u₁ / w`.
    pub fn missing_state(&self) -> Result<MissingState> {
        let p = self.first.seed.value.values();
        let mass = self.first.mass();
        let raw: Vec<f64> = (0..p.len()).map(|i| mass.m[i] * p[i] / self.b[i]).collect();
        missing_state(
            self.grid(),
            &self.singularities,
            raw,
            self.epsilon2,
            &self.hamiltonian2(),
        )
    }

    /// `v₂ = m^{-1/2} B / u₁`, the seed of the second step (unnormalised).
    pub fn intermediate_seed(&self) -> SampledFunction {
        let p = self.first.seed.value.values();
        let mass = self.first.mass();
        sampled(
            self.grid(),
            (0..p.len()).map(|i| self.b[i] / (mass.m[i].sqrt() * p[i])).collect(),
        )
    }
}

fn first_order_apply(
    first: &FirstOrderTransform,
    w: &SampledFunction,
    f: &SampledFunction,
    dagger: bool,
) -> Result<SampledFunction> {
    same_grid(first.grid(), f.grid())?;
    let d = crate::numerics::derivative(f, 1)?;
    let mass = first.mass();
    let hbar = first.hbar();
    Ok(sampled(
        first.grid(),
        (0..f.len())
            .map(|i| {
                let (m, m1) = (mass.m[i], mass.m1[i]);
                let k = hbar / (2.0 * m).sqrt();
                if dagger {
                    -k * d.values()[i]
                        + (w.values()[i] + hbar * m1 / (2.0 * std::f64::consts::SQRT_2 * m * m.sqrt()))
                            * f.values()[i]
                } else {
                    k * d.values()[i] + w.values()[i] * f.values()[i]
                }
            })
            .collect(),
    ))
}

/// Missing state of a non-confluent transform.
pub fn missing_state_second(t: &SecondOrderTransform) -> Result<MissingState> {
    if t.mode != TransformMode::NonConfluent {
        return Err(Error::WrongMode);
    }
    t.missing_state()
}

/// Threshold of the confluent parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalD {
    /// Smallest `d` for which `w` acquires a zero, bisected to `1e-6`; `1` when
    /// no `d ∈ [0, 1]` is singular.
    pub d: f64,
    /// `1/(1 − min I)` over the grid, the closed-form scan value.
    pub scan: f64,
    pub regular_everywhere: bool,
}

/// `w = 0` ⟺ `d = 1/(1 − I(x))`; the threshold is the smallest such `d` in `[0, 1]`.
pub fn critical_d(sys: &LadderSystem, u1: &Seed, anchor: Option<f64>, options: &SusyOptions) -> Result<CriticalD> {
    validate_seed(&sys.hamiltonian(), u1, options.seed_tolerance)?;
    let grid = sys.grid();
    let anchor = anchor.unwrap_or(grid.x_min());
    let big_i = seed_square_integral(u1, anchor)?;
    let i_min = big_i.values().iter().copied().fold(f64::INFINITY, f64::min);
    let scan = if i_min <= 0.0 { 1.0 / (1.0 - i_min) } else { 1.0 };
    let has_pole = |d: f64| {
        let w: Vec<f64> = big_i.values().iter().map(|v| (1.0 - d) + d * v).collect();
        !SingularityReport::from_denominator(grid, &w, options.mask_radius).is_regular()
    };
    if !has_pole(1.0) {
        return Ok(CriticalD {
            d: 1.0,
            scan,
            regular_everywhere: true,
        });
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > 1e-7 {
        let mid = 0.5 * (lo + hi);
        if has_pole(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(CriticalD {
        d: 0.5 * (lo + hi),
        scan,
        regular_everywhere: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ladder::build_ladder_system;
    use crate::numerics::build_grid;
    use crate::profile::MassProfile;

    fn oscillator() -> LadderSystem {
        let g = build_grid(-10.0, 10.0, 2001).unwrap();
        build_ladder_system(&MassProfile::constant(1.0).unwrap(), 1.0, 1.0, &g).unwrap()
    }

    #[test]
    fn equal_energies_need_the_confluent_route() {
        let sys = oscillator();
        let s = Seed::from_state(&sys.nth_state(1).unwrap());
        assert_eq!(
            second_order_nonconfluent(&sys, &s, &s, &SusyOptions::default()).unwrap_err(),
            Error::WrongAlgorithm(1.5)
        );
    }

    #[test]
    fn d_zero_is_the_identity() {
        let sys = oscillator();
        let s = Seed::from_state(&sys.nth_state(0).unwrap());
        let t = confluent_transform(&sys, &s, 0.0, None, &SusyOptions::default()).unwrap();
        assert_eq!(t.partner_potential2.values(), sys.potential().values());
        assert!(t.singularities.is_regular());
        assert!(missing_state_second(&t).is_err());
    }

    #[test]
    fn d_out_of_range_is_rejected() {
        let sys = oscillator();
        let s = Seed::from_state(&sys.nth_state(0).unwrap());
        assert!(confluent_transform(&sys, &s, 1.5, None, &SusyOptions::default()).is_err());
    }

    #[test]
    fn unit_d_from_left_end_is_regular_and_monotone() {
        let sys = oscillator();
        let s = Seed::from_state(&sys.nth_state(0).unwrap());
        let t = confluent_transform(&sys, &s, 1.0, None, &SusyOptions::default()).unwrap();
        assert!(t.singularities.is_regular());
        let w = t.w_function.as_ref().unwrap().values();
        assert!(w.windows(2).all(|p| p[1] >= p[0]));
        assert!(w[0] >= 0.0 && w[w.len() - 1] <= 1.0 + 1e-9);
        let c = critical_d(&sys, &s, None, &SusyOptions::default()).unwrap();
        assert!(c.regular_everywhere);
    }

    #[test]
    fn oscillator_pair_matches_sequential_route() {
        let sys = oscillator();
        let st = sys.states(2).unwrap();
        let t = second_order_nonconfluent(
            &sys,
            &Seed::from_state(&st[1]),
            &Seed::from_state(&st[2]),
            &SusyOptions::default(),
        )
        .unwrap();
        assert!(t.sequential_discrepancy < 1e-8, "{}", t.sequential_discrepancy);
        assert!(t.singularities.is_regular());
        assert!(t.partner_potential2.is_finite());
    }
}
