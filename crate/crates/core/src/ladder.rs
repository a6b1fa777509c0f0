//! First-order ladder systems for BDD Hamiltonians.
//!
//! For a mass profile `m` and spacing `Δ`, the operators
//! `L⁻ = (α₁ d + β₁)/√2` and `L⁺ = (−α₁ d + β₁ − α₁')/√2` with
//!
//! ```text
//! α₁ = a m^{-1/2}
//! β₁ = (a/2)(m^{-1/2})' + (aΔ/ħ²) S,        S = ∫ m^{1/2} dx
//! V  = (Δ/ħ)² S²/2 − (ħ²/8)((m^{-1/2})')² − ħ² (m^{-1/2})'' / (4 m^{1/2})
//! ```
//!
//! satisfy `[H, L±] = ±Δ L±`. All coefficients are sampled from analytic
//! expressions; only `S` is integrated, cell by cell, with adaptive quadrature.
//!
//! The tower `ψₙ ∝ (L⁺)ⁿ ψ₀` is generated from `(ψ, ψ')` pairs: `ψ''` comes
//! from the eigenvalue equation rather than from finite differences, so the
//! states carry no accumulated differentiation error.

use std::f64::consts::SQRT_2;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::numerics::quadrature::antiderivative_on_grid;
use crate::numerics::{derivative, same_grid, Grid, SampledFunction};
use crate::profile::{MassProfile, MassSamples};
use crate::solver::{check_boundary_condition, BoundaryCondition, DEFAULT_BC_TOLERANCE};

/// Values above this (after a raising step, before renormalisation) abort the tower.
pub const OVERFLOW_GUARD: f64 = 1e150;

/// Parameters of a ladder system. `a` defaults to `ħ`; the anchor of `S`
/// defaults to the origin when the grid or the profile domain reaches it,
/// otherwise to the left end of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderConfig {
    pub delta_e: f64,
    pub a: Option<f64>,
    pub hbar: f64,
    pub anchor: Option<f64>,
}

impl LadderConfig {
    pub fn new(delta_e: f64) -> Self {
        Self {
            delta_e,
            a: None,
            hbar: 1.0,
            anchor: None,
        }
    }

    pub fn with_a(mut self, a: f64) -> Self {
        self.a = Some(a);
        self
    }

    pub fn with_hbar(mut self, hbar: f64) -> Self {
        self.hbar = hbar;
        self
    }

    pub fn with_anchor(mut self, anchor: f64) -> Self {
        self.anchor = Some(anchor);
        self
    }
}

/// A state of the formal tower `ψₙ ∝ (L⁺)ⁿ ψ₀`.
#[derive(Debug, Clone)]
pub struct FormalState {
    pub index: usize,
    pub energy: f64,
    /// Unit L² norm on the grid.
    pub wavefunction: SampledFunction,
    /// Exact derivative of `wavefunction`.
    pub slope: SampledFunction,
    /// Norm of the unnormalised `(√2 L⁺)ⁿ ψ₀` with `ψ₀ = m^{1/4} exp(−ΔS²/2ħ²)`.
    pub raw_scale: f64,
    pub satisfies_bc: bool,
    pub bc_residual: f64,
}

impl FormalState {
    /// The state in its unnormalised ladder scaling.
    pub fn raw(&self) -> (SampledFunction, SampledFunction) {
        (
            self.wavefunction.scaled(self.raw_scale),
            self.slope.scaled(self.raw_scale),
        )
    }
}

#[derive(Debug, Clone)]
pub struct LadderSystem {
    profile: MassProfile,
    delta_e: f64,
    a: f64,
    hbar: f64,
    anchor: f64,
    grid: Arc<Grid>,
    mass: Arc<MassSamples>,
    alpha1: SampledFunction,
    alpha1_d1: SampledFunction,
    alpha1_d2: SampledFunction,
    beta1: SampledFunction,
    beta1_d1: SampledFunction,
    potential: SampledFunction,
    antiderivative_sqrt_m: SampledFunction,
    psi0: FormalState,
}

/// Ladder system with `ħ = 1` and the default anchor.
pub fn build_ladder_system(
    profile: &MassProfile,
    delta_e: f64,
    a: f64,
    grid: &Arc<Grid>,
) -> Result<LadderSystem> {
    LadderSystem::build(profile, &LadderConfig::new(delta_e).with_a(a), grid)
}

fn default_anchor(profile: &MassProfile, grid: &Grid) -> f64 {
    if grid.contains(0.0) || profile.domain().closure_contains(0.0) {
        0.0
    } else {
        grid.x_min()
    }
}

impl LadderSystem {
    pub fn build(profile: &MassProfile, config: &LadderConfig, grid: &Arc<Grid>) -> Result<Self> {
        let delta = config.delta_e;
        let hbar = config.hbar;
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(invalid(format!("level spacing must be positive, got {delta}")));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(invalid(format!("hbar must be positive, got {hbar}")));
        }
        let a = config.a.unwrap_or(hbar);
        if a == 0.0 || !a.is_finite() {
            return Err(invalid("ladder scale a must be finite and non-zero"));
        }
        let mass = Arc::new(profile.sample(grid)?);
        let anchor = config.anchor.unwrap_or_else(|| default_anchor(profile, grid));
        let s = antiderivative_on_grid(
            |x| profile.mass(x).map(f64::sqrt).unwrap_or(f64::NAN),
            grid,
            anchor,
        )?;
        if !s.is_finite() {
            return Err(Error::Domain(format!(
                "∫√m dx is not finite between anchor {anchor} and the grid"
            )));
        }

        let n = grid.len();
        let (mut g, mut g1, mut g2) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for i in 0..n {
            let (m, m1, m2) = (mass.m[i], mass.m1[i], mass.m2[i]);
            let r = m.sqrt();
            g[i] = 1.0 / r;
            g1[i] = -0.5 * m1 / (m * r);
            g2[i] = 0.75 * m1 * m1 / (m * m * r) - 0.5 * m2 / (m * r);
        }
        let c = a * delta / (hbar * hbar);
        let sv = s.values();
        let build = |f: &dyn Fn(usize) -> f64| {
            SampledFunction::new(Arc::clone(grid), (0..n).map(f).collect()).expect("grid length")
        };
        let alpha1 = build(&|i| a * g[i]);
        let alpha1_d1 = build(&|i| a * g1[i]);
        let alpha1_d2 = build(&|i| a * g2[i]);
        let beta1 = build(&|i| 0.5 * a * g1[i] + c * sv[i]);
        let beta1_d1 = build(&|i| 0.5 * a * g2[i] + c * mass.m[i].sqrt());
        let potential = build(&|i| {
            let t = delta / hbar * sv[i];
            0.5 * t * t - hbar * hbar / 8.0 * g1[i] * g1[i] - hbar * hbar * g2[i] / (4.0 * mass.m[i].sqrt())
        });

        // ψ₀ = m^{1/4} exp(−ΔS²/2ħ²), ψ₀'/ψ₀ = m'/4m − (Δ/ħ²) S √m
        let k = delta / (hbar * hbar);
        let raw0 = build(&|i| mass.m[i].powf(0.25) * (-0.5 * k * sv[i] * sv[i]).exp());
        let raw0_slope = build(&|i| {
            raw0.values()[i] * (mass.m1[i] / (4.0 * mass.m[i]) - k * sv[i] * mass.m[i].sqrt())
        });

        let mut sys = Self {
            profile: profile.clone(),
            delta_e: delta,
            a,
            hbar,
            anchor,
            grid: Arc::clone(grid),
            mass,
            alpha1,
            alpha1_d1,
            alpha1_d2,
            beta1,
            beta1_d1,
            potential,
            antiderivative_sqrt_m: s,
            psi0: FormalState {
                index: 0,
                energy: 0.5 * delta,
                wavefunction: raw0.clone(),
                slope: raw0_slope.clone(),
                raw_scale: 1.0,
                satisfies_bc: false,
                bc_residual: f64::NAN,
            },
        };
        sys.psi0 = sys.finish_state(0, raw0, raw0_slope, 1.0)?;
        Ok(sys)
    }

    pub fn profile(&self) -> &MassProfile {
        &self.profile
    }

    pub fn delta_e(&self) -> f64 {
        self.delta_e
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn mass(&self) -> &Arc<MassSamples> {
        &self.mass
    }

    pub fn alpha1(&self) -> &SampledFunction {
        &self.alpha1
    }

    pub fn alpha1_derivative(&self) -> &SampledFunction {
        &self.alpha1_d1
    }

    pub fn beta1(&self) -> &SampledFunction {
        &self.beta1
    }

    pub fn potential(&self) -> &SampledFunction {
        &self.potential
    }

    pub fn antiderivative_sqrt_m(&self) -> &SampledFunction {
        &self.antiderivative_sqrt_m
    }

    pub fn psi0(&self) -> &SampledFunction {
        &self.psi0.wavefunction
    }

    pub fn e0(&self) -> f64 {
        0.5 * self.delta_e
    }

    /// `H₀` with the ladder potential.
    pub fn hamiltonian(&self) -> Hamiltonian {
        Hamiltonian::from_samples(Arc::clone(&self.mass), self.potential.clone(), self.hbar)
    }

    fn finish_state(
        &self,
        index: usize,
        value: SampledFunction,
        slope: SampledFunction,
        scale_so_far: f64,
    ) -> Result<FormalState> {
        let norm = crate::numerics::norm(&value);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Instability {
                step: index,
                detail: format!("state norm is {norm}"),
            });
        }
        let wavefunction = value.scaled(1.0 / norm);
        let slope = slope.scaled(1.0 / norm);
        let (satisfies_bc, bc_residual) = check_boundary_condition(
            &wavefunction,
            &self.profile,
            &BoundaryCondition::dirichlet(),
            DEFAULT_BC_TOLERANCE,
        )?;
        Ok(FormalState {
            index,
            energy: (index as f64 + 0.5) * self.delta_e,
            wavefunction,
            slope,
            raw_scale: scale_so_far * norm,
            satisfies_bc,
            bc_residual,
        })
    }

    /// One raising step on an eigenpair `(ψ, ψ')` at `energy`, returning the
    /// unnormalised `(√2 L⁺ψ, (√2 L⁺ψ)')`.
    fn raise_exact(
        &self,
        psi: &SampledFunction,
        slope: &SampledFunction,
        energy: f64,
    ) -> (Vec<f64>, Vec<f64>) {
        let n = self.grid.len();
        let hb2 = self.hbar * self.hbar;
        let (p, dp) = (psi.values(), slope.values());
        let (al, al1, al2) = (self.alpha1.values(), self.alpha1_d1.values(), self.alpha1_d2.values());
        let (be, be1) = (self.beta1.values(), self.beta1_d1.values());
        let v = self.potential.values();
        let mut out = vec![0.0; n];
        let mut out_slope = vec![0.0; n];
        for i in 0..n {
            let (m, m1) = (self.mass.m[i], self.mass.m1[i]);
            let d2 = m1 / m * dp[i] + 2.0 * m / hb2 * (v[i] - energy) * p[i];
            out[i] = -al[i] * dp[i] + (be[i] - al1[i]) * p[i];
            out_slope[i] = -al1[i] * dp[i] - al[i] * d2
                + (be1[i] - al2[i]) * p[i]
                + (be[i] - al1[i]) * dp[i];
        }
        (out, out_slope)
    }

    /// States `ψ₀ … ψ_{n_max}`.
    pub fn states(&self, n_max: usize) -> Result<Vec<FormalState>> {
        let mut out = Vec::with_capacity(n_max + 1);
        out.push(self.psi0.clone());
        for n in 1..=n_max {
            let prev = &out[n - 1];
            let (v, s) = self.raise_exact(&prev.wavefunction, &prev.slope, prev.energy);
            let peak = v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
            if !(peak.is_finite() && peak < OVERFLOW_GUARD) || s.iter().any(|x| !x.is_finite()) {
                return Err(Error::Instability {
                    step: n,
                    detail: format!("raised state reached magnitude {peak:e}"),
                });
            }
            let value = SampledFunction::new(Arc::clone(&self.grid), v)?;
            let slope = SampledFunction::new(Arc::clone(&self.grid), s)?;
            let scale = prev.raw_scale;
            out.push(self.finish_state(n, value, slope, scale)?);
        }
        Ok(out)
    }

    pub fn nth_state(&self, n: usize) -> Result<FormalState> {
        Ok(self.states(n)?.pop().expect("n + 1 states"))
    }

    /// `(α₁ψ' + β₁ψ)/√2` with a finite-difference `ψ'`.
    pub fn apply_lowering(&self, psi: &SampledFunction) -> Result<SampledFunction> {
        same_grid(&self.grid, psi.grid())?;
        let d = derivative(psi, 1)?;
        let (al, be) = (self.alpha1.values(), self.beta1.values());
        let values = (0..psi.len())
            .map(|i| (al[i] * d.values()[i] + be[i] * psi.values()[i]) / SQRT_2)
            .collect();
        SampledFunction::new(Arc::clone(&self.grid), values)
    }

    /// `(−α₁ψ' + (β₁ − α₁')ψ)/√2` with a finite-difference `ψ'`.
    pub fn apply_raising(&self, psi: &SampledFunction) -> Result<SampledFunction> {
        same_grid(&self.grid, psi.grid())?;
        let d = derivative(psi, 1)?;
        let (al, al1, be) = (self.alpha1.values(), self.alpha1_d1.values(), self.beta1.values());
        let values = (0..psi.len())
            .map(|i| (-al[i] * d.values()[i] + (be[i] - al1[i]) * psi.values()[i]) / SQRT_2)
            .collect();
        SampledFunction::new(Arc::clone(&self.grid), values)
    }

    /// `Hψ` with the ladder potential.
    pub fn bdd_apply(&self, psi: &SampledFunction) -> Result<SampledFunction> {
        self.hamiltonian().apply(psi)
    }

    /// Largest `‖[L⁻,L⁺]f − (a²Δ/ħ²) f‖ / ‖f‖` over the tests, on points at
    /// least three cells from either end.
    pub fn commutator_residual(&self, tests: &[SampledFunction]) -> Result<f64> {
        if tests.is_empty() {
            return Err(invalid("commutator residual needs at least one test function"));
        }
        let c = self.a * self.a * self.delta_e / (self.hbar * self.hbar);
        let keep = crate::hamiltonian::interior_mask(self.grid.len(), 3);
        let h = self.grid.spacing();
        let mut worst = 0.0f64;
        for f in tests {
            let lu = self.apply_lowering(&self.apply_raising(f)?)?;
            let ul = self.apply_raising(&self.apply_lowering(f)?)?;
            let diff: Vec<f64> = (0..f.len())
                .map(|i| lu.values()[i] - ul.values()[i] - c * f.values()[i])
                .collect();
            let den = crate::numerics::masked_norm(f.values(), &keep, h);
            if den == 0.0 {
                return Err(Error::DegenerateFunction("zero test function".into()));
            }
            worst = worst.max(crate::numerics::masked_norm(&diff, &keep, h) / den);
        }
        Ok(worst)
    }
}

/// Symmetric (or right-only, for half-line profiles) grid on which
/// `ψ_{n_max}` has decayed below `1e-10` of its peak at every truncated end.
///
/// The half-width starts at 4 and grows by 25 % per round at fixed point
/// count. Half-line profiles start at `epsilon`; tabulated profiles use their
/// data range without widening.
pub fn auto_widened_grid(
    profile: &MassProfile,
    config: &LadderConfig,
    n_points: usize,
    n_max: usize,
    epsilon: f64,
) -> Result<Arc<Grid>> {
    let dom = profile.domain();
    if dom.lower.is_finite() && dom.upper.is_finite() {
        let (lo, hi) = if dom.lower_open || dom.upper_open {
            let pad = epsilon.max(0.0);
            (dom.lower + pad, dom.upper - pad)
        } else {
            (dom.lower, dom.upper)
        };
        return Ok(Arc::new(Grid::new(lo, hi, n_points)?));
    }
    let half_line = dom.lower.is_finite();
    let left = if half_line { dom.lower + epsilon } else { 0.0 };
    let mut width = 4.0;
    for _ in 0..40 {
        let grid = if half_line {
            Arc::new(Grid::new(left, left + width, n_points)?)
        } else {
            Arc::new(Grid::new(-width, width, n_points)?)
        };
        let sys = LadderSystem::build(profile, config, &grid)?;
        let top = sys.nth_state(n_max)?;
        let v = top.wavefunction.values();
        let peak = top.wavefunction.max_abs();
        let right_ok = v[v.len() - 1].abs() < 1e-10 * peak;
        let left_ok = half_line || v[0].abs() < 1e-10 * peak;
        if right_ok && left_ok {
            return Ok(grid);
        }
        width *= 1.25;
    }
    Err(Error::Domain(format!(
        "{profile}: state {n_max} does not decay within the widening budget"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{build_grid, inner};

    fn oscillator() -> LadderSystem {
        let g = build_grid(-10.0, 10.0, 2001).unwrap();
        build_ladder_system(&MassProfile::constant(1.0).unwrap(), 1.0, 1.0, &g).unwrap()
    }

    #[test]
    fn constant_mass_is_the_oscillator() {
        let sys = oscillator();
        for (x, v) in sys.grid().points().iter().zip(sys.potential().values()) {
            assert!((v - 0.5 * x * x).abs() < 1e-12);
        }
        let norm0 = std::f64::consts::PI.powf(-0.25);
        let s = sys.states(1).unwrap();
        for (i, &x) in sys.grid().points().iter().enumerate() {
            let g = (-0.5 * x * x).exp();
            assert!((s[0].wavefunction.values()[i] - norm0 * g).abs() < 1e-8);
            assert!((s[1].wavefunction.values()[i] - SQRT_2 * norm0 * x * g).abs() < 1e-8);
        }
        // ‖(√2L⁺)ψ₀‖² = ‖2x e^{-x²/2}‖² = 2√π
        assert!((s[1].raw_scale.powi(2) - 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn energies_are_stored_arithmetic() {
        let s = oscillator().states(5).unwrap();
        for (n, st) in s.iter().enumerate() {
            assert_eq!(st.energy, n as f64 + 0.5);
        }
    }

    #[test]
    fn lowering_annihilates_ground_state() {
        let sys = oscillator();
        let r = sys.apply_lowering(sys.psi0()).unwrap();
        assert!(r.max_abs() < 1e-4 * sys.psi0().max_abs());
    }

    #[test]
    fn cosine_potential_at_origin() {
        let g = build_grid(-8.0, 8.0, 801).unwrap();
        let sys = build_ladder_system(&MassProfile::cosine(1.15).unwrap(), 1.0, 1.0, &g).unwrap();
        let i = g.nearest_index(0.0);
        let expected = -1.0 / (8.0 * 2.15f64.powi(2));
        assert!((sys.potential().values()[i] - expected).abs() < 1e-12);
    }

    #[test]
    fn linear_potential_at_one() {
        let g = build_grid(0.5, 4.5, 401).unwrap();
        let sys = build_ladder_system(&MassProfile::linear(), 1.0, 1.0, &g).unwrap();
        let i = g.nearest_index(1.0);
        assert!((sys.potential().values()[i] - 1.0 / 288.0).abs() < 1e-12);
    }

    #[test]
    fn states_are_orthonormal() {
        let g = build_grid(-9.0, 9.0, 2001).unwrap();
        let sys = build_ladder_system(&MassProfile::cosine(1.15).unwrap(), 1.0, 1.0, &g).unwrap();
        let s = sys.states(4).unwrap();
        for i in 0..s.len() {
            for j in 0..i {
                assert!(inner(&s[i].wavefunction, &s[j].wavefunction).unwrap().abs() < 1e-6);
            }
        }
    }

    #[test]
    fn rejects_bad_spacing() {
        let g = build_grid(-1.0, 1.0, 33).unwrap();
        let p = MassProfile::constant(1.0).unwrap();
        assert!(build_ladder_system(&p, 0.0, 1.0, &g).is_err());
        assert!(build_ladder_system(&p, 1.0, 0.0, &g).is_err());
    }
}
