//! Pointwise application of the Ben Daniel–Duke operator
//! `H = −(ħ²/2m) d² + (ħ² m'/2m²) d + V` to sampled functions.

use std::sync::Arc;

use crate::error::Result;
use crate::numerics::{derivative_with, masked_norm, same_grid, Grid, SampledFunction, Stencil};
use crate::profile::{MassProfile, MassSamples};

#[derive(Debug, Clone)]
pub struct Hamiltonian {
    grid: Arc<Grid>,
    hbar: f64,
    mass: Arc<MassSamples>,
    potential: SampledFunction,
}

impl Hamiltonian {
    pub fn new(profile: &MassProfile, potential: SampledFunction, hbar: f64) -> Result<Self> {
        let mass = Arc::new(profile.sample(potential.grid())?);
        Ok(Self::from_samples(mass, potential, hbar))
    }

    pub(crate) fn from_samples(mass: Arc<MassSamples>, potential: SampledFunction, hbar: f64) -> Self {
        Self {
            grid: Arc::clone(potential.grid()),
            hbar,
            mass,
            potential,
        }
    }

    /// Same kinetic term, different potential.
    pub fn with_potential(&self, potential: SampledFunction) -> Result<Self> {
        same_grid(&self.grid, potential.grid())?;
        Ok(Self::from_samples(Arc::clone(&self.mass), potential, self.hbar))
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn potential(&self) -> &SampledFunction {
        &self.potential
    }

    pub fn mass(&self) -> &MassSamples {
        &self.mass
    }

    /// `Hψ` with three-point differences. The two end samples use one-sided
    /// stencils and should be excluded from residual norms.
    pub fn apply(&self, psi: &SampledFunction) -> Result<SampledFunction> {
        self.apply_with(psi, Stencil::Central2)
    }

    pub fn apply_with(&self, psi: &SampledFunction, stencil: Stencil) -> Result<SampledFunction> {
        same_grid(&self.grid, psi.grid())?;
        let d1 = derivative_with(psi, 1, stencil)?;
        let d2 = derivative_with(psi, 2, stencil)?;
        Ok(self.combine(psi, &d1, &d2))
    }

    /// `Hψ` given `ψ'` and `ψ''` explicitly.
    pub(crate) fn combine(
        &self,
        psi: &SampledFunction,
        d1: &SampledFunction,
        d2: &SampledFunction,
    ) -> SampledFunction {
        let hb2 = self.hbar * self.hbar;
        let values = (0..psi.len())
            .map(|i| {
                let m = self.mass.m[i];
                -hb2 / (2.0 * m) * d2.values()[i]
                    + hb2 * self.mass.m1[i] / (2.0 * m * m) * d1.values()[i]
                    + self.potential.values()[i] * psi.values()[i]
            })
            .collect();
        SampledFunction::new(Arc::clone(&self.grid), values).expect("lengths agree")
    }

    /// Scale-free eigen-residual `‖(H − E)ψ‖ / (‖Hψ‖ + |E|‖ψ‖)` over `keep`.
    pub fn eigen_residual(
        &self,
        psi: &SampledFunction,
        energy: f64,
        keep: &[bool],
        stencil: Stencil,
    ) -> Result<f64> {
        let h_psi = self.apply_with(psi, stencil)?;
        let diff: Vec<f64> = h_psi
            .values()
            .iter()
            .zip(psi.values())
            .map(|(a, b)| a - energy * b)
            .collect();
        let step = self.grid.spacing();
        let num = masked_norm(&diff, keep, step);
        let den = masked_norm(h_psi.values(), keep, step)
            + energy.abs() * masked_norm(psi.values(), keep, step);
        Ok(if den > 0.0 { num / den } else { num })
    }
}

/// `true` everywhere except `margin` samples at each end.
pub fn interior_mask(n: usize, margin: usize) -> Vec<bool> {
    (0..n).map(|i| i >= margin && i + margin < n).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::build_grid;

    #[test]
    fn oscillator_ground_state() {
        let g = build_grid(-8.0, 8.0, 1601).unwrap();
        let v = SampledFunction::from_fn(&g, |x| 0.5 * x * x);
        let h = Hamiltonian::new(&MassProfile::constant(1.0).unwrap(), v, 1.0).unwrap();
        let psi = SampledFunction::from_fn(&g, |x| (-0.5 * x * x).exp());
        let out = h.apply(&psi).unwrap();
        let keep = interior_mask(g.len(), 1);
        let worst = (0..g.len())
            .filter(|&i| keep[i])
            .map(|i| (out.values()[i] - 0.5 * psi.values()[i]).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-4, "{worst}");
        let r = h.eigen_residual(&psi, 0.5, &interior_mask(g.len(), 2), Stencil::Central4).unwrap();
        assert!(r < 1e-8, "{r}");
    }
}
