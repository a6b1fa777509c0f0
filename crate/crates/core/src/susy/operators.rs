//! Residual oracles for intertwining and factorisation identities, and the
//! composed third- and fifth-order ladder operators of the partners.

use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::ladder::LadderSystem;
use crate::numerics::{masked_norm, same_grid, Grid, SampledFunction};

use super::first::FirstOrderTransform;
use super::sampled;
use super::second::SecondOrderTransform;

/// An operator on sampled functions.
pub type Operator<'a> = dyn Fn(&SampledFunction) -> Result<SampledFunction> + 'a;

/// Gaussians `exp(−(x − c)²/2σ²)`, one per `(c, σ)`. Keep `c ± 8σ` inside
/// the region of interest so they vanish to round-off outside it.
pub fn test_bumps(grid: &Arc<Grid>, bumps: &[(f64, f64)]) -> Vec<SampledFunction> {
    bumps
        .iter()
        .map(|&(c, s)| {
            SampledFunction::from_fn(grid, |x| {
                let t = (x - c) / s;
                (-0.5 * t * t).exp()
            })
        })
        .collect()
}

fn check_tests(tests: &[SampledFunction], min: usize) -> Result<()> {
    if tests.len() < min {
        return Err(invalid(format!("need at least {min} test functions, got {}", tests.len())));
    }
    Ok(())
}

/// `max ‖H_b(Af) − A(H_a f)‖ / ‖Af‖` over the tests, on `keep`.
pub fn intertwining_residual(
    h_a: &Operator,
    h_b: &Operator,
    a: &Operator,
    tests: &[SampledFunction],
    keep: &[bool],
) -> Result<f64> {
    check_tests(tests, 3)?;
    let mut worst = 0.0f64;
    for f in tests {
        let af = a(f)?;
        let lhs = h_b(&af)?;
        let rhs = a(&h_a(f)?)?;
        let diff: Vec<f64> = lhs.values().iter().zip(rhs.values()).map(|(p, q)| p - q).collect();
        let h = f.grid().spacing();
        let den = masked_norm(af.values(), keep, h);
        if den == 0.0 {
            return Err(Error::DegenerateFunction("A annihilates a test function".into()));
        }
        worst = worst.max(masked_norm(&diff, keep, h) / den);
    }
    Ok(worst)
}

/// `max ‖(P + ε − H) f‖ / ‖f‖` over the tests, on `keep`, where `P` is a
/// product such as `A†A`.
pub fn factorization_residual(
    product: &Operator,
    epsilon: f64,
    h: &Operator,
    tests: &[SampledFunction],
    keep: &[bool],
) -> Result<f64> {
    check_tests(tests, 1)?;
    let mut worst = 0.0f64;
    for f in tests {
        let p = product(f)?;
        let hf = h(f)?;
        let diff: Vec<f64> = (0..f.len())
            .map(|i| p.values()[i] + epsilon * f.values()[i] - hf.values()[i])
            .collect();
        let step = f.grid().spacing();
        let den = masked_norm(f.values(), keep, step);
        if den == 0.0 {
            return Err(Error::DegenerateFunction("zero test function".into()));
        }
        worst = worst.max(masked_norm(&diff, keep, step) / den);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy)]
pub enum TransformRef<'a> {
    First(&'a FirstOrderTransform),
    Second(&'a SecondOrderTransform),
}

/// Result of a composed ladder application.
#[derive(Debug, Clone)]
pub struct PartnerChain {
    pub function: SampledFunction,
    /// Samples unaffected by poles of any factor or by the one-sided end stencils.
    pub keep: Vec<bool>,
}

/// `L₁± = A₁ L± A₁†` or `L₂± = A₂A₁ L± A₁†A₂†`, applied factor by factor.
pub fn partner_ladder_apply(
    t: TransformRef,
    sys: &LadderSystem,
    psi: &SampledFunction,
    direction: Direction,
) -> Result<PartnerChain> {
    same_grid(sys.grid(), psi.grid())?;
    let ladder = |f: &SampledFunction| match direction {
        Direction::Up => sys.apply_raising(f),
        Direction::Down => sys.apply_lowering(f),
    };
    let (function, steps, masks): (SampledFunction, usize, Vec<&[bool]>) = match t {
        TransformRef::First(first) => {
            let f = first.apply_a(&ladder(&first.apply_a_dagger(psi)?)?)?;
            (f, 3, vec![first.singularities.mask()])
        }
        TransformRef::Second(second) => {
            let first = &second.first;
            let down = first.apply_a_dagger(&second.apply_a2_dagger(psi)?)?;
            let f = second.apply_a2(&first.apply_a(&ladder(&down)?)?)?;
            (f, 5, vec![first.singularities.mask(), second.singularities.mask()])
        }
    };
    let n = psi.len();
    let mut keep: Vec<bool> = (0..n).map(|i| i >= steps && i + steps < n).collect();
    for mask in masks {
        for (i, &m) in mask.iter().enumerate() {
            if m {
                let lo = i.saturating_sub(steps);
                let hi = (i + steps).min(n - 1);
                keep[lo..=hi].iter_mut().for_each(|k| *k = false);
            }
        }
    }
    let values = function
        .values()
        .iter()
        .zip(&keep)
        .map(|(&v, &k)| if k && v.is_finite() { v } else { 0.0 })
        .collect();
    Ok(PartnerChain {
        function: sampled(psi.grid(), values),
        keep,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ladder::build_ladder_system;
    use crate::numerics::build_grid;
    use crate::profile::MassProfile;
    use crate::susy::{first_order_transform, Seed, SusyOptions};

    #[test]
    fn identity_intertwines_exactly() {
        let g = build_grid(-5.0, 5.0, 501).unwrap();
        let sys = build_ladder_system(&MassProfile::constant(1.0).unwrap(), 1.0, 1.0, &g).unwrap();
        let h = |f: &SampledFunction| sys.bdd_apply(f);
        let id = |f: &SampledFunction| Ok(f.clone());
        let tests = test_bumps(&g, &[(-1.0, 0.5), (0.0, 0.5), (1.0, 0.4)]);
        let keep = vec![true; g.len()];
        assert_eq!(intertwining_residual(&h, &h, &id, &tests, &keep).unwrap(), 0.0);
    }

    #[test]
    fn oscillator_intertwining_and_factorization() {
        let g = build_grid(-10.0, 10.0, 4001).unwrap();
        let sys = build_ladder_system(&MassProfile::constant(1.0).unwrap(), 1.0, 1.0, &g).unwrap();
        let t = first_order_transform(&sys, &Seed::from_state(&sys.nth_state(0).unwrap()), &SusyOptions::default())
            .unwrap();
        let h0 = t.hamiltonian0();
        let h1 = t.hamiltonian1();
        let tests = test_bumps(&g, &[(-1.0, 0.8), (0.5, 1.0), (2.0, 0.8)]);
        let keep = crate::hamiltonian::interior_mask(g.len(), 3);
        let r = intertwining_residual(
            &|f: &SampledFunction| h0.apply(f),
            &|f: &SampledFunction| h1.apply(f),
            &|f: &SampledFunction| t.apply_a(f),
            &tests,
            &keep,
        )
        .unwrap();
        assert!(r < 1e-4, "{r}");
        let f = factorization_residual(
            &|f: &SampledFunction| t.apply_a_dagger(&t.apply_a(f)?),
            t.epsilon1,
            &|f: &SampledFunction| h0.apply(f),
            &tests,
            &keep,
        )
        .unwrap();
        assert!(f < 1e-4, "{f}");
    }
}
