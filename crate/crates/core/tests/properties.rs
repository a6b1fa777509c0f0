use std::f64::consts::PI;

use pdmsusy::numerics::{
    complete_elliptic_e, derivative, incomplete_elliptic_e, integrate_cumulative, wronskian,
};
use pdmsusy::profile::{v_from_veff, veff_from_ordering};
use pdmsusy::*;
use proptest::prelude::*;

fn wave(grid: &std::sync::Arc<Grid>, amp: f64, k: f64, phase: f64) -> SampledFunction {
    SampledFunction::from_fn(grid, |x| amp * (k * x + phase).sin() * (-0.1 * x * x).exp())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn veff_round_trip(m0 in 1.05f64..4.0, alpha in -2.0f64..1.0, beta in -2.0f64..1.0, hbar in 0.3f64..2.0) {
        let profile = MassProfile::cosine(m0).unwrap();
        let grid = build_grid(-5.0, 5.0, 257).unwrap();
        let ordering = OrderingParameters::new(alpha, beta, -1.0 - alpha - beta).unwrap();
        let v = SampledFunction::from_fn(&grid, |x| 0.5 * x * x);
        let veff = veff_from_ordering(&v, &profile, &ordering, hbar).unwrap();
        let back = v_from_veff(&veff, &profile, &ordering, hbar).unwrap();
        for (a, b) in v.values().iter().zip(back.values()) {
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn bdd_ordering_needs_no_correction(m0 in 1.05f64..4.0) {
        let profile = MassProfile::cosine(m0).unwrap();
        let grid = build_grid(-5.0, 5.0, 129).unwrap();
        let v = SampledFunction::from_fn(&grid, |x| x.cos());
        let veff = veff_from_ordering(&v, &profile, &OrderingParameters::ben_daniel_duke(), 1.0).unwrap();
        prop_assert_eq!(v.values(), veff.values());
    }

    #[test]
    fn wronskian_is_antisymmetric_and_bilinear(
        k1 in 0.2f64..3.0, k2 in 0.2f64..3.0, k3 in 0.2f64..3.0,
        p1 in 0.0f64..PI, p2 in 0.0f64..PI,
        a in -3.0f64..3.0, b in -3.0f64..3.0,
    ) {
        let grid = build_grid(-6.0, 6.0, 601).unwrap();
        let (f, g, h) = (wave(&grid, 1.0, k1, p1), wave(&grid, 0.7, k2, p2), wave(&grid, 1.3, k3, 0.0));
        let fg = wronskian(&f, &g).unwrap();
        let gf = wronskian(&g, &f).unwrap();
        for (x, y) in fg.values().iter().zip(gf.values()) {
            prop_assert_eq!(*x, -*y);
        }
        let combo = f.zip_with(&g, |u, v| a * u + b * v).unwrap();
        let lhs = wronskian(&combo, &h).unwrap();
        let fh = wronskian(&f, &h).unwrap();
        let gh = wronskian(&g, &h).unwrap();
        let scale = 1.0 + fh.max_abs() * a.abs() + gh.max_abs() * b.abs();
        for i in 0..lhs.len() {
            let rhs = a * fh.values()[i] + b * gh.values()[i];
            prop_assert!((lhs.values()[i] - rhs).abs() <= 1e-13 * scale);
        }
    }

    #[test]
    fn derivative_undoes_integration(amp in 0.1f64..5.0, k in 0.2f64..2.0, phase in 0.0f64..PI) {
        let grid = build_grid(-5.0, 5.0, 2001).unwrap();
        let f = wave(&grid, amp, k, phase);
        let back = derivative(&integrate_cumulative(&f, 0.0).unwrap(), 1).unwrap();
        let h = grid.spacing();
        let bound = h * h * amp * (k + 1.0).powi(2);
        for i in 1..f.len() - 1 {
            prop_assert!((back.values()[i] - f.values()[i]).abs() <= bound);
        }
    }

    #[test]
    fn elliptic_is_quasi_periodic_and_odd(phi in -10.0f64..10.0, k in -2.0f64..1.0) {
        let full = complete_elliptic_e(k).unwrap();
        let e = incomplete_elliptic_e(phi, k).unwrap();
        let shifted = incomplete_elliptic_e(phi + PI, k).unwrap();
        let scale = 1.0 + e.abs();
        prop_assert!((shifted - e - 2.0 * full).abs() <= 1e-12 * scale);
        prop_assert!((incomplete_elliptic_e(-phi, k).unwrap() + e).abs() <= 1e-12 * scale);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn ladder_energies_are_equidistant(m0 in 1.2f64..3.0, delta in 0.5f64..2.0) {
        let profile = MassProfile::cosine(m0).unwrap();
        let cfg = LadderConfig::new(delta);
        let grid = auto_widened_grid(&profile, &cfg, 2001, 3, 1e-3).unwrap();
        let sys = LadderSystem::build(&profile, &cfg, &grid).unwrap();
        let states = sys.states(3).unwrap();
        for (k, s) in states.iter().enumerate() {
            prop_assert!((s.energy - (k as f64 + 0.5) * delta).abs() < 1e-12);
        }
        let psi0 = sys.apply_lowering(sys.psi0()).unwrap();
        let interior = &psi0.values()[2..psi0.len() - 2];
        let peak = sys.psi0().max_abs();
        prop_assert!(interior.iter().all(|v| v.abs() < 1e-3 * peak));
    }

    #[test]
    fn confluent_identity_at_zero_d(m0 in 1.2f64..3.0) {
        let profile = MassProfile::cosine(m0).unwrap();
        let cfg = LadderConfig::new(1.0);
        let grid = auto_widened_grid(&profile, &cfg, 2001, 3, 1e-3).unwrap();
        let sys = LadderSystem::build(&profile, &cfg, &grid).unwrap();
        let u1 = Seed::from_state_raw(&sys.nth_state(1).unwrap());
        let t = confluent_transform(&sys, &u1, 0.0, Some(0.0), &SusyOptions::default()).unwrap();
        let v0 = sys.potential();
        for (a, b) in v0.values().iter().zip(t.partner_potential2.values()) {
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn confluent_threshold_does_not_depend_on_mass(m0 in 1.1f64..3.0) {
        let profile = MassProfile::cosine(m0).unwrap();
        let cfg = LadderConfig::new(1.0);
        let grid = auto_widened_grid(&profile, &cfg, 2001, 3, 1e-3).unwrap();
        let sys = LadderSystem::build(&profile, &cfg, &grid).unwrap();
        let u1 = Seed::from_state_raw(&sys.nth_state(1).unwrap());
        let crit = critical_d(&sys, &u1, Some(0.0), &SusyOptions::default()).unwrap();
        prop_assert!((crit.d - 1.0 / (1.0 + PI.sqrt())).abs() < 1e-3, "{:?}", crit);
    }
}
