mod common;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use common::{centroid, coupled_constant, gaussian, mass_driven};
use qosc_core::ermakov::RhoPoint;
use qosc_core::error::Error;
use qosc_core::grid::fidelity;
use qosc_core::params::derive_all;
use qosc_core::unitary::{
    apply_quadratic_phase, apply_rotation, apply_scale, compose_pipeline, inverse_pipeline, pipeline_steps,
    FactorOrder, UnitaryStep,
};
use qosc_core::wavefunction::{eigenfunction_xi, full_wavefunction, transformed_solution_chi, CoefficientVariant};
use qosc_core::{Complex64, GridSpec, QuantumState};

fn grid() -> GridSpec {
    GridSpec::square(128, 10.0).unwrap()
}

fn ground(g: GridSpec) -> QuantumState {
    eigenfunction_xi(0, 0, &RhoPoint::STATIC, &RhoPoint::STATIC, 1.0, &g, 0.0).unwrap()
}

#[test]
fn rotation_examples() {
    let g = grid();
    let psi = gaussian(g, 1.2, -0.7, 0.9, 1.3, 0.8);
    let same = apply_rotation(&psi, 0.0).unwrap();
    assert_eq!(same.amplitudes, psi.amplitudes);

    let gs = ground(g);
    for a in [0.3, 1.9, -2.4] {
        let r = apply_rotation(&gs, a).unwrap();
        assert!(fidelity(&r, &gs).unwrap() >= 1.0 - 1e-9);
    }

    let mut r = psi.clone();
    for _ in 0..4 {
        r = apply_rotation(&r, FRAC_PI_2).unwrap();
    }
    assert!(fidelity(&r, &psi).unwrap() >= 1.0 - 1e-6);
    assert!((r.norm() - 1.0).abs() < 1e-7);
}

#[test]
fn rotation_moves_the_centroid_backwards() {
    let a = 0.7;
    let r = apply_rotation(&gaussian(grid(), 2.0, 1.0, 1.0, 1.0, 0.0), a).unwrap();
    let (x, y) = centroid(&r);
    let (s, c) = a.sin_cos();
    assert!((x - (c * 2.0 + s * 1.0)).abs() < 1e-8);
    assert!((y - (-s * 2.0 + c * 1.0)).abs() < 1e-8);
}

#[test]
fn scale_examples() {
    let g = grid();
    let gs = ground(g);
    assert_eq!(apply_scale(&gs, 1.0, 1.0).unwrap().amplitudes, gs.amplitudes);

    let sq = apply_scale(&gs, 2.0, 1.0).unwrap();
    assert!((sq.norm() - 1.0).abs() < 1e-8);
    let exact = QuantumState::from_fn(g, 0.0, |x, y| {
        Complex64::new((2.0 / std::f64::consts::PI).sqrt() * (-(4.0 * x * x + y * y) / 2.0).exp(), 0.0)
    });
    assert!(sq.max_abs_diff(&exact).unwrap() < 1e-8);

    let psi = gaussian(g, 0.5, -0.3, 1.1, 0.8, 0.6);
    let back = apply_scale(&apply_scale(&psi, 1.3, 0.8).unwrap(), 1.0 / 1.3, 1.0 / 0.8).unwrap();
    assert!(fidelity(&back, &psi).unwrap() >= 1.0 - 1e-7);

    assert!(matches!(apply_scale(&gs, -1.0, 1.0), Err(Error::InvalidGrid(_))));
    assert!(matches!(apply_scale(&gs, 0.2, 1.0), Err(Error::SupportClipped { .. })));
}

#[test]
fn quadratic_phase_examples() {
    let g = grid();
    let psi = gaussian(g, 0.5, -0.3, 1.1, 0.8, 0.6);
    assert_eq!(apply_quadratic_phase(&psi, 0.0, 0.0, 1.0).amplitudes, psi.amplitudes);
    let out = apply_quadratic_phase(&psi, 0.4, -2.0, 0.7);
    for (a, b) in out.amplitudes.iter().zip(&psi.amplitudes) {
        assert!((a.norm() - b.norm()).abs() <= 1e-15 * b.norm());
    }
    let gs = ground(g);
    let chirped = apply_quadratic_phase(&gs, 1.0, -0.5, 1.0);
    let exact = QuantumState::from_fn(g, 0.0, |x, y| {
        let e = Complex64::new(-(x * x + y * y) / 2.0, -(x * x - 0.5 * y * y) / 4.0);
        e.exp() / std::f64::consts::PI.sqrt()
    });
    assert!(chirped.max_abs_diff(&exact).unwrap() < 1e-12);
}

#[test]
fn trivial_pipeline_is_inert() {
    let g = grid();
    let dp = derive_all(&qosc_core::schedule::ParameterSchedule::isotropic(), 0.0, 0.0).unwrap();
    let gs = ground(g);
    let out = compose_pipeline(&gs, &dp, FactorOrder::Canonical).unwrap();
    assert!(fidelity(&out, &gs).unwrap() >= 1.0 - 1e-9);
}

fn generic_chi(g: GridSpec, t: f64, n1: u32, n2: u32) -> (QuantumState, RhoPoint, RhoPoint) {
    let r1 = RhoPoint { rho: 1.2, rho_dot: 0.3, phase_integral: 0.5 };
    let r2 = RhoPoint { rho: 0.9, rho_dot: -0.2, phase_integral: 0.4 };
    (transformed_solution_chi(n1, n2, &r1, &r2, 1.0, &g, t).unwrap(), r1, r2)
}

#[test]
fn pipeline_round_trip_and_norm() {
    let g = grid();
    let mut s = mass_driven();
    s.field = qosc_core::schedule::Schedule::constant(0.5);
    let dp = derive_all(&s, 0.7, 0.4).unwrap();
    let (chi, _, _) = generic_chi(g, 0.7, 1, 1);
    for order in [FactorOrder::Canonical, FactorOrder::Printed] {
        let psi = compose_pipeline(&chi, &dp, order).unwrap();
        assert!((psi.norm() - 1.0).abs() < 5e-7);
        let back = inverse_pipeline(&psi, &dp, order).unwrap();
        assert!(fidelity(&back, &chi).unwrap() >= 1.0 - 1e-6);
    }
}

#[test]
fn closed_form_agrees_with_pipeline_at_any_angle() {
    let g = grid();
    let mut s = mass_driven();
    s.field = qosc_core::schedule::Schedule::constant(0.5);
    for theta in [0.0, 0.4, -1.1] {
        let dp = derive_all(&s, 0.7, theta).unwrap();
        for (n1, n2) in [(0, 0), (1, 0), (0, 1), (2, 1)] {
            let (chi, r1, r2) = generic_chi(g, 0.7, n1, n2);
            for (order, variant) in [
                (FactorOrder::Canonical, CoefficientVariant::Composed),
                (FactorOrder::Printed, CoefficientVariant::Printed),
            ] {
                let piped = compose_pipeline(&chi, &dp, order).unwrap();
                let (closed, _) = full_wavefunction(n1, n2, &dp, &r1, &r2, &g, variant).unwrap();
                assert!(fidelity(&piped, &closed).unwrap() >= 1.0 - 1e-8);
                // same global phase, so the fields agree pointwise too
                assert!(piped.max_abs_diff(&closed).unwrap() < 1e-6);
            }
        }
    }
}

#[test]
fn operator_order_matters() {
    let g = grid();
    let mut s = coupled_constant();
    s.dynamic_coupling = qosc_core::schedule::Schedule::constant(0.3);
    let dp = derive_all(&s, 2.0, 0.6).unwrap();
    let (chi, _, _) = generic_chi(g, 2.0, 1, 0);
    let steps = pipeline_steps(&dp, FactorOrder::Canonical);
    assert!(matches!(steps[0], UnitaryStep::Rotation { .. }));
    assert!(matches!(steps[1], UnitaryStep::Scale { .. }));
    let mut swapped = steps.clone();
    swapped.swap(0, 1);
    let run = |steps: &[UnitaryStep]| steps.iter().try_fold(chi.clone(), |s, st| st.apply(&s)).unwrap();
    let f = fidelity(&run(&steps), &run(&swapped)).unwrap();
    assert!(1.0 - f > 1e-3, "fidelity {f}");
}

#[test]
fn coherent_centroid_follows_the_coordinate_maps() {
    let g = grid();
    let s = coupled_constant();
    let dp = derive_all(&s, 1.3, 0.5).unwrap();
    let (x0, y0) = (1.1, -0.6);
    let chi = gaussian(g, x0, y0, 0.8, 0.8, 0.0);
    let psi = compose_pipeline(&chi, &dp, FactorOrder::Canonical).unwrap();

    let rot = |(x, y): (f64, f64), a: f64| {
        let (s, c) = a.sin_cos();
        (c * x + s * y, -s * x + c * y)
    };
    let (q, p) = dp.lambda1_scales();
    let mut r = rot((x0, y0), 0.5 * dp.theta);
    r = (r.0 / dp.m1.sqrt(), r.1 / dp.m2.sqrt());
    r = rot(r, FRAC_PI_4);
    r = (r.0 / q, r.1 / p);
    r = rot(r, dp.phi);
    let (cx, cy) = centroid(&psi);
    assert!((cx - r.0).abs() < 1e-7 && (cy - r.1).abs() < 1e-7, "{cx} {cy} vs {r:?}");
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    fn small() -> GridSpec {
        GridSpec::square(128, 9.0).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn steps_preserve_the_norm(
            x0 in -1.0..1.0f64, y0 in -1.0..1.0f64, angle in -3.2..3.2f64,
            sx in 0.7..1.4f64, sy in 0.7..1.4f64, cx in -2.0..2.0f64, cy in -2.0..2.0f64,
        ) {
            let psi = gaussian(small(), x0, y0, 1.0, 0.9, 0.2);
            prop_assert!((apply_rotation(&psi, angle).unwrap().norm() - 1.0).abs() < 1e-7);
            prop_assert!((apply_scale(&psi, sx, sy).unwrap().norm() - 1.0).abs() < 1e-7);
            let chirped = apply_quadratic_phase(&psi, cx, cy, 1.0);
            for (a, b) in chirped.amplitudes.iter().zip(&psi.amplitudes) {
                prop_assert!((a.norm() - b.norm()).abs() <= 1e-15 * b.norm());
            }
        }

        #[test]
        fn steps_have_exact_inverses(
            angle in -3.2..3.2f64, sx in 0.7..1.4f64, sy in 0.7..1.4f64, cx in -2.0..2.0f64,
        ) {
            let psi = gaussian(small(), 0.3, -0.4, 1.0, 0.9, 0.2);
            for step in [
                UnitaryStep::Rotation { angle },
                UnitaryStep::Scale { sx, sy },
                UnitaryStep::QuadraticPhase { cx, cy: -cx, hbar: 1.0 },
            ] {
                let back = step.inverse().apply(&step.apply(&psi).unwrap()).unwrap();
                prop_assert!(fidelity(&back, &psi).unwrap() >= 1.0 - 1e-6);
            }
        }
    }
}
