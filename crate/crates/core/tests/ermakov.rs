use qosc_core::ermakov::{
    integrate_classical, integrate_ermakov_direct, phase_alpha, pinney_compose, pinney_initial_conditions, solve_mode,
    solve_pair, ErmakovSolution, Mode, Route,
};
use qosc_core::error::Error;
use qosc_core::params::validation_mesh;
use qosc_core::schedule::{ParameterSchedule, Schedule};

fn sup(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn sinusoidal(t: f64) -> qosc_core::Result<f64> {
    Ok(1.0 + 0.2 * t.sin())
}

#[test]
fn classical_pair_step_halving() {
    let coarse = validation_mesh(0.0, 10.0, 101);
    let fine = validation_mesh(0.0, 10.0, 201);
    let a = integrate_classical(&sinusoidal, &coarse, [(1.0, 0.0), (0.0, 1.0)]).unwrap();
    let b = integrate_classical(&sinusoidal, &fine, [(1.0, 0.0), (0.0, 1.0)]).unwrap();
    let every_other: Vec<f64> = b.u.iter().step_by(2).copied().collect();
    assert!(sup(&a.u, &every_other) < 1e-8);
    assert!(a.wronskian_drift() < 1e-9);
}

#[test]
fn pinney_matches_direct_on_three_schedules() {
    let ramp = |t: f64| Ok(1.0 + 0.5 * (1.0 - (-0.3 * t).exp()));
    type Freq<'a> = &'a (dyn Fn(f64) -> qosc_core::Result<f64> + Sync);
    let cases: [(Freq, f64); 3] = [(&|_| Ok(1.7), 0.8), (&sinusoidal, 1.0), (&ramp, 1.2)];
    let mesh = validation_mesh(0.0, 10.0, 1001);
    for (f, rho0) in cases {
        let pair = integrate_classical(f, &mesh, pinney_initial_conditions(rho0, 0.1)).unwrap();
        let p = pinney_compose(&pair, Mode::First);
        let d = integrate_ermakov_direct(f, &mesh, rho0, 0.1, Mode::First).unwrap();
        assert!(sup(&p.rho, &d.rho) < 1e-7);
        assert!(sup(&p.phase_integral, &d.phase_integral) < 1e-7);
        assert!(p.ermakov_residual() < 1e-6);
        assert!(d.ermakov_residual() < 1e-6);
        assert!(p.rho.iter().all(|&r| r > 0.0));
    }
}

#[test]
fn constant_frequency_equilibria() {
    let mesh = validation_mesh(0.0, 10.0, 201);
    let w0 = 1.6f64;
    let ics = pinney_initial_conditions(w0.powf(-0.5), 0.0);
    let pair = integrate_classical(&|_| Ok(w0 * w0), &mesh, ics).unwrap();
    let p = pinney_compose(&pair, Mode::Second);
    assert!(p.rho.iter().all(|r| (r - w0.powf(-0.5)).abs() < 1e-9));
    // cos and sin themselves carry W = w0 and give a breathing amplitude
    let pair = integrate_classical(&|_| Ok(w0 * w0), &mesh, [(1.0, 0.0), (0.0, w0)]).unwrap();
    let p = pinney_compose(&pair, Mode::Second);
    for (t, r) in mesh.iter().zip(&p.rho) {
        let expected = ((w0 * t).cos().powi(2) + ((w0 * t).sin() / w0).powi(2)).sqrt();
        assert!((r - expected).abs() < 1e-9);
    }
    let d = integrate_ermakov_direct(&|_| Ok(4.0), &mesh, 0.5f64.sqrt(), 0.0, Mode::First).unwrap();
    assert!(d.rho.iter().all(|r| (r - 0.5f64.sqrt()).abs() < 1e-12));
}

#[test]
fn oscillating_amplitude_matches_closed_pinney_formula() {
    let mesh = validation_mesh(0.0, 10.0, 401);
    let d = integrate_ermakov_direct(&|_| Ok(1.0), &mesh, 2.0, 0.0, Mode::First).unwrap();
    for (t, r) in mesh.iter().zip(&d.rho) {
        // u(0) = 2, v'(0) = 1/2, so W = 1
        let (u, v) = (2.0 * t.cos(), 0.5 * t.sin());
        assert!((r - (u * u + v * v).sqrt()).abs() < 1e-7);
    }
}

#[test]
fn static_phases() {
    let mesh = validation_mesh(0.0, 2.0, 21);
    let one = integrate_ermakov_direct(&|_| Ok(1.0), &mesh, 1.0, 0.0, Mode::First).unwrap();
    assert!((phase_alpha(0, 0, &one, &one, 2.0).unwrap() + 2.0).abs() < 1e-12);
    assert!((phase_alpha(1, 0, &one, &one, 1.0).unwrap() + 2.0).abs() < 1e-12);
    assert!(matches!(phase_alpha(0, 0, &one, &one, 2.5), Err(Error::OutsideMesh { .. })));
}

fn alpha_on(n: usize) -> f64 {
    let mesh = validation_mesh(0.0, 5.0, n);
    let s = solve_mode(&sinusoidal, &mesh, Mode::First, None, Route::Direct).unwrap();
    phase_alpha(0, 0, &s, &s, 5.0).unwrap()
}

#[test]
fn phase_refines_and_decreases() {
    let (a, b) = (alpha_on(101), alpha_on(201));
    assert!((a - b).abs() < 1e-8);
    let mesh = validation_mesh(0.0, 5.0, 101);
    let s = solve_mode(&sinusoidal, &mesh, Mode::First, None, Route::Pinney).unwrap();
    let alphas: Vec<f64> = mesh.iter().map(|&t| phase_alpha(1, 2, &s, &s, t).unwrap()).collect();
    assert!(alphas.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn dependent_pair_is_rejected() {
    let mesh = validation_mesh(0.0, 1.0, 5);
    let r = integrate_classical(&|_| Ok(1.0), &mesh, [(1.0, 0.5), (2.0, 1.0)]);
    assert!(matches!(r, Err(Error::DependentSolutions { .. })));
}

#[test]
fn interpolation_between_mesh_points() {
    let mesh = validation_mesh(0.0, 6.0, 61);
    let fine = validation_mesh(0.0, 6.0, 601);
    let coarse = solve_mode(&sinusoidal, &mesh, Mode::First, Some((1.3, 0.2)), Route::Direct).unwrap();
    let reference = solve_mode(&sinusoidal, &fine, Mode::First, Some((1.3, 0.2)), Route::Direct).unwrap();
    for (i, &t) in fine.iter().enumerate() {
        let p = coarse.at(t).unwrap();
        assert!((p.rho - reference.rho[i]).abs() < 1e-7);
        assert!((p.rho_dot - reference.rho_dot[i]).abs() < 1e-6);
        assert!((p.phase_integral - reference.phase_integral[i]).abs() < 1e-7);
    }
}

#[test]
fn scenario_modes_start_in_the_instantaneous_vacuum() {
    let mut s = ParameterSchedule::isotropic();
    s.mass = Schedule::sinusoidal(1.0, 0.3, 1.0);
    s.static_coupling = Schedule::constant(0.1);
    s.dynamic_coupling = Schedule::constant(0.05);
    let mesh = validation_mesh(0.0, 4.0, 201);
    let pair = solve_pair(&s, 0.0, &mesh, [None, None], Route::Direct).unwrap();
    let check = |sol: &ErmakovSolution| {
        assert!((sol.rho[0] - sol.omega_sq[0].powf(-0.25)).abs() < 1e-15);
        assert_eq!(sol.rho_dot[0], 0.0);
        assert!(sol.ermakov_residual() < 1e-6);
    };
    check(&pair.first);
    check(&pair.second);
    assert_ne!(pair.first.rho[100], pair.second.rho[100]);
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn wronskian_and_phase_monotonicity(eps in -0.5..0.5f64, w in 0.2..3.0f64, rho0 in 0.5..2.0f64, d0 in -1.0..1.0f64) {
            let f = move |t: f64| Ok(1.0 + eps * (w * t).sin());
            let mesh = validation_mesh(0.0, 8.0, 161);
            let pair = integrate_classical(&f, &mesh, pinney_initial_conditions(rho0, d0)).unwrap();
            prop_assert!(pair.wronskian_drift() < 1e-9);
            let rho = pinney_compose(&pair, Mode::First);
            prop_assert!(rho.rho.iter().all(|&r| r > 0.0));
            prop_assert!(rho.phase_integral.windows(2).all(|p| p[1] > p[0]));
        }
    }
}
