use std::sync::Arc;

use qosc_core::ermakov::{solve_mode, Mode, RhoPoint, Route};
use qosc_core::error::Error;
use qosc_core::invariant::{
    apply_invariant, apply_invariant_with, conservation_check, eigenvalue_check, expectation, Derivative,
    InvariantOperator,
};
use qosc_core::oracle::{propagate, HamiltonianSpec, PropagatorConfig, Scheme};
use qosc_core::params::validation_mesh;
use qosc_core::spectral::Spectral;
use qosc_core::wavefunction::eigenfunction_xi;
use qosc_core::{Complex64, GridSpec, QuantumState};

fn grid() -> GridSpec {
    GridSpec::square(128, 10.0).unwrap()
}

fn static_op(hbar: f64) -> InvariantOperator {
    InvariantOperator::new(0.0, &RhoPoint::STATIC, &RhoPoint::STATIC, hbar)
}

#[test]
fn static_eigenvalues() {
    let g = grid();
    let op = static_op(1.0);
    let xi = |n1, n2| eigenfunction_xi(n1, n2, &RhoPoint::STATIC, &RhoPoint::STATIC, 1.0, &g, 0.0).unwrap();
    assert!(eigenvalue_check(&op, &xi(0, 0), 0, 0) < 1e-10);
    assert!(eigenvalue_check(&op, &xi(3, 2), 3, 2) < 1e-8);
    let s = xi(1, 2);
    let is = apply_invariant(&op, &s).unwrap();
    let diff: f64 = is.amplitudes.iter().zip(&s.amplitudes).map(|(a, b)| (a - b * 4.0).norm_sqr()).sum();
    assert!((diff * g.cell()).sqrt() < 1e-7 * 4.0);
}

#[test]
fn moving_amplitudes_keep_the_spectrum() {
    let g = grid();
    let r1 = RhoPoint::new(1.3, 0.2);
    let r2 = RhoPoint::new(0.9, -0.1);
    let hbar = 0.7;
    let op = InvariantOperator::new(0.0, &r1, &r2, hbar);
    let sp = Spectral::new(g);
    for n1 in 0..4 {
        for n2 in 0..4 {
            let s = eigenfunction_xi(n1, n2, &r1, &r2, hbar, &g, 0.0).unwrap();
            assert!(eigenvalue_check(&op, &s, n1, n2) < 1e-6);
            let q = expectation(&sp, &op, &s);
            assert!((q - hbar * (n1 + n2 + 1) as f64).abs() < 1e-9);
        }
    }
}

#[test]
fn finite_differences_are_a_fallback() {
    let g = GridSpec::square(256, 10.0).unwrap();
    let r = RhoPoint::new(1.1, 0.3);
    let op = InvariantOperator::new(0.0, &r, &r, 1.0);
    let s = eigenfunction_xi(1, 0, &r, &r, 1.0, &g, 0.0).unwrap();
    let is = apply_invariant_with(&Spectral::new(g), &op, &s, Derivative::FiniteDifference);
    let err: f64 = is.amplitudes.iter().zip(&s.amplitudes).map(|(a, b)| (a - b * 2.0).norm_sqr()).sum();
    assert!((err * g.cell()).sqrt() < 1e-4);
}

#[test]
fn action_is_hermitian() {
    let g = grid();
    let r1 = RhoPoint::new(1.2, 0.4);
    let r2 = RhoPoint::new(0.8, -0.3);
    let op = InvariantOperator::new(0.0, &r1, &r2, 1.0);
    let sp = Spectral::new(g);
    let blob = |x0: f64, k: f64| {
        let mut s = QuantumState::from_fn(g, 0.0, |x, y| {
            Complex64::from_polar((-((x - x0).powi(2) + y * y) / 2.0).exp(), k * x - 0.2 * y * y)
        });
        s.normalize();
        s
    };
    let (a, b) = (blob(0.5, 0.7), blob(-0.4, -0.2));
    let ia = apply_invariant_with(&sp, &op, &a, Derivative::Spectral);
    let ib = apply_invariant_with(&sp, &op, &b, Derivative::Spectral);
    let lhs = a.inner(&ib).unwrap();
    let rhs = ia.inner(&b).unwrap();
    assert!((lhs - rhs).norm() < 1e-8);
}

fn decoupled(w1: fn(f64) -> f64, w2: fn(f64) -> f64) -> HamiltonianSpec {
    HamiltonianSpec::Decoupled { hbar: 1.0, omega1_sq: Arc::new(w1), omega2_sq: Arc::new(w2) }
}

fn conservation_run(w: fn(f64) -> f64, t1: f64, superpose: bool) -> f64 {
    let g = GridSpec::square(64, 8.0).unwrap();
    let times = validation_mesh(0.0, t1, 11);
    let mesh = validation_mesh(0.0, t1, 201);
    let f = |t: f64| Ok(w(t));
    let rho = solve_mode(&f, &mesh, Mode::First, None, Route::Direct).unwrap();
    let r0 = rho.at(0.0).unwrap();
    let mut psi0 = eigenfunction_xi(0, 0, &r0, &r0, 1.0, &g, 0.0).unwrap();
    if superpose {
        let e = eigenfunction_xi(1, 0, &r0, &r0, 1.0, &g, 0.0).unwrap();
        psi0.amplitudes.iter_mut().zip(&e.amplitudes).for_each(|(a, b)| *a += b);
        psi0.normalize();
    }
    let cfg = PropagatorConfig { dt: 1e-3, scheme: Scheme::SplitOperator, output_times: times.clone() };
    let out = propagate(&decoupled(w, w), &psi0, &cfg).unwrap();
    let ops: Vec<_> = times
        .iter()
        .map(|&t| {
            let r = rho.at(t).unwrap();
            InvariantOperator::new(t, &r, &r, 1.0)
        })
        .collect();
    conservation_check(&ops, &out.states).unwrap()
}

#[test]
fn invariant_is_conserved() {
    assert!(conservation_run(|_| 1.0, 2.0, false) < 1e-9);
    assert!(conservation_run(|t| 1.0 + 0.2 * t.sin(), 4.0, false) < 1e-5);
    assert!(conservation_run(|t| 1.0 + 0.2 * t.sin(), 4.0, true) < 1e-5);
}

#[test]
fn mismatched_series_are_rejected() {
    let g = GridSpec::square(32, 6.0).unwrap();
    let s = eigenfunction_xi(0, 0, &RhoPoint::STATIC, &RhoPoint::STATIC, 1.0, &g, 0.0).unwrap();
    let op = static_op(1.0);
    assert!(matches!(conservation_check(&[op, op], std::slice::from_ref(&s)), Err(Error::TimeMeshMismatch(_))));
    let late = InvariantOperator { t: 1.0, ..op };
    assert!(matches!(conservation_check(&[late], &[s]), Err(Error::TimeMeshMismatch(_))));
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn degenerate_levels_share_eigenvalues(
            rho1 in 0.8..1.3f64, rho2 in 0.8..1.3f64, d1 in -0.4..0.4f64, d2 in -0.4..0.4f64, level in 0u32..4,
        ) {
            let g = GridSpec::square(96, 10.0).unwrap();
            let (r1, r2) = (RhoPoint::new(rho1, d1), RhoPoint::new(rho2, d2));
            let op = InvariantOperator::new(0.0, &r1, &r2, 1.0);
            let sp = Spectral::new(g);
            for n1 in 0..=level {
                let s = eigenfunction_xi(n1, level - n1, &r1, &r2, 1.0, &g, 0.0).unwrap();
                prop_assert!((expectation(&sp, &op, &s) - (level + 1) as f64).abs() < 1e-8);
            }
        }
    }
}
