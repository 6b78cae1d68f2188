#![allow(dead_code)]

use qosc_core::schedule::{ParameterSchedule, Schedule};
use qosc_core::{Complex64, GridSpec, QuantumState};

/// Constant mass and trap, constant field and both couplings.
pub fn coupled_constant() -> ParameterSchedule {
    let mut s = ParameterSchedule::isotropic();
    s.field = Schedule::constant(0.5);
    s.static_coupling = Schedule::constant(0.1);
    s.dynamic_coupling = Schedule::constant(0.05);
    s
}

/// No field, modulated mass, both couplings. The mixing angle stays at zero.
pub fn mass_driven() -> ParameterSchedule {
    let mut s = ParameterSchedule::isotropic();
    s.mass = Schedule::sinusoidal(1.0, 0.3, 1.0);
    s.static_coupling = Schedule::constant(0.1);
    s.dynamic_coupling = Schedule::constant(0.05);
    s
}

/// Modulated field without couplings.
pub fn field_driven() -> ParameterSchedule {
    let mut s = ParameterSchedule::isotropic();
    s.field = Schedule::sinusoidal(0.5, 0.05, 1.0);
    s
}

pub fn gaussian(grid: GridSpec, x0: f64, y0: f64, sx: f64, sy: f64, kx: f64) -> QuantumState {
    let mut s = QuantumState::from_fn(grid, 0.0, |x, y| {
        let r = -((x - x0) / sx).powi(2) / 2.0 - ((y - y0) / sy).powi(2) / 2.0;
        Complex64::from_polar(r.exp(), kx * x + 0.3 * x * y)
    });
    s.normalize();
    s
}

pub fn centroid(s: &QuantumState) -> (f64, f64) {
    let g = s.grid;
    let (mut mx, mut my, mut n) = (0.0, 0.0, 0.0);
    for iy in 0..g.ny {
        for ix in 0..g.nx {
            let p = s.at(ix, iy).norm_sqr();
            mx += p * g.x(ix);
            my += p * g.y(iy);
            n += p;
        }
    }
    (mx / n, my / n)
}
