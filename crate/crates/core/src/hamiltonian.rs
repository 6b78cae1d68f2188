//! Spectral application of the original and decoupled Hamiltonians, and the
//! Schrödinger residual of a sampled trajectory.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{norm_sq, QuantumState};
use crate::interp::{fornberg, window};
use crate::params::eval_cyclotron;
use crate::schedule::ParameterSchedule;
use crate::spectral::Spectral;

/// Coefficients of the original Hamiltonian frozen at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OriginalCoefficients {
    pub mass: f64,
    pub omega_sq: f64,
    pub a: f64,
    pub b: f64,
    pub omega_c: f64,
    pub hbar: f64,
}

impl OriginalCoefficients {
    pub fn at(sched: &ParameterSchedule, t: f64) -> Self {
        let mass = sched.mass.value(t);
        let wc = eval_cyclotron(sched, t);
        let w = sched.trap_frequency.value(t);
        Self {
            mass,
            omega_sq: w * w + 0.25 * wc * wc,
            a: sched.static_coupling.value(t),
            b: sched.dynamic_coupling.value(t),
            omega_c: wc,
            hbar: sched.hbar,
        }
    }

    /// `hbar^2 (kx^2 + ky^2) / 2m + b hbar^2 kx ky`.
    pub fn kinetic(&self, kx: f64, ky: f64) -> f64 {
        let h2 = self.hbar * self.hbar;
        h2 * (kx * kx + ky * ky) / (2.0 * self.mass) + self.b * h2 * kx * ky
    }

    /// `m omega^2 (x^2 + y^2) / 2 + a x y`.
    pub fn potential(&self, x: f64, y: f64) -> f64 {
        0.5 * self.mass * self.omega_sq * (x * x + y * y) + self.a * x * y
    }
}

/// Applies `p^2/2m + m w^2 r^2/2 + a xy + b px py + (wc/2) Lz`.
pub fn apply_original(sp: &Spectral, c: &OriginalCoefficients, psi: &[Complex64]) -> Vec<Complex64> {
    let g = sp.grid;
    let mut kin = psi.to_vec();
    sp.apply_momentum(&mut kin, |kx, ky| Complex64::new(c.kinetic(kx, ky), 0.0));
    let dx = sp.d_dx(psi);
    let dy = sp.d_dy(psi);
    let xs = g.xs();
    // (wc/2) Lz psi = (wc/2)(-i hbar)(x dpsi/dy - y dpsi/dx)
    let lz = Complex64::new(0.0, -0.5 * c.omega_c * c.hbar);
    kin.par_chunks_mut(g.nx).enumerate().for_each(|(iy, row)| {
        let y = g.y(iy);
        for (ix, v) in row.iter_mut().enumerate() {
            let k = iy * g.nx + ix;
            let x = xs[ix];
            *v += psi[k] * c.potential(x, y) + lz * (dy[k] * x - dx[k] * y);
        }
    });
    kin
}

/// Applies `p^2/2 + (W1^2 x^2 + W2^2 y^2)/2`.
pub fn apply_decoupled(sp: &Spectral, hbar: f64, w1_sq: f64, w2_sq: f64, psi: &[Complex64]) -> Vec<Complex64> {
    let g = sp.grid;
    let mut out = psi.to_vec();
    let h2 = hbar * hbar;
    sp.apply_momentum(&mut out, |kx, ky| Complex64::new(0.5 * h2 * (kx * kx + ky * ky), 0.0));
    let xs = g.xs();
    out.par_chunks_mut(g.nx).enumerate().for_each(|(iy, row)| {
        let y = g.y(iy);
        for (ix, v) in row.iter_mut().enumerate() {
            let x = xs[ix];
            *v += psi[iy * g.nx + ix] * (0.5 * (w1_sq * x * x + w2_sq * y * y));
        }
    });
    out
}

/// Fourth-order time derivative of slice `k` from five neighbouring slices.
pub fn time_derivative(states: &[QuantumState], k: usize) -> Result<Vec<Complex64>> {
    if states.len() < 5 {
        return Err(Error::TimeMeshMismatch(format!("need five slices, got {}", states.len())));
    }
    let grid = states[0].grid;
    if states.iter().any(|s| s.grid != grid) {
        return Err(Error::GridMismatch("time slices on different grids".into()));
    }
    let ts: Vec<f64> = states.iter().map(|s| s.t).collect();
    if ts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::TimeMeshMismatch("slice times must increase".into()));
    }
    let w = window(k, 5, states.len());
    let weights = fornberg(ts[k], &ts[w.clone()], 1);
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (wt, s) in weights[1].iter().zip(&states[w]) {
        out.iter_mut().zip(&s.amplitudes).for_each(|(o, a)| *o += a * *wt);
    }
    Ok(out)
}

/// `|| i hbar dpsi/dt - H psi || / || H psi ||` at slice `k`.
pub fn schrodinger_residual(
    states: &[QuantumState],
    k: usize,
    hbar: f64,
    apply_h: impl FnOnce(&QuantumState) -> Vec<Complex64>,
) -> Result<f64> {
    let dt = time_derivative(states, k)?;
    let h = apply_h(&states[k]);
    let ih = Complex64::new(0.0, hbar);
    let diff: Vec<Complex64> = dt.iter().zip(&h).map(|(d, h)| ih * d - h).collect();
    let g = &states[k].grid;
    Ok((norm_sq(&diff, g) / norm_sq(&h, g)).sqrt())
}

/// `<psi|H|psi>` for a state on the spectral grid.
pub fn expectation(state: &QuantumState, h_psi: &[Complex64]) -> f64 {
    crate::grid::inner(&state.amplitudes, h_psi, &state.grid).re
}
