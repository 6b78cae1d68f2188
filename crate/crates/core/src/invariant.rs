//! The quadratic invariant of the decoupled Hamiltonian as a grid operator.

use num_complex::Complex64;

use crate::ermakov::RhoPoint;
use crate::error::{Error, Result};
use crate::grid::{inner, norm_sq, QuantumState};
use crate::spectral::Spectral;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Derivative {
    #[default]
    Spectral,
    /// Fourth-order central differences, zero outside the box.
    FiniteDifference,
}

/// `I = ½[(x/ρ1)² + (ρ1 p_x − ρ1' x)²] + ½[(y/ρ2)² + (ρ2 p_y − ρ2' y)²]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantOperator {
    pub t: f64,
    pub rho1: f64,
    pub rho1_dot: f64,
    pub rho2: f64,
    pub rho2_dot: f64,
    pub hbar: f64,
}

impl InvariantOperator {
    pub fn new(t: f64, r1: &RhoPoint, r2: &RhoPoint, hbar: f64) -> Self {
        Self { t, rho1: r1.rho, rho1_dot: r1.rho_dot, rho2: r2.rho, rho2_dot: r2.rho_dot, hbar }
    }

    /// Eigenvalue of mode `(n1, n2)`: `hbar (n1 + n2 + 1)`.
    pub fn eigenvalue(&self, n1: u32, n2: u32) -> f64 {
        self.hbar * (n1 as f64 + n2 as f64 + 1.0)
    }
}

fn fd4(data: &[Complex64], nx: usize, ny: usize, h: f64, along_x: bool) -> Vec<Complex64> {
    let get = |ix: isize, iy: isize| {
        if ix < 0 || iy < 0 || ix >= nx as isize || iy >= ny as isize {
            Complex64::new(0.0, 0.0)
        } else {
            data[iy as usize * nx + ix as usize]
        }
    };
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    for iy in 0..ny as isize {
        for ix in 0..nx as isize {
            let (dx, dy) = if along_x { (1, 0) } else { (0, 1) };
            let f = |s: isize| get(ix + s * dx, iy + s * dy);
            out[iy as usize * nx + ix as usize] = (f(-2) - f(-1) * 8.0 + f(1) * 8.0 - f(2)) / (12.0 * h);
        }
    }
    out
}

fn derivative(sp: &Spectral, data: &[Complex64], along_x: bool, how: Derivative) -> Vec<Complex64> {
    let g = sp.grid;
    match (how, along_x) {
        (Derivative::Spectral, true) => sp.d_dx(data),
        (Derivative::Spectral, false) => sp.d_dy(data),
        (Derivative::FiniteDifference, true) => fd4(data, g.nx, g.ny, g.dx(), true),
        (Derivative::FiniteDifference, false) => fd4(data, g.nx, g.ny, g.dy(), false),
    }
}

/// `(rho p - rho' q) psi` along one axis, with `p = -i hbar d/dq`.
fn ladder(sp: &Spectral, op: &InvariantOperator, data: &[Complex64], along_x: bool, how: Derivative) -> Vec<Complex64> {
    let g = sp.grid;
    let (rho, rho_dot) = if along_x { (op.rho1, op.rho1_dot) } else { (op.rho2, op.rho2_dot) };
    let d = derivative(sp, data, along_x, how);
    let mih = Complex64::new(0.0, -op.hbar * rho);
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    for iy in 0..g.ny {
        for ix in 0..g.nx {
            let k = iy * g.nx + ix;
            let q = if along_x { g.x(ix) } else { g.y(iy) };
            out[k] = mih * d[k] - data[k] * (rho_dot * q);
        }
    }
    out
}

pub fn apply_invariant_with(
    sp: &Spectral,
    op: &InvariantOperator,
    state: &QuantumState,
    how: Derivative,
) -> QuantumState {
    let g = sp.grid;
    let a1 = ladder(sp, op, &ladder(sp, op, &state.amplitudes, true, how), true, how);
    let a2 = ladder(sp, op, &ladder(sp, op, &state.amplitudes, false, how), false, how);
    let mut out = QuantumState::zeros(g, state.t);
    for iy in 0..g.ny {
        let y = g.y(iy);
        for ix in 0..g.nx {
            let k = iy * g.nx + ix;
            let x = g.x(ix);
            let pot = (x / op.rho1).powi(2) + (y / op.rho2).powi(2);
            out.amplitudes[k] = (state.amplitudes[k] * pot + a1[k] + a2[k]) * 0.5;
        }
    }
    out
}

/// `I psi`, unnormalised, with spectral derivatives.
pub fn apply_invariant(op: &InvariantOperator, state: &QuantumState) -> Result<QuantumState> {
    state.check_boundary(crate::grid::BOUNDARY_LIMIT)?;
    Ok(apply_invariant_with(&Spectral::new(state.grid), op, state, Derivative::Spectral))
}

/// `|| I psi - lambda psi || / || psi ||`.
pub fn eigenvalue_check(op: &InvariantOperator, state: &QuantumState, n1: u32, n2: u32) -> f64 {
    let sp = Spectral::new(state.grid);
    let ipsi = apply_invariant_with(&sp, op, state, Derivative::Spectral);
    let lambda = op.eigenvalue(n1, n2);
    let diff: Vec<Complex64> = ipsi.amplitudes.iter().zip(&state.amplitudes).map(|(a, b)| a - b * lambda).collect();
    (norm_sq(&diff, &state.grid) / state.norm_sq()).sqrt()
}

/// `<psi|I|psi> / <psi|psi>`.
pub fn expectation(sp: &Spectral, op: &InvariantOperator, state: &QuantumState) -> f64 {
    let ipsi = apply_invariant_with(sp, op, state, Derivative::Spectral);
    inner(&state.amplitudes, &ipsi.amplitudes, &state.grid).re / state.norm_sq()
}

/// Largest relative change of `<I>` along a propagated trajectory.
pub fn conservation_check(ops: &[InvariantOperator], states: &[QuantumState]) -> Result<f64> {
    Ok(conservation_series(ops, states)?.into_iter().map(|(_, d)| d).fold(0.0, f64::max))
}

/// `(<I>(t), relative drift)` at every time of the trajectory.
pub fn conservation_series(ops: &[InvariantOperator], states: &[QuantumState]) -> Result<Vec<(f64, f64)>> {
    if ops.len() != states.len() || ops.is_empty() {
        return Err(Error::TimeMeshMismatch(format!("{} operators for {} states", ops.len(), states.len())));
    }
    for (op, s) in ops.iter().zip(states) {
        if s.grid != states[0].grid {
            return Err(Error::GridMismatch("states on different grids".into()));
        }
        if (op.t - s.t).abs() > 1e-9 * (1.0 + s.t.abs()) {
            return Err(Error::TimeMeshMismatch(format!("operator at t = {} paired with state at t = {}", op.t, s.t)));
        }
    }
    let sp = Spectral::new(states[0].grid);
    let values: Vec<f64> = ops.iter().zip(states).map(|(op, s)| expectation(&sp, op, s)).collect();
    let v0 = values[0];
    Ok(values.iter().map(|&v| (v, ((v - v0) / v0).abs())).collect())
}
