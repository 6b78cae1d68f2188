//! Direct propagation of the time-dependent Schrödinger equation, used as
//! ground truth for the closed-form and pipeline constructions.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{norm_sq, GridSpec, QuantumState};
use crate::hamiltonian::{apply_decoupled, apply_original, OriginalCoefficients};
use crate::schedule::ParameterSchedule;
use crate::spectral::Spectral;

pub use crate::grid::fidelity;

/// Abort threshold on the relative norm change.
pub const NORM_DRIFT_LIMIT: f64 = 1e-5;
/// Bound on `dt * |H| / hbar` (see [`check_stability`]).
pub const STABILITY_LIMIT: f64 = 0.5;

pub type TimeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
#[allow(clippy::large_enum_variant)]
pub enum HamiltonianSpec {
    /// Kinetic, trap, `xy`, `px py` and `Lz` terms with time-dependent coefficients.
    Original(ParameterSchedule),
    /// Two unit-mass oscillators with squared frequencies `omega1_sq(t)`, `omega2_sq(t)`.
    Decoupled { hbar: f64, omega1_sq: TimeFn, omega2_sq: TimeFn },
}

impl std::fmt::Debug for HamiltonianSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HamiltonianSpec::Original(s) => f.debug_tuple("Original").field(s).finish(),
            HamiltonianSpec::Decoupled { hbar, .. } => f.debug_struct("Decoupled").field("hbar", hbar).finish(),
        }
    }
}

impl HamiltonianSpec {
    pub fn hbar(&self) -> f64 {
        match self {
            HamiltonianSpec::Original(s) => s.hbar,
            HamiltonianSpec::Decoupled { hbar, .. } => *hbar,
        }
    }

    /// Applies `H(t)` to a state.
    pub fn apply(&self, sp: &Spectral, t: f64, psi: &[Complex64]) -> Vec<Complex64> {
        match self {
            HamiltonianSpec::Original(s) => apply_original(sp, &OriginalCoefficients::at(s, t), psi),
            HamiltonianSpec::Decoupled { hbar, omega1_sq, omega2_sq } => {
                apply_decoupled(sp, *hbar, omega1_sq(t), omega2_sq(t), psi)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Strang splitting with exact rotation substeps for the angular momentum term.
    #[default]
    SplitOperator,
    /// Crank–Nicolson form solved by fixed-point iteration; slow reference.
    ImplicitMidpoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorConfig {
    pub dt: f64,
    pub scheme: Scheme,
    pub output_times: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    pub t: f64,
    pub steps: usize,
    pub norm: f64,
    pub norm_drift: f64,
}

#[derive(Debug, Clone)]
pub struct Propagation {
    pub states: Vec<QuantumState>,
    pub diagnostics: Vec<StepDiagnostics>,
}

fn step_counts(t0: f64, cfg: &PropagatorConfig) -> Result<Vec<usize>> {
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
        return Err(Error::MeshNotDivisible { t: t0, dt: cfg.dt });
    }
    let mut last = 0usize;
    cfg.output_times
        .iter()
        .map(|&t| {
            let n = ((t - t0) / cfg.dt).round();
            if !(n >= 0.0) || ((t - t0) - n * cfg.dt).abs() > 1e-12 * (1.0 + t.abs()) || (n as usize) < last {
                return Err(Error::MeshNotDivisible { t, dt: cfg.dt });
            }
            last = n as usize;
            Ok(last)
        })
        .collect()
}

/// Rough operator-norm bound for the scheme at hand.
///
/// The split-operator scheme treats the kinetic and rotation factors exactly,
/// so only the position-space phase per step is bounded there. The implicit
/// midpoint iteration contracts only when the full spectral radius is small.
pub fn check_stability(spec: &HamiltonianSpec, grid: &GridSpec, t: f64, dt: f64, scheme: Scheme) -> Result<()> {
    let r2 = grid.x_min.abs().max(grid.x_max.abs()).powi(2) + grid.y_min.abs().max(grid.y_max.abs()).powi(2);
    let kx = std::f64::consts::PI / grid.dx();
    let ky = std::f64::consts::PI / grid.dy();
    let hbar = spec.hbar();
    let (v_max, t_max, lz_max) = match spec {
        HamiltonianSpec::Original(s) => {
            let c = OriginalCoefficients::at(s, t);
            let v = 0.5 * c.mass * c.omega_sq * r2 + 0.5 * c.a.abs() * r2;
            let k = hbar * hbar * ((kx * kx + ky * ky) / (2.0 * c.mass) + c.b.abs() * kx * ky);
            (v, k, 0.5 * c.omega_c.abs() * hbar * r2.sqrt() * kx.max(ky))
        }
        HamiltonianSpec::Decoupled { omega1_sq, omega2_sq, .. } => {
            let v = 0.5 * omega1_sq(t).abs().max(omega2_sq(t).abs()) * r2;
            (v, 0.5 * hbar * hbar * (kx * kx + ky * ky), 0.0)
        }
    };
    let bound = match scheme {
        Scheme::SplitOperator => v_max,
        Scheme::ImplicitMidpoint => v_max + t_max + lz_max,
    };
    let value = dt * bound / hbar;
    if value >= STABILITY_LIMIT || !value.is_finite() {
        return Err(Error::StabilityViolation { value, limit: STABILITY_LIMIT });
    }
    Ok(())
}

struct SplitStepper<'a> {
    spec: &'a HamiltonianSpec,
    sp: Spectral,
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl SplitStepper<'_> {
    fn potential_at(&self, t: f64) -> Box<dyn Fn(f64, f64) -> f64 + Sync + '_> {
        match self.spec {
            HamiltonianSpec::Original(s) => {
                let c = OriginalCoefficients::at(s, t);
                Box::new(move |x, y| c.potential(x, y))
            }
            HamiltonianSpec::Decoupled { omega1_sq, omega2_sq, .. } => {
                let (w1, w2) = (omega1_sq(t), omega2_sq(t));
                Box::new(move |x, y| 0.5 * (w1 * x * x + w2 * y * y))
            }
        }
    }

    /// Multiplies by `exp(-i sum_j w_j V(t_j) / hbar)`.
    fn potential_phase(&self, psi: &mut [Complex64], parts: &[(f64, f64)]) {
        let hbar = self.spec.hbar();
        let vs: Vec<_> = parts.iter().map(|&(t, w)| (self.potential_at(t), w)).collect();
        let nx = self.sp.grid.nx;
        psi.par_chunks_mut(nx).enumerate().for_each(|(iy, row)| {
            let y = self.ys[iy];
            for (a, &x) in row.iter_mut().zip(&self.xs) {
                let phase: f64 = vs.iter().map(|(v, w)| w * v(x, y)).sum();
                *a *= Complex64::from_polar(1.0, -phase / hbar);
            }
        });
    }

    fn kinetic(&self, psi: &mut [Complex64], t: f64, dt: f64) {
        let hbar = self.spec.hbar();
        match self.spec {
            HamiltonianSpec::Original(s) => {
                let c = OriginalCoefficients::at(s, t);
                self.sp.apply_momentum(psi, |kx, ky| Complex64::from_polar(1.0, -c.kinetic(kx, ky) * dt / hbar));
            }
            HamiltonianSpec::Decoupled { .. } => {
                self.sp
                    .apply_momentum(psi, |kx, ky| Complex64::from_polar(1.0, -0.5 * hbar * (kx * kx + ky * ky) * dt));
            }
        }
    }

    /// `exp(-i dt (wc/2) Lz / hbar)` as an exact rotation.
    fn rotation(&self, psi: &mut [Complex64], t: f64, dt: f64) {
        if let HamiltonianSpec::Original(s) = self.spec {
            let wc = crate::params::eval_cyclotron(s, t);
            self.sp.rotate(psi, -0.5 * wc * dt);
        }
    }
}

/// Propagates `psi0` and returns the state at every requested output time.
pub fn propagate(spec: &HamiltonianSpec, psi0: &QuantumState, cfg: &PropagatorConfig) -> Result<Propagation> {
    let t0 = psi0.t;
    let counts = step_counts(t0, cfg)?;
    let grid = psi0.grid;
    let dt = cfg.dt;
    check_stability(spec, &grid, t0 + 0.5 * dt, dt, cfg.scheme)?;
    let n0 = psi0.norm_sq();
    let mut psi = psi0.amplitudes.clone();
    let mut states = Vec::with_capacity(counts.len());
    let mut diagnostics = Vec::with_capacity(counts.len());
    let sp = Spectral::new(grid);
    let stepper = SplitStepper { spec, xs: grid.xs(), ys: grid.ys(), sp };

    let drift_of = |psi: &[Complex64]| ((norm_sq(psi, &grid) - n0) / n0).abs();
    let mut done = 0usize;
    // a potential half-step not yet applied, carried so consecutive halves merge
    let mut pending: Option<f64> = None;
    for (&target, &t_out) in counts.iter().zip(&cfg.output_times) {
        while done < target {
            let t = t0 + done as f64 * dt;
            let tm = t + 0.5 * dt;
            if done % 64 == 63 {
                check_stability(spec, &grid, tm, dt, cfg.scheme)?;
            }
            match cfg.scheme {
                Scheme::SplitOperator => {
                    let mut parts = vec![(tm, 0.5 * dt)];
                    if let Some(tp) = pending.take() {
                        parts.push((tp, 0.5 * dt));
                    }
                    stepper.potential_phase(&mut psi, &parts);
                    stepper.rotation(&mut psi, tm, 0.5 * dt);
                    stepper.kinetic(&mut psi, tm, dt);
                    stepper.rotation(&mut psi, tm, 0.5 * dt);
                    pending = Some(tm);
                }
                Scheme::ImplicitMidpoint => {
                    psi = midpoint_step(spec, &stepper.sp, &psi, tm, dt)?;
                }
            }
            done += 1;
            if done.is_multiple_of(50) && pending.is_none() {
                let d = drift_of(&psi);
                if d > NORM_DRIFT_LIMIT {
                    return Err(Error::NormDrift { drift: d, t: t0 + done as f64 * dt, limit: NORM_DRIFT_LIMIT });
                }
            }
        }
        if let Some(tp) = pending.take() {
            stepper.potential_phase(&mut psi, &[(tp, 0.5 * dt)]);
        }
        let drift = drift_of(&psi);
        if drift > NORM_DRIFT_LIMIT || !drift.is_finite() {
            return Err(Error::NormDrift { drift, t: t_out, limit: NORM_DRIFT_LIMIT });
        }
        let state = QuantumState { grid, t: t_out, amplitudes: psi.clone() };
        diagnostics.push(StepDiagnostics { t: t_out, steps: done, norm: state.norm(), norm_drift: drift });
        states.push(state);
    }
    Ok(Propagation { states, diagnostics })
}

fn midpoint_step(spec: &HamiltonianSpec, sp: &Spectral, psi: &[Complex64], tm: f64, dt: f64) -> Result<Vec<Complex64>> {
    let hbar = spec.hbar();
    let k = Complex64::new(0.0, -0.5 * dt / hbar);
    let h0 = spec.apply(sp, tm, psi);
    let rhs: Vec<Complex64> = psi.iter().zip(&h0).map(|(p, h)| p + k * h).collect();
    let mut next = rhs.clone();
    let scale = norm_sq(psi, &sp.grid).sqrt();
    for _ in 0..500 {
        let h = spec.apply(sp, tm, &next);
        let cand: Vec<Complex64> = rhs.iter().zip(&h).map(|(r, h)| r + k * h).collect();
        let diff: Vec<Complex64> = cand.iter().zip(&next).map(|(a, b)| a - b).collect();
        next = cand;
        if norm_sq(&diff, &sp.grid).sqrt() <= 1e-14 * scale {
            return Ok(next);
        }
    }
    Err(Error::NoConvergence { t: tm })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn output_mesh_must_divide() {
        let cfg = PropagatorConfig { dt: 0.1, scheme: Scheme::SplitOperator, output_times: vec![0.0, 0.05] };
        assert!(matches!(step_counts(0.0, &cfg), Err(Error::MeshNotDivisible { .. })));
        let cfg = PropagatorConfig { dt: 1e-3, scheme: Scheme::SplitOperator, output_times: vec![0.0, 2.5, 5.0] };
        assert_eq!(step_counts(0.0, &cfg).unwrap(), vec![0, 2500, 5000]);
    }
}
