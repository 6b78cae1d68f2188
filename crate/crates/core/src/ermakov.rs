//! Classical solutions of the decoupled modes, the auxiliary amplitude
//! equation `rho'' + Omega^2 rho = rho^-3`, and the mode phases.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Quantity, Result};
use crate::interp::{fornberg, quintic_hermite, window};
use crate::ode::{self, OdeOptions};
use crate::params::derive_all;
use crate::schedule::ParameterSchedule;

/// A squared-frequency function of time.
pub type FrequencyFn<'a> = &'a (dyn Fn(f64) -> Result<f64> + Sync);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    First,
    Second,
}

impl Mode {
    pub fn index(self) -> u8 {
        match self {
            Mode::First => 1,
            Mode::Second => 2,
        }
    }
}

/// Which construction produces the amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    #[default]
    Direct,
    Pinney,
}

/// `Omega_i^2(t)` for the given schedule at a fixed mixing angle.
pub fn decoupled_frequency_sq(sched: &ParameterSchedule, theta: f64, mode: Mode, t: f64) -> Result<f64> {
    let dp = derive_all(sched, t, theta)?;
    Ok(match mode {
        Mode::First => dp.big_omega1_sq,
        Mode::Second => dp.big_omega2_sq,
    })
}

/// Two solutions of `x'' + Omega^2 x = 0` on a mesh.
#[derive(Debug, Clone)]
pub struct ClassicalPair {
    pub mesh: Vec<f64>,
    pub u: Vec<f64>,
    pub u_dot: Vec<f64>,
    pub v: Vec<f64>,
    pub v_dot: Vec<f64>,
    pub omega_sq: Vec<f64>,
    pub wronskian: f64,
}

impl ClassicalPair {
    /// Largest relative departure of `u v' - v u'` from its initial value.
    pub fn wronskian_drift(&self) -> f64 {
        (0..self.mesh.len())
            .map(|i| self.u[i] * self.v_dot[i] - self.v[i] * self.u_dot[i])
            .map(|w| ((w - self.wronskian) / self.wronskian).abs())
            .fold(0.0, f64::max)
    }
}

fn sample(omega_sq: FrequencyFn, mesh: &[f64]) -> Result<Vec<f64>> {
    mesh.iter().map(|&t| omega_sq(t)).collect()
}

/// Integrates both classical solutions from `ics = [(u0, u0'), (v0, v0')]`.
pub fn integrate_classical(omega_sq: FrequencyFn, mesh: &[f64], ics: [(f64, f64); 2]) -> Result<ClassicalPair> {
    let [(u0, du0), (v0, dv0)] = ics;
    let wronskian = u0 * dv0 - v0 * du0;
    let scale = (u0.abs() + du0.abs()) * (v0.abs() + dv0.abs());
    if !(wronskian.abs() > 1e-14 * scale) {
        return Err(Error::DependentSolutions { wronskian });
    }
    let ys = ode::integrate(
        |t, y: &[f64; 4]| {
            let w2 = omega_sq(t)?;
            Ok([y[1], -w2 * y[0], y[3], -w2 * y[2]])
        },
        mesh,
        [u0, du0, v0, dv0],
        OdeOptions::default(),
    )?;
    Ok(ClassicalPair {
        mesh: mesh.to_vec(),
        u: ys.iter().map(|y| y[0]).collect(),
        u_dot: ys.iter().map(|y| y[1]).collect(),
        v: ys.iter().map(|y| y[2]).collect(),
        v_dot: ys.iter().map(|y| y[3]).collect(),
        omega_sq: sample(omega_sq, mesh)?,
        wronskian,
    })
}

/// Amplitude, its rate, and the running integral of `rho^-2` at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoPoint {
    pub rho: f64,
    pub rho_dot: f64,
    pub phase_integral: f64,
}

impl RhoPoint {
    pub const STATIC: RhoPoint = RhoPoint { rho: 1.0, rho_dot: 0.0, phase_integral: 0.0 };

    pub fn new(rho: f64, rho_dot: f64) -> Self {
        Self { rho, rho_dot, phase_integral: 0.0 }
    }
}

/// Amplitude of one decoupled mode on a mesh.
#[derive(Debug, Clone)]
pub struct ErmakovSolution {
    pub mesh: Vec<f64>,
    pub rho: Vec<f64>,
    pub rho_dot: Vec<f64>,
    pub omega_sq: Vec<f64>,
    /// `∫_{t0}^{t} rho^-2`.
    pub phase_integral: Vec<f64>,
    pub mode: Mode,
}

impl ErmakovSolution {
    fn rho_ddot(&self, i: usize) -> f64 {
        self.rho[i].powi(-3) - self.omega_sq[i] * self.rho[i]
    }

    pub fn start(&self) -> f64 {
        self.mesh[0]
    }

    pub fn end(&self) -> f64 {
        self.mesh[self.mesh.len() - 1]
    }

    /// Interpolated amplitude and phase integral at any time in the mesh.
    pub fn at(&self, t: f64) -> Result<RhoPoint> {
        let (start, end) = (self.start(), self.end());
        let slack = 1e-12 * (1.0 + end.abs().max(start.abs()));
        if !(t >= start - slack && t <= end + slack) {
            return Err(Error::OutsideMesh { t, start, end });
        }
        let t = t.clamp(start, end);
        let n = self.mesh.len();
        let k = self.mesh.partition_point(|&x| x < t);
        if k < n && self.mesh[k] == t {
            return Ok(RhoPoint { rho: self.rho[k], rho_dot: self.rho_dot[k], phase_integral: self.phase_integral[k] });
        }
        let i = k.saturating_sub(1).min(n - 2);
        let (t0, t1) = (self.mesh[i], self.mesh[i + 1]);
        let node = |j: usize| {
            let (r, dr) = (self.rho[j], self.rho_dot[j]);
            ([r, dr, self.rho_ddot(j)], [self.phase_integral[j], r.powi(-2), -2.0 * dr * r.powi(-3)])
        };
        let (rho_l, ph_l) = node(i);
        let (rho_r, ph_r) = node(i + 1);
        let (rho, rho_dot) = quintic_hermite(t0, t1, rho_l, rho_r, t);
        let (phase_integral, _) = quintic_hermite(t0, t1, ph_l, ph_r, t);
        Ok(RhoPoint { rho, rho_dot, phase_integral })
    }

    /// `|rho'' + Omega^2 rho - rho^-3|` at mesh point `i`, with `rho''` from
    /// 7-point differences (one-sided 8-point near the ends).
    pub fn residual_at(&self, i: usize) -> f64 {
        let n = self.mesh.len();
        if n < 7 {
            return 0.0;
        }
        let interior = i >= 3 && i + 3 < n;
        let w = window(i, if interior { 7 } else { 8 }, n);
        let weights = fornberg(self.mesh[i], &self.mesh[w.clone()], 2);
        let dd: f64 = weights[2].iter().zip(&self.rho[w]).map(|(a, r)| a * r).sum();
        (dd + self.omega_sq[i] * self.rho[i] - self.rho[i].powi(-3)).abs()
    }

    /// Largest [`residual_at`](Self::residual_at) over the mesh.
    pub fn ermakov_residual(&self) -> f64 {
        (0..self.mesh.len()).map(|i| self.residual_at(i)).fold(0.0, f64::max)
    }

    /// Index of the mesh point closest to `t`.
    pub fn nearest(&self, t: f64) -> usize {
        let k = self.mesh.partition_point(|&x| x < t).min(self.mesh.len() - 1);
        if k > 0 && (t - self.mesh[k - 1]).abs() <= (self.mesh[k] - t).abs() {
            k - 1
        } else {
            k
        }
    }
}

/// Builds `rho = sqrt(u^2 + v^2 / W^2)` from a classical pair.
pub fn pinney_compose(pair: &ClassicalPair, mode: Mode) -> ErmakovSolution {
    let w2 = pair.wronskian * pair.wronskian;
    let n = pair.mesh.len();
    let mut rho = Vec::with_capacity(n);
    let mut rho_dot = Vec::with_capacity(n);
    let mut phase = Vec::with_capacity(n);
    let mut last_angle = 0.0;
    let mut offset = 0.0;
    for i in 0..n {
        let (u, du, v, dv) = (pair.u[i], pair.u_dot[i], pair.v[i], pair.v_dot[i]);
        let r = (u * u + v * v / w2).sqrt();
        rho.push(r);
        rho_dot.push((u * du + v * dv / w2) / r);
        // d/dt atan2(v/W, u) = rho^-2
        let angle = (v / pair.wronskian).atan2(u);
        if i > 0 && angle < last_angle - std::f64::consts::PI {
            offset += 2.0 * std::f64::consts::PI;
        }
        last_angle = angle;
        phase.push(angle + offset);
    }
    let p0 = phase[0];
    phase.iter_mut().for_each(|p| *p -= p0);
    ErmakovSolution {
        mesh: pair.mesh.clone(),
        rho,
        rho_dot,
        omega_sq: pair.omega_sq.clone(),
        phase_integral: phase,
        mode,
    }
}

/// Canonical classical initial data for a given amplitude start: `W = 1`.
pub fn pinney_initial_conditions(rho0: f64, rho_dot0: f64) -> [(f64, f64); 2] {
    [(rho0, rho_dot0), (0.0, 1.0 / rho0)]
}

/// Integrates the auxiliary equation directly, with the phase integral as a third component.
pub fn integrate_ermakov_direct(
    omega_sq: FrequencyFn,
    mesh: &[f64],
    rho0: f64,
    rho_dot0: f64,
    mode: Mode,
) -> Result<ErmakovSolution> {
    ode::check_mesh(mesh)?;
    if !(rho0 > 0.0) {
        return Err(Error::RhoNonPositive { t: mesh[0], rho: rho0 });
    }
    let floor = 1e-8 * rho0;
    let ys = ode::integrate(
        |t, y: &[f64; 3]| {
            let r = y[0];
            if !(r > floor) {
                return Err(Error::RhoNonPositive { t, rho: r });
            }
            let inv2 = 1.0 / (r * r);
            Ok([y[1], inv2 / r - omega_sq(t)? * r, inv2])
        },
        mesh,
        [rho0, rho_dot0, 0.0],
        OdeOptions::default(),
    )?;
    Ok(ErmakovSolution {
        mesh: mesh.to_vec(),
        rho: ys.iter().map(|y| y[0]).collect(),
        rho_dot: ys.iter().map(|y| y[1]).collect(),
        omega_sq: sample(omega_sq, mesh)?,
        phase_integral: ys.iter().map(|y| y[2]).collect(),
        mode,
    })
}

/// `-(n1 + 1/2) ∫ rho1^-2 - (n2 + 1/2) ∫ rho2^-2` from the mesh start to `t`.
pub fn phase_alpha(n1: u32, n2: u32, rho1: &ErmakovSolution, rho2: &ErmakovSolution, t: f64) -> Result<f64> {
    let i1 = rho1.at(t)?.phase_integral;
    let i2 = rho2.at(t)?.phase_integral;
    Ok(alpha_from_integrals(n1, n2, i1, i2))
}

pub fn alpha_from_integrals(n1: u32, n2: u32, i1: f64, i2: f64) -> f64 {
    -(n1 as f64 + 0.5) * i1 - (n2 as f64 + 0.5) * i2
}

/// Instantaneous vacuum amplitude `Omega^(-1/2)` with zero rate.
pub fn default_initial(omega_sq0: f64, mode: Mode, t0: f64) -> Result<(f64, f64)> {
    if !(omega_sq0 > 0.0) {
        let quantity = match mode {
            Mode::First => Quantity::BigOmega1,
            Mode::Second => Quantity::BigOmega2,
        };
        return Err(Error::NegativeRadicand { quantity, t: t0, value: omega_sq0 });
    }
    Ok((omega_sq0.powf(-0.25), 0.0))
}

/// Solves one mode by the chosen route, from explicit or default initial data.
pub fn solve_mode(
    omega_sq: FrequencyFn,
    mesh: &[f64],
    mode: Mode,
    initial: Option<(f64, f64)>,
    route: Route,
) -> Result<ErmakovSolution> {
    ode::check_mesh(mesh)?;
    let (rho0, rho_dot0) = match initial {
        Some(ic) => ic,
        None => default_initial(omega_sq(mesh[0])?, mode, mesh[0])?,
    };
    match route {
        Route::Direct => integrate_ermakov_direct(omega_sq, mesh, rho0, rho_dot0, mode),
        Route::Pinney => {
            if !(rho0 > 0.0) {
                return Err(Error::RhoNonPositive { t: mesh[0], rho: rho0 });
            }
            let pair = integrate_classical(omega_sq, mesh, pinney_initial_conditions(rho0, rho_dot0))?;
            Ok(pinney_compose(&pair, mode))
        }
    }
}

/// Both decoupled amplitudes of a scenario at a fixed mixing angle.
#[derive(Debug, Clone)]
pub struct ModePair {
    pub theta: f64,
    pub first: ErmakovSolution,
    pub second: ErmakovSolution,
}

impl ModePair {
    pub fn at(&self, t: f64) -> Result<(RhoPoint, RhoPoint)> {
        Ok((self.first.at(t)?, self.second.at(t)?))
    }
}

/// Solves both modes of `sched` on `mesh`, in parallel.
pub fn solve_pair(
    sched: &ParameterSchedule,
    theta: f64,
    mesh: &[f64],
    initial: [Option<(f64, f64)>; 2],
    route: Route,
) -> Result<ModePair> {
    let one = |mode: Mode, ic| {
        let f = move |t| decoupled_frequency_sq(sched, theta, mode, t);
        solve_mode(&f, mesh, mode, ic, route)
    };
    let (first, second) = rayon::join(|| one(Mode::First, initial[0]), || one(Mode::Second, initial[1]));
    Ok(ModePair { theta, first: first?, second: second? })
}
