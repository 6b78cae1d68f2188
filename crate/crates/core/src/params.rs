//! The coefficient chain from the raw schedules down to the decoupled
//! frequencies, and the mixing-angle validation.

use serde::Serialize;

use crate::error::{Error, Quantity, Result};
use crate::jet::Jet;
use crate::quadrature::{self, QuadratureOptions};
use crate::schedule::ParameterSchedule;

/// Points in the default mixing-angle validation mesh.
pub const DEFAULT_THETA_MESH: usize = 64;
/// Largest peak-to-peak variation of the mixing angle accepted as constant.
pub const DEFAULT_THETA_TOLERANCE: f64 = 1e-8;

/// Everything the transformation chain needs at one time point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedParameters {
    pub t: f64,
    pub hbar: f64,
    pub phi: f64,
    pub omega_c: f64,
    pub omega: f64,
    pub m_minus: f64,
    pub m_plus: f64,
    pub omega_minus: f64,
    pub omega_plus: f64,
    pub a1: f64,
    pub b1: f64,
    pub m1: f64,
    pub m2: f64,
    pub m1_dot: f64,
    pub m1_ddot: f64,
    pub m2_dot: f64,
    pub m2_ddot: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub c: f64,
    pub theta: f64,
    pub omega_tilde1_sq: f64,
    pub omega_tilde2_sq: f64,
    pub big_omega1_sq: f64,
    pub big_omega2_sq: f64,
    pub delta: f64,
}

impl DerivedParameters {
    pub fn big_omega1(&self) -> f64 {
        self.big_omega1_sq.sqrt()
    }

    pub fn big_omega2(&self) -> f64 {
        self.big_omega2_sq.sqrt()
    }

    /// Scale factors of the first squeeze, `((m-/m+)^{1/4}, (m+/m-)^{1/4})`.
    pub fn lambda1_scales(&self) -> (f64, f64) {
        let r = (self.m_minus / self.m_plus).powf(0.25);
        (r, 1.0 / r)
    }
}

/// `e B / m`.
pub fn eval_cyclotron(sched: &ParameterSchedule, t: f64) -> f64 {
    cyclotron_jet(sched, t).value
}

fn cyclotron_jet(sched: &ParameterSchedule, t: f64) -> Jet {
    sched.field.eval(t).scale(sched.charge) / sched.mass.eval(t)
}

/// Rotation angle `-1/2 ∫_{t0}^t eB/m`, with its first two derivatives.
pub fn eval_phi(sched: &ParameterSchedule, t: f64) -> Result<Jet> {
    if t < sched.t0 {
        return Err(Error::BeforeStart { t, t0: sched.t0 });
    }
    let wc = cyclotron_jet(sched, t);
    let value = if sched.field.is_constant() && sched.mass.is_constant() {
        -0.5 * wc.value * (t - sched.t0)
    } else {
        let (v, _) = quadrature::integrate(|s| eval_cyclotron(sched, s), sched.t0, t, QuadratureOptions::default())?;
        -0.5 * v
    };
    Ok(Jet::new(value, -0.5 * wc.value, -0.5 * wc.d1))
}

fn positive_mass(inv: Jet, quantity: Quantity, t: f64) -> Result<Jet> {
    if inv.value > 0.0 && inv.value.is_finite() {
        Ok(inv.recip())
    } else {
        Err(Error::NonpositiveMass { quantity, t, value: 1.0 / inv.value })
    }
}

fn nonnegative(value: f64, quantity: Quantity, t: f64) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::NegativeRadicand { quantity, t, value })
    }
}

struct Chain {
    phi: Jet,
    omega_c: f64,
    omega_sq: f64,
    m_minus: f64,
    m_plus: f64,
    omega_minus_sq: f64,
    omega_plus_sq: f64,
    a1: f64,
    b1: f64,
    m1: Jet,
    m2: Jet,
    omega1_sq: f64,
    omega2_sq: f64,
    c: f64,
    omega_tilde1_sq: f64,
    omega_tilde2_sq: f64,
}

fn chain(sched: &ParameterSchedule, t: f64) -> Result<Chain> {
    let m = sched.mass.eval(t);
    if !(m.value > 0.0) {
        return Err(Error::NonpositiveMass { quantity: Quantity::Mass, t, value: m.value });
    }
    let varpi = sched.trap_frequency.eval(t);
    let a = sched.static_coupling.eval(t);
    let b = sched.dynamic_coupling.eval(t);
    let wc = cyclotron_jet(sched, t);
    let omega_sq = varpi.square() + wc.square().scale(0.25);
    let phi = eval_phi(sched, t)?;
    let two_phi = phi.scale(2.0);
    let s2 = two_phi.sin();
    let c2 = two_phi.cos();

    let inv_m = m.recip();
    let m_minus = positive_mass(inv_m - b * s2, Quantity::MMinus, t)?;
    let m_plus = positive_mass(inv_m + b * s2, Quantity::MPlus, t)?;
    let stiffness = m * omega_sq;
    let omega_minus_sq = (stiffness - a * s2) / m_minus;
    let omega_plus_sq = (stiffness + a * s2) / m_plus;
    nonnegative(omega_minus_sq.value, Quantity::OmegaMinus, t)?;
    nonnegative(omega_plus_sq.value, Quantity::OmegaPlus, t)?;

    let a1 = a * c2;
    let b1 = b * c2;
    let geo = (m_minus * m_plus).sqrt();
    let inv_geo = geo.recip();
    let m1 = positive_mass(inv_geo - b1, Quantity::M1, t)?;
    let m2 = positive_mass(inv_geo + b1, Quantity::M2, t)?;
    let mean = (geo * (omega_minus_sq + omega_plus_sq)).scale(0.5);
    let omega1_sq = ((mean - a1) / m1).value;
    let omega2_sq = ((mean + a1) / m2).value;
    nonnegative(omega1_sq, Quantity::Omega1, t)?;
    nonnegative(omega2_sq, Quantity::Omega2, t)?;
    let c = 0.5 * geo.value * (omega_minus_sq.value - omega_plus_sq.value);

    let chirp = |mj: Jet| 0.25 * ((mj.d1 / mj.value).powi(2) - 2.0 * mj.d2 / mj.value);
    Ok(Chain {
        phi,
        omega_c: wc.value,
        omega_sq: omega_sq.value,
        m_minus: m_minus.value,
        m_plus: m_plus.value,
        omega_minus_sq: omega_minus_sq.value,
        omega_plus_sq: omega_plus_sq.value,
        a1: a1.value,
        b1: b1.value,
        m1,
        m2,
        omega1_sq,
        omega2_sq,
        c,
        omega_tilde1_sq: omega1_sq + chirp(m1),
        omega_tilde2_sq: omega2_sq + chirp(m2),
    })
}

/// Evaluates the full coefficient chain at `t` for the mixing angle `theta`.
pub fn derive_all(sched: &ParameterSchedule, t: f64, theta: f64) -> Result<DerivedParameters> {
    let ch = chain(sched, t)?;
    let root = (ch.m1.value * ch.m2.value).sqrt();
    let (sh, chalf) = (0.5 * theta).sin_cos();
    let (st, ct) = theta.sin_cos();
    let cross = ch.c * st / root;
    let big1 = ch.omega_tilde1_sq * chalf * chalf + ch.omega_tilde2_sq * sh * sh - cross;
    let big2 = ch.omega_tilde1_sq * sh * sh + ch.omega_tilde2_sq * chalf * chalf + cross;
    nonnegative(big1, Quantity::BigOmega1, t)?;
    nonnegative(big2, Quantity::BigOmega2, t)?;
    let delta = 0.5 * (ch.omega_tilde1_sq - ch.omega_tilde2_sq) * st + ch.c * ct / root;
    Ok(DerivedParameters {
        t,
        hbar: sched.hbar,
        phi: ch.phi.value,
        omega_c: ch.omega_c,
        omega: ch.omega_sq.sqrt(),
        m_minus: ch.m_minus,
        m_plus: ch.m_plus,
        omega_minus: ch.omega_minus_sq.sqrt(),
        omega_plus: ch.omega_plus_sq.sqrt(),
        a1: ch.a1,
        b1: ch.b1,
        m1: ch.m1.value,
        m2: ch.m2.value,
        m1_dot: ch.m1.d1,
        m1_ddot: ch.m1.d2,
        m2_dot: ch.m2.d1,
        m2_ddot: ch.m2.d2,
        omega1: ch.omega1_sq.sqrt(),
        omega2: ch.omega2_sq.sqrt(),
        c: ch.c,
        theta,
        omega_tilde1_sq: ch.omega_tilde1_sq,
        omega_tilde2_sq: ch.omega_tilde2_sq,
        big_omega1_sq: big1,
        big_omega2_sq: big2,
        delta,
    })
}

/// The decoupling angle at a single time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointAngle {
    Angle(f64),
    /// Both the numerator and the denominator of the tangent vanish.
    Degenerate,
}

/// Maps an angle onto `(-pi/2, pi/2]`; `theta` and `theta + pi` decouple equally.
pub fn principal_branch(theta: f64) -> f64 {
    use std::f64::consts::{FRAC_PI_2, PI};
    let mut x = theta.rem_euclid(PI);
    if x > FRAC_PI_2 {
        x -= PI;
    }
    x
}

/// Solves `tan theta = N / D` at `t`, without any constancy requirement.
pub fn pointwise_mixing_angle(sched: &ParameterSchedule, t: f64) -> Result<PointAngle> {
    let ch = chain(sched, t)?;
    let geo = (ch.m_minus * ch.m_plus).sqrt();
    let root = (ch.m1.value * ch.m2.value).sqrt();
    let num = geo * (ch.omega_minus_sq - ch.omega_plus_sq);
    let den = root * (ch.omega_tilde2_sq - ch.omega_tilde1_sq);
    let num_scale = geo * (ch.omega_minus_sq + ch.omega_plus_sq);
    let den_scale = root * (ch.omega_tilde1_sq.abs() + ch.omega_tilde2_sq.abs());
    let num_zero = num.abs() <= 1e-12 * num_scale;
    let den_zero = den.abs() <= 1e-12 * den_scale;
    Ok(match (num_zero, den_zero) {
        (true, true) => PointAngle::Degenerate,
        (true, false) => PointAngle::Angle(0.0),
        _ => PointAngle::Angle(principal_branch(num.atan2(den))),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingAngle {
    pub theta: f64,
    /// Every mesh point was degenerate; `theta` is then 0 by convention.
    pub degenerate: bool,
    /// Peak-to-peak variation across the mesh, modulo pi.
    pub max_deviation: f64,
}

/// `n` equally spaced points covering `[t0, t1]`.
pub fn validation_mesh(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|i| t0 + (t1 - t0) * i as f64 / (n - 1) as f64).collect()
}

pub fn solve_mixing_angle(sched: &ParameterSchedule, mesh: &[f64]) -> Result<MixingAngle> {
    solve_mixing_angle_with(sched, mesh, DEFAULT_THETA_TOLERANCE)
}

pub fn solve_mixing_angle_with(sched: &ParameterSchedule, mesh: &[f64], tolerance: f64) -> Result<MixingAngle> {
    let mut reference = None;
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    let (mut t_lo, mut t_hi) = (f64::NAN, f64::NAN);
    for &t in mesh {
        let PointAngle::Angle(theta) = pointwise_mixing_angle(sched, t)? else {
            continue;
        };
        let r = *reference.get_or_insert((theta, t));
        let d = principal_branch(theta - r.0);
        if d < lo {
            lo = d;
            t_lo = t;
        }
        if d > hi {
            hi = d;
            t_hi = t;
        }
    }
    let Some((theta, t_ref)) = reference else {
        return Ok(MixingAngle { theta: 0.0, degenerate: true, max_deviation: 0.0 });
    };
    let spread = hi - lo;
    if spread > tolerance {
        let worst = if hi.abs() >= lo.abs() { t_hi } else { t_lo };
        return Err(Error::ThetaNotConstant { max_deviation: spread, t: if worst.is_nan() { t_ref } else { worst } });
    }
    Ok(MixingAngle { theta, degenerate: false, max_deviation: spread })
}
