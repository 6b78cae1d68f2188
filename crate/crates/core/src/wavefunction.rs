//! Invariant eigenfunctions, transformed-frame solutions, and the closed-form
//! original-frame wave functions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ermakov::{alpha_from_integrals, ModePair, RhoPoint};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, QuantumState, BOUNDARY_LIMIT};
use crate::params::{derive_all, DerivedParameters};
use crate::schedule::ParameterSchedule;

/// Largest supported Hermite order.
pub const MAX_ORDER: u32 = 64;
/// Renormalisation drift beyond which the box is considered too small.
pub const RENORM_LIMIT: f64 = 1e-4;

/// Physicists' Hermite polynomial by upward recurrence.
pub fn hermite(n: u32, x: f64) -> f64 {
    assert!(n <= MAX_ORDER, "Hermite order {n} exceeds {MAX_ORDER}");
    let mut h0 = 1.0;
    if n == 0 {
        return h0;
    }
    let mut h1 = 2.0 * x;
    for k in 1..n {
        let h2 = 2.0 * x * h1 - 2.0 * k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `[pi hbar n1! n2! 2^(n1+n2) rho1 rho2]^(-1/2)`.
fn xi_norm(n1: u32, n2: u32, rho1: f64, rho2: f64, hbar: f64) -> f64 {
    let ln = std::f64::consts::PI.ln()
        + hbar.ln()
        + ln_factorial(n1)
        + ln_factorial(n2)
        + (n1 + n2) as f64 * std::f64::consts::LN_2
        + rho1.ln()
        + rho2.ln();
    (-0.5 * ln).exp()
}

fn check_orders(n1: u32, n2: u32) -> Result<()> {
    if n1 > MAX_ORDER || n2 > MAX_ORDER {
        return Err(Error::InvalidGrid(format!("mode ({n1}, {n2}) exceeds order {MAX_ORDER}")));
    }
    Ok(())
}

/// `(rho'/rho + i/rho^2)`, the complex Gaussian exponent of one mode.
pub fn mode_exponent(r: &RhoPoint) -> Complex64 {
    Complex64::new(r.rho_dot / r.rho, 1.0 / (r.rho * r.rho))
}

/// Invariant eigenfunction at one point.
pub fn xi_point(n1: u32, n2: u32, r1: &RhoPoint, r2: &RhoPoint, hbar: f64, x: f64, y: f64) -> Complex64 {
    let sh = hbar.sqrt();
    let norm = xi_norm(n1, n2, r1.rho, r2.rho, hbar);
    let h = hermite(n1, x / (sh * r1.rho)) * hermite(n2, y / (sh * r2.rho));
    let expo = Complex64::new(0.0, 0.5 / hbar) * (mode_exponent(r1) * x * x + mode_exponent(r2) * y * y);
    expo.exp() * (norm * h)
}

/// Samples the invariant eigenfunction on a grid.
pub fn eigenfunction_xi(
    n1: u32,
    n2: u32,
    r1: &RhoPoint,
    r2: &RhoPoint,
    hbar: f64,
    grid: &GridSpec,
    t: f64,
) -> Result<QuantumState> {
    check_orders(n1, n2)?;
    let s = QuantumState::from_fn(*grid, t, |x, y| xi_point(n1, n2, r1, r2, hbar, x, y));
    s.check_boundary(BOUNDARY_LIMIT)?;
    Ok(s)
}

/// `exp(i alpha) xi`, the transformed-frame solution.
pub fn transformed_solution_chi(
    n1: u32,
    n2: u32,
    r1: &RhoPoint,
    r2: &RhoPoint,
    hbar: f64,
    grid: &GridSpec,
    t: f64,
) -> Result<QuantumState> {
    let alpha = alpha_from_integrals(n1, n2, r1.phase_integral, r2.phase_integral);
    Ok(eigenfunction_xi(n1, n2, r1, r2, hbar, grid, t)?.scaled(Complex64::from_polar(1.0, alpha)))
}

/// How the chirp `m_i'/2` enters the Gaussian exponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoefficientVariant {
    /// Subtracted inside `gamma` and `beta` before the mixing rotation, as printed.
    Printed,
    /// Applied after the mixing rotation and mass scaling, as the operator
    /// composition with the chirp acting in the scaled frame requires.
    #[default]
    Composed,
}

/// Coefficients of the closed-form wave function at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormCoefficients {
    pub f1: Complex64,
    pub f2: Complex64,
    pub f3: Complex64,
    pub gamma: Complex64,
    pub beta: Complex64,
    pub eta1: f64,
    pub eta2: f64,
    pub mu1: f64,
    pub mu2: f64,
}

pub fn closed_form_coefficients(
    dp: &DerivedParameters,
    r1: &RhoPoint,
    r2: &RhoPoint,
    variant: CoefficientVariant,
) -> ClosedFormCoefficients {
    let (m1, m2) = (dp.m1, dp.m2);
    let (sh, ch) = (0.5 * dp.theta).sin_cos();
    let (c2, s2, sc) = (ch * ch, sh * sh, sh * ch);
    let g1 = mode_exponent(r1);
    let g2 = mode_exponent(r2);
    let (gamma, beta) = match variant {
        CoefficientVariant::Printed => (g1 - 0.5 * dp.m1_dot, g2 - 0.5 * dp.m2_dot),
        CoefficientVariant::Composed => (g1, g2),
    };
    let root = (m1 * m2).sqrt();
    let diag = (gamma * m1 + beta * m2) * 0.5 * c2 + (gamma * m2 + beta * m1) * 0.5 * s2;
    let off = (beta - gamma) * root * sc;
    let mut f1 = diag + off;
    let mut f2 = diag - off;
    let mut f3 = (-gamma * m1 + beta * m2) * c2 + (gamma * m2 - beta * m1) * s2;
    if variant == CoefficientVariant::Composed {
        let (d1, d2) = (dp.m1_dot, dp.m2_dot);
        f1 -= 0.25 * (d1 + d2);
        f2 -= 0.25 * (d1 + d2);
        f3 += 0.5 * (d1 - d2);
    }
    let (q, p) = dp.lambda1_scales();
    let (hm1, hm2) = ((0.5 * m1).sqrt(), (0.5 * m2).sqrt());
    ClosedFormCoefficients {
        f1,
        f2,
        f3,
        gamma,
        beta,
        eta1: q * (hm1 * ch - hm2 * sh),
        eta2: p * (-hm1 * ch - hm2 * sh),
        mu1: q * (hm1 * sh + hm2 * ch),
        mu2: p * (-hm1 * sh + hm2 * ch),
    }
}

/// Everything needed to evaluate one closed-form mode pointwise.
#[derive(Debug, Clone, Copy)]
pub struct ClosedForm {
    pub n1: u32,
    pub n2: u32,
    pub hbar: f64,
    pub coefficients: ClosedFormCoefficients,
    row1: [f64; 2],
    row2: [f64; 2],
    width1: f64,
    width2: f64,
    xx: Complex64,
    yy: Complex64,
    xy: Complex64,
    prefactor: Complex64,
}

impl ClosedForm {
    pub fn new(
        n1: u32,
        n2: u32,
        dp: &DerivedParameters,
        r1: &RhoPoint,
        r2: &RhoPoint,
        variant: CoefficientVariant,
    ) -> Result<Self> {
        check_orders(n1, n2)?;
        let k = closed_form_coefficients(dp, r1, r2, variant);
        let hbar = dp.hbar;
        let (s, c) = dp.phi.sin_cos();
        let (s2p, c2p) = (2.0 * dp.phi).sin_cos();
        let ratio = (dp.m_minus / dp.m_plus).sqrt();
        let (a, b) = (ratio * k.f1, k.f2 / ratio);
        let xx = a * c * c + b * s * s + k.f3 * 0.5 * s2p;
        let yy = a * s * s + b * c * c - k.f3 * 0.5 * s2p;
        let xy = (b - a) * s2p + k.f3 * c2p;
        let alpha = alpha_from_integrals(n1, n2, r1.phase_integral, r2.phase_integral);
        let amp = (dp.m1 * dp.m2).powf(0.25) * xi_norm(n1, n2, r1.rho, r2.rho, hbar);
        Ok(Self {
            n1,
            n2,
            hbar,
            coefficients: k,
            row1: [k.eta1 * c + k.eta2 * s, -k.eta1 * s + k.eta2 * c],
            row2: [k.mu1 * c + k.mu2 * s, -k.mu1 * s + k.mu2 * c],
            width1: hbar.sqrt() * r1.rho,
            width2: hbar.sqrt() * r2.rho,
            xx,
            yy,
            xy,
            prefactor: Complex64::from_polar(amp, alpha),
        })
    }

    pub fn eval(&self, x: f64, y: f64) -> Complex64 {
        let u = (self.row1[0] * x + self.row1[1] * y) / self.width1;
        let v = (self.row2[0] * x + self.row2[1] * y) / self.width2;
        let h = hermite(self.n1, u) * hermite(self.n2, v);
        let q = self.xx * x * x + self.yy * y * y + self.xy * x * y;
        (Complex64::new(0.0, 0.5 / self.hbar) * q).exp() * self.prefactor * h
    }
}

/// Closed-form original-frame wave function on a grid, renormalised.
///
/// Returns the state and the renormalisation factor that was applied.
pub fn full_wavefunction(
    n1: u32,
    n2: u32,
    dp: &DerivedParameters,
    r1: &RhoPoint,
    r2: &RhoPoint,
    grid: &GridSpec,
    variant: CoefficientVariant,
) -> Result<(QuantumState, f64)> {
    let cf = ClosedForm::new(n1, n2, dp, r1, r2, variant)?;
    let mut s = QuantumState::from_fn(*grid, dp.t, |x, y| cf.eval(x, y));
    s.check_boundary(BOUNDARY_LIMIT)?;
    let factor = s.normalize();
    if !factor.is_finite() || (factor - 1.0).abs() > RENORM_LIMIT {
        return Err(Error::GridTooSmall { fraction: (factor - 1.0).abs(), limit: RENORM_LIMIT });
    }
    Ok((s, factor))
}

/// Closed-form mode `(n1, n2)` of a solved scenario at time `t`.
pub fn closed_form_state(
    sched: &ParameterSchedule,
    pair: &ModePair,
    n1: u32,
    n2: u32,
    grid: &GridSpec,
    t: f64,
    variant: CoefficientVariant,
) -> Result<(QuantumState, f64)> {
    let dp = derive_all(sched, t, pair.theta)?;
    let (r1, r2) = pair.at(t)?;
    full_wavefunction(n1, n2, &dp, &r1, &r2, grid, variant)
}
