//! Grid actions of the rotation, squeeze and chirp operators, and the
//! composed map from the decoupled frame back to the original one.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ermakov::ModePair;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, QuantumState};
use crate::interp::{lagrange_stencil, Stencil};
use crate::params::{derive_all, DerivedParameters};
use crate::schedule::ParameterSchedule;
use crate::spectral::Spectral;
use crate::wavefunction::transformed_solution_chi;

/// Probability allowed to leave the box under a coordinate map.
pub const CLIP_LIMIT: f64 = 1e-8;
/// Points in the interpolation stencil used by [`apply_scale`].
pub const STENCIL_WIDTH: usize = 10;

/// Mass of `state` whose image under `r -> map(r)` lands outside the box.
fn lost_mass(state: &QuantumState, map: impl Fn(f64, f64) -> (f64, f64)) -> f64 {
    let g = &state.grid;
    let mut lost = 0.0;
    for iy in 0..g.ny {
        let y = g.y(iy);
        let row: f64 = (0..g.nx)
            .filter_map(|ix| {
                let (u, v) = map(g.x(ix), y);
                (!g.contains(u, v)).then(|| state.at(ix, iy).norm_sqr())
            })
            .sum();
        lost += row;
    }
    lost * g.cell() / state.norm_sq().max(f64::MIN_POSITIVE)
}

fn check_clip(lost: f64) -> Result<()> {
    if lost > CLIP_LIMIT {
        Err(Error::SupportClipped { lost })
    } else {
        Ok(())
    }
}

/// `psi'(x, y) = psi(x cos a - y sin a, x sin a + y cos a)`.
pub fn apply_rotation(state: &QuantumState, angle: f64) -> Result<QuantumState> {
    if angle == 0.0 {
        return Ok(state.clone());
    }
    apply_rotation_with(&Spectral::new(state.grid), state, angle)
}

pub fn apply_rotation_with(sp: &Spectral, state: &QuantumState, angle: f64) -> Result<QuantumState> {
    if angle == 0.0 {
        return Ok(state.clone());
    }
    // input point p reappears at R^T p
    let (s, c) = angle.sin_cos();
    check_clip(lost_mass(state, |x, y| (c * x + s * y, -s * x + c * y)))?;
    let mut out = state.clone();
    sp.rotate(&mut out.amplitudes, angle);
    Ok(out)
}

fn stencils(grid_min: f64, d: f64, n: usize, targets: impl Iterator<Item = f64>) -> Vec<Option<Stencil>> {
    targets.map(|x| lagrange_stencil((x - grid_min) / d, STENCIL_WIDTH, n)).collect()
}

fn resample(src: &[Complex64], st: &Option<Stencil>) -> Complex64 {
    let Some(st) = st else {
        return Complex64::new(0.0, 0.0);
    };
    let n = src.len() as isize;
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, w) in st.weights.iter().enumerate() {
        let i = st.start + j as isize;
        if (0..n).contains(&i) {
            acc += src[i as usize] * *w;
        }
    }
    acc
}

/// `psi'(x, y) = sqrt(sx sy) psi(sx x, sy y)`.
pub fn apply_scale(state: &QuantumState, sx: f64, sy: f64) -> Result<QuantumState> {
    if !(sx > 0.0 && sy > 0.0 && sx.is_finite() && sy.is_finite()) {
        return Err(Error::InvalidGrid(format!("scale factors must be positive, got ({sx}, {sy})")));
    }
    if sx == 1.0 && sy == 1.0 {
        return Ok(state.clone());
    }
    check_clip(lost_mass(state, |x, y| (x / sx, y / sy)))?;
    let g: GridSpec = state.grid;
    let (nx, ny) = (g.nx, g.ny);
    let jac = (sx * sy).sqrt();

    let mut tmp = state.amplitudes.clone();
    if sx != 1.0 {
        let sts = stencils(g.x_min, g.dx(), nx, (0..nx).map(|i| sx * g.x(i)));
        tmp.par_chunks_mut(nx).zip(state.amplitudes.par_chunks(nx)).for_each(|(dst, src)| {
            for (d, st) in dst.iter_mut().zip(&sts) {
                *d = resample(src, st);
            }
        });
    }
    let mut out = tmp.clone();
    if sy != 1.0 {
        let sts = stencils(g.y_min, g.dy(), ny, (0..ny).map(|j| sy * g.y(j)));
        let mut cols = vec![Complex64::new(0.0, 0.0); nx * ny];
        for iy in 0..ny {
            for ix in 0..nx {
                cols[ix * ny + iy] = tmp[iy * nx + ix];
            }
        }
        let mut res = vec![Complex64::new(0.0, 0.0); nx * ny];
        res.par_chunks_mut(ny).zip(cols.par_chunks(ny)).for_each(|(dst, src)| {
            for (d, st) in dst.iter_mut().zip(&sts) {
                *d = resample(src, st);
            }
        });
        for iy in 0..ny {
            for ix in 0..nx {
                out[iy * nx + ix] = res[ix * ny + iy];
            }
        }
    }
    out.iter_mut().for_each(|a| *a *= jac);
    Ok(QuantumState { grid: g, t: state.t, amplitudes: out })
}

/// Multiplies by `exp(-i (cx x^2 + cy y^2) / (4 hbar))`.
pub fn apply_quadratic_phase(state: &QuantumState, cx: f64, cy: f64, hbar: f64) -> QuantumState {
    if cx == 0.0 && cy == 0.0 {
        return state.clone();
    }
    let g = state.grid;
    let xs = g.xs();
    let mut out = state.clone();
    out.amplitudes.par_chunks_mut(g.nx).enumerate().for_each(|(iy, row)| {
        let y = g.y(iy);
        for (a, &x) in row.iter_mut().zip(&xs) {
            *a *= Complex64::from_polar(1.0, -(cx * x * x + cy * y * y) / (4.0 * hbar));
        }
    });
    out
}

/// One factor of the transformation chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UnitaryStep {
    Rotation { angle: f64 },
    Scale { sx: f64, sy: f64 },
    QuadraticPhase { cx: f64, cy: f64, hbar: f64 },
}

impl UnitaryStep {
    pub fn apply(&self, state: &QuantumState) -> Result<QuantumState> {
        match *self {
            UnitaryStep::Rotation { angle } => apply_rotation(state, angle),
            UnitaryStep::Scale { sx, sy } => apply_scale(state, sx, sy),
            UnitaryStep::QuadraticPhase { cx, cy, hbar } => Ok(apply_quadratic_phase(state, cx, cy, hbar)),
        }
    }

    pub fn inverse(&self) -> UnitaryStep {
        match *self {
            UnitaryStep::Rotation { angle } => UnitaryStep::Rotation { angle: -angle },
            UnitaryStep::Scale { sx, sy } => UnitaryStep::Scale { sx: 1.0 / sx, sy: 1.0 / sy },
            UnitaryStep::QuadraticPhase { cx, cy, hbar } => UnitaryStep::QuadraticPhase { cx: -cx, cy: -cy, hbar },
        }
    }
}

/// Where the chirp factor sits in the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FactorOrder {
    /// Chirp first, acting on the decoupled-frame coordinates.
    Printed,
    /// Chirp after the mass scaling, acting on the coordinates where the
    /// masses `m1`, `m2` live.
    #[default]
    Canonical,
}

/// The chain in application order, first element acting first.
pub fn pipeline_steps(dp: &DerivedParameters, order: FactorOrder) -> Vec<UnitaryStep> {
    let chirp = UnitaryStep::QuadraticPhase { cx: dp.m1_dot, cy: dp.m2_dot, hbar: dp.hbar };
    let mix = UnitaryStep::Rotation { angle: 0.5 * dp.theta };
    let masses = UnitaryStep::Scale { sx: dp.m1.sqrt(), sy: dp.m2.sqrt() };
    let (q, p) = dp.lambda1_scales();
    let tail = [
        UnitaryStep::Rotation { angle: std::f64::consts::FRAC_PI_4 },
        UnitaryStep::Scale { sx: q, sy: p },
        UnitaryStep::Rotation { angle: dp.phi },
    ];
    let head = match order {
        FactorOrder::Printed => [chirp, mix, masses],
        FactorOrder::Canonical => [mix, masses, chirp],
    };
    head.into_iter().chain(tail).collect()
}

/// Maps a decoupled-frame state to the original frame.
pub fn compose_pipeline(chi: &QuantumState, dp: &DerivedParameters, order: FactorOrder) -> Result<QuantumState> {
    run(chi, &pipeline_steps(dp, order))
}

/// Maps an original-frame state back to the decoupled frame.
pub fn inverse_pipeline(psi: &QuantumState, dp: &DerivedParameters, order: FactorOrder) -> Result<QuantumState> {
    let steps: Vec<UnitaryStep> = pipeline_steps(dp, order).iter().rev().map(UnitaryStep::inverse).collect();
    run(psi, &steps)
}

fn run(state: &QuantumState, steps: &[UnitaryStep]) -> Result<QuantumState> {
    let sp = Spectral::new(state.grid);
    let mut s = state.clone();
    for step in steps {
        s = match *step {
            UnitaryStep::Rotation { angle } => apply_rotation_with(&sp, &s, angle)?,
            other => other.apply(&s)?,
        };
    }
    Ok(s)
}

/// Mode `(n1, n2)` of a solved scenario at `t`, built in the decoupled frame
/// and carried to the original frame by the operator chain.
pub fn pipeline_state(
    sched: &ParameterSchedule,
    pair: &ModePair,
    n1: u32,
    n2: u32,
    grid: &GridSpec,
    t: f64,
    order: FactorOrder,
) -> Result<QuantumState> {
    let dp = derive_all(sched, t, pair.theta)?;
    let (r1, r2) = pair.at(t)?;
    let chi = transformed_solution_chi(n1, n2, &r1, &r2, dp.hbar, grid, t)?;
    compose_pipeline(&chi, &dp, order)
}
