//! Adaptive Dormand–Prince 5(4) integration sampled on a prescribed mesh.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-12, atol: 1e-14, max_steps: 5_000_000 }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

/// Checks that a mesh is strictly increasing with at least two finite points.
pub fn check_mesh(mesh: &[f64]) -> Result<()> {
    if mesh.len() < 2 || mesh.iter().any(|t| !t.is_finite()) || mesh.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidMesh);
    }
    Ok(())
}

/// Integrates `y' = f(t, y)` from `mesh[0]` and returns the state at every mesh point.
pub fn integrate<const N: usize, F>(mut f: F, mesh: &[f64], y0: [f64; N], opts: OdeOptions) -> Result<Vec<[f64; N]>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    check_mesh(mesh)?;
    let mut out = Vec::with_capacity(mesh.len());
    out.push(y0);
    let mut t = mesh[0];
    let mut y = y0;
    let mut k = [[0.0; N]; 7];
    k[0] = f(t, &y)?;
    let span = mesh[mesh.len() - 1] - mesh[0];
    let mut h = (mesh[1] - mesh[0]).min(1e-3 * span.max(1e-3));
    let mut steps = 0usize;

    for &target in &mesh[1..] {
        while t < target {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::StepSizeUnderflow { t, h });
            }
            let remaining = target - t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            if step < 1e-14 * (1.0 + t.abs()) && !last {
                return Err(Error::StepSizeUnderflow { t, h: step });
            }

            for s in 1..7 {
                let mut ys = y;
                for (i, yi) in ys.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for j in 0..s {
                        acc += A[s][j] * k[j][i];
                    }
                    *yi += step * acc;
                }
                k[s] = f(t + C[s] * step, &ys)?;
            }
            let mut y_new = y;
            let mut err = 0.0f64;
            for i in 0..N {
                let mut hi5 = 0.0;
                let mut hi4 = 0.0;
                for s in 0..7 {
                    hi5 += B5[s] * k[s][i];
                    hi4 += B4[s] * k[s][i];
                }
                y_new[i] = y[i] + step * hi5;
                let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
                err = err.max((step * (hi5 - hi4) / sc).abs());
            }
            if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                if step < 1e-14 * (1.0 + t.abs()) {
                    return Err(Error::NonFinite { t });
                }
                h = 0.25 * step;
                continue;
            }
            if err <= 1.0 {
                t = if last { target } else { t + step };
                y = y_new;
                // first-same-as-last
                k[0] = k[6];
                let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last || grow < 1.0 {
                    h = step * grow;
                }
            } else {
                h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            }
        }
        out.push(y);
    }
    Ok(out)
}
