//! Uniform 2D grids and complex fields on them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default ceiling on `max boundary |psi|^2 / max |psi|^2`.
pub const BOUNDARY_LIMIT: f64 = 1e-12;

/// Nodes `x_min + i dx` for `i in 0..nx`, endpoints included.
///
/// Spectral operators treat the box as periodic with period `nx * dx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let g = Self { nx, ny, x_min, x_max, y_min, y_max };
        g.validate()?;
        Ok(g)
    }

    /// Square box `[-half, half]^2` with `n` points per axis.
    pub fn square(n: usize, half: f64) -> Result<Self> {
        Self::new(n, n, -half, half, -half, half)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 16 || self.ny < 16 {
            return Err(Error::InvalidGrid(format!("need at least 16 points per axis, got {}x{}", self.nx, self.ny)));
        }
        if self.nx.checked_mul(self.ny).is_none_or(|n| n > 1 << 26) {
            return Err(Error::InvalidGrid(format!("{}x{} points exceeds the size limit", self.nx, self.ny)));
        }
        let bounds = [self.x_min, self.x_max, self.y_min, self.y_max];
        if bounds.iter().any(|v| !v.is_finite()) || self.x_max <= self.x_min || self.y_max <= self.y_min {
            return Err(Error::InvalidGrid("bounds must be finite with max > min".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / (self.ny - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y_min + j as f64 * self.dy()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        (0..self.ny).map(|j| self.y(j)).collect()
    }

    pub fn cell(&self) -> f64 {
        self.dx() * self.dy()
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let ex = 0.5 * self.dx();
        let ey = 0.5 * self.dy();
        x >= self.x_min - ex && x <= self.x_max + ex && y >= self.y_min - ey && y <= self.y_max + ey
    }

    pub fn same_as(&self, other: &GridSpec) -> bool {
        self == other
    }
}

/// A complex field on a grid, row-major with `y` outer: index `iy * nx + ix`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    pub grid: GridSpec,
    pub t: f64,
    pub amplitudes: Vec<Complex64>,
}

impl QuantumState {
    pub fn zeros(grid: GridSpec, t: f64) -> Self {
        Self { grid, t, amplitudes: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    /// Samples `f(x, y)` at every node.
    pub fn from_fn(grid: GridSpec, t: f64, f: impl Fn(f64, f64) -> Complex64 + Sync) -> Self {
        use rayon::prelude::*;
        let xs = grid.xs();
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); grid.len()];
        amplitudes.par_chunks_mut(grid.nx).enumerate().for_each(|(j, row)| {
            let y = grid.y(j);
            for (a, &x) in row.iter_mut().zip(&xs) {
                *a = f(x, y);
            }
        });
        Self { grid, t, amplitudes }
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.grid.nx + ix
    }

    pub fn at(&self, ix: usize, iy: usize) -> Complex64 {
        self.amplitudes[self.index(ix, iy)]
    }

    /// `∫∫ |psi|^2` by the rectangle rule.
    pub fn norm_sq(&self) -> f64 {
        norm_sq(&self.amplitudes, &self.grid)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Scales to unit norm; returns the factor applied.
    pub fn normalize(&mut self) -> f64 {
        let n = self.norm();
        let k = 1.0 / n;
        self.amplitudes.iter_mut().for_each(|a| *a *= k);
        k
    }

    pub fn scaled(mut self, k: Complex64) -> Self {
        self.amplitudes.iter_mut().for_each(|a| *a *= k);
        self
    }

    /// `<self|other>`, conjugating `self`.
    pub fn inner(&self, other: &QuantumState) -> Result<Complex64> {
        check_compatible(self, other)?;
        Ok(inner(&self.amplitudes, &other.amplitudes, &self.grid))
    }

    /// Largest boundary density relative to the largest density.
    pub fn boundary_fraction(&self) -> f64 {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let peak = self.amplitudes.iter().map(|a| a.norm_sqr()).fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let mut edge = 0.0f64;
        for ix in 0..nx {
            edge = edge.max(self.at(ix, 0).norm_sqr()).max(self.at(ix, ny - 1).norm_sqr());
        }
        for iy in 0..ny {
            edge = edge.max(self.at(0, iy).norm_sqr()).max(self.at(nx - 1, iy).norm_sqr());
        }
        edge / peak
    }

    /// Errors with `GridTooSmall` when the state has not decayed at the box edge.
    pub fn check_boundary(&self, limit: f64) -> Result<()> {
        let fraction = self.boundary_fraction();
        if fraction > limit || !fraction.is_finite() {
            return Err(Error::GridTooSmall { fraction, limit });
        }
        Ok(())
    }

    /// Largest pointwise `|self - other|`.
    pub fn max_abs_diff(&self, other: &QuantumState) -> Result<f64> {
        check_compatible(self, other)?;
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }
}

pub(crate) fn norm_sq(a: &[Complex64], grid: &GridSpec) -> f64 {
    // sequential row sums keep the result independent of the thread count
    a.chunks(grid.nx).map(|row| row.iter().map(|z| z.norm_sqr()).sum::<f64>()).sum::<f64>() * grid.cell()
}

pub(crate) fn inner(a: &[Complex64], b: &[Complex64], grid: &GridSpec) -> Complex64 {
    a.chunks(grid.nx)
        .zip(b.chunks(grid.nx))
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x.conj() * y).sum::<Complex64>())
        .sum::<Complex64>()
        * grid.cell()
}

fn check_compatible(a: &QuantumState, b: &QuantumState) -> Result<()> {
    if !a.grid.same_as(&b.grid) {
        return Err(Error::GridMismatch(format!("{:?} vs {:?}", a.grid, b.grid)));
    }
    if a.amplitudes.len() != a.grid.len() || b.amplitudes.len() != b.grid.len() {
        return Err(Error::GridMismatch("amplitude count does not match the grid".into()));
    }
    Ok(())
}

/// `|<a|b>| / (|a| |b|)`; 1 means equal up to a global phase.
pub fn fidelity(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    if (a.t - b.t).abs() > 1e-12 * (1.0 + a.t.abs()) {
        return Err(Error::GridMismatch(format!("states at different times {} and {}", a.t, b.t)));
    }
    let ov = a.inner(b)?;
    let d = (a.norm_sq() * b.norm_sq()).sqrt();
    if d == 0.0 {
        return Ok(0.0);
    }
    Ok((ov.norm() / d).min(1.0))
}
