//! Scenario files: one TOML document per run.
//!
//! ```toml
//! name = "coupled"
//! modes = [[0, 0], [1, 0]]
//!
//! [schedule]
//! mass = { family = "constant", value = 1.0 }
//! trap_frequency = { family = "constant", value = 1.0 }
//! field = { family = "constant", value = 0.5 }
//! static_coupling = { family = "constant", value = 0.1 }
//! dynamic_coupling = { family = "constant", value = 0.05 }
//!
//! [grid]
//! nx = 128
//! ny = 128
//! x_min = -10.0
//! x_max = 10.0
//! y_min = -10.0
//! y_max = 10.0
//!
//! [time]
//! t1 = 5.0
//! stride = 0.5
//! ```

use serde::Deserialize;

use qosc_core::ermakov::Route;
use qosc_core::oracle::Scheme;
use qosc_core::schedule::ParameterSchedule;
use qosc_core::unitary::FactorOrder;
use qosc_core::wavefunction::{CoefficientVariant, MAX_ORDER};
use qosc_core::GridSpec;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub schedule: ParameterSchedule,
    pub grid: GridSpec,
    pub time: TimeWindow,
    #[serde(default)]
    pub modes: Vec<[u32; 2]>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub oracle: OracleOptions,
    #[serde(default)]
    pub initial: InitialAmplitudes,
    #[serde(default = "default_commands")]
    pub commands: Vec<Command>,
}

/// The window starts at `schedule.t0`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeWindow {
    pub t1: f64,
    pub stride: f64,
    /// Mesh spacing for the amplitude equations.
    #[serde(default = "default_ode_step")]
    pub ode_step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Peak-to-peak mixing-angle variation accepted as constant.
    pub theta: f64,
    /// `1 - F` between the closed form and the pipeline.
    pub pipeline_fidelity: f64,
    /// `1 - F` between the closed form and direct propagation.
    pub oracle_fidelity: f64,
    pub schrodinger_residual: f64,
    pub invariant_drift: f64,
    pub ermakov_residual: f64,
    pub norm: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            theta: 1e-8,
            pipeline_fidelity: 1e-8,
            oracle_fidelity: 1e-5,
            schrodinger_residual: 1e-4,
            invariant_drift: 1e-5,
            ermakov_residual: 1e-6,
            norm: 1e-6,
        }
    }
}

pub const TOLERANCE_KEYS: [&str; 7] = [
    "theta",
    "pipeline_fidelity",
    "oracle_fidelity",
    "schrodinger_residual",
    "invariant_drift",
    "ermakov_residual",
    "norm",
];

impl Tolerances {
    fn slot(&mut self, key: &str) -> Option<&mut f64> {
        Some(match key {
            "theta" => &mut self.theta,
            "pipeline_fidelity" => &mut self.pipeline_fidelity,
            "oracle_fidelity" => &mut self.oracle_fidelity,
            "schrodinger_residual" => &mut self.schrodinger_residual,
            "invariant_drift" => &mut self.invariant_drift,
            "ermakov_residual" => &mut self.ermakov_residual,
            "norm" => &mut self.norm,
            _ => return None,
        })
    }

    fn values(&self) -> [(&'static str, f64); 7] {
        let mut copy = *self;
        TOLERANCE_KEYS.map(|k| (k, *copy.slot(k).unwrap()))
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let (key, value) = spec
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("tolerance override `{spec}` is not key=value")))?;
        let key = key.trim();
        let slot = self.slot(key).ok_or_else(|| {
            CliError::Config(format!("unknown tolerance `{key}`; expected one of {}", TOLERANCE_KEYS.join(", ")))
        })?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("tolerance `{key}`: `{}` is not a number", value.trim())))?;
        check_tolerance(key, value)?;
        *slot = value;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.values().into_iter().try_for_each(|(k, v)| check_tolerance(k, v))
    }
}

fn check_tolerance(key: &str, value: f64) -> Result<()> {
    if !value.is_finite() || value < f64::EPSILON {
        return Err(CliError::Config(format!(
            "tolerance `{key}` = {value} must be finite and at least machine epsilon"
        )));
    }
    Ok(())
}

/// How the constant mixing angle is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AngleMode {
    /// Solve on a mesh and fail unless it is constant to `tolerances.theta`.
    #[default]
    Validated,
    /// Take the pointwise angle at `t0` and report its variation without failing.
    Frozen,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverOptions {
    pub route: Route,
    pub variant: CoefficientVariant,
    pub order: FactorOrder,
    pub mixing_angle: AngleMode,
    pub theta_mesh: usize,
    /// Time step of the finite-difference window in the Schrödinger residual.
    pub residual_step: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            route: Route::default(),
            variant: CoefficientVariant::default(),
            order: FactorOrder::default(),
            mixing_angle: AngleMode::default(),
            theta_mesh: qosc_core::params::DEFAULT_THETA_MESH,
            residual_step: 1e-2,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleOptions {
    pub dt: f64,
    pub scheme: Scheme,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { dt: 1e-3, scheme: Scheme::default() }
    }
}

/// Explicit `(rho, rho_dot)` at `t0`; the instantaneous vacuum otherwise.
#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialAmplitudes {
    pub rho1: Option<[f64; 2]>,
    pub rho2: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Derive,
    Solve,
    Verify,
}

fn default_commands() -> Vec<Command> {
    vec![Command::Derive, Command::Solve, Command::Verify]
}

fn default_ode_step() -> f64 {
    0.01
}

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl Scenario {
    /// Parses and validates a scenario document.
    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| config(format!("scenario: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config(format!("cannot read scenario {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(m) => config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn t0(&self) -> f64 {
        self.schedule.t0
    }

    pub fn validate(&self) -> Result<()> {
        self.schedule.validate().map_err(|e| config(format!("schedule: {e}")))?;
        self.grid.validate().map_err(|e| config(format!("grid: {e}")))?;
        let (t0, w) = (self.t0(), self.time);
        if !(w.t1.is_finite() && w.t1 > t0) {
            return Err(config(format!("time.t1 = {} must exceed t0 = {t0}", w.t1)));
        }
        if !(w.stride.is_finite() && w.stride > 0.0) {
            return Err(config(format!("time.stride = {} must be positive", w.stride)));
        }
        let n = (w.t1 - t0) / w.stride;
        if (n - n.round()).abs() > 1e-9 * n.max(1.0) {
            return Err(config(format!("time.stride = {} does not divide the window [{t0}, {}]", w.stride, w.t1)));
        }
        if !(w.ode_step.is_finite() && w.ode_step > 0.0 && w.ode_step <= w.t1 - t0) {
            return Err(config(format!("time.ode_step = {} must be positive and fit the window", w.ode_step)));
        }
        if let Some([n1, n2]) = self.modes.iter().copied().find(|m| m[0] > MAX_ORDER || m[1] > MAX_ORDER) {
            return Err(config(format!("mode ({n1}, {n2}) exceeds the largest order {MAX_ORDER}")));
        }
        self.tolerances.validate()?;
        if self.solver.theta_mesh < 2 {
            return Err(config("solver.theta_mesh must be at least 2"));
        }
        let h = self.solver.residual_step;
        if !(h.is_finite() && h > 0.0 && 4.0 * h <= w.t1 - t0) {
            return Err(config(format!("solver.residual_step = {h} must be positive and fit 4 steps in the window")));
        }
        let dt = self.oracle.dt;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(config(format!("oracle.dt = {dt} must be positive")));
        }
        let k = w.stride / dt;
        if (k - k.round()).abs() > 1e-9 * k.max(1.0) {
            return Err(config(format!("oracle.dt = {dt} does not divide time.stride = {}", w.stride)));
        }
        for (name, ic) in [("rho1", self.initial.rho1), ("rho2", self.initial.rho2)] {
            if let Some([r, dr]) = ic {
                if !(r.is_finite() && r > 0.0 && dr.is_finite()) {
                    return Err(config(format!("initial.{name} = [{r}, {dr}] needs a positive amplitude")));
                }
            }
        }
        Ok(())
    }

    /// `t0 + k stride` for every output index `k`.
    pub fn output_times(&self) -> Vec<f64> {
        let t0 = self.t0();
        let n = ((self.time.t1 - t0) / self.time.stride).round() as usize;
        (0..=n).map(|k| t0 + k as f64 * self.time.stride).collect()
    }

    /// Mesh for the amplitude equations.
    pub fn ode_mesh(&self) -> Vec<f64> {
        let span = self.time.t1 - self.t0();
        let n = (span / self.time.ode_step - 1e-9).ceil() as usize;
        qosc_core::params::validation_mesh(self.t0(), self.time.t1, n + 1)
    }

    pub fn theta_mesh(&self) -> Vec<f64> {
        qosc_core::params::validation_mesh(self.t0(), self.time.t1, self.solver.theta_mesh)
    }
}
