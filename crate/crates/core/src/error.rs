use std::fmt;

/// Derived quantity named in parameter-domain failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Mass,
    MMinus,
    MPlus,
    OmegaMinus,
    OmegaPlus,
    M1,
    M2,
    Omega1,
    Omega2,
    BigOmega1,
    BigOmega2,
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Quantity::Mass => "m",
            Quantity::MMinus => "m_minus",
            Quantity::MPlus => "m_plus",
            Quantity::OmegaMinus => "omega_minus",
            Quantity::OmegaPlus => "omega_plus",
            Quantity::M1 => "m1",
            Quantity::M2 => "m2",
            Quantity::Omega1 => "omega1",
            Quantity::Omega2 => "omega2",
            Quantity::BigOmega1 => "Omega1",
            Quantity::BigOmega2 => "Omega2",
        };
        f.write_str(name)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("time {t} lies before the scenario start {t0}")]
    BeforeStart { t: f64, t0: f64 },

    #[error("quadrature did not converge: achieved error estimate {achieved:e} (requested {requested:e})")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("negative radicand for {quantity} at t = {t}: {value:e}")]
    NegativeRadicand { quantity: Quantity, t: f64, value: f64 },

    #[error("nonpositive mass {quantity} at t = {t}: {value:e}")]
    NonpositiveMass { quantity: Quantity, t: f64, value: f64 },

    #[error("mixing angle is not constant: peak-to-peak deviation {max_deviation:e} rad (worst at t = {t})")]
    ThetaNotConstant { max_deviation: f64, t: f64 },

    #[error("time mesh must be strictly increasing with at least two points")]
    InvalidMesh,

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("non-finite value encountered while integrating at t = {t}")]
    NonFinite { t: f64 },

    #[error("classical solutions are linearly dependent (Wronskian {wronskian:e})")]
    DependentSolutions { wronskian: f64 },

    #[error("Ermakov amplitude became nonpositive at t = {t} (rho = {rho:e})")]
    RhoNonPositive { t: f64, rho: f64 },

    #[error("time {t} is outside the solution mesh [{start}, {end}]")]
    OutsideMesh { t: f64, start: f64, end: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("grid too small: boundary density fraction {fraction:e} exceeds {limit:e}")]
    GridTooSmall { fraction: f64, limit: f64 },

    #[error("support clipped: probability {lost:e} leaves the box")]
    SupportClipped { lost: f64 },

    #[error("stability heuristic violated: dt * |H| / hbar = {value:.3} (limit {limit})")]
    StabilityViolation { value: f64, limit: f64 },

    #[error("norm drift {drift:e} at t = {t} exceeds {limit:e}")]
    NormDrift { drift: f64, t: f64, limit: f64 },

    #[error("output time {t} is not an integer number of steps dt = {dt}")]
    MeshNotDivisible { t: f64, dt: f64 },

    #[error("time mesh mismatch: {0}")]
    TimeMeshMismatch(String),

    #[error("implicit midpoint iteration did not converge at t = {t}")]
    NoConvergence { t: f64 },

    #[error("malformed state dump: {0}")]
    Dump(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
