//! Time functions for the five Hamiltonian coefficients.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;

/// One extra sinusoidal component on top of the base term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Harmonic {
    pub amplitude: f64,
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
}

/// A scalar function of time with analytic first and second derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Schedule {
    Constant {
        value: f64,
    },
    /// `value + slope * t`
    Linear {
        value: f64,
        slope: f64,
    },
    /// `offset + amplitude * sin(frequency * t + phase) + sum of harmonics`
    Sinusoidal {
        offset: f64,
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        harmonics: Vec<Harmonic>,
    },
    /// `offset + amplitude * exp(rate * t)`
    Exponential {
        offset: f64,
        amplitude: f64,
        rate: f64,
    },
    Table(CubicSpline),
}

impl Schedule {
    pub const fn constant(value: f64) -> Self {
        Schedule::Constant { value }
    }

    pub fn sinusoidal(offset: f64, amplitude: f64, frequency: f64) -> Self {
        Schedule::Sinusoidal { offset, amplitude, frequency, phase: 0.0, harmonics: Vec::new() }
    }

    pub fn eval(&self, t: f64) -> Jet {
        match self {
            Schedule::Constant { value } => Jet::constant(*value),
            Schedule::Linear { value, slope } => Jet::new(value + slope * t, *slope, 0.0),
            Schedule::Sinusoidal { offset, amplitude, frequency, phase, harmonics } => {
                let mut out = Jet::constant(*offset) + sine(*amplitude, *frequency, *phase, t);
                for h in harmonics {
                    out = out + sine(h.amplitude, h.frequency, h.phase, t);
                }
                out
            }
            Schedule::Exponential { offset, amplitude, rate } => {
                let e = amplitude * (rate * t).exp();
                Jet::new(offset + e, rate * e, rate * rate * e)
            }
            Schedule::Table(spline) => spline.eval(t),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(t).value
    }

    /// True when every derivative vanishes identically.
    pub fn is_constant(&self) -> bool {
        match self {
            Schedule::Constant { .. } => true,
            Schedule::Linear { slope, .. } => *slope == 0.0,
            Schedule::Sinusoidal { amplitude, frequency, harmonics, .. } => {
                (*amplitude == 0.0 || *frequency == 0.0)
                    && harmonics.iter().all(|h| h.amplitude == 0.0 || h.frequency == 0.0)
            }
            Schedule::Exponential { amplitude, rate, .. } => *amplitude == 0.0 || *rate == 0.0,
            Schedule::Table(s) => s.values.windows(2).all(|w| w[0] == w[1]),
        }
    }

    /// Checks that all coefficients are finite.
    pub fn validate(&self) -> Result<()> {
        let finite = match self {
            Schedule::Constant { value } => value.is_finite(),
            Schedule::Linear { value, slope } => value.is_finite() && slope.is_finite(),
            Schedule::Sinusoidal { offset, amplitude, frequency, phase, harmonics } => {
                [*offset, *amplitude, *frequency, *phase].iter().all(|v| v.is_finite())
                    && harmonics
                        .iter()
                        .all(|h| h.amplitude.is_finite() && h.frequency.is_finite() && h.phase.is_finite())
            }
            Schedule::Exponential { offset, amplitude, rate } => {
                offset.is_finite() && amplitude.is_finite() && rate.is_finite()
            }
            Schedule::Table(_) => true,
        };
        if finite {
            Ok(())
        } else {
            Err(Error::Schedule("non-finite coefficient".into()))
        }
    }
}

fn sine(amplitude: f64, frequency: f64, phase: f64, t: f64) -> Jet {
    let (s, c) = (frequency * t + phase).sin_cos();
    Jet::new(amplitude * s, amplitude * frequency * c, -amplitude * frequency * frequency * s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableSpec {
    times: Vec<f64>,
    values: Vec<f64>,
}

/// Natural cubic spline through sampled values, extended linearly outside the table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TableSpec", into = "TableSpec")]
pub struct CubicSpline {
    times: Vec<f64>,
    values: Vec<f64>,
    /// Second derivatives at the knots.
    moments: Vec<f64>,
}

impl TryFrom<TableSpec> for CubicSpline {
    type Error = Error;
    fn try_from(spec: TableSpec) -> Result<Self> {
        CubicSpline::new(spec.times, spec.values)
    }
}

impl From<CubicSpline> for TableSpec {
    fn from(s: CubicSpline) -> Self {
        TableSpec { times: s.times, values: s.values }
    }
}

impl CubicSpline {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let n = times.len();
        if n < 2 {
            return Err(Error::Schedule("table needs at least two samples".into()));
        }
        if values.len() != n {
            return Err(Error::Schedule(format!("table has {} times but {} values", n, values.len())));
        }
        if times.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::Schedule("table contains non-finite entries".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Schedule("table times must be strictly increasing".into()));
        }

        // Tridiagonal solve for the natural spline moments.
        let mut moments = vec![0.0; n];
        if n > 2 {
            let m = n - 2;
            let mut diag = vec![0.0; m];
            let mut upper = vec![0.0; m];
            let mut rhs = vec![0.0; m];
            for i in 1..n - 1 {
                let h0 = times[i] - times[i - 1];
                let h1 = times[i + 1] - times[i];
                diag[i - 1] = 2.0 * (h0 + h1);
                upper[i - 1] = h1;
                rhs[i - 1] = 6.0 * ((values[i + 1] - values[i]) / h1 - (values[i] - values[i - 1]) / h0);
            }
            for i in 1..m {
                let lower = times[i + 1] - times[i];
                let w = lower / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            let mut x = vec![0.0; m];
            x[m - 1] = rhs[m - 1] / diag[m - 1];
            for i in (0..m - 1).rev() {
                x[i] = (rhs[i] - upper[i] * x[i + 1]) / diag[i];
            }
            moments[1..n - 1].copy_from_slice(&x);
        }
        Ok(Self { times, values, moments })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, t: f64) -> Jet {
        let n = self.times.len();
        let (first, last) = (self.times[0], self.times[n - 1]);
        if t < first {
            let d = self.interval(0, first).d1;
            return Jet::new(self.values[0] + d * (t - first), d, 0.0);
        }
        if t > last {
            let d = self.interval(n - 2, last).d1;
            return Jet::new(self.values[n - 1] + d * (t - last), d, 0.0);
        }
        let i = match self.times.partition_point(|&x| x <= t) {
            0 => 0,
            k => (k - 1).min(n - 2),
        };
        self.interval(i, t)
    }

    fn interval(&self, i: usize, t: f64) -> Jet {
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.moments[i], self.moments[i + 1]);
        let h = t1 - t0;
        let a = (t1 - t) / h;
        let b = (t - t0) / h;
        let value = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d1 = (y1 - y0) / h + ((1.0 - 3.0 * a * a) * m0 + (3.0 * b * b - 1.0) * m1) * h / 6.0;
        let d2 = a * m0 + b * m1;
        Jet::new(value, d1, d2)
    }
}

fn default_one() -> f64 {
    1.0
}

/// The raw model: mass, trap frequency, field, and the two couplings, plus constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterSchedule {
    pub mass: Schedule,
    pub trap_frequency: Schedule,
    pub field: Schedule,
    pub static_coupling: Schedule,
    pub dynamic_coupling: Schedule,
    #[serde(default = "default_one")]
    pub charge: f64,
    #[serde(default = "default_one")]
    pub hbar: f64,
    #[serde(default)]
    pub t0: f64,
}

impl ParameterSchedule {
    /// Unit mass, unit trap frequency, no field, no couplings.
    pub fn isotropic() -> Self {
        Self {
            mass: Schedule::constant(1.0),
            trap_frequency: Schedule::constant(1.0),
            field: Schedule::constant(0.0),
            static_coupling: Schedule::constant(0.0),
            dynamic_coupling: Schedule::constant(0.0),
            charge: 1.0,
            hbar: 1.0,
            t0: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for s in [&self.mass, &self.trap_frequency, &self.field, &self.static_coupling, &self.dynamic_coupling] {
            s.validate()?;
        }
        if !(self.hbar.is_finite() && self.hbar > 0.0) {
            return Err(Error::Schedule(format!("hbar must be positive, got {}", self.hbar)));
        }
        if !self.charge.is_finite() || !self.t0.is_finite() {
            return Err(Error::Schedule("charge and t0 must be finite".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fd(s: &Schedule, t: f64) -> (f64, f64) {
        let h = 1e-3;
        let f = |x| s.value(x);
        let d1 = (f(t + h) - f(t - h)) / (2.0 * h);
        let d2 = (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h);
        (d1, d2)
    }

    #[test]
    fn closed_families() {
        let lin = Schedule::Linear { value: 1.0, slope: 0.05 };
        assert_eq!(lin.eval(2.0), Jet::new(1.1, 0.05, 0.0));
        let exp = Schedule::Exponential { offset: 1.5, amplitude: -0.5, rate: -1.0 / 3.0 };
        let j = exp.eval(3.0);
        assert!((j.value - (1.5 - 0.5 / std::f64::consts::E)).abs() < 1e-15);
    }

    #[test]
    fn spline_reproduces_cubic_moments_and_linear_data() {
        let times: Vec<f64> = (0..11).map(|i| i as f64 * 0.5).collect();
        let values: Vec<f64> = times.iter().map(|t| 2.0 - 0.3 * t).collect();
        let s = CubicSpline::new(times, values).unwrap();
        for &t in &[0.0, 0.3, 2.2, 5.0] {
            let j = s.eval(t);
            assert!((j.value - (2.0 - 0.3 * t)).abs() < 1e-14);
            assert!((j.d1 + 0.3).abs() < 1e-13);
            assert!(j.d2.abs() < 1e-13);
        }
        // linear extension past the ends
        assert!((s.eval(6.0).value - (2.0 - 1.8)).abs() < 1e-13);
    }

    #[test]
    fn spline_tracks_smooth_function() {
        let times: Vec<f64> = (0..201).map(|i| i as f64 * 0.05).collect();
        let values: Vec<f64> = times.iter().map(|t| t.sin()).collect();
        let s = CubicSpline::new(times, values).unwrap();
        for &t in &[1.01, 3.33, 7.77] {
            let j = s.eval(t);
            assert!((j.value - t.sin()).abs() < 1e-6);
            assert!((j.d1 - t.cos()).abs() < 1e-4);
            assert!((j.d2 + t.sin()).abs() < 1e-2);
        }
    }

    #[test]
    fn table_rejects_bad_input() {
        assert!(CubicSpline::new(vec![0.0], vec![1.0]).is_err());
        assert!(CubicSpline::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(CubicSpline::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(CubicSpline::new(vec![0.0, f64::NAN], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn schedules_deserialize_from_toml() {
        #[derive(Deserialize)]
        struct Wrap {
            s: Schedule,
        }
        let w: Wrap = toml_like(
            r#"{"s": {"family": "sinusoidal", "offset": 1.0, "amplitude": 0.1, "frequency": 2.0,
                 "harmonics": [{"amplitude": 0.01, "frequency": 3.0}]}}"#,
        );
        assert!(matches!(w.s, Schedule::Sinusoidal { ref harmonics, .. } if harmonics.len() == 1));
        let w: Wrap = toml_like(r#"{"s": {"family": "table", "times": [0, 1, 2], "values": [1, 2, 1]}}"#);
        assert!(matches!(w.s, Schedule::Table(_)));
    }

    // The core crate has no TOML dependency; JSON-shaped maps go through the
    // same serde paths the CLI uses.
    fn toml_like<T: serde::de::DeserializeOwned>(s: &str) -> T {
        serde_json::from_str(s).unwrap()
    }

    proptest! {
        #[test]
        fn derivatives_consistent_with_values(
            off in -2.0..2.0f64, amp in -1.0..1.0f64, freq in -3.0..3.0f64,
            phase in -3.0..3.0f64, rate in -1.0..1.0f64, t in -5.0..5.0f64,
        ) {
            let cases = [
                Schedule::Sinusoidal { offset: off, amplitude: amp, frequency: freq, phase,
                    harmonics: vec![Harmonic { amplitude: amp / 3.0, frequency: 2.0 * freq, phase: 0.0 }] },
                Schedule::Exponential { offset: off, amplitude: amp, rate },
                Schedule::Linear { value: off, slope: amp },
            ];
            for s in &cases {
                let j = s.eval(t);
                let (d1, d2) = fd(s, t);
                let scale = 1.0 + j.value.abs() + j.d1.abs() + j.d2.abs();
                prop_assert!((j.d1 - d1).abs() < 1e-5 * scale * (1.0 + freq * freq));
                prop_assert!((j.d2 - d2).abs() < 1e-4 * scale * (1.0 + freq.powi(4)));
            }
        }
    }
}
