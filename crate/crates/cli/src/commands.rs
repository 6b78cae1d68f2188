//! The `derive`, `solve` and `verify` pipelines.

use std::path::{Path, PathBuf};

use qosc_core::dump;
use qosc_core::ermakov::{alpha_from_integrals, solve_pair, ModePair};
use qosc_core::hamiltonian::{apply_original, schrodinger_residual, OriginalCoefficients};
use qosc_core::invariant::{expectation, InvariantOperator};
use qosc_core::oracle::{fidelity, propagate, HamiltonianSpec, PropagatorConfig};
use qosc_core::params::{derive_all, pointwise_mixing_angle, solve_mixing_angle_with, PointAngle};
use qosc_core::spectral::Spectral;
use qosc_core::unitary::{inverse_pipeline, pipeline_state};
use qosc_core::wavefunction::closed_form_state;
use qosc_core::QuantumState;

use crate::error::{CliError, Result};
use crate::report::{float, signed_sqrt, Table};
use crate::scenario::{AngleMode, Command, Scenario};

pub const DERIVED_COLUMNS: [&str; 21] = [
    "t",
    "phi",
    "omega_c",
    "omega",
    "m_minus",
    "m_plus",
    "omega_minus",
    "omega_plus",
    "a1",
    "b1",
    "m1",
    "m2",
    "omega1",
    "omega2",
    "c",
    "theta",
    "omega_tilde1",
    "omega_tilde2",
    "Omega1",
    "Omega2",
    "delta",
];

pub const SOLVE_COLUMNS: [&str; 7] =
    ["t", "mode_n1", "mode_n2", "norm_closed", "norm_pipeline", "fidelity_closed_vs_pipeline", "alpha_phase"];

pub const VERIFY_COLUMNS: [&str; 7] = [
    "t",
    "schrodinger_residual",
    "oracle_fidelity",
    "invariant_expectation",
    "invariant_drift",
    "ermakov_residual_1",
    "ermakov_residual_2",
];

/// The mixing angle a run uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angle {
    pub theta: f64,
    /// Peak-to-peak variation of the pointwise angle over the window.
    pub max_deviation: f64,
    pub frozen: bool,
}

pub fn mixing_angle(sc: &Scenario) -> Result<Angle> {
    let mesh = sc.theta_mesh();
    Ok(match sc.solver.mixing_angle {
        AngleMode::Validated => {
            let m = solve_mixing_angle_with(&sc.schedule, &mesh, sc.tolerances.theta)?;
            Angle { theta: m.theta, max_deviation: m.max_deviation, frozen: false }
        }
        AngleMode::Frozen => {
            let spread = solve_mixing_angle_with(&sc.schedule, &mesh, f64::INFINITY)?.max_deviation;
            let theta = match pointwise_mixing_angle(&sc.schedule, sc.t0())? {
                PointAngle::Angle(a) => a,
                PointAngle::Degenerate => 0.0,
            };
            Angle { theta, max_deviation: spread, frozen: true }
        }
    })
}

/// Mixing angle plus both amplitudes, solved on a mesh that reaches four
/// residual steps past `t1` so the residual window never leaves it.
#[derive(Debug, Clone)]
pub struct Solved {
    pub angle: Angle,
    pub pair: ModePair,
}

pub fn prepare(sc: &Scenario) -> Result<Solved> {
    let angle = mixing_angle(sc)?;
    let mut mesh = sc.ode_mesh();
    let h = sc.solver.residual_step;
    let step = mesh[1] - mesh[0];
    let end = sc.time.t1 + 4.0 * h;
    let mut t = sc.time.t1;
    while t < end - 1e-12 {
        t = (t + step).min(end);
        mesh.push(t);
    }
    let ic = |v: Option<[f64; 2]>| v.map(|[r, d]| (r, d));
    let pair =
        solve_pair(&sc.schedule, angle.theta, &mesh, [ic(sc.initial.rho1), ic(sc.initial.rho2)], sc.solver.route)?;
    Ok(Solved { angle, pair })
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Output { path: dir.to_path_buf(), source })
}

#[derive(Debug, Clone)]
pub struct DeriveReport {
    pub angle: Angle,
    pub table: Table,
}

pub fn cmd_derive(sc: &Scenario, out: &Path) -> Result<DeriveReport> {
    let angle = mixing_angle(sc)?;
    let mut table = Table::new(&DERIVED_COLUMNS);
    for t in sc.output_times() {
        let d = derive_all(&sc.schedule, t, angle.theta)?;
        let row = [
            t,
            d.phi,
            d.omega_c,
            d.omega,
            d.m_minus,
            d.m_plus,
            d.omega_minus,
            d.omega_plus,
            d.a1,
            d.b1,
            d.m1,
            d.m2,
            d.omega1,
            d.omega2,
            d.c,
            d.theta,
            signed_sqrt(d.omega_tilde1_sq),
            signed_sqrt(d.omega_tilde2_sq),
            d.big_omega1(),
            d.big_omega2(),
            d.delta,
        ];
        table.push(row.into_iter().map(float).collect());
    }
    ensure_dir(out)?;
    table.write(&out.join("derived.csv"))?;
    Ok(DeriveReport { angle, table })
}

pub fn dump_path(out: &Path, kind: &str, n1: u32, n2: u32, k: usize) -> PathBuf {
    out.join("states").join(format!("{kind}_{n1}_{n2}_{k:04}.qstate"))
}

fn require_modes(sc: &Scenario) -> Result<()> {
    if sc.modes.is_empty() {
        return Err(CliError::Config("no modes requested".into()));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub angle: Angle,
    pub table: Table,
    /// Smallest closed-form versus pipeline fidelity over all rows.
    pub worst_fidelity: f64,
}

pub fn cmd_solve(sc: &Scenario, out: &Path) -> Result<SolveReport> {
    require_modes(sc)?;
    let solved = prepare(sc)?;
    ensure_dir(&out.join("states"))?;
    let mut table = Table::new(&SOLVE_COLUMNS);
    let mut worst_fidelity = 1.0f64;
    for (k, t) in sc.output_times().into_iter().enumerate() {
        for &[n1, n2] in &sc.modes {
            let (closed, factor) =
                closed_form_state(&sc.schedule, &solved.pair, n1, n2, &sc.grid, t, sc.solver.variant)?;
            let piped = pipeline_state(&sc.schedule, &solved.pair, n1, n2, &sc.grid, t, sc.solver.order)?;
            let f = fidelity(&closed, &piped)?;
            worst_fidelity = worst_fidelity.min(f);
            let (r1, r2) = solved.pair.at(t)?;
            let alpha = alpha_from_integrals(n1, n2, r1.phase_integral, r2.phase_integral);
            dump::write_file(&dump_path(out, "closed", n1, n2, k), &closed)?;
            dump::write_file(&dump_path(out, "pipeline", n1, n2, k), &piped)?;
            table.push(vec![
                float(t),
                n1.to_string(),
                n2.to_string(),
                float(1.0 / factor),
                float(piped.norm()),
                float(f),
                float(alpha),
            ]);
        }
    }
    table.write(&out.join("solve.csv"))?;
    Ok(SolveReport { angle: solved.angle, table, worst_fidelity })
}

fn read_dump(path: &Path, sc: &Scenario, t: f64) -> Result<QuantumState> {
    let missing = |reason: String| CliError::MissingArtifact { path: path.to_path_buf(), reason };
    let bytes = std::fs::read(path).map_err(|e| missing(e.to_string()))?;
    let s = dump::decode(&bytes).map_err(|e| missing(e.to_string()))?;
    if !s.grid.same_as(&sc.grid) {
        return Err(missing("grid differs from the scenario".into()));
    }
    if (s.t - t).abs() > 1e-12 * (1.0 + t.abs()) {
        return Err(missing(format!("dump is at t = {}, expected {t}", s.t)));
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyRow {
    pub t: f64,
    pub schrodinger_residual: f64,
    pub oracle_fidelity: f64,
    pub invariant_expectation: f64,
    pub invariant_drift: f64,
    pub ermakov_residual_1: f64,
    pub ermakov_residual_2: f64,
    pub norm_drift: f64,
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub mode: [u32; 2],
    pub rows: Vec<VerifyRow>,
    /// One entry per failed check, naming the worst row.
    pub failures: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn summary(&self) -> String {
        let [n1, n2] = self.mode;
        if self.passed() {
            format!("verify mode ({n1}, {n2}): PASS, {} rows", self.rows.len())
        } else {
            format!("verify mode ({n1}, {n2}): FAIL, {}", self.failures.join("; "))
        }
    }

    pub fn table(&self) -> Table {
        let mut table = Table::new(&VERIFY_COLUMNS);
        for r in &self.rows {
            let v = [
                r.t,
                r.schrodinger_residual,
                r.oracle_fidelity,
                r.invariant_expectation,
                r.invariant_drift,
                r.ermakov_residual_1,
                r.ermakov_residual_2,
            ];
            table.push(v.into_iter().map(float).collect());
        }
        table
    }
}

fn residual_at(sc: &Scenario, pair: &ModePair, sp: &Spectral, mode: [u32; 2], t: f64) -> Result<f64> {
    let h = sc.solver.residual_step;
    let k = ((t - sc.t0()) / h + 1e-9).floor().clamp(0.0, 2.0) as usize;
    let slices = (0..5)
        .map(|j| {
            let tj = t + (j as f64 - k as f64) * h;
            let (s, _) = closed_form_state(&sc.schedule, pair, mode[0], mode[1], &sc.grid, tj, sc.solver.variant)?;
            Ok(s)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(schrodinger_residual(&slices, k, sc.schedule.hbar, |st| {
        apply_original(sp, &OriginalCoefficients::at(&sc.schedule, st.t), &st.amplitudes)
    })?)
}

/// Checks the first requested mode against direct propagation, the
/// Schrödinger equation, and the invariant, reading the closed-form dumps
/// that `solve` wrote.
pub fn cmd_verify(sc: &Scenario, out: &Path) -> Result<VerifyReport> {
    require_modes(sc)?;
    let mode = sc.modes[0];
    let times = sc.output_times();
    let dumps = times
        .iter()
        .enumerate()
        .map(|(k, &t)| read_dump(&dump_path(out, "closed", mode[0], mode[1], k), sc, t))
        .collect::<Result<Vec<_>>>()?;
    let solved = prepare(sc)?;
    let cfg = PropagatorConfig { dt: sc.oracle.dt, scheme: sc.oracle.scheme, output_times: times.clone() };
    let run = propagate(&HamiltonianSpec::Original(sc.schedule.clone()), &dumps[0], &cfg)?;
    let sp = Spectral::new(sc.grid);
    let hbar = sc.schedule.hbar;
    let mut rows = Vec::with_capacity(times.len());
    let mut q0 = None;
    for (k, &t) in times.iter().enumerate() {
        let psi = &run.states[k];
        let dp = derive_all(&sc.schedule, t, solved.angle.theta)?;
        let chi = inverse_pipeline(psi, &dp, sc.solver.order)?;
        let (r1, r2) = solved.pair.at(t)?;
        let q = expectation(&sp, &InvariantOperator::new(t, &r1, &r2, hbar), &chi);
        let q0 = *q0.get_or_insert(q);
        let (m1, m2) = (&solved.pair.first, &solved.pair.second);
        rows.push(VerifyRow {
            t,
            schrodinger_residual: residual_at(sc, &solved.pair, &sp, mode, t)?,
            oracle_fidelity: fidelity(psi, &dumps[k])?,
            invariant_expectation: q,
            invariant_drift: ((q - q0) / q0).abs(),
            ermakov_residual_1: m1.residual_at(m1.nearest(t)),
            ermakov_residual_2: m2.residual_at(m2.nearest(t)),
            norm_drift: run.diagnostics[k].norm_drift,
        });
    }
    let tol = sc.tolerances;
    type Metric = fn(&VerifyRow) -> f64;
    let checks: [(&str, Metric, f64); 6] = [
        ("1 - oracle_fidelity", |r| 1.0 - r.oracle_fidelity, tol.oracle_fidelity),
        ("schrodinger_residual", |r| r.schrodinger_residual, tol.schrodinger_residual),
        ("invariant_drift", |r| r.invariant_drift, tol.invariant_drift),
        ("ermakov_residual_1", |r| r.ermakov_residual_1, tol.ermakov_residual),
        ("ermakov_residual_2", |r| r.ermakov_residual_2, tol.ermakov_residual),
        ("norm drift", |r| r.norm_drift, tol.norm),
    ];
    let failures = checks
        .iter()
        .filter_map(|&(name, value, limit)| {
            let worst = rows.iter().max_by(|a, b| value(a).total_cmp(&value(b)))?;
            let v = value(worst);
            (!(v <= limit)).then(|| format!("{name} = {} > {} at t = {}", float(v), float(limit), worst.t))
        })
        .collect();
    let report = VerifyReport { mode, rows, failures };
    report.table().write(&out.join("verify.csv"))?;
    Ok(report)
}

/// Runs the scenario's command list, stopping at the first error.
pub fn cmd_run(sc: &Scenario, out: &Path, mut log: impl FnMut(&str)) -> Result<Option<VerifyReport>> {
    let mut last = None;
    for cmd in &sc.commands {
        match cmd {
            Command::Derive => log(&describe_derive(&cmd_derive(sc, out)?)),
            Command::Solve => log(&describe_solve(&cmd_solve(sc, out)?)),
            Command::Verify => {
                let r = cmd_verify(sc, out)?;
                log(&r.summary());
                last = Some(r);
            }
        }
    }
    Ok(last)
}

fn describe_angle(a: &Angle) -> String {
    let how = if a.frozen { "frozen at t0" } else { "validated" };
    format!("theta = {} ({how}, variation {})", float(a.theta), float(a.max_deviation))
}

pub fn describe_derive(r: &DeriveReport) -> String {
    format!("derive: {} rows, {}", r.table.len(), describe_angle(&r.angle))
}

pub fn describe_solve(r: &SolveReport) -> String {
    format!(
        "solve: {} rows, {}, worst closed/pipeline fidelity {}",
        r.table.len(),
        describe_angle(&r.angle),
        float(r.worst_fidelity)
    )
}
