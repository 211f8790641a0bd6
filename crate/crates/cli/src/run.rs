//! Mode dispatch: builds physics objects from a validated config, runs
//! the requested analysis, and renders one JSON document or one CSV
//! table. Every document carries a `schema` tag naming the versioned
//! schema file it conforms to.

use lzgate_core::device::{design_check, DesignReport, DeviceParams, DEFAULT_DESIGN_MARGIN};
use lzgate_core::dynamics::{propagate, TwoQubitState};
use lzgate_core::gate::calibrate::{calibrate, KnobBounds};
use lzgate_core::gate::lz::{lz_numeric, lz_probability, LzParams};
use lzgate_core::gate::readout::{
    marginal_probabilities, quarter_y_rotation, recover_phase, simulate_phase_readout, Qubit,
};
use lzgate_core::gate::{analyze_gate, GateReport};
use lzgate_core::schedules::{build_cn_schedule, CnParams, GateSchedule};
use num_complex::Complex;
use serde::Serialize;
use serde_json::Value;

use crate::config::{self, Mode, PhaseConfig, RunConfig, SweepMode};
use crate::output::{fmt_float, fmt_opt, to_json, Format, Table};
use crate::CliError;

type C64 = Complex<f64>;

/// Grids default to CSV, single reports to JSON; `--format` overrides.
pub fn default_format(mode: Mode) -> Format {
    match mode {
        Mode::Sweep | Mode::LzVerify => Format::Csv,
        _ => Format::Json,
    }
}

/// Validates and executes one run, returning the rendered output.
pub fn run(config: &RunConfig, workers: Option<usize>, format: Format) -> Result<String, CliError> {
    config.validate()?;
    match config.mode {
        Mode::Simulate => render(format, exec_simulate(config)?),
        Mode::LzVerify => render(format, exec_lz(config)?),
        Mode::DesignCheck => render(format, exec_design(config)?),
        Mode::Calibrate => render(format, exec_calibrate(config)?),
        Mode::MeasurePhase => render(format, exec_phase(config)?),
        Mode::Sweep => run_sweep(config, workers, format),
    }
}

/// A finished analysis that can leave as JSON or as CSV rows.
trait Rendered {
    fn json(&self) -> Result<String, CliError>;
    fn table(&self) -> Table;
}

fn render<T: Rendered>(format: Format, outcome: T) -> Result<String, CliError> {
    match format {
        Format::Json => outcome.json(),
        Format::Csv => outcome.table().to_csv(),
    }
}

fn stage(name: &'static str) -> impl Fn(lzgate_core::Error) -> CliError {
    move |e| CliError::from_core(name, e)
}

// --- simulate ---------------------------------------------------------

const SIMULATE_COLUMNS: &[&str] = &[
    "fidelity_raw",
    "fidelity_cal",
    "chi",
    "flip_error_10",
    "flip_error_11",
    "leak_error_00",
    "leak_error_01",
    "phase_00",
    "phase_11",
    "phase_32",
    "phase_23",
    "unitarity_deviation",
];

#[derive(Serialize)]
struct SimulateDoc<'a> {
    schema: &'static str,
    params: &'a CnParams,
    tol: f64,
    unitarity_deviation: f64,
    report: &'a GateReport,
}

struct SimulateOutcome {
    params: CnParams,
    tol: f64,
    unitarity_deviation: f64,
    report: GateReport,
}

fn exec_simulate(config: &RunConfig) -> Result<SimulateOutcome, CliError> {
    let params = config.cn_params.clone().unwrap_or_default().to_params();
    let schedule = build_cn_schedule(&params).map_err(stage("schedule"))?;
    let u = propagate(&schedule, config.tol).map_err(stage("propagate"))?;
    Ok(SimulateOutcome {
        params,
        tol: config.tol,
        unitarity_deviation: u.unitarity_deviation(),
        report: analyze_gate(&u),
    })
}

impl SimulateOutcome {
    fn cells(&self) -> Vec<String> {
        let r = &self.report;
        let mut v: Vec<String> = [
            r.fidelity_raw,
            r.fidelity_cal,
            r.chi,
            r.flip_error_10,
            r.flip_error_11,
            r.leak_error_00,
            r.leak_error_01,
        ]
        .iter()
        .copied()
        .map(fmt_float)
        .collect();
        v.extend(r.phases.iter().copied().map(fmt_float));
        v.push(fmt_float(self.unitarity_deviation));
        v
    }
}

impl Rendered for SimulateOutcome {
    fn json(&self) -> Result<String, CliError> {
        to_json(&SimulateDoc {
            schema: "report.v1",
            params: &self.params,
            tol: self.tol,
            unitarity_deviation: self.unitarity_deviation,
            report: &self.report,
        })
    }

    fn table(&self) -> Table {
        let mut t = Table::new(SIMULATE_COLUMNS);
        t.push(self.cells());
        t
    }
}

// --- lz-verify --------------------------------------------------------

const LZ_COLUMNS: &[&str] =
    &["tau", "omega", "u", "exponent", "p_analytic", "p_numeric", "rel_error"];

#[derive(Serialize)]
struct LzRow {
    tau: f64,
    omega: f64,
    u: f64,
    exponent: f64,
    p_analytic: f64,
    p_numeric: f64,
    rel_error: f64,
}

#[derive(Serialize)]
struct LzDoc<'a> {
    schema: &'static str,
    eps_offset: f64,
    tol: f64,
    rows: &'a [LzRow],
}

struct LzOutcome {
    eps_offset: f64,
    tol: f64,
    rows: Vec<LzRow>,
}

/// Runs the crossing grid in row-major (tau, omega, u) order, comparing
/// the integrated jump probability against the closed form point by
/// point.
fn exec_lz(config: &RunConfig) -> Result<LzOutcome, CliError> {
    let grid = config.lz.clone().unwrap_or_default();
    let mut rows = Vec::with_capacity(grid.tau.len() * grid.omega.len() * grid.u.len());
    for &tau in &grid.tau {
        for &omega in &grid.omega {
            for &u in &grid.u {
                let p = LzParams { omega, u, tau };
                let p_analytic = lz_probability(&p).map_err(stage("lz-verify"))?;
                let p_numeric =
                    lz_numeric(&p, grid.eps_offset, config.tol).map_err(stage("lz-verify"))?;
                rows.push(LzRow {
                    tau,
                    omega,
                    u,
                    exponent: std::f64::consts::PI * tau * omega * omega / u,
                    p_analytic,
                    p_numeric,
                    rel_error: (p_numeric - p_analytic).abs() / p_analytic,
                });
            }
        }
    }
    Ok(LzOutcome { eps_offset: grid.eps_offset, tol: config.tol, rows })
}

impl Rendered for LzOutcome {
    fn json(&self) -> Result<String, CliError> {
        to_json(&LzDoc {
            schema: "lz.v1",
            eps_offset: self.eps_offset,
            tol: self.tol,
            rows: &self.rows,
        })
    }

    fn table(&self) -> Table {
        let mut t = Table::new(LZ_COLUMNS);
        for r in &self.rows {
            t.push(
                [r.tau, r.omega, r.u, r.exponent, r.p_analytic, r.p_numeric, r.rel_error]
                    .iter()
                    .copied()
                    .map(fmt_float)
                    .collect(),
            );
        }
        t
    }
}

// --- design-check -----------------------------------------------------

const DESIGN_COLUMNS: &[&str] = &[
    "ej_over_t",
    "ec_over_ej",
    "delta_over_ec",
    "n_over_screening",
    "pass",
    "lambda",
    "alpha",
    "ic_amperes",
    "eta_m_joules",
    "omega_m_joules",
];

#[derive(Serialize)]
struct DesignDoc<'a> {
    schema: &'static str,
    params: &'a DeviceParams,
    report: &'a DesignReport,
}

struct DesignOutcome {
    params: DeviceParams,
    report: DesignReport,
}

fn exec_design(config: &RunConfig) -> Result<DesignOutcome, CliError> {
    let params = config.device_params.clone().unwrap_or_default().to_params();
    let margin = config.margin.unwrap_or(DEFAULT_DESIGN_MARGIN);
    let report = design_check(&params, margin).map_err(stage("design-check"))?;
    Ok(DesignOutcome { params, report })
}

impl DesignOutcome {
    fn cells(&self) -> Vec<String> {
        // Hierarchy ratios in report order: EJ/T, EC/EJ, Delta/EC,
        // N over the screening length.
        let mut v: Vec<String> =
            self.report.entries.iter().map(|e| fmt_float(e.ratio)).collect();
        v.push(self.report.pass.to_string());
        let d = &self.report.derived;
        v.extend([d.lambda, d.alpha, d.ic, d.eta_m, d.omega_m].map(fmt_float));
        v
    }
}

impl Rendered for DesignOutcome {
    fn json(&self) -> Result<String, CliError> {
        to_json(&DesignDoc { schema: "design.v1", params: &self.params, report: &self.report })
    }

    fn table(&self) -> Table {
        let mut t = Table::new(DESIGN_COLUMNS);
        t.push(self.cells());
        t
    }
}

// --- calibrate --------------------------------------------------------

const CALIBRATE_COLUMNS: &[&str] = &[
    "converged",
    "evaluations",
    "eps1_level",
    "hold",
    "fidelity_raw",
    "fidelity_cal",
    "chi",
];

#[derive(Serialize)]
struct CalibrateDoc<'a> {
    schema: &'static str,
    params: &'a CnParams,
    objective_tol: f64,
    budget: usize,
    converged: bool,
    evaluations: usize,
    eps1_level: f64,
    hold: f64,
    report: &'a GateReport,
    schedule: &'a GateSchedule,
}

struct CalibrateOutcome {
    params: CnParams,
    objective_tol: f64,
    budget: usize,
    converged: bool,
    evaluations: usize,
    eps1_level: f64,
    hold: f64,
    report: GateReport,
    schedule: GateSchedule,
}

fn exec_calibrate(config: &RunConfig) -> Result<CalibrateOutcome, CliError> {
    let params = config.cn_params.clone().unwrap_or_default().to_params();
    let cal = config.calibrate.clone().unwrap_or_default();
    let schedule = build_cn_schedule(&params).map_err(stage("schedule"))?;
    let mut knobs = KnobBounds::around(&schedule).map_err(stage("calibrate"))?;
    if let Some(w) = cal.eps1_window {
        knobs.eps1_level = w;
    }
    if let Some(w) = cal.area_window {
        knobs.tail_eps2_area = w;
    }
    let outcome =
        calibrate(&schedule, &knobs, cal.objective_tol, cal.budget).map_err(stage("calibrate"))?;
    let shape = outcome.schedule.cn_shape().ok_or_else(|| {
        CliError::Numerical("calibrate: tuned schedule lost its canonical form".to_string())
    })?;
    Ok(CalibrateOutcome {
        params,
        objective_tol: cal.objective_tol,
        budget: cal.budget,
        converged: outcome.converged,
        evaluations: outcome.evaluations,
        eps1_level: shape.eps1_level,
        hold: shape.hold,
        report: outcome.report,
        schedule: outcome.schedule,
    })
}

impl CalibrateOutcome {
    fn cells(&self) -> Vec<String> {
        vec![
            self.converged.to_string(),
            self.evaluations.to_string(),
            fmt_float(self.eps1_level),
            fmt_float(self.hold),
            fmt_float(self.report.fidelity_raw),
            fmt_float(self.report.fidelity_cal),
            fmt_float(self.report.chi),
        ]
    }
}

impl Rendered for CalibrateOutcome {
    fn json(&self) -> Result<String, CliError> {
        to_json(&CalibrateDoc {
            schema: "calibration.v1",
            params: &self.params,
            objective_tol: self.objective_tol,
            budget: self.budget,
            converged: self.converged,
            evaluations: self.evaluations,
            eps1_level: self.eps1_level,
            hold: self.hold,
            report: &self.report,
            schedule: &self.schedule,
        })
    }

    fn table(&self) -> Table {
        let mut t = Table::new(CALIBRATE_COLUMNS);
        t.push(self.cells());
        t
    }
}

// --- measure-phase ----------------------------------------------------

const PHASE_COLUMNS: &[&str] = &["qubit", "q1_x", "q2_x", "q1_y", "q2_y", "phi", "note"];

#[derive(Serialize)]
struct PhaseDoc<'a> {
    schema: &'static str,
    params: &'a CnParams,
    qubit: Qubit,
    q1_x: f64,
    q2_x: f64,
    q1_y: f64,
    q2_y: f64,
    phi: Option<f64>,
    note: Option<&'a str>,
}

struct PhaseOutcome {
    params: CnParams,
    qubit: Qubit,
    q1_x: f64,
    q2_x: f64,
    q1_y: f64,
    q2_y: f64,
    phi: Option<f64>,
    note: Option<String>,
}

fn initial_state(phase: &PhaseConfig) -> lzgate_core::Result<TwoQubitState> {
    match phase.state {
        Some(a) => TwoQubitState::normalized([
            C64::new(a[0][0], a[0][1]),
            C64::new(a[1][0], a[1][1]),
            C64::new(a[2][0], a[2][1]),
            C64::new(a[3][0], a[3][1]),
        ]),
        // Equal superposition on the read qubit, the other in 0: the
        // configuration whose relative phase the rotations expose with
        // full contrast.
        None => {
            let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            let z = C64::new(0.0, 0.0);
            TwoQubitState::new(match phase.qubit {
                Qubit::Target => [s, s, z, z],
                Qubit::Control => [s, z, s, z],
            })
        }
    }
}

/// Runs the gate on the probe state, then reads the chosen qubit
/// through quarter rotations about x and y. When the post-gate state
/// carries no coherence on that qubit the phase is undefined; that is
/// reported in `note`, not treated as a failure.
fn exec_phase(config: &RunConfig) -> Result<PhaseOutcome, CliError> {
    let params = config.cn_params.clone().unwrap_or_default().to_params();
    let phase = config.phase.clone().unwrap_or_default();
    let schedule = build_cn_schedule(&params).map_err(stage("schedule"))?;
    let u = propagate(&schedule, config.tol).map_err(stage("propagate"))?;
    let out = u.apply(&initial_state(&phase).map_err(stage("state"))?);
    let (q1_x, q2_x) = simulate_phase_readout(&out, phase.qubit);
    let rotated = quarter_y_rotation(phase.qubit).apply(&out);
    let (q1_y, q2_y) = marginal_probabilities(&rotated, phase.qubit);
    let (phi, note) = match recover_phase(q1_x, q1_y) {
        Ok(p) => (Some(p), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(PhaseOutcome { params, qubit: phase.qubit, q1_x, q2_x, q1_y, q2_y, phi, note })
}

fn qubit_name(q: Qubit) -> &'static str {
    match q {
        Qubit::Control => "control",
        Qubit::Target => "target",
    }
}

impl PhaseOutcome {
    fn cells(&self) -> Vec<String> {
        vec![
            qubit_name(self.qubit).to_string(),
            fmt_float(self.q1_x),
            fmt_float(self.q2_x),
            fmt_float(self.q1_y),
            fmt_float(self.q2_y),
            fmt_opt(self.phi),
            self.note.clone().unwrap_or_default(),
        ]
    }
}

impl Rendered for PhaseOutcome {
    fn json(&self) -> Result<String, CliError> {
        to_json(&PhaseDoc {
            schema: "phase.v1",
            params: &self.params,
            qubit: self.qubit,
            q1_x: self.q1_x,
            q2_x: self.q2_x,
            q1_y: self.q1_y,
            q2_y: self.q2_y,
            phi: self.phi,
            note: self.note.as_deref(),
        })
    }

    fn table(&self) -> Table {
        let mut t = Table::new(PHASE_COLUMNS);
        t.push(self.cells());
        t
    }
}

// --- sweep ------------------------------------------------------------

#[derive(Serialize)]
struct SweepDoc<'a> {
    schema: &'static str,
    mode: SweepMode,
    parameter: &'a str,
    columns: &'a [String],
    rows: &'a [Vec<String>],
}

fn mode_columns(mode: SweepMode) -> &'static [&'static str] {
    match mode {
        SweepMode::Simulate => SIMULATE_COLUMNS,
        SweepMode::DesignCheck => DESIGN_COLUMNS,
        SweepMode::Calibrate => CALIBRATE_COLUMNS,
        SweepMode::MeasurePhase => PHASE_COLUMNS,
    }
}

/// Grid values land in the JSON tree as integers when they are whole,
/// so integer-typed leaves (island counts, budgets) can be swept too;
/// float leaves accept either encoding.
fn grid_value(v: f64) -> Value {
    const EXACT: f64 = 9.007_199_254_740_992e15;
    if v.fract() == 0.0 && v.abs() <= EXACT {
        if v >= 0.0 {
            Value::from(v as u64)
        } else {
            Value::from(v as i64)
        }
    } else {
        Value::from(v)
    }
}

/// One grid point: rewrite the swept leaf, re-validate, execute, and
/// return the scalar cells for this row.
fn sweep_point(tree: &Value, parameter: &str, value: f64) -> Result<Vec<String>, CliError> {
    let mut point = tree.clone();
    config::apply_set_value(&mut point, parameter, grid_value(value))?;
    let cfg = config::from_tree(point)?;
    cfg.validate()?;
    match cfg.mode {
        Mode::Simulate => Ok(exec_simulate(&cfg)?.cells()),
        Mode::DesignCheck => Ok(exec_design(&cfg)?.cells()),
        Mode::Calibrate => Ok(exec_calibrate(&cfg)?.cells()),
        Mode::MeasurePhase => Ok(exec_phase(&cfg)?.cells()),
        Mode::Sweep | Mode::LzVerify => {
            Err(CliError::config(format!("mode {} cannot be swept", cfg.mode.name())))
        }
    }
}

/// Evaluates the grid on a worker pool. Rows are collected in grid
/// order, so the output is byte-identical for any worker count; a
/// failing point fills the `error` column and never aborts the sweep.
fn run_sweep(
    config: &RunConfig,
    workers: Option<usize>,
    format: Format,
) -> Result<String, CliError> {
    let sweep = config.sweep.as_ref().expect("validated sweep config");
    let points = sweep.points();

    // Per-point configs derive from this tree: inner mode, no sweep
    // section, swept leaf rewritten.
    let mut tree =
        serde_json::to_value(config).map_err(|e| CliError::config(format!("sweep: {e}")))?;
    let obj = tree.as_object_mut().expect("config serializes to an object");
    obj.remove("sweep");
    obj.insert(
        "mode".to_string(),
        serde_json::to_value(sweep.mode.as_mode()).expect("mode serializes"),
    );

    // The base inner config and the parameter path must be sound before
    // any workers start; a typo would otherwise fail every row with the
    // same message. Value-dependent failures stay per-point.
    let base = config::from_tree(tree.clone())?;
    base.validate()?;
    {
        let mut probe = tree.clone();
        config::apply_set_value(&mut probe, &sweep.parameter, grid_value(points[0]))?;
        config::from_tree(probe)?;
    }

    let scalar_count = mode_columns(sweep.mode).len();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError::config(format!("workers: {e}")))?;
    let rows: Vec<Vec<String>> = pool.install(|| {
        use rayon::prelude::*;
        points
            .par_iter()
            .map(|&v| {
                let mut row = vec![fmt_float(v)];
                match sweep_point(&tree, &sweep.parameter, v) {
                    Ok(cells) => {
                        row.extend(cells);
                        row.push(String::new());
                    }
                    Err(e) => {
                        row.extend(std::iter::repeat(String::new()).take(scalar_count));
                        row.push(e.to_string());
                    }
                }
                row
            })
            .collect()
    });

    let mut columns = vec![sweep.parameter.clone()];
    columns.extend(mode_columns(sweep.mode).iter().map(|s| s.to_string()));
    columns.push("error".to_string());

    match format {
        Format::Json => to_json(&SweepDoc {
            schema: "sweep.v1",
            mode: sweep.mode,
            parameter: &sweep.parameter,
            columns: &columns,
            rows: &rows,
        }),
        Format::Csv => {
            let mut t = Table { header: columns, rows };
            // Table::push is bypassed above; keep the width invariant.
            debug_assert!(t.rows.iter().all(|r| r.len() == t.header.len()));
            t.rows.shrink_to_fit();
            t.to_csv()
        }
    }
}
