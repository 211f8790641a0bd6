//! Run configuration: JSON ingestion, dotted-path overrides, per-mode
//! defaults, and validation.
//!
//! A configuration is a JSON document with a `mode` plus the sections
//! that mode consumes; every section is optional and falls back to the
//! reference operating point, so `lzgate simulate` with no config at all
//! is a meaningful run. Unknown fields are rejected everywhere: a typo
//! should fail loudly, not silently fall back to a default.

use lzgate_core::device::DeviceParams;
use lzgate_core::schedules::CnParams;
use lzgate_core::units::consts::{E_CHARGE, HBAR, K_BOLTZMANN};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

/// Propagator convergence tolerance when the config does not set one.
pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Simulate,
    Sweep,
    LzVerify,
    DesignCheck,
    Calibrate,
    MeasurePhase,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::Sweep => "sweep",
            Mode::LzVerify => "lz-verify",
            Mode::DesignCheck => "design-check",
            Mode::Calibrate => "calibrate",
            Mode::MeasurePhase => "measure-phase",
        }
    }
}

/// Pulse-sequence parameters with the reference operating point as the
/// default for every field; `ramp` and `hold` default to their usual
/// fractions of the sweep timescale.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CnConfig {
    #[serde(default = "d_eps")]
    pub eps: f64,
    #[serde(default = "d_one")]
    pub u: f64,
    #[serde(default = "d_one")]
    pub eta: f64,
    #[serde(default = "d_omega")]
    pub omega: f64,
    #[serde(default = "d_tau")]
    pub tau: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ramp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hold: Option<f64>,
    #[serde(default)]
    pub eps1_level: f64,
}

fn d_eps() -> f64 {
    0.5
}
fn d_one() -> f64 {
    1.0
}
fn d_omega() -> f64 {
    0.05
}
fn d_tau() -> f64 {
    2000.0
}

impl Default for CnConfig {
    fn default() -> Self {
        CnConfig {
            eps: d_eps(),
            u: d_one(),
            eta: d_one(),
            omega: d_omega(),
            tau: d_tau(),
            ramp: None,
            hold: None,
            eps1_level: 0.0,
        }
    }
}

impl CnConfig {
    pub fn to_params(&self) -> CnParams {
        let mut p = CnParams::with_defaults(self.eps, self.u, self.eta, self.omega, self.tau);
        if let Some(r) = self.ramp {
            p.ramp = r;
        }
        if let Some(h) = self.hold {
            p.hold = h;
        }
        p.eps1_level = self.eps1_level;
        p
    }
}

/// Hardware parameters. Energies are given in kelvin here (the natural
/// experimental scale); conversion to joules happens on resolution. The
/// defaults describe the reference charge-qubit array: junction
/// capacitance set by a 3 K charging energy, tunnel resistance set by a
/// 1 K Josephson energy under a 20 K gap, ten junctions per array.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    #[serde(default = "d_c")]
    pub c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    #[serde(default = "d_ci")]
    pub ci: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cstar: Option<f64>,
    #[serde(default = "d_rt")]
    pub rt: f64,
    #[serde(default = "d_delta_kelvin")]
    pub delta_kelvin: f64,
    #[serde(default = "d_t_kelvin")]
    pub t_kelvin: f64,
    #[serde(default = "d_rho")]
    pub rho: f64,
    #[serde(default = "d_d")]
    pub d: f64,
    #[serde(default = "d_n")]
    pub n: u32,
    #[serde(default = "d_m")]
    pub m: u32,
}

/// Junction capacitance giving a 3 K single-electron charging energy,
/// e^2 / 2C = 3 K.
fn d_c() -> f64 {
    E_CHARGE * E_CHARGE / (6.0 * K_BOLTZMANN)
}
fn d_ci() -> f64 {
    0.05e-15
}
/// Tunnel resistance giving a 1 K Josephson energy under a 20 K gap,
/// from E_J = pi hbar Delta / (4 e^2 R_T).
fn d_rt() -> f64 {
    std::f64::consts::PI * HBAR * 20.0 / (4.0 * E_CHARGE * E_CHARGE)
}
fn d_delta_kelvin() -> f64 {
    20.0
}
fn d_t_kelvin() -> f64 {
    0.030
}
fn d_rho() -> f64 {
    300.0
}
fn d_d() -> f64 {
    70e-9
}
fn d_n() -> u32 {
    10
}
fn d_m() -> u32 {
    3
}

impl Default for DeviceConfig {
    fn default() -> Self {
        serde_json::from_value(Value::Object(Default::default()))
            .expect("all device fields carry defaults")
    }
}

impl DeviceConfig {
    /// Resolves to the SI parameter set: kelvin fields to joules, the
    /// gate capacitance to C/10 and the stray capacitance to C0 when
    /// left unset.
    pub fn to_params(&self) -> DeviceParams {
        let c0 = self.c0.unwrap_or(self.c / 10.0);
        DeviceParams {
            c: self.c,
            c0,
            ci: self.ci,
            cstar: self.cstar.unwrap_or(c0),
            rt: self.rt,
            delta: self.delta_kelvin * K_BOLTZMANN,
            t: self.t_kelvin * K_BOLTZMANN,
            rho: self.rho,
            d: self.d,
            n: self.n,
            m: self.m,
        }
    }
}

/// Crossing-verification grid: the cartesian product of the three value
/// lists, compared point by point against the closed form.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LzConfig {
    #[serde(default = "d_unit_list")]
    pub tau: Vec<f64>,
    #[serde(default = "d_unit_list")]
    pub omega: Vec<f64>,
    #[serde(default = "d_unit_list")]
    pub u: Vec<f64>,
    #[serde(default)]
    pub eps_offset: f64,
}

fn d_unit_list() -> Vec<f64> {
    vec![1.0]
}

impl Default for LzConfig {
    fn default() -> Self {
        LzConfig { tau: d_unit_list(), omega: d_unit_list(), u: d_unit_list(), eps_offset: 0.0 }
    }
}

/// Phase-readout probe. The default state puts the read qubit in an
/// equal superposition with the other qubit in 0, the configuration
/// whose relative phase the quarter rotations expose directly.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseConfig {
    #[serde(default = "d_qubit")]
    pub qubit: lzgate_core::gate::readout::Qubit,
    /// Initial amplitudes as [re, im] pairs in the basis
    /// |00>, |01>, |10>, |11>; normalized on use.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<[[f64; 2]; 4]>,
}

fn d_qubit() -> lzgate_core::gate::readout::Qubit {
    lzgate_core::gate::readout::Qubit::Target
}

impl Default for PhaseConfig {
    fn default() -> Self {
        PhaseConfig { qubit: d_qubit(), state: None }
    }
}

/// Calibration loop settings. The objective tolerance bounds
/// (1 - fidelity_cal) + chi^2, so 1e-4 certifies fidelity_cal >= 0.9999
/// and |chi| <= 0.01 at once.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrateConfig {
    #[serde(default = "d_objective_tol")]
    pub objective_tol: f64,
    #[serde(default = "d_budget")]
    pub budget: usize,
    /// Optional override of the control-bias search window.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps1_window: Option<(f64, f64)>,
    /// Optional override of the tail detuning-area search window.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area_window: Option<(f64, f64)>,
}

fn d_objective_tol() -> f64 {
    1e-4
}
fn d_budget() -> usize {
    200
}

impl Default for CalibrateConfig {
    fn default() -> Self {
        CalibrateConfig {
            objective_tol: d_objective_tol(),
            budget: d_budget(),
            eps1_window: None,
            area_window: None,
        }
    }
}

/// Modes a sweep may repeat over its grid. `lz-verify` is excluded: it
/// carries its own grid and would yield a table per point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMode {
    Simulate,
    DesignCheck,
    Calibrate,
    MeasurePhase,
}

impl SweepMode {
    pub fn as_mode(self) -> Mode {
        match self {
            SweepMode::Simulate => Mode::Simulate,
            SweepMode::DesignCheck => Mode::DesignCheck,
            SweepMode::Calibrate => Mode::Calibrate,
            SweepMode::MeasurePhase => Mode::MeasurePhase,
        }
    }
}

/// Evenly spaced inclusive grid; `count = 1` collapses to `start`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

/// One-parameter sweep: the dotted `parameter` path is rewritten in the
/// effective config for every grid value and the chosen mode runs on
/// the result. Exactly one of `values`/`grid` supplies the points.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "d_sweep_mode")]
    pub mode: SweepMode,
    pub parameter: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
}

fn d_sweep_mode() -> SweepMode {
    SweepMode::Simulate
}

impl SweepConfig {
    /// The grid points in emission order.
    pub fn points(&self) -> Vec<f64> {
        match (&self.values, &self.grid) {
            (Some(v), None) => v.clone(),
            (None, Some(g)) => {
                if g.count == 1 {
                    vec![g.start]
                } else {
                    (0..g.count)
                        .map(|k| g.start + (g.stop - g.start) * k as f64 / (g.count - 1) as f64)
                        .collect()
                }
            }
            // validate() rules the other combinations out.
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cn_params: Option<CnConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub device_params: Option<DeviceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lz: Option<LzConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<PhaseConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibrate: Option<CalibrateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    /// Design margin for design-check runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    /// Propagator convergence tolerance, in (0, 1e-3].
    #[serde(default = "d_tol")]
    pub tol: f64,
    /// Seed for randomized property suites driven through the config.
    #[serde(default)]
    pub seed: u64,
}

fn d_tol() -> f64 {
    DEFAULT_TOL
}

impl RunConfig {
    /// A bare config for the given mode; sections fall in as defaults.
    pub fn bare(mode: Mode) -> RunConfig {
        RunConfig {
            mode,
            cn_params: None,
            device_params: None,
            lz: None,
            phase: None,
            calibrate: None,
            sweep: None,
            margin: None,
            tol: DEFAULT_TOL,
            seed: 0,
        }
    }

    /// Checks global ranges and the mode/section compatibility matrix.
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.tol > 0.0 && self.tol <= 1e-3) {
            return Err(CliError::config(format!(
                "tol must lie in (0, 1e-3], got {}",
                self.tol
            )));
        }
        if let Some(m) = self.margin {
            if !(m.is_finite() && m > 0.0) {
                return Err(CliError::config(format!("margin must be positive, got {m}")));
            }
        }
        let inner = match self.mode {
            Mode::Sweep => {
                let sweep = self.sweep.as_ref().ok_or_else(|| {
                    CliError::config("sweep mode needs a `sweep` section".to_string())
                })?;
                sweep.validate()?;
                sweep.mode.as_mode()
            }
            _ => {
                if self.sweep.is_some() {
                    return Err(CliError::config(format!(
                        "`sweep` section is only read in sweep mode, not {}",
                        self.mode.name()
                    )));
                }
                self.mode
            }
        };
        self.check_sections(inner)?;
        if let Some(lz) = &self.lz {
            lz.validate()?;
        }
        if let Some(cal) = &self.calibrate {
            cal.validate()?;
        }
        Ok(())
    }

    /// Every section must belong to the (inner) mode that will run; a
    /// stray section is treated like an unknown field.
    fn check_sections(&self, inner: Mode) -> Result<(), CliError> {
        let allowed: &[&str] = match inner {
            Mode::Simulate => &["cn_params"],
            Mode::LzVerify => &["lz"],
            Mode::DesignCheck => &["device_params", "margin"],
            Mode::Calibrate => &["cn_params", "calibrate"],
            Mode::MeasurePhase => &["cn_params", "phase"],
            Mode::Sweep => unreachable!("sweep resolves to its inner mode"),
        };
        let present: [(&str, bool); 6] = [
            ("cn_params", self.cn_params.is_some()),
            ("device_params", self.device_params.is_some()),
            ("lz", self.lz.is_some()),
            ("phase", self.phase.is_some()),
            ("calibrate", self.calibrate.is_some()),
            ("margin", self.margin.is_some()),
        ];
        for (name, is_present) in present {
            if is_present && !allowed.contains(&name) {
                return Err(CliError::config(format!(
                    "section `{name}` is not read by mode {}",
                    inner.name()
                )));
            }
        }
        Ok(())
    }
}

impl LzConfig {
    fn validate(&self) -> Result<(), CliError> {
        for (name, list) in [("tau", &self.tau), ("omega", &self.omega), ("u", &self.u)] {
            if list.is_empty() {
                return Err(CliError::config(format!("lz.{name} must be non-empty")));
            }
            for &v in list {
                if !(v.is_finite() && v > 0.0) {
                    return Err(CliError::config(format!(
                        "lz.{name} values must be positive, got {v}"
                    )));
                }
            }
        }
        if !self.eps_offset.is_finite() {
            return Err(CliError::config("lz.eps_offset must be finite".to_string()));
        }
        // The numeric route only resolves sweeps that actually cross.
        let u_min = self.u.iter().cloned().fold(f64::INFINITY, f64::min);
        if self.eps_offset.abs() >= u_min {
            return Err(CliError::config(format!(
                "lz.eps_offset ({}) must stay below every sweep amplitude (min {u_min})",
                self.eps_offset
            )));
        }
        Ok(())
    }
}

impl CalibrateConfig {
    fn validate(&self) -> Result<(), CliError> {
        if !(self.objective_tol.is_finite() && self.objective_tol > 0.0) {
            return Err(CliError::config(format!(
                "calibrate.objective_tol must be positive, got {}",
                self.objective_tol
            )));
        }
        if self.budget == 0 {
            return Err(CliError::config("calibrate.budget must be at least 1".to_string()));
        }
        Ok(())
    }
}

impl SweepConfig {
    fn validate(&self) -> Result<(), CliError> {
        if self.parameter.is_empty() {
            return Err(CliError::config("sweep.parameter must be a dotted path".to_string()));
        }
        match (&self.values, &self.grid) {
            (Some(v), None) => {
                if v.is_empty() {
                    return Err(CliError::config("sweep.values must be non-empty".to_string()));
                }
                if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
                    return Err(CliError::config(format!("sweep.values must be finite, got {bad}")));
                }
            }
            (None, Some(g)) => {
                if g.count == 0 {
                    return Err(CliError::config("sweep.grid.count must be at least 1".to_string()));
                }
                if !(g.start.is_finite() && g.stop.is_finite()) {
                    return Err(CliError::config("sweep.grid bounds must be finite".to_string()));
                }
            }
            _ => {
                return Err(CliError::config(
                    "sweep needs exactly one of `values` or `grid`".to_string(),
                ));
            }
        }
        Ok(())
    }
}

/// Parses a JSON config document; parse errors carry line and column.
pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    let config: RunConfig = serde_json::from_str(text)
        .map_err(|e| CliError::config(format!("config: {e}")))?;
    Ok(config)
}

/// Applies one `--set key=value` override to a config JSON tree. The
/// dotted path must lead through existing objects (arrays are indexed
/// by number); the leaf itself may be new, and the re-parse catches a
/// leaf the schema does not know.
pub fn apply_set(tree: &mut Value, path: &str, raw: &str) -> Result<(), CliError> {
    // A bare word like `target` is a string; anything that parses as
    // JSON (numbers, booleans, arrays, quoted strings) is taken as such.
    let value: Value = serde_json::from_str(raw).unwrap_or(Value::String(raw.to_string()));
    apply_set_value(tree, path, value)
}

/// [`apply_set`] with the replacement value already parsed.
pub fn apply_set_value(tree: &mut Value, path: &str, value: Value) -> Result<(), CliError> {
    let segments: Vec<&str> = path.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(CliError::config(format!("--set path `{path}` has an empty segment")));
    }
    let mut node = tree;
    for (i, seg) in segments.iter().enumerate() {
        let last = i + 1 == segments.len();
        if last {
            match node {
                Value::Object(map) => {
                    map.insert((*seg).to_string(), value);
                    return Ok(());
                }
                Value::Array(items) => {
                    let idx: usize = seg.parse().map_err(|_| {
                        CliError::config(format!("--set path `{path}`: `{seg}` is not an index"))
                    })?;
                    let slot = items.get_mut(idx).ok_or_else(|| {
                        CliError::config(format!("--set path `{path}`: index {idx} out of bounds"))
                    })?;
                    *slot = value;
                    return Ok(());
                }
                _ => break,
            }
        }
        node = match node {
            Value::Object(map) => map
                .entry((*seg).to_string())
                .or_insert_with(|| Value::Object(Default::default())),
            Value::Array(items) => {
                let idx: usize = seg.parse().map_err(|_| {
                    CliError::config(format!("--set path `{path}`: `{seg}` is not an index"))
                })?;
                items.get_mut(idx).ok_or_else(|| {
                    CliError::config(format!("--set path `{path}`: index {idx} out of bounds"))
                })?
            }
            _ => break,
        };
    }
    Err(CliError::config(format!(
        "--set path `{path}` runs through a non-container value"
    )))
}

/// Re-reads a config from its JSON tree, surfacing unknown-field and
/// type diagnostics from the schema.
pub fn from_tree(tree: Value) -> Result<RunConfig, CliError> {
    serde_json::from_value(tree).map_err(|e| CliError::config(format!("config: {e}")))
}
