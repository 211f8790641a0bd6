//! Physical junction-array parameters and their gate-level consequences.
//!
//! All inputs are SI: capacitances in farads, energies (including the
//! gap and the temperature) in joules, resistances and impedances in
//! ohms, lengths in meters. Formula-level helpers are free functions;
//! [`design_check`] evaluates the full derived table plus the design
//! inequalities, and [`gate_params_from_device`] bridges a passing
//! device to the natural-unit pulse parameters.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schedules::CnParams;
use crate::units::consts::{C_LIGHT, EPSILON_0, E_CHARGE as QE, HBAR};
use crate::units::{to_natural, EnergyValue};

/// Charging energy of an island holding `n` excess Cooper pairs against
/// an induced gate charge q0: (2 e n - q0)^2 / 2C.
pub fn charging_energy(n: i64, q0: f64, c: f64) -> Result<f64> {
    check_positive("C", c)?;
    check_finite("Q0", q0)?;
    let q = 2.0 * QE * n as f64 - q0;
    Ok(q * q / (2.0 * c))
}

/// Energy splitting between the 0- and 1-pair charge states at induced
/// charge q0: 2e (e - q0) / C. Positive when q0 sits below the
/// degeneracy point q0 = e.
pub fn bias_detuning(q0: f64, c: f64) -> Result<f64> {
    check_positive("C", c)?;
    check_finite("Q0", q0)?;
    Ok(2.0 * QE * (QE - q0) / c)
}

/// Josephson coupling energy of a tunnel junction:
/// pi hbar Delta / (4 e^2 RT).
pub fn josephson_energy(rt: f64, delta: f64) -> Result<f64> {
    check_positive("RT", rt)?;
    check_positive("Delta", delta)?;
    Ok(std::f64::consts::PI * HBAR * delta / (4.0 * QE * QE * rt))
}

/// Critical current of the two-junction qubit link: 2 e E_J / hbar.
pub fn critical_current(ej: f64) -> Result<f64> {
    check_positive("EJ", ej)?;
    Ok(2.0 * QE * ej / HBAR)
}

/// Total capacitance of an internal array island:
/// sqrt(C0^2 + 4 C C0).
pub fn total_island_capacitance(c: f64, c0: f64) -> Result<f64> {
    check_positive("C", c)?;
    check_positive("C0", c0)?;
    Ok((c0 * c0 + 4.0 * c * c0).sqrt())
}

/// Amplitude for a pair transferred sequentially across m junctions,
/// through m - 1 intermediate islands of excitation energy E_k:
/// (EJ/2) * prod_k EJ / (2 E_k). An empty list is the direct junction,
/// EJ / 2.
pub fn tunneling_amplitude(ej: f64, intermediates: &[f64]) -> Result<f64> {
    check_positive("EJ", ej)?;
    let mut amp = ej / 2.0;
    for (k, &e) in intermediates.iter().enumerate() {
        if !(e.is_finite() && e > 0.0) {
            return Err(Error::invalid(format!(
                "intermediate excitation energy #{k} must be > 0, got {e} \
                 (the perturbative product diverges otherwise)",
            )));
        }
        amp *= ej / (2.0 * e);
    }
    Ok(amp)
}

/// Charge-charge interaction of two pairs m islands apart, screened by
/// the array: eta = ((2e)^2 / Ct) * lambda^m with
/// lambda = 2C / (2C + C0 + Ct). Returns (eta, lambda).
pub fn interaction_eta(c: f64, c0: f64, ct: f64, m: u32) -> Result<(f64, f64)> {
    check_positive("C", c)?;
    check_positive("C0", c0)?;
    check_positive("Ct", ct)?;
    let lambda = 2.0 * c / (2.0 * c + c0 + ct);
    let mut eta = (2.0 * QE) * (2.0 * QE) / ct;
    // Sequential multiply keeps eta(m+1)/eta(m) = lambda exact in floats.
    for _ in 0..m {
        eta *= lambda;
    }
    Ok((eta, lambda))
}

/// Differential potential drop a control pair induces on the coupled
/// array: 8 e Ci / ((C0 + Ct + 2C)(C0 + Ct + 4 Ci)).
pub fn coupling_delta_v(c: f64, c0: f64, ci: f64, ct: f64) -> Result<f64> {
    check_positive("C", c)?;
    check_positive("C0", c0)?;
    check_positive("Ct", ct)?;
    if !(ci.is_finite() && ci >= 0.0) {
        return Err(Error::invalid(format!("Ci must be >= 0, got {ci}")));
    }
    let s = c0 + ct + 2.0 * c;
    Ok(8.0 * QE * ci / (s * (c0 + ct + 4.0 * ci)))
}

/// Power radiated by a charge oscillating across a junction of length d:
/// e^2 omega^4 d^2 / (4 pi eps0 c^3).
pub fn dipole_power(omega: f64, d: f64) -> Result<f64> {
    check_nonnegative("omega", omega)?;
    check_nonnegative("d", d)?;
    let num = QE * QE * omega.powi(4) * d * d;
    Ok(num / (4.0 * std::f64::consts::PI * EPSILON_0 * C_LIGHT.powi(3)))
}

/// Power lost into the gate line of wave impedance rho:
/// (e C0 / C)^2 omega^2 rho.
pub fn line_power(c0: f64, c: f64, omega: f64, rho: f64) -> Result<f64> {
    check_positive("C0", c0)?;
    check_positive("C", c)?;
    check_nonnegative("omega", omega)?;
    check_nonnegative("rho", rho)?;
    let q = QE * c0 / c;
    Ok(q * q * omega * omega * rho)
}

/// Decoherence-induced error probability per gate cycle:
/// (C0/C)^2 rho e^2 / hbar.
pub fn cycle_error_alpha(c0: f64, c: f64, rho: f64) -> Result<f64> {
    check_positive("C0", c0)?;
    check_positive("C", c)?;
    check_nonnegative("rho", rho)?;
    let r = c0 / c;
    Ok(r * r * rho * QE * QE / HBAR)
}

/// Physical parameters of one qubit pair in a junction-array register.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    /// Junction capacitance (F).
    pub c: f64,
    /// Island-to-gate capacitance (F).
    pub c0: f64,
    /// Inter-array coupling capacitance (F).
    pub ci: f64,
    /// Total stray capacitance per island (F); at least `c0`.
    pub cstar: f64,
    /// Tunnel resistance per junction (ohm).
    pub rt: f64,
    /// Superconducting gap (J).
    pub delta: f64,
    /// Operating temperature (J).
    pub t: f64,
    /// Gate-electrode wave impedance (ohm).
    pub rho: f64,
    /// Junction electrode length (m).
    pub d: f64,
    /// Junctions per array.
    pub n: u32,
    /// Island separation of the qubit charge states.
    pub m: u32,
}

impl DeviceParams {
    /// Same parameters with the stray capacitance defaulted to `c0`
    /// (no ground planes beyond the gate electrodes).
    pub fn with_default_cstar(mut self) -> Self {
        self.cstar = self.c0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("C", self.c),
            ("C0", self.c0),
            ("Ci", self.ci),
            ("Cstar", self.cstar),
            ("RT", self.rt),
            ("Delta", self.delta),
            ("rho", self.rho),
            ("d", self.d),
        ] {
            check_positive(name, v)?;
        }
        if !(self.t.is_finite() && self.t >= 0.0) {
            return Err(Error::invalid(format!("T must be >= 0, got {}", self.t)));
        }
        if self.cstar < self.c0 {
            return Err(Error::invalid(format!(
                "Cstar ({}) cannot be below C0 ({}): it includes the gate capacitance",
                self.cstar, self.c0
            )));
        }
        if self.n < 2 {
            return Err(Error::invalid(format!("need at least 2 junctions, got {}", self.n)));
        }
        if !(self.m >= 1 && self.m < self.n) {
            return Err(Error::invalid(format!(
                "island separation m must satisfy 1 <= m < N, got m = {}, N = {}",
                self.m, self.n
            )));
        }
        Ok(())
    }
}

/// Quantities derived from [`DeviceParams`], all SI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedDevice {
    /// Single-electron charging energy e^2 / 2C (J).
    pub ec: f64,
    /// Josephson energy (J).
    pub ej: f64,
    /// Total island capacitance (F).
    pub ct: f64,
    /// Screening factor per island.
    pub lambda: f64,
    /// Qubit-qubit interaction at separation m (J).
    pub eta_m: f64,
    /// Effective tunneling amplitude at separation m (J).
    pub omega_m: f64,
    /// Intermediate-island excitation scale used for omega_m (J).
    pub e_k: f64,
    /// Coupling-induced potential drop (V).
    pub delta_v: f64,
    /// Critical current (A).
    pub ic: f64,
    /// Dipole radiation power at omega = EJ / hbar (W).
    pub pd: f64,
    /// Gate-line radiation power at omega = EJ / hbar (W).
    pub pl: f64,
    /// Decoherence-induced error per gate cycle.
    pub alpha: f64,
    /// Islands over which charge influence decays, sqrt(C / Cstar).
    pub screening_length: f64,
}

impl DerivedDevice {
    pub fn from_params(p: &DeviceParams) -> Result<DerivedDevice> {
        p.validate()?;
        let ec = QE * QE / (2.0 * p.c);
        let ej = josephson_energy(p.rt, p.delta)?;
        let ct = total_island_capacitance(p.c, p.c0)?;
        let (eta_m, lambda) = interaction_eta(p.c, p.c0, ct, p.m)?;
        // Excitation scale of a pair parked on an intermediate island.
        let e_k = (2.0 * QE) * (2.0 * QE) / (2.0 * ct);
        let omega_m =
            tunneling_amplitude(ej, &vec![e_k; (p.m - 1) as usize])?;
        let delta_v = coupling_delta_v(p.c, p.c0, p.ci, ct)?;
        let omega_drive = ej / HBAR;
        Ok(DerivedDevice {
            ec,
            ej,
            ct,
            lambda,
            eta_m,
            omega_m,
            e_k,
            delta_v,
            ic: critical_current(ej)?,
            pd: dipole_power(omega_drive, p.d)?,
            pl: line_power(p.c0, p.c, omega_drive, p.rho)?,
            alpha: cycle_error_alpha(p.c0, p.c, p.rho)?,
            screening_length: (p.c / p.cstar).sqrt(),
        })
    }
}

/// One design inequality, reported as the achieved ratio.
#[derive(Debug, Clone, Serialize)]
pub struct DesignEntry {
    pub label: String,
    pub ratio: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Outcome of [`design_check`]: the scale hierarchy and screening
/// inequalities plus the full derived-quantity table.
#[derive(Debug, Clone, Serialize)]
pub struct DesignReport {
    pub margin: f64,
    pub entries: Vec<DesignEntry>,
    pub derived: DerivedDevice,
    pub notes: Vec<String>,
    pub pass: bool,
}

impl fmt::Display for DesignReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "design check at margin {} -> {}",
            self.margin,
            if self.pass { "PASS" } else { "FAIL" }
        )?;
        for e in &self.entries {
            writeln!(
                f,
                "  {:<16} {:>12.4}  ({} {:.3})",
                e.label,
                e.ratio,
                if e.pass { ">=" } else { "< " },
                e.threshold
            )?;
        }
        let d = &self.derived;
        writeln!(f, "  EC      = {:.6e} J", d.ec)?;
        writeln!(f, "  EJ      = {:.6e} J", d.ej)?;
        writeln!(f, "  Ct      = {:.6e} F", d.ct)?;
        writeln!(f, "  lambda  = {:.9}", d.lambda)?;
        writeln!(f, "  eta_m   = {:.6e} J", d.eta_m)?;
        writeln!(f, "  omega_m = {:.6e} J", d.omega_m)?;
        writeln!(f, "  deltaV  = {:.6e} V", d.delta_v)?;
        writeln!(f, "  Ic      = {:.6e} A", d.ic)?;
        writeln!(f, "  Pd      = {:.6e} W", d.pd)?;
        writeln!(f, "  Pl      = {:.6e} W", d.pl)?;
        writeln!(f, "  alpha   = {:.6e}", d.alpha)?;
        writeln!(f, "  screening length = {:.4} islands", d.screening_length)?;
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        Ok(())
    }
}

impl DesignReport {
    pub fn first_failure(&self) -> Option<&DesignEntry> {
        self.entries.iter().find(|e| !e.pass)
    }
}

/// Evaluates the operating hierarchy T << EJ << EC << Delta and the
/// array-length condition N >> sqrt(C / Cstar), each as a ratio that
/// must reach `margin`. Ratios sitting exactly on the margin pass
/// (thresholds carry a 1e-9 relative slack so an input tuned to land on
/// the boundary is not rejected for rounding).
pub fn design_check(p: &DeviceParams, margin: f64) -> Result<DesignReport> {
    if !(margin.is_finite() && margin > 0.0) {
        return Err(Error::invalid(format!("margin must be > 0, got {margin}")));
    }
    let derived = DerivedDevice::from_params(p)?;
    let threshold = margin * (1.0 - 1e-9);
    let entry = |label: &str, ratio: f64| DesignEntry {
        label: label.to_string(),
        ratio,
        threshold,
        pass: ratio >= threshold,
    };
    let entries = vec![
        entry("EJ/T", derived.ej / p.t),
        entry("EC/EJ", derived.ec / derived.ej),
        entry("Delta/EC", p.delta / derived.ec),
        entry("N/sqrt(C/C*)", p.n as f64 / derived.screening_length),
    ];
    let mut notes = Vec::new();
    let factor = derived.ej / (2.0 * derived.e_k);
    if factor > 0.5 {
        notes.push(format!(
            "perturbative omega_m is unreliable: EJ/2E_k = {factor:.3} > 0.5",
        ));
    }
    let pass = entries.iter().all(|e| e.pass);
    Ok(DesignReport { margin, entries, derived, notes, pass })
}

/// Margin used by [`design_check`] when none is given.
pub const DEFAULT_DESIGN_MARGIN: f64 = 3.0;

/// Translates a physical device into natural-unit pulse parameters,
/// measuring every energy against `e_ref`.
///
/// The device must at least order its scales correctly
/// (design_check at margin 1), or the mapping is rejected with the
/// report attached. The mapping: omega = (EJ/2)/E_ref, eta = u =
/// eta_m/E_ref (the sweep spans the interaction shift), eps = the bias
/// detuning a coupling swing delta_v produces = 2e deltaV / E_ref, and
/// tau sized so the crossing adiabaticity exponent pi tau omega^2 / u
/// is 16.
pub fn gate_params_from_device(p: &DeviceParams, e_ref: EnergyValue) -> Result<CnParams> {
    let report = design_check(p, 1.0)?;
    if !report.pass {
        return Err(Error::DesignRejected(Box::new(report)));
    }
    let d = &report.derived;
    // Route the coupling swing through the bias formula: shifting the
    // induced charge by C * deltaV detunes the target by 2e deltaV.
    let bias = bias_detuning(QE - p.c * d.delta_v, p.c)?;
    let eps = to_natural(EnergyValue::joules(bias), e_ref)?;
    let u = to_natural(EnergyValue::joules(d.eta_m), e_ref)?;
    let eta = u;
    let omega = to_natural(EnergyValue::joules(d.ej / 2.0), e_ref)?;
    let tau = 16.0 * u / (std::f64::consts::PI * omega * omega);
    Ok(CnParams::with_defaults(eps, u, eta, omega, tau))
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::invalid(format!("{name} must be finite and > 0, got {v}")));
    }
    Ok(())
}

fn check_nonnegative(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v >= 0.0) {
        return Err(Error::invalid(format!("{name} must be finite and >= 0, got {v}")));
    }
    Ok(())
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::invalid(format!("{name} must be finite, got {v}")));
    }
    Ok(())
}
