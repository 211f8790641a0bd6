//! Closed-loop tuning of the controlled-NOT phase errors.
//!
//! A well-chosen pulse sequence makes the population errors (failed
//! flips, leakage) exponentially small, but the propagator still carries
//! deterministic phase defects. Two schedule knobs repair them without
//! touching the flip mechanism: the constant control-qubit bias, a pure
//! relative-phase handle, and the duration of the post-sweep hold,
//! expressed here as the detuning-time area the target bias accumulates
//! after the sweep (area = plateau bias x hold duration), which walks the
//! correction-invariant mismatch chi through full periods.

use serde::{Deserialize, Serialize};

use crate::dynamics::{initial_step_count, propagate_counted, propagate_fixed};
use crate::error::{Error, Result};
use crate::gate::{analyze_gate, GateReport};
use crate::schedules::{check_regime, GateSchedule, DEFAULT_MARGIN, SWEEP_HALF_WIDTH};

/// Internal propagator convergence target, far below any sensible
/// objective tolerance so discretization never masquerades as progress.
const PROP_TOL: f64 = 1e-8;

/// Inclusive search windows for the two calibration knobs. A zero-width
/// window pins that knob; pinning both turns [`calibrate`] into a plain
/// diagnostic run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnobBounds {
    /// Constant control-qubit bias.
    pub eps1_level: (f64, f64),
    /// Post-sweep detuning-time area of the target bias.
    pub tail_eps2_area: (f64, f64),
}

impl KnobBounds {
    /// Windows centered on the schedule's current settings: +-0.5 on the
    /// bias and +-2.5 on the tail area, at least one full period of the
    /// phase mismatch at reference-like operating points.
    pub fn around(schedule: &GateSchedule) -> Result<KnobBounds> {
        let shape = schedule
            .cn_shape()
            .ok_or_else(|| Error::invalid("schedule is not in canonical controlled-NOT form"))?;
        let area = shape.hold * plateau_bias(shape.eps, shape.u);
        Ok(KnobBounds {
            eps1_level: (shape.eps1_level - 0.5, shape.eps1_level + 0.5),
            tail_eps2_area: ((area - 2.5).max(0.0), area + 2.5),
        })
    }

    fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [
            ("eps1_level", self.eps1_level),
            ("tail_eps2_area", self.tail_eps2_area),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::invalid(format!(
                    "knob window {name} must be finite with lo <= hi, got ({lo}, {hi})",
                )));
            }
        }
        Ok(())
    }
}

/// Result of a calibration run. `schedule` is the best tuning found,
/// `report` its diagnostics from a fully converged propagation, and
/// `converged` says whether the objective reached the tolerance;
/// `evaluations` counts propagator runs.
#[derive(Debug, Clone)]
pub struct CalibrationOutcome {
    pub schedule: GateSchedule,
    pub report: GateReport,
    pub converged: bool,
    pub evaluations: usize,
}

fn objective(r: &GateReport) -> f64 {
    (1.0 - r.fidelity_cal) + r.chi * r.chi
}

/// Target bias on the post-sweep plateau.
fn plateau_bias(eps: f64, u: f64) -> f64 {
    eps + u * SWEEP_HALF_WIDTH.tanh()
}

/// Tunes the phase knobs of a canonical controlled-NOT schedule until
/// (1 - fidelity_cal) + chi^2 <= tol, within `budget` propagator runs.
///
/// The schedule must expose the canonical stage structure and pass the
/// operating-regime inequalities. Knob candidates are evaluated with a
/// fixed step count scaled from one converged baseline run; the returned
/// report is recomputed with full convergence, so `converged` reflects
/// the physical schedule, not the search discretization.
pub fn calibrate(
    schedule: &GateSchedule,
    knobs: &KnobBounds,
    tol: f64,
    budget: usize,
) -> Result<CalibrationOutcome> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::invalid(format!("objective tolerance must be > 0, got {tol}")));
    }
    if budget == 0 {
        return Err(Error::invalid("evaluation budget must be at least 1"));
    }
    knobs.validate()?;
    let shape = schedule
        .cn_shape()
        .ok_or_else(|| Error::invalid("schedule is not in canonical controlled-NOT form"))?;
    let regime = check_regime(shape.eps, shape.u, shape.eta, shape.omega, DEFAULT_MARGIN);
    if !regime.pass {
        return Err(Error::RegimeRejected(Box::new(regime)));
    }
    let bias = plateau_bias(shape.eps, shape.u);

    let (t0, t1) = (schedule.t_start(), schedule.t_end());
    let (u0, baseline_steps) = propagate_counted(schedule, t0, t1, PROP_TOL)?;
    let report0 = analyze_gate(&u0);
    let obj0 = objective(&report0);
    let mut evaluations = 1usize;

    let widths = (
        knobs.eps1_level.1 - knobs.eps1_level.0,
        knobs.tail_eps2_area.1 - knobs.tail_eps2_area.0,
    );
    if obj0 <= tol || (widths.0 == 0.0 && widths.1 == 0.0) || budget == 1 {
        return Ok(CalibrationOutcome {
            schedule: schedule.clone(),
            report: report0,
            converged: obj0 <= tol,
            evaluations,
        });
    }

    let span0 = schedule.span();
    let clamp = |x: (f64, f64)| {
        (
            x.0.clamp(knobs.eps1_level.0, knobs.eps1_level.1),
            x.1.clamp(knobs.tail_eps2_area.0, knobs.tail_eps2_area.1),
        )
    };
    let retune = |x: (f64, f64)| -> Result<GateSchedule> {
        schedule
            .with_constant_eps1(x.0)?
            .with_hold_duration(x.1.max(0.0) / bias)
    };
    let evaluate = |x: (f64, f64), evals: &mut usize| -> Result<f64> {
        let s = retune(x)?;
        let steps = (baseline_steps as f64 * s.span() / span0).ceil() as usize;
        let steps = steps.max(initial_step_count(&s, s.t_start(), s.t_end()));
        let u = propagate_fixed(&s, steps)?;
        *evals += 1;
        Ok(objective(&analyze_gate(&u)))
    };

    let start = clamp((shape.eps1_level, shape.hold * bias));
    let mut best_x = start;
    let mut best_obj = obj0;
    // One golden-section pass per active knob, seeded by a coarse scan;
    // the knobs do not interact (the bias commutes with everything), so
    // coordinate descent is exact up to the line-search tolerance.
    // Reserve one run for the final converged report.
    let search_budget = budget - 1;
    'outer: for dim in [1usize, 0usize] {
        let (lo, hi) = match dim {
            0 => knobs.eps1_level,
            _ => knobs.tail_eps2_area,
        };
        if hi - lo == 0.0 {
            continue;
        }
        let at = |v: f64, x: (f64, f64)| if dim == 0 { (v, x.1) } else { (x.0, v) };
        const SCAN: usize = 9;
        let spacing = (hi - lo) / (SCAN - 1) as f64;
        for k in 0..SCAN {
            if evaluations >= search_budget || best_obj <= 0.5 * tol {
                break;
            }
            let v = lo + spacing * k as f64;
            let x = at(v, best_x);
            let obj = evaluate(x, &mut evaluations)?;
            if obj < best_obj {
                best_obj = obj;
                best_x = x;
            }
        }
        // Golden-section refinement around the best scan point.
        let center = if dim == 0 { best_x.0 } else { best_x.1 };
        let (mut a, mut b) = ((center - spacing).max(lo), (center + spacing).min(hi));
        let inv_phi = 0.618_033_988_749_894_9;
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        if evaluations + 2 > search_budget {
            break 'outer;
        }
        let mut fc = evaluate(at(c, best_x), &mut evaluations)?;
        let mut fd = evaluate(at(d, best_x), &mut evaluations)?;
        while evaluations < search_budget {
            let (v, f) = if fc < fd { (c, fc) } else { (d, fd) };
            if f < best_obj {
                best_obj = f;
                best_x = at(v, best_x);
            }
            if best_obj <= 0.5 * tol || (b - a) < 1e-10 * (hi - lo).max(1.0) {
                break;
            }
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = evaluate(at(c, best_x), &mut evaluations)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = evaluate(at(d, best_x), &mut evaluations)?;
            }
        }
        if best_obj <= 0.5 * tol {
            break;
        }
    }

    // Honest final report: fully converged propagation of the winner.
    let (tuned, report) = if best_x == start {
        (schedule.clone(), report0)
    } else {
        let s = retune(best_x)?;
        let (u, _) = propagate_counted(&s, s.t_start(), s.t_end(), PROP_TOL)?;
        evaluations += 1;
        let report = analyze_gate(&u);
        (s, report)
    };
    let converged = objective(&report) <= tol;
    Ok(CalibrationOutcome { schedule: tuned, report, converged, evaluations })
}
