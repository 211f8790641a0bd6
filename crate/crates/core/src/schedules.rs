//! Pulse profiles, the gate schedule container, the controlled-NOT
//! schedule builder, and the operating-regime checks.
//!
//! A schedule is five control profiles (eps1, eps2, omega1, omega2, eta)
//! over one common time window. Each profile is an ordered list of
//! segments tiling the window; junction values must agree within
//! [`CONTINUITY_TOL`]. The first qubit's tunneling amplitude omega1 is
//! pinned to zero over the whole window, and omega2 and eta must vanish
//! at both window ends so the qubits start and finish decoupled.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dynamics::HamiltonianSample;
use crate::error::{Error, Result};

/// Maximum junction-value mismatch tolerated between adjacent segments,
/// and maximum |omega2|, |eta| allowed at the window boundaries.
pub const CONTINUITY_TOL: f64 = 1e-9;

/// Default ratio demanded of every operating-regime inequality.
pub const DEFAULT_MARGIN: f64 = 3.0;

/// Half-width of the central sweep in units of tau. tanh(8) is within
/// 2.3e-7 of its asymptote, so the crossing is effectively complete.
pub const SWEEP_HALF_WIDTH: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentShape {
    Constant { value: f64 },
    LinearRamp { from: f64, to: f64 },
    /// from + (to - from) * (1 - cos(pi x)) / 2 with x the fractional
    /// position inside the segment; C1 at both ends.
    RaisedCosineRamp { from: f64, to: f64 },
    /// offset + amplitude * tanh((t - center) / tau).
    TanhSweep {
        offset: f64,
        amplitude: f64,
        tau: f64,
        center: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSegment {
    pub t_start: f64,
    pub t_end: f64,
    pub shape: SegmentShape,
}

impl PulseSegment {
    pub fn new(t_start: f64, t_end: f64, shape: SegmentShape) -> Self {
        PulseSegment { t_start, t_end, shape }
    }

    fn validate(&self) -> Result<()> {
        if !(self.t_start.is_finite() && self.t_end.is_finite()) {
            return Err(Error::invalid("segment times must be finite"));
        }
        if !(self.t_end > self.t_start) {
            return Err(Error::invalid(format!(
                "segment must have t_end > t_start, got [{}, {}]",
                self.t_start, self.t_end
            )));
        }
        let params_ok = match self.shape {
            SegmentShape::Constant { value } => value.is_finite(),
            SegmentShape::LinearRamp { from, to }
            | SegmentShape::RaisedCosineRamp { from, to } => {
                from.is_finite() && to.is_finite()
            }
            SegmentShape::TanhSweep { offset, amplitude, tau, center } => {
                offset.is_finite()
                    && amplitude.is_finite()
                    && center.is_finite()
                    && tau.is_finite()
                    && tau > 0.0
            }
        };
        if !params_ok {
            return Err(Error::invalid(
                "segment parameters must be finite (and tanh tau > 0)",
            ));
        }
        Ok(())
    }

    /// Value at time t; ramp positions are clamped to the segment, so
    /// evaluating exactly at a boundary is safe.
    pub fn value_at(&self, t: f64) -> f64 {
        match self.shape {
            SegmentShape::Constant { value } => value,
            SegmentShape::LinearRamp { from, to } => {
                let x = self.frac(t);
                from + (to - from) * x
            }
            SegmentShape::RaisedCosineRamp { from, to } => {
                let x = self.frac(t);
                from + (to - from) * 0.5 * (1.0 - (std::f64::consts::PI * x).cos())
            }
            SegmentShape::TanhSweep { offset, amplitude, tau, center } => {
                offset + amplitude * ((t - center) / tau).tanh()
            }
        }
    }

    fn frac(&self, t: f64) -> f64 {
        ((t - self.t_start) / (self.t_end - self.t_start)).clamp(0.0, 1.0)
    }

    /// Mirror of this segment across time `s`, with all values negated.
    fn reversed_negated(&self, s: f64) -> PulseSegment {
        let shape = match self.shape {
            SegmentShape::Constant { value } => SegmentShape::Constant { value: -value },
            SegmentShape::LinearRamp { from, to } => {
                SegmentShape::LinearRamp { from: -to, to: -from }
            }
            // 1 - rc(x) = rc(1 - x), so the mirrored ramp keeps its shape.
            SegmentShape::RaisedCosineRamp { from, to } => {
                SegmentShape::RaisedCosineRamp { from: -to, to: -from }
            }
            // tanh is odd: -(o + a tanh((s - t - c)/tau)) has offset -o and
            // center s - c with the same amplitude and timescale.
            SegmentShape::TanhSweep { offset, amplitude, tau, center } => {
                SegmentShape::TanhSweep {
                    offset: -offset,
                    amplitude,
                    tau,
                    center: s - center,
                }
            }
        };
        PulseSegment { t_start: s - self.t_end, t_end: s - self.t_start, shape }
    }
}

/// A validated, contiguous, continuous list of segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<PulseSegment>", into = "Vec<PulseSegment>")]
pub struct Profile {
    segments: Vec<PulseSegment>,
}

impl TryFrom<Vec<PulseSegment>> for Profile {
    type Error = Error;
    fn try_from(segments: Vec<PulseSegment>) -> Result<Self> {
        Profile::new(segments)
    }
}

impl From<Profile> for Vec<PulseSegment> {
    fn from(p: Profile) -> Self {
        p.segments
    }
}

impl Profile {
    pub fn new(segments: Vec<PulseSegment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::invalid("profile needs at least one segment"));
        }
        let mut segments = segments;
        for seg in &segments {
            seg.validate()?;
        }
        let span = segments.last().unwrap().t_end - segments[0].t_start;
        let t_tol = 1e-9 * span.max(1.0);
        for i in 1..segments.len() {
            let prev_end = segments[i - 1].t_end;
            let gap = segments[i].t_start - prev_end;
            if gap.abs() > t_tol {
                return Err(Error::invalid(format!(
                    "segments must tile the window: gap of {gap:.3e} at t = {prev_end}",
                )));
            }
            // Snap to a single canonical junction time so interval
            // arithmetic downstream never sees gaps or overlaps.
            segments[i].t_start = prev_end;
            if !(segments[i].t_end > segments[i].t_start) {
                return Err(Error::invalid("segment collapsed by junction snapping"));
            }
            let v_prev = segments[i - 1].value_at(prev_end);
            let v_next = segments[i].value_at(prev_end);
            if (v_prev - v_next).abs() > CONTINUITY_TOL {
                return Err(Error::invalid(format!(
                    "profile discontinuity of {:.3e} at t = {prev_end}",
                    (v_prev - v_next).abs()
                )));
            }
        }
        Ok(Profile { segments })
    }

    pub fn constant(t_start: f64, t_end: f64, value: f64) -> Result<Self> {
        Profile::new(vec![PulseSegment::new(
            t_start,
            t_end,
            SegmentShape::Constant { value },
        )])
    }

    pub fn t_start(&self) -> f64 {
        self.segments[0].t_start
    }

    pub fn t_end(&self) -> f64 {
        self.segments.last().unwrap().t_end
    }

    pub fn segments(&self) -> &[PulseSegment] {
        &self.segments
    }

    /// Value at t in [t_start, t_end]; a junction time belongs to the
    /// later segment (continuity makes the choice invisible).
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !t.is_finite() || t < self.t_start() || t > self.t_end() {
            return Err(Error::out_of_range(format!(
                "t = {t} outside profile window [{}, {}]",
                self.t_start(),
                self.t_end()
            )));
        }
        Ok(self.segment_at(t).value_at(t))
    }

    fn segment_at(&self, t: f64) -> &PulseSegment {
        let idx = self
            .segments
            .partition_point(|s| s.t_end <= t)
            .min(self.segments.len() - 1);
        &self.segments[idx]
    }

    /// Largest |value| over the profile. Every segment shape is monotone
    /// in t, so the extrema sit at segment endpoints.
    pub fn max_abs(&self) -> f64 {
        self.segments
            .iter()
            .flat_map(|s| [s.value_at(s.t_start).abs(), s.value_at(s.t_end).abs()])
            .fold(0.0, f64::max)
    }

    fn junctions(&self) -> impl Iterator<Item = f64> + '_ {
        self.segments
            .iter()
            .map(|s| s.t_start)
            .chain(std::iter::once(self.t_end()))
    }

    fn reversed_negated(&self, s: f64) -> Profile {
        let segments = self
            .segments
            .iter()
            .rev()
            .map(|seg| seg.reversed_negated(s))
            .collect();
        Profile::new(segments).expect("mirror of a valid profile is valid")
    }
}

/// Serialization carrier for [`GateSchedule`]; construction re-validates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleProfiles {
    pub eps1: Profile,
    pub eps2: Profile,
    pub omega1: Profile,
    pub omega2: Profile,
    pub eta: Profile,
}

/// Five coefficient profiles over a common window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScheduleProfiles", into = "ScheduleProfiles")]
pub struct GateSchedule {
    eps1: Profile,
    eps2: Profile,
    omega1: Profile,
    omega2: Profile,
    eta: Profile,
}

impl TryFrom<ScheduleProfiles> for GateSchedule {
    type Error = Error;
    fn try_from(p: ScheduleProfiles) -> Result<Self> {
        GateSchedule::from_profiles(p)
    }
}

impl From<GateSchedule> for ScheduleProfiles {
    fn from(s: GateSchedule) -> Self {
        ScheduleProfiles {
            eps1: s.eps1,
            eps2: s.eps2,
            omega1: s.omega1,
            omega2: s.omega2,
            eta: s.eta,
        }
    }
}

impl GateSchedule {
    /// Builds a schedule from the four free profiles; omega1 is pinned to
    /// zero over the window (the control qubit must never flip).
    pub fn new(eps1: Profile, eps2: Profile, omega2: Profile, eta: Profile) -> Result<Self> {
        let omega1 = Profile::constant(eps1.t_start(), eps1.t_end(), 0.0)?;
        GateSchedule::from_profiles(ScheduleProfiles { eps1, eps2, omega1, omega2, eta })
    }

    pub fn from_profiles(p: ScheduleProfiles) -> Result<Self> {
        let (ta, tb) = (p.eps1.t_start(), p.eps1.t_end());
        for (name, profile) in [
            ("eps2", &p.eps2),
            ("omega1", &p.omega1),
            ("omega2", &p.omega2),
            ("eta", &p.eta),
        ] {
            if profile.t_start() != ta || profile.t_end() != tb {
                return Err(Error::invalid(format!(
                    "profile {name} spans [{}, {}] but eps1 spans [{ta}, {tb}]",
                    profile.t_start(),
                    profile.t_end()
                )));
            }
        }
        let omega1_is_zero = p
            .omega1
            .segments()
            .iter()
            .all(|s| matches!(s.shape, SegmentShape::Constant { value: 0.0 }));
        if !omega1_is_zero {
            return Err(Error::invalid(
                "omega1 must be identically zero (constant-0 segments only)",
            ));
        }
        for (name, profile) in [("omega2", &p.omega2), ("eta", &p.eta)] {
            for t in [ta, tb] {
                let v = profile.eval(t)?;
                if v.abs() > CONTINUITY_TOL {
                    return Err(Error::invalid(format!(
                        "{name} must vanish at the window boundary, got {v:.3e} at t = {t}",
                    )));
                }
            }
        }
        Ok(GateSchedule {
            eps1: p.eps1,
            eps2: p.eps2,
            omega1: p.omega1,
            omega2: p.omega2,
            eta: p.eta,
        })
    }

    pub fn t_start(&self) -> f64 {
        self.eps1.t_start()
    }

    pub fn t_end(&self) -> f64 {
        self.eps1.t_end()
    }

    pub fn span(&self) -> f64 {
        self.t_end() - self.t_start()
    }

    pub fn eps1(&self) -> &Profile {
        &self.eps1
    }

    pub fn eps2(&self) -> &Profile {
        &self.eps2
    }

    pub fn omega1(&self) -> &Profile {
        &self.omega1
    }

    pub fn omega2(&self) -> &Profile {
        &self.omega2
    }

    pub fn eta(&self) -> &Profile {
        &self.eta
    }

    /// The five coefficient values at time t.
    pub fn eval(&self, t: f64) -> Result<HamiltonianSample> {
        Ok(HamiltonianSample {
            eps1: self.eps1.eval(t)?,
            eps2: self.eps2.eval(t)?,
            omega1: self.omega1.eval(t)?,
            omega2: self.omega2.eval(t)?,
            eta: self.eta.eval(t)?,
        })
    }

    pub(crate) fn sampler(&self) -> ScheduleSampler<'_> {
        ScheduleSampler {
            eps1: ProfileCursor::new(&self.eps1),
            eps2: ProfileCursor::new(&self.eps2),
            omega2: ProfileCursor::new(&self.omega2),
            eta: ProfileCursor::new(&self.eta),
        }
    }

    /// Upper estimate of max-over-[t0,t1] of the spectral norm of the
    /// assembled Hamiltonian, from segment junctions plus a dense grid.
    /// Exact at each sample because omega1 = 0 makes the matrix
    /// block-diagonal with eigenvalues +-eps1 +- hypot(eps2 +- eta, omega2).
    pub fn spectral_norm_bound(&self, t0: f64, t1: f64) -> f64 {
        let mut best: f64 = 0.0;
        let mut probe = |t: f64| {
            if t < t0 || t > t1 {
                return;
            }
            let e1 = self.eps1.segment_at(t).value_at(t);
            let e2 = self.eps2.segment_at(t).value_at(t);
            let w2 = self.omega2.segment_at(t).value_at(t);
            let et = self.eta.segment_at(t).value_at(t);
            let block = (e2 + et).hypot(w2).max((e2 - et).hypot(w2));
            best = best.max(e1.abs() + block);
        };
        for p in [&self.eps1, &self.eps2, &self.omega2, &self.eta] {
            for t in p.junctions() {
                probe(t);
            }
        }
        const GRID: usize = 4096;
        for k in 0..=GRID {
            probe(t0 + (t1 - t0) * (k as f64) / (GRID as f64));
        }
        best
    }

    /// Segment junction times of any profile strictly inside (t0, t1),
    /// sorted and deduplicated. Integration grids are aligned with these
    /// so that no step straddles a derivative kink.
    pub(crate) fn junction_times(&self, t0: f64, t1: f64) -> Vec<f64> {
        let mut cuts: Vec<f64> = Vec::new();
        for p in [&self.eps1, &self.eps2, &self.omega1, &self.omega2, &self.eta] {
            cuts.extend(p.junctions().filter(|&t| t > t0 && t < t1));
        }
        cuts.sort_by(|a, b| a.total_cmp(b));
        cuts.dedup();
        cuts
    }

    /// Time-mirrored copy with every coefficient negated. Propagating a
    /// schedule and then its mirror undoes the evolution exactly.
    pub fn reversed_negated(&self) -> GateSchedule {
        let s = self.t_start() + self.t_end();
        GateSchedule {
            eps1: self.eps1.reversed_negated(s),
            eps2: self.eps2.reversed_negated(s),
            omega1: self.omega1.reversed_negated(s),
            omega2: self.omega2.reversed_negated(s),
            eta: self.eta.reversed_negated(s),
        }
    }

    /// Copy with eps1 replaced by a single constant segment. eps1 only
    /// shifts the relative phase between the control-0 and control-1
    /// blocks, so this is the natural phase-tuning knob.
    pub fn with_constant_eps1(&self, level: f64) -> Result<GateSchedule> {
        let eps1 = Profile::constant(self.t_start(), self.t_end(), level)?;
        Ok(GateSchedule { eps1, ..self.clone() })
    }

    /// The post-sweep hold: the widest window after the last tanh sweep of
    /// eps2 in which every profile is constant. This is where eta and
    /// omega2 are still switched on, so its duration controls the
    /// entangling phase. None if the schedule has no such stage.
    pub fn hold_window(&self) -> Option<(f64, f64)> {
        let sweep_end = self
            .eps2
            .segments()
            .iter()
            .rev()
            .find(|s| matches!(s.shape, SegmentShape::TanhSweep { .. }))?
            .t_end;
        if sweep_end >= self.t_end() {
            return None;
        }
        let mut w1 = f64::INFINITY;
        for p in [&self.eps1, &self.eps2, &self.omega1, &self.omega2, &self.eta] {
            let seg = p.segment_at(sweep_end);
            if !matches!(seg.shape, SegmentShape::Constant { .. }) {
                return None;
            }
            w1 = w1.min(seg.t_end);
        }
        Some((sweep_end, w1))
    }

    /// Copy with the post-sweep hold stretched or shrunk to `hold`
    /// (>= 0); everything after the hold shifts rigidly in time.
    pub fn with_hold_duration(&self, hold: f64) -> Result<GateSchedule> {
        if !(hold.is_finite() && hold >= 0.0) {
            return Err(Error::invalid("hold duration must be finite and >= 0"));
        }
        let (w0, w1) = self.hold_window().ok_or_else(|| {
            Error::invalid("schedule has no adjustable post-sweep hold stage")
        })?;
        let shift = hold - (w1 - w0);
        let adjust = |p: &Profile| -> Result<Profile> {
            let segments = p
                .segments()
                .iter()
                .map(|seg| {
                    let mut seg = *seg;
                    if seg.t_start >= w1 {
                        // Strictly after the hold: rigid translation.
                        seg.t_start += shift;
                        seg.t_end += shift;
                        if let SegmentShape::TanhSweep { center, .. } = &mut seg.shape {
                            *center += shift;
                        }
                    } else if seg.t_end > w0 {
                        // Spans the hold window (verified constant by
                        // hold_window); stretch it.
                        seg.t_end += shift;
                    }
                    seg
                })
                .collect();
            Profile::new(segments)
        };
        let profiles = ScheduleProfiles {
            eps1: adjust(&self.eps1)?,
            eps2: adjust(&self.eps2)?,
            omega1: adjust(&self.omega1)?,
            omega2: adjust(&self.omega2)?,
            eta: adjust(&self.eta)?,
        };
        GateSchedule::from_profiles(profiles)
    }

    /// Recovers the controlled-NOT stage parameters from the segment
    /// structure, when the schedule has the canonical build shape.
    pub fn cn_shape(&self) -> Option<CnShape> {
        let sweep = self
            .eps2
            .segments()
            .iter()
            .rev()
            .find(|s| matches!(s.shape, SegmentShape::TanhSweep { .. }))?;
        let SegmentShape::TanhSweep { offset, amplitude, tau, center } = sweep.shape else {
            return None;
        };
        let (w0, w1) = self.hold_window()?;
        let omega = self.omega2.segment_at(center).value_at(center);
        let eta = self.eta.segment_at(center).value_at(center);
        let eps1_level = self.eps1.segment_at(center).value_at(center);
        Some(CnShape {
            eps: offset,
            u: amplitude,
            tau,
            omega,
            eta,
            hold: w1 - w0,
            eps1_level,
        })
    }
}

/// Stage parameters recovered from a canonical controlled-NOT schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CnShape {
    pub eps: f64,
    pub u: f64,
    pub tau: f64,
    pub omega: f64,
    pub eta: f64,
    pub hold: f64,
    pub eps1_level: f64,
}

/// Cursor-based evaluator for monotonically increasing sample times;
/// omega1 is identically zero by schedule invariant and is not tracked.
pub(crate) struct ScheduleSampler<'a> {
    eps1: ProfileCursor<'a>,
    eps2: ProfileCursor<'a>,
    omega2: ProfileCursor<'a>,
    eta: ProfileCursor<'a>,
}

impl ScheduleSampler<'_> {
    pub(crate) fn sample(&mut self, t: f64) -> HamiltonianSample {
        HamiltonianSample {
            eps1: self.eps1.value(t),
            eps2: self.eps2.value(t),
            omega1: 0.0,
            omega2: self.omega2.value(t),
            eta: self.eta.value(t),
        }
    }
}

struct ProfileCursor<'a> {
    segments: &'a [PulseSegment],
    idx: usize,
}

impl<'a> ProfileCursor<'a> {
    fn new(profile: &'a Profile) -> Self {
        ProfileCursor { segments: profile.segments(), idx: 0 }
    }

    fn value(&mut self, t: f64) -> f64 {
        while self.idx + 1 < self.segments.len() && t >= self.segments[self.idx].t_end {
            self.idx += 1;
        }
        self.segments[self.idx].value_at(t)
    }
}

/// Parameters of the controlled-NOT pulse sequence (natural units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CnParams {
    /// Static detuning of the target qubit at the crossing stage.
    pub eps: f64,
    /// Sweep amplitude of the target-qubit detuning.
    pub u: f64,
    /// Qubit-qubit interaction strength while in contact.
    pub eta: f64,
    /// Target-qubit tunneling amplitude while in contact.
    pub omega: f64,
    /// Sweep timescale; the sweep lasts 16 tau.
    pub tau: f64,
    /// Duration of each switching ramp.
    pub ramp: f64,
    /// Duration of the post-sweep hold (entangling-phase knob).
    pub hold: f64,
    /// Constant control-qubit detuning (relative-phase knob).
    pub eps1_level: f64,
}

impl CnParams {
    /// Fills ramp = tau/10, hold = tau/8, eps1_level = 0.
    pub fn with_defaults(eps: f64, u: f64, eta: f64, omega: f64, tau: f64) -> Self {
        CnParams {
            eps,
            u,
            eta,
            omega,
            tau,
            ramp: tau / 10.0,
            hold: tau / 8.0,
            eps1_level: 0.0,
        }
    }

    /// The reference operating point used throughout the test suite.
    pub fn reference() -> Self {
        CnParams::with_defaults(0.5, 1.0, 1.0, 0.05, 2000.0)
    }
}

/// One operating-regime inequality, reported as ratio vs. threshold.
#[derive(Debug, Clone, Serialize)]
pub struct RegimeEntry {
    pub label: String,
    pub ratio: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Result of the operating-regime inequalities.
#[derive(Debug, Clone, Serialize)]
pub struct RegimeCheck {
    pub margin: f64,
    pub entries: Vec<RegimeEntry>,
    pub pass: bool,
}

impl fmt::Display for RegimeCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(
                f,
                "{} = {:.4} ({} {:.3})",
                e.label,
                e.ratio,
                if e.pass { ">=" } else { "<" },
                e.threshold
            )?;
        }
        Ok(())
    }
}

impl RegimeCheck {
    pub fn first_failure(&self) -> Option<&RegimeEntry> {
        self.entries.iter().find(|e| !e.pass)
    }
}

fn regime_entry(label: &str, ratio: f64, threshold: f64) -> RegimeEntry {
    RegimeEntry {
        label: label.to_string(),
        ratio,
        // NaN ratios (from omega <= 0) fail the comparison and the check.
        pass: ratio >= threshold,
        threshold,
    }
}

/// The three crossing-selectivity inequalities, each as a ratio that must
/// reach `margin`. With sigma_z diag(+1,-1) and the target swept as
/// eps2(t) = eps + u tanh(t/tau), the control-1 block crosses zero detuning
/// while the control-0 block stays far from its crossing iff all three
/// hold. omega <= 0 yields NaN ratios, which fail.
pub fn check_regime(eps: f64, u: f64, eta: f64, omega: f64, margin: f64) -> RegimeCheck {
    let guard = if omega > 0.0 { 1.0 } else { f64::NAN };
    let entries = vec![
        regime_entry("(eta+u-eps)/omega", guard * (eta + u - eps) / omega, margin),
        regime_entry("(eps+u-eta)/omega", guard * (eps + u - eta) / omega, margin),
        regime_entry("(eps+eta-u)/omega", guard * (eps + eta - u) / omega, margin),
    ];
    let pass = entries.iter().all(|e| e.pass);
    RegimeCheck { margin, entries, pass }
}

/// [`check_regime`] plus the adiabaticity exponent pi tau omega^2 / u
/// (hbar = 1), which must also reach `margin`.
pub fn check_regime_with_adiabaticity(
    eps: f64,
    u: f64,
    eta: f64,
    omega: f64,
    tau: f64,
    margin: f64,
) -> RegimeCheck {
    let mut check = check_regime(eps, u, eta, omega, margin);
    let exponent = std::f64::consts::PI * tau * omega * omega / u;
    check.entries.push(regime_entry("pi*tau*omega^2/u", exponent, margin));
    check.pass = check.entries.iter().all(|e| e.pass);
    check
}

/// Builds the controlled-NOT pulse sequence.
///
/// Stages, each continuous with its neighbors:
///
/// 1. ramp eps2 from 0 to its pre-sweep value eps - u*tanh(8) and eta from
///    0 to eta (raised cosine, duration `ramp`), with omega2 still off;
/// 2. ramp omega2 from 0 to omega (duration `ramp`);
/// 3. the tanh sweep, duration 16 tau;
/// 4. hold every coefficient constant for `hold`;
/// 5. mirror ramp-down: omega2 first, then eps2 and eta together.
///
/// The detuning and interaction reach their plateaus before omega2 turns
/// on (and leave after it turns off): switching the coefficients in
/// proportion would freeze the eigenbasis direction during the ramp and
/// strand a residue of order (omega / 2(eps+u-eta))^2 in the wrong
/// dressed state, orders of magnitude above the sweep's own diabatic
/// error. Staggering keeps every switching stage adiabatic end to end.
///
/// eps1 stays constant at `eps1_level` the whole time: with omega1 = 0 it
/// commutes with everything and only tunes the relative phase between the
/// control-0 and control-1 blocks.
pub fn build_cn_schedule(p: &CnParams) -> Result<GateSchedule> {
    for (name, v) in [
        ("eps", p.eps),
        ("u", p.u),
        ("eta", p.eta),
        ("omega", p.omega),
        ("tau", p.tau),
        ("ramp", p.ramp),
        ("hold", p.hold),
    ] {
        if !(v.is_finite() && v > 0.0) {
            let note = match name {
                "eta" => " (no crossing selectivity without qubit coupling)",
                "omega" => " (zero tunneling gap would make the sweep fully diabatic)",
                _ => "",
            };
            return Err(Error::invalid(format!(
                "cn parameter {name} must be finite and > 0, got {v}{note}",
            )));
        }
    }
    if !p.eps1_level.is_finite() {
        return Err(Error::invalid("eps1_level must be finite"));
    }
    let regime =
        check_regime_with_adiabaticity(p.eps, p.u, p.eta, p.omega, p.tau, DEFAULT_MARGIN);
    if !regime.pass {
        return Err(Error::RegimeRejected(Box::new(regime)));
    }

    let r = p.ramp;
    let t_sweep = 2.0 * SWEEP_HALF_WIDTH * p.tau;
    let (t1, t2) = (r, 2.0 * r);
    let t3 = t2 + t_sweep;
    let t4 = t3 + p.hold;
    let t5 = t4 + r;
    let t6 = t5 + r;
    let center = t2 + SWEEP_HALF_WIDTH * p.tau;

    let sweep = PulseSegment::new(
        t2,
        t3,
        SegmentShape::TanhSweep { offset: p.eps, amplitude: p.u, tau: p.tau, center },
    );
    // Boundary plateaus take the sweep's own endpoint values, making the
    // junctions exact rather than merely within tolerance.
    let eps_pre = sweep.value_at(t2);
    let eps_post = sweep.value_at(t3);

    let rc = |from: f64, to: f64| SegmentShape::RaisedCosineRamp { from, to };
    let cst = |value: f64| SegmentShape::Constant { value };

    let eps2 = Profile::new(vec![
        PulseSegment::new(0.0, t1, rc(0.0, eps_pre)),
        PulseSegment::new(t1, t2, cst(eps_pre)),
        sweep,
        PulseSegment::new(t3, t5, cst(eps_post)),
        PulseSegment::new(t5, t6, rc(eps_post, 0.0)),
    ])?;
    let omega2 = Profile::new(vec![
        PulseSegment::new(0.0, t1, cst(0.0)),
        PulseSegment::new(t1, t2, rc(0.0, p.omega)),
        PulseSegment::new(t2, t4, cst(p.omega)),
        PulseSegment::new(t4, t5, rc(p.omega, 0.0)),
        PulseSegment::new(t5, t6, cst(0.0)),
    ])?;
    let eta = Profile::new(vec![
        PulseSegment::new(0.0, t1, rc(0.0, p.eta)),
        PulseSegment::new(t1, t5, cst(p.eta)),
        PulseSegment::new(t5, t6, rc(p.eta, 0.0)),
    ])?;
    let eps1 = Profile::constant(0.0, t6, p.eps1_level)?;
    GateSchedule::new(eps1, eps2, omega2, eta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn seg(t0: f64, t1: f64, shape: SegmentShape) -> PulseSegment {
        PulseSegment::new(t0, t1, shape)
    }

    #[test]
    fn tanh_sweep_values() {
        let s = seg(
            -100.0,
            100.0,
            SegmentShape::TanhSweep { offset: 0.5, amplitude: 1.0, tau: 1.0, center: 0.0 },
        );
        assert_eq!(s.value_at(0.0), 0.5);
        // One timescale past the center.
        assert!((s.value_at(1.0) - 1.2615941559557649).abs() < 1e-12);
        // Window edges sit on the asymptotes to within tanh(8)'s residue.
        assert!((s.value_at(-100.0) - (0.5 - 1.0)).abs() < 1e-6);
        assert!((s.value_at(100.0) - (0.5 + 1.0)).abs() < 1e-6);
    }

    #[test]
    fn ramp_shapes_hit_their_endpoints() {
        let lin = seg(2.0, 4.0, SegmentShape::LinearRamp { from: -1.0, to: 3.0 });
        assert_eq!(lin.value_at(2.0), -1.0);
        assert_eq!(lin.value_at(4.0), 3.0);
        assert_eq!(lin.value_at(3.0), 1.0);
        let rc = seg(0.0, 1.0, SegmentShape::RaisedCosineRamp { from: 0.0, to: 2.0 });
        assert_eq!(rc.value_at(0.0), 0.0);
        assert!((rc.value_at(0.5) - 1.0).abs() < 1e-15);
        assert!((rc.value_at(1.0) - 2.0).abs() < 1e-15);
        // Raised cosine is C1: flat at both ends.
        let d0 = (rc.value_at(1e-6) - rc.value_at(0.0)) / 1e-6;
        assert!(d0.abs() < 1e-5);
    }

    #[test]
    fn profile_rejects_gaps_overlaps_and_jumps() {
        let c = |v: f64| SegmentShape::Constant { value: v };
        assert!(Profile::new(vec![]).is_err());
        assert!(Profile::new(vec![seg(0.0, 1.0, c(1.0)), seg(1.5, 2.0, c(1.0))]).is_err());
        assert!(Profile::new(vec![seg(0.0, 1.0, c(1.0)), seg(0.5, 2.0, c(1.0))]).is_err());
        assert!(Profile::new(vec![seg(0.0, 1.0, c(1.0)), seg(1.0, 2.0, c(1.1))]).is_err());
        assert!(Profile::new(vec![seg(0.0, 0.0, c(1.0))]).is_err());
        assert!(Profile::new(vec![seg(
            0.0,
            1.0,
            SegmentShape::TanhSweep { offset: 0.0, amplitude: 1.0, tau: 0.0, center: 0.5 },
        )])
        .is_err());
        // A sub-tolerance jump is accepted.
        let p = Profile::new(vec![seg(0.0, 1.0, c(1.0)), seg(1.0, 2.0, c(1.0 + 1e-10))]);
        assert!(p.is_ok());
    }

    #[test]
    fn profile_eval_and_bounds() {
        let p = Profile::new(vec![
            seg(0.0, 1.0, SegmentShape::LinearRamp { from: 0.0, to: 1.0 }),
            seg(1.0, 2.0, SegmentShape::Constant { value: 1.0 }),
        ])
        .unwrap();
        assert_eq!(p.eval(0.0).unwrap(), 0.0);
        assert_eq!(p.eval(1.0).unwrap(), 1.0);
        assert_eq!(p.eval(2.0).unwrap(), 1.0);
        assert!(p.eval(-0.1).is_err());
        assert!(p.eval(2.1).is_err());
        assert!(p.eval(f64::NAN).is_err());
        assert_eq!(p.max_abs(), 1.0);
    }

    #[test]
    fn schedule_rejects_profile_window_mismatch() {
        let p01 = Profile::constant(0.0, 1.0, 0.0).unwrap();
        let p02 = Profile::constant(0.0, 2.0, 0.0).unwrap();
        assert!(GateSchedule::new(p01.clone(), p02, p01.clone(), p01).is_err());
    }

    #[test]
    fn schedule_rejects_boundary_activity() {
        let zero = Profile::constant(0.0, 1.0, 0.0).unwrap();
        let hot = Profile::constant(0.0, 1.0, 0.3).unwrap();
        assert!(GateSchedule::new(zero.clone(), zero.clone(), hot.clone(), zero.clone()).is_err());
        assert!(GateSchedule::new(zero.clone(), zero.clone(), zero.clone(), hot).is_err());
        // eps1/eps2 may be nonzero at the boundary.
        let biased = Profile::constant(0.0, 1.0, 0.7).unwrap();
        assert!(GateSchedule::new(biased.clone(), biased, zero.clone(), zero).is_ok());
    }

    #[test]
    fn schedule_serde_round_trip_revalidates() {
        let sched = build_cn_schedule(&CnParams::reference()).unwrap();
        let json = serde_json::to_string(&sched).unwrap();
        let back: GateSchedule = serde_json::from_str(&json).unwrap();
        assert_eq!(sched, back);

        // Corrupt omega1 in the serialized form: must fail validation.
        let mut v: serde_json::Value = serde_json::from_str(&json).unwrap();
        v["omega1"][0]["shape"]["constant"]["value"] = 0.25.into();
        assert!(serde_json::from_value::<GateSchedule>(v).is_err());
    }

    #[test]
    fn regime_check_reference_ratios() {
        let c = check_regime(0.5, 1.0, 1.0, 0.05, DEFAULT_MARGIN);
        assert!(c.pass);
        let r: Vec<f64> = c.entries.iter().map(|e| e.ratio).collect();
        assert!((r[0] - 30.0).abs() < 1e-9);
        assert!((r[1] - 10.0).abs() < 1e-9);
        assert!((r[2] - 10.0).abs() < 1e-9);
    }

    #[test]
    fn regime_check_failure_modes() {
        // Bias sitting exactly on the crossing at the sweep edge: both
        // eps-anchored inequalities collapse to zero.
        let c = check_regime(0.0, 1.0, 1.0, 0.05, DEFAULT_MARGIN);
        assert!(!c.pass);
        assert_eq!(c.first_failure().unwrap().label, "(eps+u-eta)/omega");
        assert!(!c.entries[2].pass);
        // Interaction so strong the bias never reaches the crossing.
        let c = check_regime(0.5, 1.0, 3.0, 0.05, DEFAULT_MARGIN);
        assert!(!c.pass);
        assert!(c.entries[1].ratio < 0.0);
        // Nonpositive omega cannot pass.
        assert!(!check_regime(0.5, 1.0, 1.0, 0.0, DEFAULT_MARGIN).pass);
        assert!(!check_regime(0.5, 1.0, 1.0, -0.05, DEFAULT_MARGIN).pass);
    }

    #[test]
    fn adiabaticity_exponent_at_reference() {
        let c = check_regime_with_adiabaticity(0.5, 1.0, 1.0, 0.05, 2000.0, DEFAULT_MARGIN);
        assert!(c.pass);
        let exp = c.entries.last().unwrap().ratio;
        assert!((exp - 15.707963267948966).abs() < 1e-12);
    }

    #[test]
    fn build_reference_schedule_structure() {
        let p = CnParams::reference();
        assert_eq!(p.ramp, 200.0);
        assert_eq!(p.hold, 250.0);
        let s = build_cn_schedule(&p).unwrap();
        let t_total = 4.0 * p.ramp + 16.0 * p.tau + p.hold;
        assert_eq!(s.t_start(), 0.0);
        assert!((s.t_end() - t_total).abs() < 1e-9);

        // Boundary idleness and continuity were enforced on construction;
        // spot-check the plateau values and the sweep landmarks.
        let center = 2.0 * p.ramp + 8.0 * p.tau;
        let mid = s.eval(center).unwrap();
        assert!((mid.eps2 - p.eps).abs() < 1e-12);
        assert!((mid.omega2 - p.omega).abs() < 1e-15);
        assert!((mid.eta - p.eta).abs() < 1e-15);
        assert_eq!(mid.omega1, 0.0);
        // At the end of the first ramp the detuning has reached its
        // plateau while the tunneling has not started moving yet.
        let pre = s.eval(p.ramp).unwrap();
        assert!((pre.eps2 - (p.eps - p.u * 8.0f64.tanh())).abs() < 1e-12);
        assert_eq!(pre.omega2, 0.0, "detuning plateau precedes omega2 turn-on");
        let mid_ramp = s.eval(1.5 * p.ramp).unwrap();
        assert!(mid_ramp.omega2 > 0.0 && mid_ramp.omega2 < p.omega);
        let ends = [s.t_start(), s.t_end()];
        for t in ends {
            let v = s.eval(t).unwrap();
            assert_eq!(v.omega2, 0.0);
            assert_eq!(v.eta, 0.0);
            assert!(v.eps2.abs() < 1e-12);
        }
    }

    #[test]
    fn build_is_continuous_on_a_dense_grid() {
        let s = build_cn_schedule(&CnParams::with_defaults(0.4, 1.2, 1.1, 0.06, 500.0)).unwrap();
        let n = 100_000;
        let dt = s.span() / n as f64;
        let mut prev = s.eval(s.t_start()).unwrap();
        let bound = |v: &HamiltonianSample| {
            [v.eps1, v.eps2, v.omega2, v.eta]
        };
        for k in 1..=n {
            let t = s.t_start() + dt * k as f64;
            let cur = s.eval(t.min(s.t_end())).unwrap();
            for (a, b) in bound(&prev).iter().zip(bound(&cur)) {
                // The steepest coefficient slope is (pi/2) * plateau / ramp
                // ~ 0.05 per time unit here, so adjacent grid samples sit
                // within ~0.005 of each other; a segment-boundary glitch
                // would show up as an O(plateau) jump.
                assert!((a - b).abs() < 0.01, "jump at t = {t}");
            }
            prev = cur;
        }
    }

    #[test]
    fn build_rejects_bad_parameters() {
        let mut p = CnParams::reference();
        p.eta = 0.0;
        let err = build_cn_schedule(&p).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
        assert!(err.to_string().contains("eta"));

        let mut p = CnParams::reference();
        p.omega = 0.0;
        let err = build_cn_schedule(&p).unwrap_err();
        assert!(err.to_string().contains("omega"));

        let mut p = CnParams::reference();
        p.tau = -1.0;
        assert!(build_cn_schedule(&p).is_err());

        let mut p = CnParams::reference();
        p.eps1_level = f64::NAN;
        assert!(build_cn_schedule(&p).is_err());
    }

    #[test]
    fn build_rejects_out_of_regime_parameters() {
        // eta strong enough that the bias never reaches the crossing.
        let p = CnParams::with_defaults(0.5, 1.0, 3.0, 0.05, 2000.0);
        match build_cn_schedule(&p) {
            Err(Error::RegimeRejected(check)) => {
                let failing = check.first_failure().unwrap();
                assert_eq!(failing.label, "(eps+u-eta)/omega");
            }
            other => panic!("expected regime rejection, got {other:?}"),
        }
        // Sweep too fast for the gap.
        let p = CnParams::with_defaults(0.5, 1.0, 1.0, 0.05, 100.0);
        match build_cn_schedule(&p) {
            Err(Error::RegimeRejected(check)) => {
                assert_eq!(check.first_failure().unwrap().label, "pi*tau*omega^2/u");
            }
            other => panic!("expected adiabaticity rejection, got {other:?}"),
        }
    }

    #[test]
    fn hold_window_and_resizing() {
        let p = CnParams::reference();
        let s = build_cn_schedule(&p).unwrap();
        let (w0, w1) = s.hold_window().unwrap();
        let sweep_end = 2.0 * p.ramp + 16.0 * p.tau;
        assert!((w0 - sweep_end).abs() < 1e-9);
        assert!((w1 - w0 - p.hold).abs() < 1e-9);

        let longer = s.with_hold_duration(p.hold + 12.5).unwrap();
        assert!((longer.span() - s.span() - 12.5).abs() < 1e-9);
        let (l0, l1) = longer.hold_window().unwrap();
        assert!((l1 - l0 - (p.hold + 12.5)).abs() < 1e-9);
        // Values around the stretched stage are untouched.
        assert!((longer.eval(l0).unwrap().eps2 - s.eval(w0).unwrap().eps2).abs() < 1e-12);
        let shorter = s.with_hold_duration(0.0).unwrap();
        assert!((shorter.span() - (s.span() - p.hold)).abs() < 1e-9);

        assert!(s.with_hold_duration(-1.0).is_err());
        // A schedule without a sweep has no hold stage.
        let zero = Profile::constant(0.0, 1.0, 0.0).unwrap();
        let flat = GateSchedule::new(zero.clone(), zero.clone(), zero.clone(), zero).unwrap();
        assert!(flat.hold_window().is_none());
        assert!(flat.with_hold_duration(1.0).is_err());
    }

    #[test]
    fn cn_shape_round_trip() {
        let p = CnParams {
            eps: 0.45,
            u: 1.1,
            eta: 0.9,
            omega: 0.06,
            tau: 900.0,
            ramp: 77.0,
            hold: 140.0,
            eps1_level: 0.25,
        };
        let shape = build_cn_schedule(&p).unwrap().cn_shape().unwrap();
        assert_eq!(shape.eps, p.eps);
        assert_eq!(shape.u, p.u);
        assert_eq!(shape.tau, p.tau);
        assert_eq!(shape.omega, p.omega);
        assert_eq!(shape.eta, p.eta);
        assert!((shape.hold - p.hold).abs() < 1e-9);
        assert_eq!(shape.eps1_level, p.eps1_level);
    }

    #[test]
    fn with_constant_eps1_replaces_only_eps1() {
        let s = build_cn_schedule(&CnParams::reference()).unwrap();
        let s2 = s.with_constant_eps1(0.125).unwrap();
        assert_eq!(s2.eval(100.0).unwrap().eps1, 0.125);
        assert_eq!(s2.eval(100.0).unwrap().eps2, s.eval(100.0).unwrap().eps2);
        assert!(s.with_constant_eps1(f64::INFINITY).is_err());
    }

    #[test]
    fn reversed_negated_mirrors_values() {
        let s = build_cn_schedule(&CnParams::with_defaults(0.5, 1.0, 1.0, 0.05, 400.0)).unwrap();
        let r = s.reversed_negated();
        assert_eq!(r.t_start(), s.t_start());
        assert!((r.t_end() - s.t_end()).abs() < 1e-12);
        let mirror = s.t_start() + s.t_end();
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..500 {
            let t = rng.gen_range(s.t_start()..s.t_end());
            let a = s.eval(t).unwrap();
            let b = r.eval(mirror - t).unwrap();
            assert!((a.eps1 + b.eps1).abs() < 1e-9);
            assert!((a.eps2 + b.eps2).abs() < 1e-9);
            assert!((a.omega2 + b.omega2).abs() < 1e-9);
            assert!((a.eta + b.eta).abs() < 1e-9);
        }
    }

    #[test]
    fn spectral_norm_bound_matches_hand_value() {
        let s = build_cn_schedule(&CnParams::reference()).unwrap();
        // Largest |eps2| is at the sweep end; eta rides on top of it.
        let eps_max = 0.5 + 8.0f64.tanh();
        let expect = (eps_max + 1.0).hypot(0.05);
        let got = s.spectral_norm_bound(s.t_start(), s.t_end());
        assert!((got - expect).abs() < 1e-6, "{got} vs {expect}");
    }
}
