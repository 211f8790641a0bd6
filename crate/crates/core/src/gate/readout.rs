//! Relative-phase readout through quarter rotations.
//!
//! A charge detector only sees basis populations. Applying a quarter
//! rotation about x first maps the relative phase of one qubit into a
//! population imbalance: starting from a0|0> + a1|1>, the probability of
//! reading 0 afterwards is 1/2 - sqrt(p1 p2) sin(phi) with p1 = |a0|^2,
//! p2 = |a1|^2, phi = arg(a1) - arg(a0). A quarter rotation about y
//! exposes cos(phi) instead, so the pair pins the phase completely.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::dynamics::{TwoQubitState, Unitary4};
use crate::error::{Error, Result};

type C64 = Complex<f64>;

/// Which qubit of the pair an operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Qubit {
    Control,
    Target,
}

/// Embeds a single-qubit operation on the chosen qubit of the pair,
/// identity on the other (basis index 2 * control + target).
fn embed(r: Matrix2<C64>, on: Qubit) -> Unitary4 {
    let mut m = Matrix4::zeros();
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                match on {
                    Qubit::Control => m[(2 * a + b, 2 * c + b)] = r[(a, c)],
                    Qubit::Target => m[(2 * b + a, 2 * b + c)] = r[(a, c)],
                }
            }
        }
    }
    Unitary4::from_trusted(m)
}

/// exp(i pi sx / 4) on the chosen qubit: (1, i; i, 1) / sqrt(2).
///
/// Physically this is a tunneling pulse: evolving under -omega sx for a
/// time pi / (4 omega) produces exactly this matrix.
pub fn quarter_x_rotation(target: Qubit) -> Unitary4 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let r = Matrix2::new(C64::new(s, 0.0), C64::new(0.0, s), C64::new(0.0, s), C64::new(s, 0.0));
    embed(r, target)
}

/// exp(i pi sy / 4) on the chosen qubit: (1, 1; -1, 1) / sqrt(2).
pub fn quarter_y_rotation(target: Qubit) -> Unitary4 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let r = Matrix2::new(C64::new(s, 0.0), C64::new(s, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0));
    embed(r, target)
}

/// Marginal probabilities (P(qubit = 0), P(qubit = 1)) of one qubit.
pub fn marginal_probabilities(state: &TwoQubitState, on: Qubit) -> (f64, f64) {
    let p = |i: usize| state.probability(i);
    match on {
        Qubit::Control => (p(0) + p(1), p(2) + p(3)),
        Qubit::Target => (p(0) + p(2), p(1) + p(3)),
    }
}

/// Populations after the phase-to-population mapping, predicted from the
/// pre-rotation population p1 of |0> and relative phase phi:
/// q1 = 1/2 - sqrt(p1 p2) sin(phi), q2 = 1/2 + sqrt(p1 p2) sin(phi).
pub fn phase_readout(p1: f64, phi: f64) -> Result<(f64, f64)> {
    if !((0.0..=1.0).contains(&p1) && phi.is_finite()) {
        return Err(Error::invalid(format!(
            "need a population p1 in [0, 1] and a finite phase, got ({p1}, {phi})",
        )));
    }
    let shift = (p1 * (1.0 - p1)).sqrt() * phi.sin();
    Ok((0.5 - shift, 0.5 + shift))
}

/// Applies the quarter x rotation to the chosen qubit and returns its
/// marginal populations, i.e. what a charge detector reads after the
/// phase-to-population pulse.
pub fn simulate_phase_readout(state: &TwoQubitState, target: Qubit) -> (f64, f64) {
    let rotated = quarter_x_rotation(target).apply(state);
    marginal_probabilities(&rotated, target)
}

/// Recovers the relative phase from the two rotated readouts
/// (quarter x then quarter y on identically prepared states):
/// q1_x = 1/2 - r sin(phi), q1_y = 1/2 + r cos(phi) with r >= 0.
/// Fails when both sit at 1/2, where the phase is undefined.
pub fn recover_phase(q1_x: f64, q1_y: f64) -> Result<f64> {
    for q in [q1_x, q1_y] {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::invalid(format!(
                "readout populations must lie in [0, 1], got {q}",
            )));
        }
    }
    let (s, c) = (0.5 - q1_x, q1_y - 0.5);
    if s.hypot(c) < 1e-12 {
        return Err(Error::invalid(
            "readouts carry no coherence: populations are 1/2 in both bases",
        ));
    }
    Ok(s.atan2(c))
}
