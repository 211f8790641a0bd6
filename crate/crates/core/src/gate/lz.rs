//! Crossing-sweep transition probabilities: the closed-form asymptotic
//! estimate and a numerically integrated counterpart for finite sweeps.

use crate::dynamics::two_level;
use crate::error::{Error, Result};
use crate::schedules::SWEEP_HALF_WIDTH;

type C64 = num_complex::Complex<f64>;

/// Parameters of a tanh detuning sweep through an avoided crossing:
/// eps(t) = offset + u tanh(t / tau) against a constant gap omega.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LzParams {
    /// Half the minimum level splitting (the sigma_x coefficient).
    pub omega: f64,
    /// Sweep amplitude (the detuning runs across +-u).
    pub u: f64,
    /// Sweep timescale; the crossing-region velocity is u / tau.
    pub tau: f64,
}

impl LzParams {
    fn validate(&self) -> Result<()> {
        let ok = self.omega.is_finite()
            && self.omega >= 0.0
            && self.u.is_finite()
            && self.u > 0.0
            && self.tau.is_finite()
            && self.tau > 0.0;
        if !ok {
            return Err(Error::invalid(format!(
                "sweep parameters need omega >= 0, u > 0, tau > 0, got {self:?}",
            )));
        }
        Ok(())
    }
}

/// Asymptotic probability of jumping across the gap during the sweep:
/// exp(-pi tau omega^2 / u). A vanishing gap gives exactly 1.
pub fn lz_probability(p: &LzParams) -> Result<f64> {
    p.validate()?;
    Ok((-std::f64::consts::PI * p.tau * p.omega * p.omega / p.u).exp())
}

/// Numerically integrated jump probability for the finite sweep
/// eps(t) = eps_offset + u tanh(t / tau) over t in [-8 tau, 8 tau].
///
/// The state starts in the lower instantaneous eigenstate at the left
/// edge; the result is its final weight on the upper instantaneous
/// eigenstate at the right edge. The offset shifts the crossing away
/// from the sweep midpoint and must satisfy |eps_offset| < u, or the
/// levels never cross. `tol` is the propagator convergence target.
pub fn lz_numeric(p: &LzParams, eps_offset: f64, tol: f64) -> Result<f64> {
    p.validate()?;
    if !(eps_offset.is_finite() && eps_offset.abs() < p.u) {
        return Err(Error::invalid(format!(
            "eps_offset must satisfy |eps_offset| < u, got {eps_offset} vs u = {}",
            p.u
        )));
    }
    let (t0, t1) = (-SWEEP_HALF_WIDTH * p.tau, SWEEP_HALF_WIDTH * p.tau);
    let eps = |t: f64| eps_offset + p.u * (t / p.tau).tanh();
    let coeffs = |t: f64| (eps(t), p.omega);
    let norm_bound = (eps_offset.abs() + p.u).hypot(p.omega);
    let initial = (((t1 - t0) * norm_bound / 0.1).ceil() as usize).max(16);
    let u = two_level::propagate(&coeffs, t0, t1, initial, tol)?;
    let start = eigenvector(eps(t0), p.omega, Branch::Lower)?;
    let end = eigenvector(eps(t1), p.omega, Branch::Upper)?;
    let final_state = u * start;
    Ok(end.dotc(&final_state).norm_sqr())
}

enum Branch {
    Lower,
    Upper,
}

/// Normalized eigenvector of e sz + w sx on the requested branch, using
/// the sign-split formulas that avoid cancellation near w -> 0.
fn eigenvector(e: f64, w: f64, branch: Branch) -> Result<nalgebra::Vector2<C64>> {
    let b = e.hypot(w);
    if b == 0.0 {
        return Err(Error::invalid(
            "degenerate spectrum at the sweep edge: e = w = 0",
        ));
    }
    let (x, y) = match (e >= 0.0, branch) {
        (true, Branch::Lower) => (-w, b + e),
        (true, Branch::Upper) => (b + e, w),
        (false, Branch::Lower) => (e - b, w),
        (false, Branch::Upper) => (w, b - e),
    };
    let n = x.hypot(y);
    Ok(nalgebra::Vector2::new(C64::new(x / n, 0.0), C64::new(y / n, 0.0)))
}
