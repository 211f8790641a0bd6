//! Minimal two-level propagator for H(t) = e(t) sz + w(t) sx, used by the
//! crossing-sweep analysis and the single-qubit pulse checks. Shares the
//! exact SU(2) step with the 4x4 block propagator.

use nalgebra::Matrix2;
use num_complex::Complex;

use crate::error::{Error, Result};

use super::{check_tol, su2_exp, MAX_STEPS};

type C64 = Complex<f64>;

/// Midpoint-sampled product of exact step exponentials.
pub(crate) fn propagate_fixed<F>(coeffs: &F, t0: f64, t1: f64, steps: usize) -> Matrix2<C64>
where
    F: Fn(f64) -> (f64, f64),
{
    debug_assert!(steps >= 1 && t1 > t0);
    let dt = (t1 - t0) / steps as f64;
    let mut acc = Matrix2::<C64>::identity();
    for k in 0..steps {
        let (e, w) = coeffs(t0 + (k as f64 + 0.5) * dt);
        acc = su2_exp(0.0, e, w, dt) * acc;
    }
    acc
}

/// Step-doubling propagator converged to entrywise `tol`, starting from
/// `initial_steps` (callers size it from their own norm bound).
pub(crate) fn propagate<F>(
    coeffs: &F,
    t0: f64,
    t1: f64,
    initial_steps: usize,
    tol: f64,
) -> Result<Matrix2<C64>>
where
    F: Fn(f64) -> (f64, f64),
{
    check_tol(tol)?;
    if !(t1 > t0) {
        return Err(Error::out_of_range("two-level window must be increasing"));
    }
    let span = t1 - t0;
    let mut steps = initial_steps.max(16);
    if steps as f64 > MAX_STEPS {
        return Err(Error::Stiffness { span, step: span / steps as f64 });
    }
    let mut coarse = propagate_fixed(coeffs, t0, t1, steps);
    loop {
        let next = steps
            .checked_mul(2)
            .filter(|&n| (n as f64) <= MAX_STEPS)
            .ok_or(Error::Stiffness { span, step: span / (2.0 * steps as f64) })?;
        let fine = propagate_fixed(coeffs, t0, t1, next);
        let diff = (coarse - fine).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if diff < tol {
            return Ok(fine);
        }
        steps = next;
        coarse = fine;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_field_matches_closed_form() {
        let u = propagate(&|_| (0.3, 0.4), 0.0, 2.0, 16, 1e-9).unwrap();
        let direct = su2_exp(0.0, 0.3, 0.4, 2.0);
        let diff = (u - direct).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-9);
    }

    #[test]
    fn rabi_half_period_inverts_population() {
        // H = w sx for a time pi/(2w) maps |0> to -i|1>.
        let w = 0.7;
        let u = propagate(&|_| (0.0, w), 0.0, std::f64::consts::FRAC_PI_2 / w, 16, 1e-9)
            .unwrap();
        assert!(u[(0, 0)].norm() < 1e-9);
        assert!((u[(1, 0)] - C64::new(0.0, -1.0)).norm() < 1e-8);
    }

    #[test]
    fn propagate_rejects_bad_windows_and_tolerances() {
        assert!(propagate(&|_| (0.0, 1.0), 1.0, 1.0, 16, 1e-9).is_err());
        assert!(propagate(&|_| (0.0, 1.0), 0.0, 1.0, 16, 0.0).is_err());
    }
}
