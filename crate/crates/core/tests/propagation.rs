//! End-to-end propagation properties on randomized schedules: unitarity,
//! window composition, time reversal, discretization order, and agreement
//! with the two-level crossing analysis on a decoupled schedule.

use lzgate_core::dynamics::{propagate, propagate_between, propagate_fixed, Unitary4};
use lzgate_core::gate::lz::{lz_numeric, lz_probability, LzParams};
use lzgate_core::schedules::{GateSchedule, Profile, PulseSegment, SegmentShape};

mod common;
use common::random_schedule;
use rand_chacha::ChaCha12Rng;
use rand::{Rng, SeedableRng};

#[test]
fn propagation_is_unitary_for_random_schedules() {
    let mut rng = ChaCha12Rng::seed_from_u64(101);
    for _ in 0..100 {
        let s = random_schedule(&mut rng);
        let u = propagate(&s, 1e-5).unwrap();
        assert!(u.unitarity_deviation() < 1e-9, "{}", u.unitarity_deviation());
    }
}

#[test]
fn propagation_composes_over_subwindows() {
    let mut rng = ChaCha12Rng::seed_from_u64(102);
    let tol = 1e-6;
    for _ in 0..25 {
        let s = random_schedule(&mut rng);
        let (t0, t1) = (s.t_start(), s.t_end());
        let tm = t0 + (t1 - t0) * rng.gen_range(0.2..0.8);
        let whole = propagate(&s, tol).unwrap();
        let first = propagate_between(&s, t0, tm, tol).unwrap();
        let second = propagate_between(&s, tm, t1, tol).unwrap();
        let composed = &second * &first;
        assert!(
            composed.max_entry_diff(&whole) < 10.0 * tol,
            "composition error {}",
            composed.max_entry_diff(&whole)
        );
    }
}

#[test]
fn reversed_negated_schedule_inverts_the_propagator() {
    let mut rng = ChaCha12Rng::seed_from_u64(103);
    let tol = 1e-7;
    for _ in 0..25 {
        let s = random_schedule(&mut rng);
        let u = propagate(&s, tol).unwrap();
        let back = propagate(&s.reversed_negated(), tol).unwrap();
        assert!(
            back.max_entry_diff(&u.adjoint()) < 10.0 * tol,
            "reversal error {}",
            back.max_entry_diff(&u.adjoint())
        );
        let round_trip = &back * &u;
        assert!(round_trip.max_entry_diff(&Unitary4::identity()) < 20.0 * tol);
    }
}

#[test]
fn step_halving_is_second_order() {
    let mut rng = ChaCha12Rng::seed_from_u64(104);
    let s = random_schedule(&mut rng);
    let reference = propagate_fixed(&s, 1 << 16).unwrap();
    let err = |n: usize| propagate_fixed(&s, n).unwrap().max_entry_diff(&reference);
    let (e1, e2) = (err(1 << 9), err(1 << 10));
    // Midpoint coefficient sampling converges quadratically; demand at
    // least a factor 3 per halving to leave room for roundoff.
    assert!(e1 > 1e-13, "coarse error too small to resolve: {e1}");
    assert!(e1 / e2 > 3.0, "halving gained only {}", e1 / e2);
}

/// With the qubit coupling off and no control bias, the target qubit
/// undergoes a plain detuning sweep across a constant gap; the schedule
/// propagator must reproduce the two-level crossing probabilities.
#[test]
fn decoupled_target_sweep_matches_crossing_analysis() {
    let omega = 0.05;
    let u = 1.0;
    // Exponent 1 keeps the jump probability large enough for a relative
    // comparison.
    let tau = u / (std::f64::consts::PI * omega * omega);
    let ramp = 5.0;
    let t_end = 16.0 * tau + 2.0 * ramp;

    let eps2 = Profile::new(vec![PulseSegment::new(
        0.0,
        t_end,
        SegmentShape::TanhSweep { offset: 0.0, amplitude: u, tau, center: t_end / 2.0 },
    )])
    .unwrap();
    let omega2 = Profile::new(vec![
        PulseSegment::new(0.0, ramp, SegmentShape::RaisedCosineRamp { from: 0.0, to: omega }),
        PulseSegment::new(ramp, t_end - ramp, SegmentShape::Constant { value: omega }),
        PulseSegment::new(
            t_end - ramp,
            t_end,
            SegmentShape::RaisedCosineRamp { from: omega, to: 0.0 },
        ),
    ])
    .unwrap();
    let zero = Profile::constant(0.0, t_end, 0.0).unwrap();
    let s = GateSchedule::new(zero.clone(), eps2, omega2, zero).unwrap();

    let gate = propagate(&s, 1e-8).unwrap();
    // The sweep starts deep on the negative-detuning side where the
    // lower level is |0>; jumping to the upper level means staying on
    // |0> at the far side.
    let p_gate = gate.entry(0, 0).norm_sqr();

    let p = LzParams { omega, u, tau };
    let p_closed = lz_probability(&p).unwrap();
    let p_numeric = lz_numeric(&p, 0.0, 1e-8).unwrap();
    assert!(
        (p_gate - p_closed).abs() / p_closed < 0.05,
        "gate {p_gate} vs closed form {p_closed}"
    );
    assert!(
        (p_gate - p_numeric).abs() / p_numeric < 0.02,
        "gate {p_gate} vs numeric {p_numeric}"
    );

    // With zero coupling and no control bias the two control sectors
    // evolve identically.
    assert_eq!(gate.entry(0, 0), gate.entry(2, 2));
    assert_eq!(gate.entry(1, 0), gate.entry(3, 2));
}
