//! Randomized schedule generator shared by the integration tests.

use lzgate_core::schedules::{GateSchedule, Profile, PulseSegment, SegmentShape};
use rand::Rng;
use rand_chacha::ChaCha12Rng;

/// Piecewise random walk over [0, t_end] with 1..=4 smooth segments.
/// `zero_ends` pins both boundary values to zero (required of the
/// tunneling and coupling profiles).
pub fn random_profile(rng: &mut ChaCha12Rng, t_end: f64, zero_ends: bool) -> Profile {
    let pieces = rng.gen_range(1..=4usize);
    let mut knots = vec![0.0];
    for k in 1..pieces {
        knots.push(t_end * k as f64 / pieces as f64 * rng.gen_range(0.9..1.1));
    }
    knots.push(t_end);
    let mut values: Vec<f64> = (0..=pieces).map(|_| rng.gen_range(-1.5..1.5)).collect();
    if zero_ends {
        values[0] = 0.0;
        values[pieces] = 0.0;
    }
    let segments = (0..pieces)
        .map(|i| {
            let (from, to) = (values[i], values[i + 1]);
            // The final segment of a zero-ended profile must ramp back to
            // zero; a constant there would freeze the boundary at the walk
            // value and fail validation.
            let lo = if zero_ends && i == pieces - 1 { 1 } else { 0 };
            let shape = match rng.gen_range(lo..3) {
                0 => SegmentShape::Constant { value: from },
                1 => SegmentShape::LinearRamp { from, to },
                _ => SegmentShape::RaisedCosineRamp { from, to },
            };
            // A constant segment freezes the walk until the next knot.
            if matches!(shape, SegmentShape::Constant { .. }) {
                values[i + 1] = from;
            }
            PulseSegment::new(knots[i], knots[i + 1], shape)
        })
        .collect::<Vec<_>>();
    // Re-emit ramps against the possibly frozen values.
    let segments = segments
        .into_iter()
        .enumerate()
        .map(|(i, seg)| {
            let shape = match seg.shape {
                SegmentShape::Constant { .. } => SegmentShape::Constant { value: values[i] },
                SegmentShape::LinearRamp { .. } => SegmentShape::LinearRamp {
                    from: values[i],
                    to: values[i + 1],
                },
                SegmentShape::RaisedCosineRamp { .. } => SegmentShape::RaisedCosineRamp {
                    from: values[i],
                    to: values[i + 1],
                },
                other => other,
            };
            PulseSegment::new(seg.t_start, seg.t_end, shape)
        })
        .collect();
    Profile::new(segments).expect("randomized profile is valid by construction")
}

pub fn random_schedule(rng: &mut ChaCha12Rng) -> GateSchedule {
    let t_end = rng.gen_range(5.0..30.0);
    GateSchedule::new(
        random_profile(rng, t_end, false),
        random_profile(rng, t_end, false),
        random_profile(rng, t_end, true),
        random_profile(rng, t_end, true),
    )
    .expect("randomized schedule is valid by construction")
}
