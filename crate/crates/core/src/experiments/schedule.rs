//! Digit serialization into timed bias segments.

use crate::error::{Error, Result};
use crate::ffmodel::MAX_BIAS;
use crate::instruments::Testbench;

use super::dataset::{DigitBitmap, PIXELS};

pub const V_BLACK: f64 = -3.3;
pub const V_WHITE: f64 = 0.0;
pub const WEIGHT_MATCH: f64 = 4.5;
pub const WEIGHT_OTHER: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub voltage: f64,
    pub duration: f64,
    /// Serial pixel index this segment encodes.
    pub pixel: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StimulusSchedule {
    pub segments: Vec<Segment>,
}

impl StimulusSchedule {
    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }
}

/// Same duration for every pixel.
pub fn constant_weights(w: f64) -> [f64; PIXELS] {
    [w; PIXELS]
}

/// Elongates the expected black pixels of `target`.
pub fn weights_for(target: &DigitBitmap, matched: f64, other: f64) -> [f64; PIXELS] {
    let px = target.serialized();
    let mut out = [other; PIXELS];
    for (w, &black) in out.iter_mut().zip(px.iter()) {
        if black {
            *w = matched;
        }
    }
    out
}

pub fn zero_offsets() -> [f64; PIXELS] {
    [0.0; PIXELS]
}

/// Offset ramp `k (1 - i / 32)` over the serial pixel index.
pub fn offset_ramp(k: f64) -> [f64; PIXELS] {
    let mut out = [0.0; PIXELS];
    for (i, o) in out.iter_mut().enumerate() {
        *o = k * (1.0 - i as f64 / 32.0);
    }
    out
}

pub fn serialize_digit(
    digit: &DigitBitmap,
    weights: &[f64; PIXELS],
    v_black: f64,
    v_white: f64,
    offsets: &[f64; PIXELS],
) -> Result<StimulusSchedule> {
    let px = digit.serialized();
    let mut segments = Vec::with_capacity(PIXELS);
    for i in 0..PIXELS {
        let duration = weights[i];
        if !(duration > 0.0) || !duration.is_finite() {
            return Err(Error::InvalidDuration(duration));
        }
        let voltage = if px[i] { v_black } else { v_white } + offsets[i];
        if !(voltage.abs() <= MAX_BIAS) {
            return Err(Error::BiasOutOfRange(voltage));
        }
        segments.push(Segment {
            voltage,
            duration,
            pixel: i,
        });
    }
    Ok(StimulusSchedule { segments })
}

/// Plays a schedule on the bench. Each segment occupies its duration
/// including the generator latency. With `measure_each` a sweep closes
/// every segment and the `Z^C_22` readings are returned; segments shorter
/// than latency plus sweep time then last that long instead.
pub fn stream(bench: &mut Testbench, schedule: &StimulusSchedule, measure_each: bool) -> Result<Vec<f64>> {
    let timing = bench.timing();
    let mut readings = Vec::new();
    for seg in &schedule.segments {
        bench.set_bias(seg.voltage)?;
        if measure_each {
            bench.wait((seg.duration - timing.command_latency - timing.sweep_duration).max(0.0))?;
            readings.push(bench.measure()?.zc22);
        } else {
            bench.wait((seg.duration - timing.command_latency).max(0.0))?;
        }
    }
    Ok(readings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::dataset::Dataset;

    #[test]
    fn all_white_constant() {
        let s = serialize_digit(
            &DigitBitmap::blank(),
            &constant_weights(4.0),
            V_BLACK,
            V_WHITE,
            &zero_offsets(),
        )
        .unwrap();
        assert_eq!(s.len(), 64);
        assert!(s.segments.iter().all(|g| g.voltage == 0.0 && g.duration == 4.0));
    }

    #[test]
    fn pixel_indices_cover_everything_once() {
        let ds = Dataset::builtin();
        for d in ds.digits() {
            let s = serialize_digit(d, &constant_weights(1.0), V_BLACK, V_WHITE, &zero_offsets()).unwrap();
            let idx: Vec<usize> = s.segments.iter().map(|g| g.pixel).collect();
            assert_eq!(idx, (0..64).collect::<Vec<_>>());
        }
    }

    #[test]
    fn weighting_elongates_target_pixels() {
        let ds = Dataset::builtin();
        let w = weights_for(ds.digit(4), WEIGHT_MATCH, WEIGHT_OTHER);
        let px = ds.digit(4).serialized();
        for i in 0..64 {
            assert_eq!(w[i], if px[i] { 4.5 } else { 0.25 });
        }
    }

    #[test]
    fn digit_eight_segments_follow_bitmap() {
        let ds = Dataset::builtin();
        let s = serialize_digit(ds.digit(8), &constant_weights(4.0), V_BLACK, V_WHITE, &zero_offsets()).unwrap();
        let black: Vec<usize> = s.segments.iter().filter(|g| g.voltage == V_BLACK).map(|g| g.pixel).collect();
        // bottom row `..####..` then `.#....#.` three times, the middle bar, ...
        assert_eq!(&black[..8], &[2, 3, 4, 5, 9, 14, 17, 22]);
        assert_eq!(black.len(), ds.digit(8).black_count());
    }

    #[test]
    fn offset_ramp_changes_sign_at_32() {
        let o = offset_ramp(-1.0);
        assert_eq!(o[0], -1.0);
        assert_eq!(o[32], 0.0);
        assert!(o[31] < 0.0 && o[33] > 0.0);
    }

    #[test]
    fn overflowing_offset_is_rejected() {
        let ds = Dataset::builtin();
        let r = serialize_digit(ds.digit(8), &constant_weights(1.0), V_BLACK, V_WHITE, &offset_ramp(-8.0));
        assert!(matches!(r, Err(Error::BiasOutOfRange(_))));
    }
}
