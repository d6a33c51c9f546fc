//! Physical reservoir computing: the device is the reservoir, only a small
//! readout network is trained on the 64 impedance readings of a streamed
//! digit.

pub mod model_file;
pub mod nn;
pub mod service;
pub mod wire;

pub use nn::{accuracy, infer, train, Layer, Normalizer, Prediction, ReadoutModel, TrainConfig, TrainMetrics, Variant};
pub use service::{serve, stream_session, ServiceHandle, ServiceResult, SessionReport};
pub use wire::{Reply, Request, REPLY_LEN, REQUEST_LEN};

use crate::control::prc_reset;
use crate::error::{Error, Result};
use crate::experiments::schedule::{V_BLACK, V_WHITE};
use crate::experiments::{constant_weights, serialize_digit, stream, zero_offsets, DigitBitmap, PIXELS};
use crate::instruments::Testbench;

pub const FEATURES: usize = PIXELS;
pub const CLASSES: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: usize,
}

impl Sample {
    pub fn new(features: Vec<f64>, label: usize) -> Result<Self> {
        if features.len() != FEATURES {
            return Err(Error::ShapeMismatch {
                expected: FEATURES,
                got: features.len(),
            });
        }
        if label >= CLASSES {
            return Err(Error::Precondition(format!("label {label} outside 0..{CLASSES}")));
        }
        Ok(Self { features, label })
    }

    /// Regression target in [0, 1].
    pub fn target(&self) -> f64 {
        label_to_target(self.label)
    }
}

pub fn label_to_target(label: usize) -> f64 {
    label as f64 / (CLASSES - 1) as f64
}

/// `round(3 score)`, clamped to a valid digit.
pub fn score_to_digit(score: f64) -> usize {
    let d = (score * (CLASSES - 1) as f64).round();
    if d.is_nan() || d < 0.0 {
        0
    } else {
        (d as usize).min(CLASSES - 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollectConfig {
    pub reps: usize,
    pub pixel_dwell: f64,
    pub v_black: f64,
    pub reset_low: f64,
    pub reset_high: f64,
    pub reset_star: f64,
    pub reset_tol: f64,
}

impl Default for CollectConfig {
    fn default() -> Self {
        Self {
            reps: 50,
            pixel_dwell: 2.0,
            v_black: V_BLACK,
            reset_low: 16_350.0,
            reset_high: 16_450.0,
            reset_star: 16_400.0,
            reset_tol: 2.5,
        }
    }
}

/// Reset, stream one digit with constant pixel weights and return the
/// reading after every pixel. The reset readings are not part of the result.
pub fn acquire(bench: &mut Testbench, digit: &DigitBitmap, cfg: &CollectConfig) -> Result<Vec<f64>> {
    let schedule = serialize_digit(
        digit,
        &constant_weights(cfg.pixel_dwell),
        cfg.v_black,
        V_WHITE,
        &zero_offsets(),
    )?;
    prc_reset(bench, cfg.reset_low, cfg.reset_high, cfg.reset_star, cfg.reset_tol)?;
    let features = stream(bench, &schedule, true)?;
    bench.set_bias(0.0)?;
    Ok(features)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Collection {
    pub samples: Vec<Sample>,
    /// (rep, digit) pairs dropped because a reset did not converge.
    pub skipped: Vec<(usize, usize)>,
}

/// `reps` passes over `digits` (labels are the slice indices).
pub fn collect_dataset(bench: &mut Testbench, digits: &[DigitBitmap], cfg: &CollectConfig) -> Result<Collection> {
    if digits.is_empty() || digits.len() > CLASSES {
        return Err(Error::Precondition(format!("need 1..={CLASSES} digits")));
    }
    let mut samples = Vec::with_capacity(cfg.reps * digits.len());
    let mut skipped = Vec::new();
    for rep in 0..cfg.reps {
        for (label, d) in digits.iter().enumerate() {
            match acquire(bench, d, cfg) {
                Ok(f) => samples.push(Sample::new(f, label)?),
                Err(Error::SetpointUnreachable { target, last, ticks }) => {
                    log::warn!("rep {rep} digit {label}: reset to {target} stuck at {last} after {ticks} ticks");
                    bench.set_bias(0.0)?;
                    skipped.push((rep, label));
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(Collection { samples, skipped })
}

/// `label,f0,...,f63`, one sample per line.
pub fn samples_to_csv(samples: &[Sample]) -> String {
    let mut out = String::from("label");
    for i in 0..FEATURES {
        out.push_str(&format!(",f{i}"));
    }
    out.push('\n');
    for s in samples {
        out.push_str(&s.label.to_string());
        for v in &s.features {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

pub fn samples_from_csv(text: &str) -> Result<Vec<Sample>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim().starts_with("label,f0") => {}
        _ => return Err(Error::Parse("expected a `label,f0,...` header".into())),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |what: &str| Error::Parse(format!("line {}: {what}", i + 1));
        let mut cells = line.split(',');
        let label: usize = cells
            .next()
            .and_then(|c| c.trim().parse().ok())
            .ok_or_else(|| bad("bad label"))?;
        let features = cells
            .map(|c| c.trim().parse::<f64>().map_err(|_| bad("bad value")))
            .collect::<Result<Vec<_>>>()?;
        out.push(Sample::new(features, label)?);
    }
    Ok(out)
}

/// Uniformly drawn digit labels for an inference session.
pub fn session_labels(n: usize, seed: u64) -> Vec<usize> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(0..CLASSES)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digit_decode_clamps() {
        assert_eq!(score_to_digit(0.0), 0);
        assert_eq!(score_to_digit(0.5), 2);
        assert_eq!(score_to_digit(0.49), 1);
        assert_eq!(score_to_digit(1.7), 3);
        assert_eq!(score_to_digit(-0.4), 0);
        assert_eq!(score_to_digit(f64::NAN), 0);
    }

    #[test]
    fn samples_csv_round_trip() {
        let s = vec![
            Sample::new((0..64).map(|i| 16_000.0 + i as f64 * 0.25).collect(), 2).unwrap(),
            Sample::new(vec![-1.5; 64], 0).unwrap(),
        ];
        let text = samples_to_csv(&s);
        assert!(text.starts_with("label,f0,f1,"));
        assert_eq!(samples_from_csv(&text).unwrap(), s);
        assert!(samples_from_csv("x\n").is_err());
        assert!(samples_from_csv(&text.replace("\n2,", "\n9,")).is_err());
    }

    #[test]
    fn sample_shape() {
        assert!(Sample::new(vec![0.0; 63], 0).is_err());
        assert!(Sample::new(vec![0.0; 64], 4).is_err());
        assert_eq!(Sample::new(vec![0.0; 64], 3).unwrap().target(), 1.0);
    }
}
