//! Digit streaming experiments: differentiation, weighted in-memory
//! classification, progressive adaptation and dynamics reduction.

use crate::analysis::detection_threshold;
use crate::control::{charge_reset, drive_to_setpoint, SetpointSpec};
use crate::error::{Error, Result};
use crate::ffmodel::RESTORE_BIAS;
use crate::instruments::Testbench;
use crate::rf::Indicator;

use super::dataset::{DigitBitmap, PIXELS};
use super::schedule::{
    constant_weights, offset_ramp, serialize_digit, stream, weights_for, zero_offsets, V_BLACK, V_WHITE,
    WEIGHT_MATCH, WEIGHT_OTHER,
};
use super::table_csv;

pub const CLASSIFY_SETPOINT: f64 = 14_338.0;
pub const RESET_TOL: f64 = 1.0;

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = i;
        }
    }
    best
}

fn range(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    max - min
}

/// Sample standard deviation of `n` zero-bias readings taken one second
/// apart on a copy of the bench. The copy first rests for five short-term
/// time constants so the relaxation of the trace is not counted as noise.
/// The bench itself is not touched.
pub fn hold_noise_sigma(bench: &Testbench, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InsufficientData("need at least two readings".into()));
    }
    let mut probe = bench.clone();
    probe.set_bias(0.0)?;
    probe.wait(5.0 / probe.params().s_relax)?;
    let pause = 1.0 - probe.timing().sweep_duration;
    let mut xs = Vec::with_capacity(n);
    for _ in 0..n {
        xs.push(probe.measure()?.zc22);
        probe.wait(pause.max(0.0))?;
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    Ok(var.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    /// Final `Z^C_22` after streaming each digit.
    pub finals: Vec<f64>,
    pub detected: usize,
    pub reset_ticks: Vec<usize>,
}

impl Classification {
    pub fn dynamic_range(&self) -> f64 {
        range(&self.finals)
    }

    pub fn summary_csv(&self) -> String {
        table_csv(
            "digit,reset_ticks,final_zc22,detected",
            self.finals.iter().enumerate().map(|(d, &f)| {
                vec![
                    d as f64,
                    self.reset_ticks[d] as f64,
                    f,
                    (d == self.detected) as u8 as f64,
                ]
            }),
        )
    }
}

/// Streams every digit under the same per-pixel weights, each after a
/// charge reset of `Z^C_22` to `setpoint`, and picks the digit with the
/// lowest final impedance (lowest index on ties).
pub fn classify_with_weights(
    bench: &mut Testbench,
    digits: &[DigitBitmap],
    weights: &[f64; PIXELS],
    setpoint: f64,
) -> Result<Classification> {
    if digits.is_empty() {
        return Err(Error::Precondition("no digits to classify".into()));
    }
    let offsets = zero_offsets();
    let mut finals = Vec::with_capacity(digits.len());
    let mut reset_ticks = Vec::with_capacity(digits.len());
    for d in digits {
        let schedule = serialize_digit(d, weights, V_BLACK, V_WHITE, &offsets)?;
        reset_ticks.push(charge_reset(bench, setpoint, RESET_TOL)?);
        stream(bench, &schedule, false)?;
        finals.push(bench.measure()?.zc22);
    }
    bench.set_bias(0.0)?;
    Ok(Classification {
        detected: argmin(&finals),
        finals,
        reset_ticks,
    })
}

/// In-memory classification with the target digit's black pixels weighted
/// 4.5 s and all others 0.25 s.
pub fn classify_inmemory(
    bench: &mut Testbench,
    digits: &[DigitBitmap],
    weighted_digit: usize,
    setpoint: f64,
) -> Result<Classification> {
    let target = digits
        .get(weighted_digit)
        .ok_or_else(|| Error::Precondition(format!("no digit {weighted_digit}")))?;
    let w = weights_for(target, WEIGHT_MATCH, WEIGHT_OTHER);
    classify_with_weights(bench, digits, &w, setpoint)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DifferentiationRun {
    /// `Z^C_22` at the end of every pixel, all digits in sequence.
    pub readings: Vec<f64>,
    pub finals: Vec<f64>,
    /// Resolution used for the distinctness check.
    pub eps_d: f64,
}

impl DifferentiationRun {
    pub fn min_gap(&self) -> f64 {
        let mut v = self.finals.clone();
        v.sort_by(f64::total_cmp);
        v.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    pub fn all_distinct(&self) -> bool {
        self.min_gap() > self.eps_d
    }

    pub fn summary_csv(&self) -> String {
        table_csv(
            "digit,final_zc22",
            self.finals.iter().enumerate().map(|(d, &f)| vec![d as f64, f]),
        )
    }
}

/// Streams all digits back to back with a constant pixel duration and a
/// reading after every pixel.
pub fn differentiation_run(bench: &mut Testbench, digits: &[DigitBitmap], w: f64) -> Result<DifferentiationRun> {
    if digits.is_empty() {
        return Err(Error::Precondition("no digits to stream".into()));
    }
    let eps_d = 3.0 * hold_noise_sigma(bench, 30)?;
    let weights = constant_weights(w);
    let offsets = zero_offsets();
    let mut readings = Vec::with_capacity(digits.len() * PIXELS);
    let mut finals = Vec::with_capacity(digits.len());
    for d in digits {
        let schedule = serialize_digit(d, &weights, V_BLACK, V_WHITE, &offsets)?;
        let r = stream(bench, &schedule, true)?;
        finals.push(*r.last().expect("64 segments"));
        readings.extend(r);
    }
    bench.set_bias(0.0)?;
    Ok(DifferentiationRun {
        readings,
        finals,
        eps_d,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProgressiveRun {
    /// Per digit: readings after the reset and after every repetition.
    pub zc11: Vec<Vec<f64>>,
    pub zc22: Vec<Vec<f64>>,
}

impl ProgressiveRun {
    pub fn ranges(&self) -> Vec<f64> {
        self.zc22.iter().map(|s| range(s)).collect()
    }

    pub fn ranges_zc11(&self) -> Vec<f64> {
        self.zc11.iter().map(|s| range(s)).collect()
    }

    pub fn summary_csv(&self) -> String {
        let r22 = self.ranges();
        let r11 = self.ranges_zc11();
        table_csv(
            "digit,range_zc11,range_zc22",
            (0..r22.len()).map(|d| vec![d as f64, r11[d], r22[d]]),
        )
    }
}

/// Streams each digit `reps` times with the weighting of `weighted_digit`
/// and the offset ramp `k (1 - i/32)`, after a fine reset of `Z^C_11`.
pub fn progressive_adaptation(
    bench: &mut Testbench,
    digits: &[DigitBitmap],
    weighted_digit: usize,
    k: f64,
    reps: usize,
    setpoint: f64,
) -> Result<ProgressiveRun> {
    let target = digits
        .get(weighted_digit)
        .ok_or_else(|| Error::Precondition(format!("no digit {weighted_digit}")))?;
    if reps == 0 {
        return Err(Error::Precondition("need at least one repetition".into()));
    }
    let weights = weights_for(target, WEIGHT_MATCH, WEIGHT_OTHER);
    let offsets = offset_ramp(k);
    let spec = SetpointSpec::new(Indicator::Zc11, setpoint, RESET_TOL);
    let mut zc11 = Vec::with_capacity(digits.len());
    let mut zc22 = Vec::with_capacity(digits.len());
    for d in digits {
        let schedule = serialize_digit(d, &weights, V_BLACK, V_WHITE, &offsets)?;
        drive_to_setpoint(bench, &spec)?;
        let first = bench.measure()?;
        let (mut s11, mut s22) = (vec![first.zc11], vec![first.zc22]);
        for _ in 0..reps {
            stream(bench, &schedule, false)?;
            let z = bench.measure()?;
            s11.push(z.zc11);
            s22.push(z.zc22);
        }
        zc11.push(s11);
        zc22.push(s22);
    }
    bench.set_bias(0.0)?;
    Ok(ProgressiveRun { zc11, zc22 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsReductionRun {
    pub weighted_digit: usize,
    pub iterations: Vec<Classification>,
    pub thresholds: Vec<f64>,
    pub accuracy: f64,
    /// Classification repeated after the restoration hold.
    pub restored: Classification,
}

impl DynamicsReductionRun {
    pub fn ranges(&self) -> Vec<f64> {
        self.iterations.iter().map(Classification::dynamic_range).collect()
    }

    pub fn detected(&self) -> Vec<usize> {
        self.iterations.iter().map(|c| c.detected).collect()
    }

    pub fn summary_csv(&self) -> String {
        let mut header = String::from("iteration");
        for d in 0..10 {
            header.push_str(&format!(",final_{d}"));
        }
        header.push_str(",detected,threshold,range");
        table_csv(
            &header,
            self.iterations.iter().enumerate().map(|(i, c)| {
                let mut row = vec![(i + 1) as f64];
                row.extend(c.finals.iter().cloned());
                row.extend([c.detected as f64, self.thresholds[i], c.dynamic_range()]);
                row
            }),
        )
    }
}

/// Repeats the weighted classification `iterations` times, then holds the
/// restoration bias for `restore_duration` seconds and classifies once more.
pub fn dynamics_reduction_run(
    bench: &mut Testbench,
    digits: &[DigitBitmap],
    weighted_digit: usize,
    iterations: usize,
    restore_duration: f64,
) -> Result<DynamicsReductionRun> {
    if iterations == 0 {
        return Err(Error::Precondition("need at least one iteration".into()));
    }
    if !(restore_duration > 0.0) {
        return Err(Error::InvalidDuration(restore_duration));
    }
    let mut runs = Vec::with_capacity(iterations);
    let mut thresholds = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let c = classify_inmemory(bench, digits, weighted_digit, CLASSIFY_SETPOINT)?;
        thresholds.push(detection_threshold(&c.finals)?);
        runs.push(c);
    }
    let hits = runs.iter().filter(|c| c.detected == weighted_digit).count();
    let latency = bench.timing().command_latency;
    bench.set_bias(RESTORE_BIAS)?;
    bench.wait((restore_duration - latency).max(0.0))?;
    bench.set_bias(0.0)?;
    let restored = classify_inmemory(bench, digits, weighted_digit, CLASSIFY_SETPOINT)?;
    Ok(DynamicsReductionRun {
        weighted_digit,
        accuracy: hits as f64 / iterations as f64,
        iterations: runs,
        thresholds,
        restored,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmin_breaks_ties_low() {
        assert_eq!(argmin(&[3.0, 1.0, 1.0, 2.0]), 1);
        assert_eq!(argmin(&[5.0, 5.0]), 0);
    }

    #[test]
    fn range_of_values() {
        assert_eq!(range(&[2.0, -1.0, 4.0]), 5.0);
    }
}
