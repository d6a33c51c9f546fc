//! Reset / write / hold storage tests with fixed-length and pulsed writes.

use crate::control::{drive_to_setpoint, SetpointSpec};
use crate::error::{Error, Result};
use crate::instruments::Testbench;
use crate::rf::Indicator;

use super::table_csv;

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryConfig {
    pub setpoint: f64,
    pub tol: f64,
    /// Write durations, one level each (s). Zero skips the write.
    pub t_p: Vec<f64>,
    pub v_write: f64,
    /// Zero-bias wait before the baseline read and again before the hold (s).
    pub settle: f64,
    pub hold: f64,
    pub hold_interval: f64,
}

impl Default for MemoryConfig {
    fn default() -> Self {
        Self {
            setpoint: 14_338.0,
            tol: 1.0,
            t_p: (1..=16).map(|i| 4.0 * i as f64).collect(),
            v_write: 3.3,
            settle: 25.0,
            hold: 30.0,
            hold_interval: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryLevel {
    /// Write duration or pulse count, depending on the experiment.
    pub level: f64,
    pub reset_ticks: usize,
    pub baseline: f64,
    pub hold: Vec<f64>,
    pub hold_mean: f64,
    pub hold_var: f64,
    /// Hold mean minus baseline.
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryRun {
    pub levels: Vec<MemoryLevel>,
}

impl MemoryRun {
    pub fn deltas(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.delta).collect()
    }

    pub fn finals(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.hold_mean).collect()
    }

    pub fn summary_csv(&self) -> String {
        table_csv(
            "level,reset_ticks,baseline_zc22,hold_mean_zc22,hold_var_zc22,delta_zc22",
            self.levels.iter().map(|l| {
                vec![
                    l.level,
                    l.reset_ticks as f64,
                    l.baseline,
                    l.hold_mean,
                    l.hold_var,
                    l.delta,
                ]
            }),
        )
    }
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

/// Hold phase: zero bias, a reading every `interval` seconds for `hold`
/// seconds.
fn hold_phase(bench: &mut Testbench, hold: f64, interval: f64) -> Result<Vec<f64>> {
    let sweep = bench.timing().sweep_duration;
    if !(interval >= sweep) {
        return Err(Error::Precondition(format!(
            "hold interval {interval} is shorter than one sweep"
        )));
    }
    let n = (hold / interval).round() as usize;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(bench.measure()?.zc22);
        bench.wait(interval - sweep)?;
    }
    Ok(out)
}

fn level_record(level: f64, reset_ticks: usize, baseline: f64, hold: Vec<f64>) -> MemoryLevel {
    let (hold_mean, hold_var) = mean_var(&hold);
    MemoryLevel {
        level,
        reset_ticks,
        baseline,
        hold,
        hold_mean,
        hold_var,
        delta: hold_mean - baseline,
    }
}

fn check_common(settle: f64, hold: f64, interval: f64) -> Result<()> {
    if !(settle >= 0.0) {
        return Err(Error::InvalidDuration(settle));
    }
    if !(hold > 0.0 && interval > 0.0 && hold >= interval) {
        return Err(Error::Precondition("hold must cover at least one interval".into()));
    }
    Ok(())
}

/// Write durations `t_p` at `v_write`, each preceded by a closed-loop reset
/// of `Z^C_11` to the set point; `Z^C_22` is sampled during the hold.
pub fn memory_store(bench: &mut Testbench, cfg: &MemoryConfig) -> Result<MemoryRun> {
    if cfg.t_p.len() < 2 {
        return Err(Error::Precondition("need at least two levels".into()));
    }
    if let Some(&bad) = cfg.t_p.iter().find(|t| !(**t >= 0.0)) {
        return Err(Error::InvalidDuration(bad));
    }
    check_common(cfg.settle, cfg.hold, cfg.hold_interval)?;
    let latency = bench.timing().command_latency;
    let spec = SetpointSpec::new(Indicator::Zc11, cfg.setpoint, cfg.tol);
    let mut levels = Vec::with_capacity(cfg.t_p.len());
    for &t_p in &cfg.t_p {
        let ticks = drive_to_setpoint(bench, &spec)?;
        bench.wait(cfg.settle)?;
        let baseline = bench.measure()?.zc22;
        if t_p > 0.0 {
            bench.set_bias(cfg.v_write)?;
            bench.wait((t_p - latency).max(0.0))?;
            bench.set_bias(0.0)?;
        }
        bench.wait(cfg.settle)?;
        let hold = hold_phase(bench, cfg.hold, cfg.hold_interval)?;
        levels.push(level_record(t_p, ticks, baseline, hold));
    }
    Ok(MemoryRun { levels })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseConfig {
    pub setpoint: f64,
    pub tol: f64,
    pub counts: Vec<usize>,
    pub v_high: f64,
    pub t_high: f64,
    pub t_low: f64,
    pub settle: f64,
    pub hold: f64,
    pub hold_interval: f64,
}

impl Default for PulseConfig {
    fn default() -> Self {
        Self {
            setpoint: 14_338.0,
            tol: 1.0,
            counts: (1..=8).map(|i| 8 * i).collect(),
            v_high: 3.3,
            t_high: 0.25,
            t_low: 0.75,
            settle: 25.0,
            hold: 30.0,
            hold_interval: 1.0,
        }
    }
}

impl PulseConfig {
    pub fn duty_cycle(&self) -> f64 {
        self.t_high / (self.t_high + self.t_low)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseRun {
    pub levels: Vec<MemoryLevel>,
    /// Bias segments (V, s) of one pulse.
    pub pulse: [(f64, f64); 2],
}

impl PulseRun {
    pub fn finals(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.hold_mean).collect()
    }

    pub fn duty_cycle(&self) -> f64 {
        let high: f64 = self.pulse.iter().filter(|s| s.0 != 0.0).map(|s| s.1).sum();
        let total: f64 = self.pulse.iter().map(|s| s.1).sum();
        high / total
    }

    pub fn summary_csv(&self) -> String {
        MemoryRun {
            levels: self.levels.clone(),
        }
        .summary_csv()
    }
}

/// Pulse-train writes encoding a count, each preceded by a closed-loop reset
/// of `Z^C_22` to the set point.
pub fn pulse_memory(bench: &mut Testbench, cfg: &PulseConfig) -> Result<PulseRun> {
    if cfg.counts.is_empty() {
        return Err(Error::Precondition("no pulse counts".into()));
    }
    check_common(cfg.settle, cfg.hold, cfg.hold_interval)?;
    let latency = bench.timing().command_latency;
    if !(cfg.t_high >= latency && cfg.t_low >= latency) {
        return Err(Error::Precondition("pulse phases shorter than the generator latency".into()));
    }
    let spec = SetpointSpec::new(Indicator::Zc22, cfg.setpoint, cfg.tol);
    let mut levels = Vec::with_capacity(cfg.counts.len());
    for &count in &cfg.counts {
        let ticks = drive_to_setpoint(bench, &spec)?;
        bench.wait(cfg.settle)?;
        let baseline = bench.measure()?.zc22;
        for _ in 0..count {
            bench.set_bias(cfg.v_high)?;
            bench.wait(cfg.t_high - latency)?;
            bench.set_bias(0.0)?;
            bench.wait(cfg.t_low - latency)?;
        }
        let hold = hold_phase(bench, cfg.hold, cfg.hold_interval)?;
        levels.push(level_record(count as f64, ticks, baseline, hold));
    }
    Ok(PulseRun {
        levels,
        pulse: [(cfg.v_high, cfg.t_high), (0.0, cfg.t_low)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duty_cycle_is_a_quarter() {
        let c = PulseConfig::default();
        assert_eq!(c.duty_cycle(), 0.25);
    }

    #[test]
    fn sample_variance() {
        let (m, v) = mean_var(&[1.0, 2.0, 3.0]);
        assert_eq!((m, v), (2.0, 1.0));
        assert_eq!(mean_var(&[4.0]), (4.0, 0.0));
    }

    #[test]
    fn rejects_single_level() {
        let mut b = Testbench::with_params(Default::default()).unwrap();
        let cfg = MemoryConfig {
            t_p: vec![4.0],
            ..Default::default()
        };
        assert!(matches!(memory_store(&mut b, &cfg), Err(Error::Precondition(_))));
    }
}
