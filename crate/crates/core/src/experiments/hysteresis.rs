//! Triangular staircase bias sweep with one VNA sweep per level.

use crate::error::{Error, Result};
use crate::instruments::{LogEntry, Testbench};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HysteresisConfig {
    pub v_min: f64,
    pub v_max: f64,
    pub step: f64,
    /// Time spent per level, generator latency and sweep included (s).
    pub dwell: f64,
    pub loops: usize,
}

impl Default for HysteresisConfig {
    fn default() -> Self {
        Self {
            v_min: -3.8,
            v_max: 3.8,
            step: 0.1,
            dwell: 1.0,
            loops: 50,
        }
    }
}

impl HysteresisConfig {
    /// Number of steps between `v_min` and `v_max`.
    pub fn steps(&self) -> Result<usize> {
        if !(self.v_min < self.v_max) {
            return Err(Error::Precondition(format!(
                "need v_min < v_max (got {} and {})",
                self.v_min, self.v_max
            )));
        }
        if !(self.step > 0.0) {
            return Err(Error::Precondition("step must be positive".into()));
        }
        let span = self.v_max - self.v_min;
        let n = (span / self.step).round();
        if n < 1.0 || (n * self.step - span).abs() > 1e-9 * span.max(1.0) {
            return Err(Error::Precondition(format!(
                "step {} does not divide the range {span}",
                self.step
            )));
        }
        Ok(n as usize)
    }

    /// Level voltages of one loop: up from `v_min` to `v_max`, then back
    /// down to `v_min`.
    pub fn loop_levels(&self) -> Result<Vec<f64>> {
        let n = self.steps()?;
        let level = |k: usize| self.v_min + k as f64 * self.step;
        Ok((0..=n).chain((0..n).rev()).map(level).collect())
    }

    pub fn samples_per_loop(&self) -> Result<usize> {
        Ok(2 * self.steps()? + 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HysteresisRun {
    pub config: HysteresisConfig,
    /// Initial zero-bias sample followed by `loops` loops of samples.
    pub entries: Vec<LogEntry>,
}

impl HysteresisRun {
    pub fn samples_per_loop(&self) -> usize {
        self.config.samples_per_loop().unwrap_or(0)
    }

    /// Samples of loop `i` (0-based).
    pub fn loop_entries(&self, i: usize) -> &[LogEntry] {
        let per = self.samples_per_loop();
        &self.entries[1 + i * per..1 + (i + 1) * per]
    }
}

pub fn hysteresis_sweep(bench: &mut Testbench, config: &HysteresisConfig) -> Result<HysteresisRun> {
    let levels = config.loop_levels()?;
    let timing = bench.timing();
    let settle = config.dwell - timing.command_latency - timing.sweep_duration;
    if !(settle >= 0.0) {
        return Err(Error::Precondition(format!(
            "dwell {} is shorter than command latency plus sweep time",
            config.dwell
        )));
    }
    let start = bench.log().len();
    bench.measure()?;
    for _ in 0..config.loops {
        for &v in &levels {
            bench.set_bias(v)?;
            bench.wait(settle)?;
            bench.measure()?;
        }
    }
    bench.set_bias(0.0)?;
    Ok(HysteresisRun {
        config: *config,
        entries: bench.log()[start..].to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffmodel::DeviceParams;

    #[test]
    fn default_counts() {
        let c = HysteresisConfig::default();
        assert_eq!(c.steps().unwrap(), 76);
        assert_eq!(c.samples_per_loop().unwrap(), 153);
        let lv = c.loop_levels().unwrap();
        assert_eq!(lv.len(), 153);
        assert_eq!(lv[0], -3.8);
        assert!((lv[76] - 3.8).abs() < 1e-12);
        assert_eq!(lv[152], lv[0]);
        assert_eq!(lv[151], lv[1]);
    }

    #[test]
    fn step_must_divide_range() {
        let c = HysteresisConfig {
            step: 0.3,
            ..Default::default()
        };
        assert!(matches!(c.steps(), Err(Error::Precondition(_))));
        let c = HysteresisConfig {
            v_min: 1.0,
            v_max: 1.0,
            ..Default::default()
        };
        assert!(c.steps().is_err());
    }

    #[test]
    fn two_loop_run_shape() {
        let mut b = Testbench::with_params(DeviceParams::default().without_chaos()).unwrap();
        let c = HysteresisConfig {
            loops: 2,
            ..Default::default()
        };
        let run = hysteresis_sweep(&mut b, &c).unwrap();
        assert_eq!(run.entries.len(), 1 + 2 * 153);
        assert_eq!(run.entries[0].bias, 0.0);
        assert!((run.entries[1].t - 1.0).abs() < 1e-9);
        assert!((run.entries[2].t - run.entries[1].t - 1.0).abs() < 1e-9);
        assert_eq!(run.loop_entries(1)[0].bias, -3.8);
    }
}
