//! Emulated bench: a DC bias generator and a VNA sharing one device and one
//! simulated clock.
//!
//! The device is integrated lazily: commands first bring it up to the
//! current clock under the bias that was active, then act.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::ffmodel::{check_bias, DeviceParams, DeviceState, PortNetwork};
use crate::rf::{s_from_z, Collapsed, SweepConfig, SweepResult};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timing {
    /// Simulated duration of one VNA sweep (s).
    pub sweep_duration: f64,
    /// Simulated latency of one generator command (s).
    pub command_latency: f64,
}

impl Default for Timing {
    fn default() -> Self {
        Self {
            sweep_duration: 0.5,
            command_latency: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogEntry {
    pub t: f64,
    pub bias: f64,
    pub zc: Collapsed,
}

pub const LOG_CSV_HEADER: &str = "t_s,bias_v,zc11,zc12,zc21,zc22";

/// Renders log entries in the bench CSV format (LF line endings).
pub fn log_to_csv(entries: &[LogEntry]) -> String {
    let mut out = String::with_capacity(64 * (entries.len() + 1));
    out.push_str(LOG_CSV_HEADER);
    out.push('\n');
    for e in entries {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            e.t, e.bias, e.zc.zc11, e.zc.zc12, e.zc.zc21, e.zc.zc22
        );
    }
    out
}

/// Parses the bench CSV format back into entries.
pub fn log_from_csv(text: &str) -> Result<Vec<LogEntry>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == LOG_CSV_HEADER => {}
        _ => return Err(Error::Parse(format!("expected header `{LOG_CSV_HEADER}`"))),
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let vals = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse(format!("row {}: {e}", i + 2)))?;
        if vals.len() != 6 {
            return Err(Error::Parse(format!("row {}: expected 6 columns", i + 2)));
        }
        out.push(LogEntry {
            t: vals[0],
            bias: vals[1],
            zc: Collapsed {
                zc11: vals[2],
                zc12: vals[3],
                zc21: vals[4],
                zc22: vals[5],
            },
        });
    }
    Ok(out)
}

/// Emulated VNA read-out of a device state: S-parameters are synthesized
/// from the device impedance, then converted back exactly as a real
/// measurement would be.
pub fn read_device(
    state: &DeviceState,
    params: &DeviceParams,
    cfg: &SweepConfig,
    freqs: &[f64],
    t: f64,
) -> Result<SweepResult> {
    let net = PortNetwork::of(state, params);
    let s = freqs
        .iter()
        .enumerate()
        .map(|(i, &f)| {
            s_from_z(&net.impedance_at(f), cfg.z0).map_err(|e| match e {
                Error::SingularConversion { det, .. } => Error::SingularConversion {
                    det,
                    index: Some(i),
                },
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    SweepResult::from_s(freqs.to_vec(), s, cfg.z0, t)
}

/// Solves for the arm resistance that places `Z^C_22` at `target` ohms for
/// the equilibrium state (`w = w_eq`, `s = 0`).
pub fn calibrate(params: &DeviceParams, cfg: &SweepConfig, target: f64) -> Result<DeviceParams> {
    cfg.validate()?;
    params.validate()?;
    if !(target > 0.0) {
        return Err(Error::Precondition("calibration target must be positive".into()));
    }
    let freqs = cfg.frequencies();
    let mut eq = DeviceState::fresh(params);
    eq.w = params.w_eq;
    eq.s = 0.0;
    let zc22_at = |r_arm: f64| -> Result<f64> {
        let p = DeviceParams {
            r_arm,
            ..params.clone()
        };
        Ok(read_device(&eq, &p, cfg, &freqs, 0.0)?.zc.zc22)
    };
    // Z^C_22 is affine in r_arm.
    let (r0, r1) = (params.r_arm, 2.0 * params.r_arm);
    let (z0, z1) = (zc22_at(r0)?, zc22_at(r1)?);
    let slope = (z1 - z0) / (r1 - r0);
    let r_arm = r0 + (target - z0) / slope;
    if !(r_arm > 0.0) {
        return Err(Error::Precondition(format!(
            "target {target} needs a non-positive arm resistance"
        )));
    }
    Ok(DeviceParams {
        r_arm,
        ..params.clone()
    })
}

#[derive(Debug, Clone)]
pub struct Testbench {
    params: DeviceParams,
    state: DeviceState,
    cfg: SweepConfig,
    freqs: Vec<f64>,
    timing: Timing,
    bias: f64,
    clock: f64,
    log: Vec<LogEntry>,
    last: Option<SweepResult>,
}

impl Testbench {
    pub fn new(params: DeviceParams, cfg: SweepConfig, timing: Timing) -> Result<Self> {
        let state = DeviceState::fresh(&params);
        Self::with_state(params, state, cfg, timing)
    }

    /// Bench with default sweep and timing.
    pub fn with_params(params: DeviceParams) -> Result<Self> {
        Self::new(params, SweepConfig::default(), Timing::default())
    }

    pub fn with_state(
        params: DeviceParams,
        state: DeviceState,
        cfg: SweepConfig,
        timing: Timing,
    ) -> Result<Self> {
        params.validate()?;
        cfg.validate()?;
        if !(timing.sweep_duration >= 0.0 && timing.command_latency >= 0.0) {
            return Err(Error::Precondition("timings must be non-negative".into()));
        }
        let freqs = cfg.frequencies();
        let clock = state.t;
        Ok(Self {
            params,
            state,
            cfg,
            freqs,
            timing,
            bias: 0.0,
            clock,
            log: Vec::new(),
            last: None,
        })
    }

    pub fn params(&self) -> &DeviceParams {
        &self.params
    }

    pub fn sweep_config(&self) -> &SweepConfig {
        &self.cfg
    }

    pub fn timing(&self) -> Timing {
        self.timing
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn log(&self) -> &[LogEntry] {
        &self.log
    }

    pub fn take_log(&mut self) -> Vec<LogEntry> {
        std::mem::take(&mut self.log)
    }

    pub fn last_sweep(&self) -> Option<&SweepResult> {
        self.last.as_ref()
    }

    /// Device state brought up to the current clock.
    pub fn state(&mut self) -> Result<&DeviceState> {
        self.sync()?;
        Ok(&self.state)
    }

    /// Replaces the device state (used by restoration and tests); the clock
    /// is left untouched.
    pub fn set_state(&mut self, mut state: DeviceState) {
        state.t = self.clock;
        self.state = state;
    }

    fn sync(&mut self) -> Result<()> {
        let dt = self.clock - self.state.t;
        if dt > 0.0 {
            self.state.advance(&self.params, self.bias, dt)?;
        }
        self.state.t = self.clock;
        Ok(())
    }

    pub fn set_bias(&mut self, v: f64) -> Result<()> {
        check_bias(v)?;
        self.sync()?;
        self.bias = v;
        self.clock += self.timing.command_latency;
        Ok(())
    }

    pub fn wait(&mut self, duration: f64) -> Result<()> {
        if !(duration >= 0.0) || !duration.is_finite() {
            return Err(Error::InvalidDuration(duration));
        }
        self.clock += duration;
        self.sync()
    }

    /// One VNA sweep. Reads the state without modifying it.
    pub fn sweep(&mut self) -> Result<SweepResult> {
        self.sync()?;
        let result = read_device(&self.state, &self.params, &self.cfg, &self.freqs, self.clock)?;
        self.log.push(LogEntry {
            t: self.clock,
            bias: self.bias,
            zc: result.zc,
        });
        self.clock += self.timing.sweep_duration;
        self.last = Some(result.clone());
        Ok(result)
    }

    /// Sweep returning only the collapsed indicators.
    pub fn measure(&mut self) -> Result<Collapsed> {
        Ok(self.sweep()?.zc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet_bench() -> Testbench {
        Testbench::with_params(DeviceParams::default().without_chaos()).unwrap()
    }

    #[test]
    fn repeated_zero_bias_only_moves_clock() {
        let mut b = quiet_bench();
        b.set_bias(0.0).unwrap();
        let st = b.state().unwrap().clone();
        b.set_bias(0.0).unwrap();
        assert!((b.clock() - 0.2).abs() < 1e-15);
        let st2 = b.state().unwrap().clone();
        assert_eq!((st.w, st.s, st.a), (st2.w, st2.s, st2.a));
    }

    #[test]
    fn rejects_out_of_range_bias() {
        let mut b = quiet_bench();
        assert_eq!(b.set_bias(12.0), Err(Error::BiasOutOfRange(12.0)));
        assert_eq!(b.clock(), 0.0);
    }

    #[test]
    fn wait_semantics() {
        let mut b = quiet_bench();
        b.wait(0.0).unwrap();
        assert_eq!(b.clock(), 0.0);
        assert_eq!(b.wait(-1.0), Err(Error::InvalidDuration(-1.0)));
    }

    #[test]
    fn back_to_back_sweeps_are_identical() {
        let mut b = Testbench::new(
            DeviceParams::default().without_chaos(),
            SweepConfig::default(),
            Timing {
                sweep_duration: 0.0,
                command_latency: 0.1,
            },
        )
        .unwrap();
        let r1 = b.sweep().unwrap();
        let r2 = b.sweep().unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn sweeps_advance_clock_and_log() {
        let mut b = quiet_bench();
        for _ in 0..7 {
            b.sweep().unwrap();
        }
        assert!((b.clock() - 3.5).abs() < 1e-12);
        assert_eq!(b.log().len(), 7);
    }

    #[test]
    fn csv_round_trip() {
        let mut b = quiet_bench();
        b.set_bias(-3.3).unwrap();
        b.wait(2.0).unwrap();
        b.sweep().unwrap();
        b.sweep().unwrap();
        let csv = log_to_csv(b.log());
        assert!(csv.starts_with("t_s,bias_v,zc11,zc12,zc21,zc22\n"));
        assert!(!csv.contains('\r'));
        assert_eq!(log_from_csv(&csv).unwrap(), b.log());
    }

    #[test]
    fn calibration_hits_target() {
        let p = DeviceParams::default();
        let cfg = SweepConfig::default();
        let cal = calibrate(&p, &cfg, 15_000.0).unwrap();
        let st = DeviceState::fresh(&cal);
        let r = read_device(&st, &cal, &cfg, &cfg.frequencies(), 0.0).unwrap();
        assert!((r.zc.zc22 - 15_000.0).abs() < 1e-6);
    }
}
