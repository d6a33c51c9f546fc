//! Bang-bang impedance programming: set-point drives, the charge reset used
//! before in-memory classification, and the two-point reset used for
//! reservoir computing.
//!
//! One tick is: read, decide, command the generator, wait `tick` seconds.
//! With the default bench timing this is 0.5 s + 0.1 s + 0.1 s = 0.7 s.

use crate::error::{Error, Result};
use crate::instruments::Testbench;
use crate::rf::Indicator;

pub const DEFAULT_TICK: f64 = 0.1;
pub const DEFAULT_MAX_TICKS: usize = 20_000;
pub const CHARGE_BIAS: f64 = 10.0;
pub const FINE_BIAS: f64 = 3.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TolMode {
    /// Stop when `|zc - target| <= tol`; drive in whichever direction is needed.
    Bilateral,
    /// Pick the approach side from the first reading, drive one way only and
    /// stop at the first sample within `tol` of the target or past it.
    Unilateral,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SetpointSpec {
    pub indicator: Indicator,
    pub target: f64,
    pub tol: f64,
    pub mode: TolMode,
    pub v_up: f64,
    pub v_down: f64,
    pub tick: f64,
    pub max_ticks: usize,
}

impl SetpointSpec {
    pub fn new(indicator: Indicator, target: f64, tol: f64) -> Self {
        Self {
            indicator,
            target,
            tol,
            mode: TolMode::Unilateral,
            v_up: FINE_BIAS,
            v_down: -FINE_BIAS,
            tick: DEFAULT_TICK,
            max_ticks: DEFAULT_MAX_TICKS,
        }
    }

    pub fn with_mode(mut self, mode: TolMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_drive(mut self, v_up: f64, v_down: f64) -> Self {
        self.v_up = v_up;
        self.v_down = v_down;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Precondition("tolerance must be positive".into()));
        }
        if !(self.v_up > 0.0 && self.v_down < 0.0) {
            return Err(Error::Precondition("need v_up > 0 > v_down".into()));
        }
        if self.max_ticks == 0 {
            return Err(Error::Precondition("max_ticks must be at least 1".into()));
        }
        if !(self.tick >= 0.0) {
            return Err(Error::InvalidDuration(self.tick));
        }
        Ok(())
    }
}

/// Drives the chosen indicator to the set point. Returns the number of drive
/// ticks used; the bias is left at 0 V on success and on failure.
pub fn drive_to_setpoint(bench: &mut Testbench, spec: &SetpointSpec) -> Result<usize> {
    spec.validate()?;
    let mut zc = bench.measure()?.get(spec.indicator);
    let from_below = zc < spec.target;
    let accept = |zc: f64| -> bool {
        match spec.mode {
            TolMode::Bilateral => (zc - spec.target).abs() <= spec.tol,
            TolMode::Unilateral if from_below => zc >= spec.target - spec.tol,
            TolMode::Unilateral => zc <= spec.target + spec.tol,
        }
    };
    if (zc - spec.target).abs() <= spec.tol {
        bench.set_bias(0.0)?;
        return Ok(0);
    }
    let mut ticks = 0;
    while !accept(zc) {
        if ticks == spec.max_ticks {
            bench.set_bias(0.0)?;
            return Err(Error::SetpointUnreachable {
                target: spec.target,
                last: zc,
                ticks,
            });
        }
        let up = match spec.mode {
            TolMode::Bilateral => zc < spec.target,
            TolMode::Unilateral => from_below,
        };
        bench.set_bias(if up { spec.v_up } else { spec.v_down })?;
        bench.wait(spec.tick)?;
        zc = bench.measure()?.get(spec.indicator);
        ticks += 1;
    }
    bench.set_bias(0.0)?;
    Ok(ticks)
}

/// Charge-phase reset on `Z^C_22` at +/-10 V.
pub fn charge_reset(bench: &mut Testbench, target: f64, tol: f64) -> Result<usize> {
    let spec = SetpointSpec::new(Indicator::Zc22, target, tol).with_drive(CHARGE_BIAS, -CHARGE_BIAS);
    drive_to_setpoint(bench, &spec)
}

/// Two-point reset: drive `Z^C_22` down to `low` and up to `high` at +/-10 V,
/// then approach `star` from above with the fine +/-3.3 V drive. Returns the
/// ticks used by each leg.
pub fn prc_reset(bench: &mut Testbench, low: f64, high: f64, star: f64, tol: f64) -> Result<[usize; 3]> {
    if !(low < star && star < high) {
        return Err(Error::Precondition(format!(
            "need low < star < high (got {low}, {star}, {high})"
        )));
    }
    let coarse = |target| SetpointSpec::new(Indicator::Zc22, target, tol).with_drive(CHARGE_BIAS, -CHARGE_BIAS);
    let t_low = drive_to_setpoint(bench, &coarse(low))?;
    let t_high = drive_to_setpoint(bench, &coarse(high))?;
    let fine = SetpointSpec::new(Indicator::Zc22, star, tol);
    let t_star = drive_to_setpoint(bench, &fine)?;
    Ok([t_low, t_high, t_star])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffmodel::DeviceParams;

    fn quiet_bench() -> Testbench {
        Testbench::with_params(DeviceParams::default().without_chaos()).unwrap()
    }

    #[test]
    fn already_there_uses_no_ticks() {
        let mut b = quiet_bench();
        let zc = b.measure().unwrap().zc22;
        let spec = SetpointSpec::new(Indicator::Zc22, zc + 0.5, 1.0);
        assert_eq!(drive_to_setpoint(&mut b, &spec).unwrap(), 0);
        assert_eq!(b.bias(), 0.0);
        assert!(b.log().iter().all(|e| e.bias == 0.0));
    }

    #[test]
    fn unreachable_target_errors() {
        let mut b = quiet_bench();
        let zc = b.measure().unwrap().zc22;
        let mut spec = SetpointSpec::new(Indicator::Zc22, zc + 1e9, 1.0);
        spec.max_ticks = 50;
        match drive_to_setpoint(&mut b, &spec) {
            Err(Error::SetpointUnreachable { ticks, .. }) => assert_eq!(ticks, 50),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(b.bias(), 0.0);
    }

    #[test]
    fn bilateral_reaches_target_above() {
        let mut b = quiet_bench();
        let zc = b.measure().unwrap().zc22;
        let spec = SetpointSpec::new(Indicator::Zc22, zc + 150.0, 2.0).with_mode(TolMode::Bilateral);
        drive_to_setpoint(&mut b, &spec).unwrap();
        let last = b.log().last().unwrap().zc.zc22;
        assert!((last - spec.target).abs() <= 2.0, "{last}");
    }

    #[test]
    fn charge_reset_from_above_uses_negative_branch() {
        let mut b = quiet_bench();
        let zc = b.measure().unwrap().zc22;
        let ticks = charge_reset(&mut b, zc - 100.0, 1.0).unwrap();
        assert!(ticks > 0);
        assert!(b.log().iter().any(|e| e.bias == -CHARGE_BIAS));
        assert!(b.log().iter().all(|e| e.bias <= 0.0));
    }

    #[test]
    fn prc_reset_rejects_bad_ordering() {
        let mut b = quiet_bench();
        assert!(matches!(
            prc_reset(&mut b, 16_400.0, 16_450.0, 16_400.0, 2.5),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn invalid_specs() {
        let mut b = quiet_bench();
        let mut spec = SetpointSpec::new(Indicator::Zc22, 1.0, 0.0);
        assert!(drive_to_setpoint(&mut b, &spec).is_err());
        spec.tol = 1.0;
        spec.v_down = 1.0;
        assert!(drive_to_setpoint(&mut b, &spec).is_err());
    }
}
