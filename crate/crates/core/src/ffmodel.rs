//! Phenomenological state-space model of the ferrofluid two-port.
//!
//! Three compartments drive the observable impedance:
//!
//! * `w`, the long-term memristive state in `[0, 1]`, moved by a saturating
//!   drive `tanh(v / 1 V)` through the window `4w(1 - w)` and slowly relaxing
//!   towards `w_eq`;
//! * `s`, a leaky short-term trace that follows the bias with rate `s_relax`;
//! * `a`, fatigue, accumulated by every stimulus above the recovery
//!   threshold and removed by holding the bias at or below it. Fatigue scales
//!   the drive on `w` by `1 / (1 + 10 a)`.
//!
//! A small ensemble of logistic maps is advanced on every integration
//! sub-step and its centred mean is added to `ds/dt`, scaled by `chaos_eps`.
//!
//! The RF side is a T network: one arm per port and a shared shunt, all with
//! the same RC corner so each element scales with a single resistance factor.
//! Port 2 elements carry `exp(k_w (w - w_eq) + k_s s)`; the port 1 arm carries
//! `exp(k_w (w - w_eq) - k_q s^2)`, which is what pinches the port 1 loop.
//! Negative bias lowers `Z^C_22`, positive bias raises it.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid_param, Error, Result};
use crate::rf::TwoPort;

/// Generator limit in volts.
pub const MAX_BIAS: f64 = 10.0;
/// Voltage scale of the saturating drive.
pub const DRIVE_V0: f64 = 1.0;
/// Fatigue coupling in `g(a) = 1 / (1 + KAPPA a)`.
pub const FATIGUE_KAPPA: f64 = 10.0;
/// Bias used by [`restore`].
pub const RESTORE_BIAS: f64 = -10.0;

const CHAOS_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceParams {
    pub w_gain: f64,
    pub w_relax: f64,
    pub w_eq: f64,
    pub s_gain: f64,
    pub s_relax: f64,
    pub fatigue_gain: f64,
    pub fatigue_recovery_v: f64,
    pub fatigue_recovery_rate: f64,
    pub chaos_eps: f64,
    pub chaos_r: f64,
    pub n_osc: usize,
    pub asym: f64,
    /// Port arm resistance at `w = w_eq, s = 0` (ohm).
    pub r_arm: f64,
    /// Shared shunt resistance at `w = w_eq, s = 0` (ohm).
    pub r_shunt: f64,
    /// RC corner frequency shared by every element (Hz).
    pub f_corner: f64,
    pub k_w: f64,
    pub k_s: f64,
    pub k_q: f64,
    /// Common-mode readout shift per unit fatigue.
    pub k_a: f64,
    pub seed: u64,
    /// Fixed integration step (s).
    pub dt_int: f64,
}

impl Default for DeviceParams {
    fn default() -> Self {
        Self {
            w_gain: 3e-4,
            w_relax: 1e-5,
            w_eq: 0.5,
            s_gain: 0.02,
            s_relax: 0.2,
            fatigue_gain: 5e-7,
            fatigue_recovery_v: -9.5,
            fatigue_recovery_rate: 0.1,
            chaos_eps: 1.0,
            chaos_r: 3.99,
            n_osc: 8,
            asym: 0.1,
            r_arm: 162.26879157711699,
            r_shunt: 31.5,
            f_corner: 3e9,
            k_w: 0.6,
            k_s: 4e-4,
            k_q: 0.255,
            k_a: 2.0,
            seed: 1,
            dt_int: 0.01,
        }
    }
}

macro_rules! param_keys {
    ($($name:ident: $kind:ident),* $(,)?) => {
        const PARAM_KEYS: &[&str] = &[$(stringify!($name)),*];

        impl DeviceParams {
            fn set_key(&mut self, key: &str, value: &str) -> Result<bool> {
                match key {
                    $(stringify!($name) => {
                        self.$name = param_keys!(@parse $kind, key, value)?;
                        Ok(true)
                    })*
                    _ => Ok(false),
                }
            }

            fn key_values(&self) -> Vec<(&'static str, String)> {
                vec![$((stringify!($name), format!("{}", self.$name))),*]
            }
        }
    };
    (@parse f64, $key:expr, $value:expr) => {
        $value.parse::<f64>().map_err(|_| invalid_param($key, format!("`{}` is not a number", $value)))
    };
    (@parse usize, $key:expr, $value:expr) => {
        $value.parse::<usize>().map_err(|_| invalid_param($key, format!("`{}` is not a count", $value)))
    };
    (@parse u64, $key:expr, $value:expr) => {
        $value.parse::<u64>().map_err(|_| invalid_param($key, format!("`{}` is not an unsigned integer", $value)))
    };
}

param_keys! {
    w_gain: f64,
    w_relax: f64,
    w_eq: f64,
    s_gain: f64,
    s_relax: f64,
    fatigue_gain: f64,
    fatigue_recovery_v: f64,
    fatigue_recovery_rate: f64,
    chaos_eps: f64,
    chaos_r: f64,
    n_osc: usize,
    asym: f64,
    r_arm: f64,
    r_shunt: f64,
    f_corner: f64,
    k_w: f64,
    k_s: f64,
    k_q: f64,
    k_a: f64,
    seed: u64,
    dt_int: f64,
}

impl DeviceParams {
    /// Same parameters with the chaotic perturbation switched off.
    pub fn without_chaos(&self) -> Self {
        Self {
            chaos_eps: 0.0,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("w_gain", self.w_gain),
            ("w_relax", self.w_relax),
            ("s_gain", self.s_gain),
            ("s_relax", self.s_relax),
            ("fatigue_gain", self.fatigue_gain),
            ("fatigue_recovery_rate", self.fatigue_recovery_rate),
            ("r_arm", self.r_arm),
            ("r_shunt", self.r_shunt),
            ("f_corner", self.f_corner),
            ("k_w", self.k_w),
            ("dt_int", self.dt_int),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid_param(name, "must be finite and > 0"));
            }
        }
        if self.s_relax <= 10.0 * self.w_relax {
            return Err(invalid_param("s_relax", "must exceed 10 * w_relax"));
        }
        if !(0.0..=1.0).contains(&self.w_eq) {
            return Err(invalid_param("w_eq", "must lie in [0, 1]"));
        }
        if !(self.chaos_eps >= 0.0 && self.chaos_eps.is_finite()) {
            return Err(invalid_param("chaos_eps", "must be >= 0"));
        }
        if self.chaos_eps > 0.0 && !(self.chaos_r > 3.57 && self.chaos_r <= 4.0) {
            return Err(invalid_param("chaos_r", "must lie in (3.57, 4] when chaos is on"));
        }
        if self.n_osc == 0 {
            return Err(invalid_param("n_osc", "need at least one oscillator"));
        }
        if !(0.0..=0.2).contains(&self.asym) {
            return Err(invalid_param("asym", "must lie in [0, 0.2]"));
        }
        if !(self.fatigue_recovery_v < 0.0 && self.fatigue_recovery_v >= -MAX_BIAS) {
            return Err(invalid_param("fatigue_recovery_v", "must lie in [-10, 0)"));
        }
        if !(self.k_s >= 0.0 && self.k_q >= 0.0 && self.k_a >= 0.0) {
            return Err(invalid_param("k_s", "readout couplings must be >= 0"));
        }
        if self.dt_int > 0.01 {
            return Err(invalid_param("dt_int", "must not exceed 10 ms"));
        }
        Ok(())
    }

    /// Bound on `|s|` for any admissible bias.
    pub fn s_max(&self) -> f64 {
        self.s_gain * MAX_BIAS / self.s_relax
    }

    /// Parses `key = value` lines. Missing keys fall back to the defaults
    /// and are returned so the caller can report them.
    pub fn from_kv_str(text: &str) -> Result<(Self, Vec<String>)> {
        let mut params = Self::default();
        let mut seen = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !params.set_key(key, value)? {
                return Err(Error::Parse(format!("line {}: unknown key `{key}`", lineno + 1)));
            }
            seen.insert(key.to_string(), ());
        }
        let defaulted: Vec<String> = PARAM_KEYS
            .iter()
            .filter(|k| !seen.contains_key(**k))
            .map(|k| k.to_string())
            .collect();
        for k in &defaulted {
            log::info!("device parameter `{k}` not set, using default");
        }
        params.validate()?;
        Ok((params, defaulted))
    }

    pub fn to_kv_string(&self) -> String {
        let mut out = String::from("# ferrolab device parameters\n");
        for (k, v) in self.key_values() {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceState {
    pub w: f64,
    pub s: f64,
    pub a: f64,
    pub c: Vec<f64>,
    pub t: f64,
}

impl DeviceState {
    /// Equilibrium state with the chaos ensemble seeded from `params.seed`.
    pub fn fresh(params: &DeviceParams) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let c = (0..params.n_osc.max(1))
            .map(|_| rng.gen_range(0.05..0.95))
            .collect();
        Self {
            w: params.w_eq,
            s: 0.0,
            a: 0.0,
            c,
            t: 0.0,
        }
    }

    /// Integrates the state forward in place; see [`step`].
    pub fn advance(&mut self, params: &DeviceParams, v: f64, dt: f64) -> Result<()> {
        check_bias(v)?;
        if !(dt >= 0.0) || !dt.is_finite() {
            return Err(Error::InvalidDuration(dt));
        }
        if dt == 0.0 {
            return Ok(());
        }
        let n = (dt / params.dt_int).ceil().max(1.0) as usize;
        let h = dt / n as f64;
        let drive = params.w_gain * (v / DRIVE_V0).tanh();
        let s_in = params.s_gain * v;
        let s_max = params.s_max();
        let fatiguing = v > params.fatigue_recovery_v;
        let fatigue_rate = params.fatigue_gain * v.abs();
        let inv_osc = 1.0 / self.c.len() as f64;
        for _ in 0..n {
            let mut centred = 0.0;
            for c in self.c.iter_mut() {
                *c = (params.chaos_r * *c * (1.0 - *c)).clamp(CHAOS_FLOOR, 1.0 - CHAOS_FLOOR);
                centred += 2.0 * *c - 1.0;
            }
            let inject = params.chaos_eps * centred * inv_osc;

            let g = 1.0 / (1.0 + FATIGUE_KAPPA * self.a);
            let window = 4.0 * self.w * (1.0 - self.w);
            let dw = g * drive * window - params.w_relax * (self.w - params.w_eq);
            let ds = s_in - params.s_relax * self.s + inject;
            let da = if fatiguing {
                fatigue_rate
            } else {
                -params.fatigue_recovery_rate * self.a
            };
            self.w = (self.w + h * dw).clamp(0.0, 1.0);
            self.s = (self.s + h * ds).clamp(-s_max, s_max);
            self.a = (self.a + h * da).clamp(0.0, 1.0);
        }
        self.t += dt;
        Ok(())
    }

    /// Resistance multipliers (port 1 arm, port 2 elements).
    pub fn scale_factors(&self, params: &DeviceParams) -> (f64, f64) {
        let dw = params.k_w * (self.w - params.w_eq) + params.k_a * self.a;
        let m1 = (dw - params.k_q * self.s * self.s).exp();
        let m2 = (dw + params.k_s * self.s).exp();
        (m1, m2)
    }
}

pub fn check_bias(v: f64) -> Result<()> {
    if !(v.abs() <= MAX_BIAS) {
        return Err(Error::BiasOutOfRange(v));
    }
    Ok(())
}

/// Advances `state` by `dt` seconds at constant bias `v`, sub-stepping with
/// the fixed integration step.
pub fn step(state: &DeviceState, params: &DeviceParams, v: f64, dt: f64) -> Result<DeviceState> {
    let mut next = state.clone();
    next.advance(params, v, dt)?;
    Ok(next)
}

/// Holds the restoration bias for `duration` seconds.
pub fn restore(state: &DeviceState, params: &DeviceParams, duration: f64) -> Result<DeviceState> {
    if !(duration > 0.0) {
        return Err(Error::InvalidDuration(duration));
    }
    step(state, params, RESTORE_BIAS, duration)
}

/// Holds zero bias for `duration` seconds.
pub fn settle(state: &DeviceState, params: &DeviceParams, duration: f64) -> Result<DeviceState> {
    step(state, params, 0.0, duration)
}

/// Lumped elements of the T network for the current state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortNetwork {
    pub r_port1: f64,
    pub r_port2: f64,
    pub r_shunt: f64,
    /// Shared RC time constant (s).
    pub tau: f64,
    /// Transfer asymmetry: `Z21 = (1 - asym) Z12`.
    pub asym: f64,
}

impl PortNetwork {
    pub fn of(state: &DeviceState, params: &DeviceParams) -> Self {
        let (m1, m2) = state.scale_factors(params);
        Self {
            r_port1: params.r_arm * m1,
            r_port2: params.r_arm * (1.0 + params.asym) * m2,
            r_shunt: params.r_shunt * m2,
            tau: 1.0 / (2.0 * PI * params.f_corner),
            asym: params.asym,
        }
    }

    pub fn impedance_at(&self, freq: f64) -> TwoPort {
        let h = Complex64::new(1.0, 0.0) / Complex64::new(1.0, 2.0 * PI * freq * self.tau);
        let za = h * self.r_port1;
        let zb = h * self.r_port2;
        let zc = h * self.r_shunt;
        TwoPort::new(za + zc, zc, zc * (1.0 - self.asym), zb + zc)
    }
}

/// Impedance matrix of the device at `freq` (Hz).
pub fn network_at(state: &DeviceState, params: &DeviceParams, freq: f64) -> TwoPort {
    PortNetwork::of(state, params).impedance_at(freq)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet() -> DeviceParams {
        DeviceParams::default().without_chaos()
    }

    #[test]
    fn defaults_are_valid() {
        DeviceParams::default().validate().unwrap();
    }

    #[test]
    fn equilibrium_is_a_fixed_point() {
        let p = quiet();
        let st = DeviceState::fresh(&p);
        let next = step(&st, &p, 0.0, 100.0).unwrap();
        assert!((next.w - st.w).abs() < 1e-9);
        assert!((next.s - st.s).abs() < 1e-9);
        assert!((next.a - st.a).abs() < 1e-9);
        assert_eq!(next.t, 100.0);
    }

    #[test]
    fn zero_duration_is_identity() {
        let p = DeviceParams::default();
        let mut st = DeviceState::fresh(&p);
        st.w = 0.3;
        st.s = 0.2;
        st.a = 0.1;
        assert_eq!(step(&st, &p, -7.0, 0.0).unwrap(), st);
    }

    #[test]
    fn rejects_bad_bias_and_duration() {
        let p = quiet();
        let st = DeviceState::fresh(&p);
        assert_eq!(step(&st, &p, 10.5, 1.0), Err(Error::BiasOutOfRange(10.5)));
        assert_eq!(step(&st, &p, 1.0, -1.0), Err(Error::InvalidDuration(-1.0)));
    }

    #[test]
    fn restore_floor_and_rejections() {
        let p = quiet();
        let st = DeviceState::fresh(&p);
        let r = restore(&st, &p, 60.0).unwrap();
        assert_eq!(r.a, 0.0);
        assert_eq!(restore(&st, &p, 0.0), Err(Error::InvalidDuration(0.0)));
    }

    #[test]
    fn settle_zero_is_identity() {
        let p = quiet();
        let mut st = DeviceState::fresh(&p);
        st.s = 0.3;
        assert_eq!(settle(&st, &p, 0.0).unwrap(), st);
    }

    #[test]
    fn symmetric_network_is_reciprocal() {
        let p = DeviceParams {
            asym: 0.0,
            ..quiet()
        };
        let mut st = DeviceState::fresh(&p);
        st.w = 0.37;
        st.s = -0.2;
        for f in [1e6, 1e8, 3e9, 6e9] {
            let z = network_at(&st, &p, f);
            assert_eq!(z.p12, z.p21);
        }
    }

    #[test]
    fn kv_round_trip_and_defaults() {
        let p = DeviceParams {
            seed: 99,
            chaos_eps: 0.25,
            ..DeviceParams::default()
        };
        let (back, defaulted) = DeviceParams::from_kv_str(&p.to_kv_string()).unwrap();
        assert_eq!(back, p);
        assert!(defaulted.is_empty());

        let (partial, defaulted) = DeviceParams::from_kv_str("# hi\nseed = 5\n").unwrap();
        assert_eq!(partial.seed, 5);
        assert_eq!(defaulted.len(), PARAM_KEYS.len() - 1);

        assert!(DeviceParams::from_kv_str("bogus = 1").is_err());
        assert!(DeviceParams::from_kv_str("w_gain = abc").is_err());
        assert!(DeviceParams::from_kv_str("s_relax = 0.00001").is_err());
    }
}
