//! Two-port RF mathematics: S/Z conversion, sweep containers and the
//! collapsed impedance indicator.
//!
//! The indicator `Z^C_xy` is the plain sum of `|Z_xy(f)|` over every point of
//! the sweep. It reduces each read-out to four real numbers.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// `|Delta_S|` (or the normalized Z-side determinant) at or below this is
/// treated as singular.
pub const SINGULAR_EPS: f64 = 1e-12;

/// A 2x2 complex matrix in port order (11, 12, 21, 22). Used for both
/// scattering and impedance parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPort {
    pub p11: Complex64,
    pub p12: Complex64,
    pub p21: Complex64,
    pub p22: Complex64,
}

impl TwoPort {
    pub fn new(p11: Complex64, p12: Complex64, p21: Complex64, p22: Complex64) -> Self {
        Self { p11, p12, p21, p22 }
    }

    pub fn real(p11: f64, p12: f64, p21: f64, p22: f64) -> Self {
        Self::new(p11.into(), p12.into(), p21.into(), p22.into())
    }

    pub fn as_array(&self) -> [Complex64; 4] {
        [self.p11, self.p12, self.p21, self.p22]
    }

    fn max_abs_diff(&self, other: &TwoPort) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise distance relative to the largest entry of `self`.
    pub fn rel_diff(&self, other: &TwoPort) -> f64 {
        let scale = self.as_array().iter().map(|c| c.norm()).fold(0.0, f64::max);
        let d = self.max_abs_diff(other);
        if scale > 0.0 {
            d / scale
        } else {
            d
        }
    }
}

/// Impedance parameters from scattering parameters, referenced to `z0`.
pub fn z_from_s(s: &TwoPort, z0: f64) -> Result<TwoPort> {
    let one = Complex64::new(1.0, 0.0);
    let s21s12 = s.p21 * s.p12;
    let delta = (one - s.p11) * (one - s.p22) - s21s12;
    if delta.norm() <= SINGULAR_EPS {
        return Err(Error::SingularConversion {
            det: delta.norm(),
            index: None,
        });
    }
    let z11 = ((one + s.p11) * (one - s.p22) + s21s12) / delta * z0;
    let z12 = (2.0 * s.p12) / delta * z0;
    let z21 = (2.0 * s.p21) / delta * z0;
    let z22 = ((one - s.p11) * (one + s.p22) + s21s12) / delta * z0;
    Ok(TwoPort::new(z11, z12, z21, z22))
}

/// Scattering parameters from an impedance matrix: `S = (Z - z0 I)(Z + z0 I)^-1`.
pub fn s_from_z(z: &TwoPort, z0: f64) -> Result<TwoPort> {
    let z12z21 = z.p12 * z.p21;
    let det = (z.p11 + z0) * (z.p22 + z0) - z12z21;
    if det.norm() <= SINGULAR_EPS * z0 * z0 {
        return Err(Error::SingularConversion {
            det: det.norm(),
            index: None,
        });
    }
    let s11 = ((z.p11 - z0) * (z.p22 + z0) - z12z21) / det;
    let s12 = (2.0 * z0 * z.p12) / det;
    let s21 = (2.0 * z0 * z.p21) / det;
    let s22 = ((z.p11 + z0) * (z.p22 - z0) - z12z21) / det;
    Ok(TwoPort::new(s11, s12, s21, s22))
}

/// Collapsed indicator: the sum of all magnitude samples.
pub fn collapse(z_mags: &[f64]) -> Result<f64> {
    if z_mags.is_empty() {
        return Err(Error::EmptySweep);
    }
    Ok(z_mags.iter().sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub f_start: f64,
    pub f_stop: f64,
    pub n_points: usize,
    /// Informational only; the read-out does not perturb the device.
    pub power_dbm: f64,
    pub z0: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            f_start: 10e6,
            f_stop: 6e9,
            n_points: 101,
            power_dbm: 0.0,
            z0: 50.0,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.f_start > 0.0 && self.f_stop > self.f_start) {
            return Err(Error::Precondition(format!(
                "sweep needs f_stop > f_start > 0 (got {}..{})",
                self.f_start, self.f_stop
            )));
        }
        if self.n_points < 2 {
            return Err(Error::Precondition("sweep needs at least 2 points".into()));
        }
        if !(self.z0 > 0.0) {
            return Err(Error::Precondition("z0 must be positive".into()));
        }
        Ok(())
    }

    /// Linear frequency grid, endpoints included.
    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.n_points;
        let span = self.f_stop - self.f_start;
        (0..n)
            .map(|i| self.f_start + span * i as f64 / (n - 1) as f64)
            .collect()
    }
}

/// The four collapsed indicators `Z^C_11, Z^C_12, Z^C_21, Z^C_22` in ohms.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Collapsed {
    pub zc11: f64,
    pub zc12: f64,
    pub zc21: f64,
    pub zc22: f64,
}

impl Collapsed {
    pub fn as_array(&self) -> [f64; 4] {
        [self.zc11, self.zc12, self.zc21, self.zc22]
    }

    pub fn get(&self, ind: Indicator) -> f64 {
        match ind {
            Indicator::Zc11 => self.zc11,
            Indicator::Zc12 => self.zc12,
            Indicator::Zc21 => self.zc21,
            Indicator::Zc22 => self.zc22,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Indicator {
    Zc11,
    Zc12,
    Zc21,
    Zc22,
}

impl Indicator {
    pub fn name(self) -> &'static str {
        match self {
            Indicator::Zc11 => "ZC11",
            Indicator::Zc12 => "ZC12",
            Indicator::Zc21 => "ZC21",
            Indicator::Zc22 => "ZC22",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "ZC11" => Some(Indicator::Zc11),
            "ZC12" => Some(Indicator::Zc12),
            "ZC21" => Some(Indicator::Zc21),
            "ZC22" => Some(Indicator::Zc22),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub freqs: Vec<f64>,
    pub s: Vec<TwoPort>,
    pub z: Vec<TwoPort>,
    pub zc: Collapsed,
    pub t: f64,
}

impl SweepResult {
    /// Derives Z and the collapsed indicators from measured S-parameters.
    pub fn from_s(freqs: Vec<f64>, s: Vec<TwoPort>, z0: f64, t: f64) -> Result<Self> {
        if freqs.is_empty() {
            return Err(Error::EmptySweep);
        }
        if freqs.len() != s.len() {
            return Err(Error::Precondition(format!(
                "{} frequencies but {} S-parameter points",
                freqs.len(),
                s.len()
            )));
        }
        let z = s
            .iter()
            .enumerate()
            .map(|(i, sp)| {
                z_from_s(sp, z0).map_err(|e| match e {
                    Error::SingularConversion { det, .. } => Error::SingularConversion {
                        det,
                        index: Some(i),
                    },
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mags = |f: fn(&TwoPort) -> Complex64| -> Vec<f64> { z.iter().map(|m| f(m).norm()).collect() };
        let zc = Collapsed {
            zc11: collapse(&mags(|m| m.p11))?,
            zc12: collapse(&mags(|m| m.p12))?,
            zc21: collapse(&mags(|m| m.p21))?,
            zc22: collapse(&mags(|m| m.p22))?,
        };
        Ok(Self { freqs, s, z, zc, t })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn matched_load_is_z0_on_the_diagonal() {
        let z = z_from_s(&TwoPort::real(0.0, 0.0, 0.0, 0.0), 50.0).unwrap();
        assert_eq!(z, TwoPort::real(50.0, 0.0, 0.0, 50.0));
    }

    #[test]
    fn full_transmission_is_singular() {
        let err = z_from_s(&TwoPort::real(0.0, 1.0, 1.0, 0.0), 50.0).unwrap_err();
        assert!(matches!(err, Error::SingularConversion { .. }));
    }

    #[test]
    fn half_reflection_on_port_one() {
        // (1.5 * 1 + 0) / 0.5 * 50 = 150
        let z = z_from_s(&TwoPort::real(0.5, 0.0, 0.0, 0.0), 50.0).unwrap();
        assert_eq!(z, TwoPort::real(150.0, 0.0, 0.0, 50.0));
    }

    #[test]
    fn inverse_of_matched_load() {
        let s = s_from_z(&TwoPort::real(50.0, 0.0, 0.0, 50.0), 50.0).unwrap();
        assert_eq!(s, TwoPort::real(0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn negative_reference_is_singular() {
        let z = TwoPort::new(c(-50.0), c(0.0), c(0.0), c(-50.0));
        assert!(matches!(
            s_from_z(&z, 50.0),
            Err(Error::SingularConversion { .. })
        ));
    }

    #[test]
    fn collapse_examples() {
        assert_eq!(collapse(&[100.0; 101]).unwrap(), 10_100.0);
        assert_eq!(collapse(&[42.5]).unwrap(), 42.5);
        assert_eq!(collapse(&[]), Err(Error::EmptySweep));
    }

    #[test]
    fn default_grid() {
        let cfg = SweepConfig::default();
        let f = cfg.frequencies();
        assert_eq!(f.len(), 101);
        assert_eq!(f[0], 10e6);
        assert_eq!(f[100], 6e9);
        cfg.validate().unwrap();
        let bad = SweepConfig {
            n_points: 1,
            ..SweepConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn singular_point_reports_index() {
        let freqs = vec![1.0, 2.0];
        let s = vec![
            TwoPort::real(0.0, 0.0, 0.0, 0.0),
            TwoPort::real(0.0, 1.0, 1.0, 0.0),
        ];
        let err = SweepResult::from_s(freqs, s, 50.0, 0.0).unwrap_err();
        assert_eq!(
            err,
            Error::SingularConversion {
                det: 0.0,
                index: Some(1)
            }
        );
    }
}
