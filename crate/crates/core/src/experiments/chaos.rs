//! Alternating set-point drives used to expose the chaotic residue of the
//! device response.

use crate::control::{drive_to_setpoint, SetpointSpec};
use crate::error::{Error, Result};
use crate::instruments::{LogEntry, Testbench};
use crate::rf::Indicator;

use super::table_csv;

#[derive(Debug, Clone, PartialEq)]
pub struct ChaosProbeRun {
    /// Every reading taken during the probe.
    pub entries: Vec<LogEntry>,
    /// Ticks used by each drive: high, low, high, low, ...
    pub ticks: Vec<usize>,
}

impl ChaosProbeRun {
    pub fn zc22(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.zc.zc22).collect()
    }

    pub fn summary_csv(&self) -> String {
        table_csv(
            "drive,target,ticks",
            self.ticks
                .iter()
                .enumerate()
                .map(|(i, &t)| vec![i as f64, (i % 2) as f64, t as f64]),
        )
    }
}

/// `cycles` rounds of: drive `Z^C_22` up to `high`, pause, down to `low`,
/// pause. Tolerance 1 ohm, fine drive.
pub fn chaos_probe(bench: &mut Testbench, low: f64, high: f64, pause: f64, cycles: usize) -> Result<ChaosProbeRun> {
    if !(low < high) {
        return Err(Error::Precondition(format!("need low < high (got {low}, {high})")));
    }
    if !(pause >= 0.0) {
        return Err(Error::InvalidDuration(pause));
    }
    let start = bench.log().len();
    let up = SetpointSpec::new(Indicator::Zc22, high, 1.0);
    let down = SetpointSpec::new(Indicator::Zc22, low, 1.0);
    let mut ticks = Vec::with_capacity(2 * cycles);
    for _ in 0..cycles {
        ticks.push(drive_to_setpoint(bench, &up)?);
        bench.wait(pause)?;
        ticks.push(drive_to_setpoint(bench, &down)?);
        bench.wait(pause)?;
    }
    Ok(ChaosProbeRun {
        entries: bench.log()[start..].to_vec(),
        ticks,
    })
}
