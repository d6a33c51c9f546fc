//! Canned experiment runners on an emulated bench.
//!
//! Every runner drives the bench through the same generator/VNA commands a
//! script would issue, so the bench log doubles as the raw data record.

pub mod chaos;
pub mod dataset;
pub mod digits;
pub mod hysteresis;
pub mod memory;
pub mod schedule;

pub use chaos::{chaos_probe, ChaosProbeRun};
pub use dataset::{pixel_index, Dataset, DigitBitmap, PIXELS, SIDE};
pub use digits::{
    classify_inmemory, differentiation_run, dynamics_reduction_run, hold_noise_sigma, progressive_adaptation,
    Classification, DifferentiationRun, DynamicsReductionRun, ProgressiveRun, CLASSIFY_SETPOINT,
};
pub use hysteresis::{hysteresis_sweep, HysteresisConfig, HysteresisRun};
pub use memory::{memory_store, pulse_memory, MemoryConfig, MemoryLevel, MemoryRun, PulseConfig, PulseRun};
pub use schedule::{
    constant_weights, offset_ramp, serialize_digit, stream, weights_for, zero_offsets, Segment, StimulusSchedule,
};

use std::fmt::Write as _;

/// Renders a header and rows of numbers as CSV.
pub(crate) fn table_csv(header: &str, rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = String::new();
    out.push_str(header);
    out.push('\n');
    for row in rows {
        let line = row.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
        let _ = writeln!(out, "{line}");
    }
    out
}
