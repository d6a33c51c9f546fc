//! Browser front end for the emulated bench.
//!
//! Every operation has a plain Rust form returning a serializable struct
//! and a `#[wasm_bindgen]` wrapper that hands JSON to the page.

use ferrolab_core::experiments::hysteresis::{hysteresis_sweep, HysteresisConfig};
use ferrolab_core::ffmodel::DeviceParams;
use ferrolab_core::instruments::Testbench;
use ferrolab_core::rf::{z_from_s, TwoPort};
use ferrolab_core::script::{check, parse, CsvSink, Interpreter};
use num_complex::Complex64;
use serde::Serialize;
use wasm_bindgen::prelude::wasm_bindgen;

/// Keeps a runaway script from freezing the tab.
const SCRIPT_STEP_LIMIT: u64 = 200_000;

#[derive(Debug, Serialize)]
pub struct Sweep {
    pub bias: Vec<f64>,
    pub zc11: Vec<f64>,
    pub zc22: Vec<f64>,
    pub per_loop: usize,
}

pub fn run_sweep(v_max: f64, loops: usize, seed: u64, chaos: bool) -> Result<Sweep, String> {
    let mut params = DeviceParams {
        seed,
        ..DeviceParams::default()
    };
    if !chaos {
        params = params.without_chaos();
    }
    let mut bench = Testbench::with_params(params).map_err(|e| e.to_string())?;
    let config = HysteresisConfig {
        v_min: -v_max,
        v_max,
        loops,
        ..HysteresisConfig::default()
    };
    let run = hysteresis_sweep(&mut bench, &config).map_err(|e| e.to_string())?;
    Ok(Sweep {
        bias: run.entries.iter().map(|e| e.bias).collect(),
        zc11: run.entries.iter().map(|e| e.zc.zc11).collect(),
        zc22: run.entries.iter().map(|e| e.zc.zc22).collect(),
        per_loop: run.samples_per_loop(),
    })
}

#[derive(Debug, Default, Serialize)]
pub struct ScriptRun {
    pub diagnostics: Vec<String>,
    pub passed: bool,
    pub printed: Vec<f64>,
    pub t: Vec<f64>,
    pub zc22: Vec<f64>,
    pub error: Option<String>,
}

/// Checks a script and, when it has no errors, runs it on a fresh bench.
pub fn check_and_run(src: &str, seed: u64) -> ScriptRun {
    let mut out = ScriptRun::default();
    let program = match parse(src) {
        Ok(p) => p,
        Err(e) => {
            out.error = Some(e.to_string());
            return out;
        }
    };
    let diags = check(&program);
    out.diagnostics = diags.errors.iter().chain(&diags.warnings).map(|d| d.to_string()).collect();
    out.passed = diags.passed();
    if !out.passed {
        return out;
    }
    let params = DeviceParams {
        seed,
        ..DeviceParams::default()
    };
    let mut bench = match Testbench::with_params(params) {
        Ok(b) => b,
        Err(e) => {
            out.error = Some(e.to_string());
            return out;
        }
    };
    let mut sink = CsvSink::default();
    let result = Interpreter::new(&mut bench)
        .with_step_limit(SCRIPT_STEP_LIMIT)
        .run(&program, &mut sink);
    out.error = result.err().map(|e| e.to_string());
    out.printed = sink.printed;
    out.t = bench.log().iter().map(|e| e.t).collect();
    out.zc22 = bench.log().iter().map(|e| e.zc.zc22).collect();
    out
}

#[derive(Debug, Serialize)]
pub struct ZMatrix {
    /// Z11, Z12, Z21, Z22 as (re, im) pairs.
    pub z: [(f64, f64); 4],
    pub magnitude: [f64; 4],
}

/// `s` holds S11, S12, S21, S22 as interleaved re, im.
pub fn s_to_z(s: &[f64], z0: f64) -> Result<ZMatrix, String> {
    if s.len() != 8 {
        return Err(format!("expected 8 numbers, got {}", s.len()));
    }
    let c = |i: usize| Complex64::new(s[2 * i], s[2 * i + 1]);
    let z = z_from_s(&TwoPort::new(c(0), c(1), c(2), c(3)), z0).map_err(|e| e.to_string())?;
    let a = z.as_array();
    Ok(ZMatrix {
        z: a.map(|v| (v.re, v.im)),
        magnitude: a.map(|v| v.norm()),
    })
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).unwrap_or_else(|e| format!("{{\"error\":\"{e}\"}}"))
}

#[wasm_bindgen]
pub fn sweep(v_max: f64, loops: u32, seed: u32, chaos: bool) -> Result<String, String> {
    run_sweep(v_max, loops as usize, seed.into(), chaos).map(|s| to_json(&s))
}

#[wasm_bindgen]
pub fn script(src: &str, seed: u32) -> String {
    to_json(&check_and_run(src, seed.into()))
}

#[wasm_bindgen]
pub fn convert(s: Vec<f64>, z0: f64) -> Result<String, String> {
    s_to_z(&s, z0).map(|z| to_json(&z))
}
