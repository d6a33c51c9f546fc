use ferrolab_core::control::{drive_to_setpoint, SetpointSpec};
use ferrolab_core::experiments::{hysteresis_sweep, memory_store, HysteresisConfig, MemoryConfig};
use ferrolab_core::ffmodel::DeviceParams;
use ferrolab_core::instruments::{log_to_csv, Testbench};
use ferrolab_core::rf::Indicator;
use ferrolab_core::script::{check, library, parse, run, CsvSink};

fn bench() -> Testbench {
    Testbench::with_params(DeviceParams::default()).unwrap()
}

fn run_script(src: &str, b: &mut Testbench) -> CsvSink {
    let p = parse(src).unwrap();
    let d = check(&p);
    assert!(d.passed(), "{d}");
    assert!(d.warnings.is_empty(), "{d}");
    let mut sink = CsvSink::default();
    run(&p, b, &mut sink).unwrap();
    sink
}

#[test]
fn hysteresis_script_matches_experiment_log() {
    let mut a = bench();
    hysteresis_sweep(&mut a, &HysteresisConfig::default()).unwrap();
    let mut b = bench();
    let sink = run_script(library::HYSTERESIS, &mut b);
    assert_eq!(log_to_csv(a.log()), log_to_csv(b.log()));
    assert_eq!(sink.rows.len(), 1 + 50 * 153);
    assert_eq!(a.clock().to_bits(), b.clock().to_bits());
}

#[test]
fn memory_script_matches_experiment_log() {
    let mut a = bench();
    let run_a = memory_store(&mut a, &MemoryConfig::default()).unwrap();
    let mut b = bench();
    let sink = run_script(library::MEMORY, &mut b);
    assert_eq!(log_to_csv(a.log()), log_to_csv(b.log()));
    let hold: Vec<f64> = run_a.levels.iter().flat_map(|l| l.hold.iter().copied()).collect();
    let from_script: Vec<f64> = sink.rows.iter().map(|r| r[2]).collect();
    assert_eq!(hold, from_script);
}

#[test]
fn setpoint_script_uses_same_ticks() {
    for target in [16_300.0, 14_000.0] {
        let src = library::SETPOINT.replace("16300", &target.to_string());
        let mut a = bench();
        let ticks = drive_to_setpoint(&mut a, &SetpointSpec::new(Indicator::Zc22, target, 1.0)).unwrap();
        let mut b = bench();
        let sink = run_script(&src, &mut b);
        assert_eq!(sink.rows[0][0], ticks as f64);
        assert_eq!(log_to_csv(a.log()), log_to_csv(b.log()));
    }
}

#[test]
fn bundled_scripts_round_trip_through_printer() {
    for src in [library::HYSTERESIS, library::MEMORY, library::SETPOINT] {
        let p = parse(src).unwrap();
        assert_eq!(parse(&p.to_string()).unwrap(), p);
    }
}
