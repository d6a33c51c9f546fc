use ferrolab_web::{check_and_run, run_sweep, s_to_z, script, sweep};

#[test]
fn sweep_has_expected_shape() {
    let s = run_sweep(3.8, 2, 1, true).unwrap();
    assert_eq!(s.per_loop, 153);
    assert_eq!(s.bias.len(), 1 + 2 * 153);
    assert_eq!(s.zc11.len(), s.bias.len());
    assert!(s.zc22.iter().all(|z| z.is_finite() && *z > 0.0));
}

#[test]
fn sweep_rejects_bad_range() {
    assert!(run_sweep(3.83, 1, 1, true).is_err());
    assert!(sweep(-1.0, 1, 1, true).is_err());
}

#[test]
fn sweep_json_is_deterministic() {
    assert_eq!(sweep(2.0, 1, 5, true).unwrap(), sweep(2.0, 1, 5, true).unwrap());
    assert_ne!(sweep(2.0, 1, 5, true).unwrap(), sweep(2.0, 1, 6, true).unwrap());
}

#[test]
fn script_reports_diagnostics_without_running() {
    let r = check_and_run("bias 12\nmeasure\n", 1);
    assert!(!r.passed);
    assert_eq!(r.diagnostics.len(), 1);
    assert!(r.t.is_empty());
}

#[test]
fn script_runs_and_prints() {
    let r = check_and_run("bias 1\nwait 3\nmeasure\nprint(ZC22)\n", 1);
    assert!(r.passed, "{:?}", r.diagnostics);
    assert_eq!(r.error, None);
    assert_eq!(r.printed.len(), 1);
    assert_eq!(r.zc22.last().copied(), Some(r.printed[0]));
}

#[test]
fn script_syntax_error_is_returned() {
    let json = script("repeat 3 {\n    measure\n", 1);
    assert!(json.contains("\"error\":\""));
    assert!(json.contains("\"passed\":false"));
}

#[test]
fn zero_reflection_gives_reference_impedance() {
    let z = s_to_z(&[0.0; 8], 50.0).unwrap();
    assert!((z.z[0].0 - 50.0).abs() < 1e-12);
    assert!((z.z[3].0 - 50.0).abs() < 1e-12);
    assert!(z.magnitude[1].abs() < 1e-12);
}

#[test]
fn conversion_needs_eight_numbers() {
    assert!(s_to_z(&[0.0; 6], 50.0).is_err());
}
