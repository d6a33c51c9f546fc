use ferrolab_core::ffmodel::{network_at, DeviceParams, DeviceState};
use ferrolab_core::rf::{collapse, s_from_z, z_from_s, TwoPort};
use num_complex::Complex64;
use proptest::prelude::*;

fn cplx(max: f64) -> impl Strategy<Value = Complex64> {
    (-max..max, -max..max).prop_map(|(re, im)| Complex64::new(re, im))
}

/// Passive impedance: nonnegative resistance on the diagonal, reactive
/// and mutual terms bounded by the diagonal resistance scale.
fn passive_z() -> impl Strategy<Value = TwoPort> {
    (1.0..2000.0f64, 1.0..2000.0f64, -500.0..500.0f64, -500.0..500.0f64, cplx(1.0), 0.0..0.2f64).prop_map(
        |(r1, r2, x1, x2, m, asym)| {
            let mutual = m * r1.min(r2);
            TwoPort::new(
                Complex64::new(r1, x1),
                mutual,
                mutual * (1.0 - asym),
                Complex64::new(r2, x2),
            )
        },
    )
}

/// Strictly passive S-matrix: every entry well inside the unit disc.
fn passive_s() -> impl Strategy<Value = TwoPort> {
    (cplx(0.45), cplx(0.45), cplx(0.45), cplx(0.45)).prop_map(|(a, b, c, d)| TwoPort::new(a, b, c, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn z_round_trip(z in passive_z(), z0 in 10.0..100.0f64) {
        let back = z_from_s(&s_from_z(&z, z0).unwrap(), z0).unwrap();
        prop_assert!(z.rel_diff(&back) < 1e-9, "{:?} -> {:?}", z, back);
    }

    #[test]
    fn s_round_trip(s in passive_s()) {
        let back = s_from_z(&z_from_s(&s, 50.0).unwrap(), 50.0).unwrap();
        prop_assert!(s.rel_diff(&back) < 1e-9);
    }

    #[test]
    fn collapse_matches_plain_sum(x in prop::collection::vec(0.0..1e4f64, 1..300)) {
        let mut oracle = 0.0;
        for v in &x {
            oracle += v;
        }
        let got = collapse(&x).unwrap();
        prop_assert!((got - oracle).abs() <= 4.0 * f64::EPSILON * oracle.max(1.0));
    }

    #[test]
    fn collapse_is_linear(
        xy in prop::collection::vec((0.0..1e3f64, 0.0..1e3f64), 1..200),
        a in 0.0..10.0f64,
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = xy.into_iter().unzip();
        let sum: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p + q).collect();
        let scaled: Vec<f64> = x.iter().map(|p| a * p).collect();
        let (cx, cy) = (collapse(&x).unwrap(), collapse(&y).unwrap());
        let tol = 1e-12 * (cx + cy).max(1.0) * (1.0 + a);
        prop_assert!((collapse(&sum).unwrap() - cx - cy).abs() <= tol);
        prop_assert!((collapse(&scaled).unwrap() - a * cx).abs() <= tol);
    }

    #[test]
    fn symmetric_device_is_reciprocal(w in 0.0..1.0f64, s in -10.0..10.0f64, a in 0.0..1.0f64, f in 1e7..6e9f64) {
        let p = DeviceParams { asym: 0.0, ..DeviceParams::default() };
        let st = DeviceState { w, s, a, ..DeviceState::fresh(&p) };
        let z = network_at(&st, &p, f);
        prop_assert_eq!(z.p12, z.p21);
    }
}
