use ferrolab_core::experiments::schedule::{constant_weights, offset_ramp, serialize_digit, V_BLACK, V_WHITE};
use ferrolab_core::experiments::{pixel_index, DigitBitmap, PIXELS};
use ferrolab_core::ffmodel::{step, DeviceParams, DeviceState, PortNetwork};
use proptest::prelude::*;

fn program() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-10.0..=10.0f64, 0.0..20.0f64), 1..40)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn state_stays_bounded(prog in program(), seed in 0u64..1000) {
        let p = DeviceParams { seed, ..DeviceParams::default() };
        let bound = p.s_gain * 10.0 / p.s_relax;
        let mut st = DeviceState::fresh(&p);
        for (v, dt) in prog {
            st = step(&st, &p, v, dt).unwrap();
            prop_assert!((0.0..=1.0).contains(&st.w));
            prop_assert!((0.0..=1.0).contains(&st.a));
            prop_assert!(st.s.abs() <= bound);
            prop_assert!(st.c.iter().all(|c| *c > 0.0 && *c < 1.0));
            let net = PortNetwork::of(&st, &p);
            for r in [net.r_port1, net.r_port2, net.r_shunt] {
                prop_assert!(r.is_finite() && r > 0.0);
            }
        }
    }

    #[test]
    fn quiet_trace_respects_bound(prog in program()) {
        let p = DeviceParams::default().without_chaos();
        let bound = p.s_gain * 10.0 / p.s_relax;
        let mut st = DeviceState::fresh(&p);
        for (v, dt) in prog {
            st = step(&st, &p, v, dt).unwrap();
            prop_assert!(st.s.abs() <= bound + 1e-12);
        }
    }

    #[test]
    fn trajectories_are_deterministic(prog in program(), seed in 0u64..1000) {
        let p = DeviceParams { seed, ..DeviceParams::default() };
        let run = || {
            let mut st = DeviceState::fresh(&p);
            let mut trace = Vec::new();
            for (v, dt) in &prog {
                st = step(&st, &p, *v, *dt).unwrap();
                trace.push(st.clone());
            }
            trace
        };
        let (a, b) = (run(), run());
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(x.w.to_bits(), y.w.to_bits());
            prop_assert_eq!(x.s.to_bits(), y.s.to_bits());
            prop_assert_eq!(x.a.to_bits(), y.a.to_bits());
        }
    }

    #[test]
    fn zero_duration_is_identity(v in -10.0..=10.0f64, prog in program()) {
        let p = DeviceParams::default();
        let mut st = DeviceState::fresh(&p);
        for (u, dt) in prog {
            st = step(&st, &p, u, dt).unwrap();
        }
        prop_assert_eq!(step(&st, &p, v, 0.0).unwrap(), st);
    }

    #[test]
    fn serialization_visits_every_pixel_once(bits in prop::collection::vec(any::<bool>(), PIXELS), k in -0.05..0.05f64) {
        let mut d = DigitBitmap::blank();
        for (i, b) in bits.iter().enumerate() {
            d.set(i / 8, i % 8, *b);
        }
        let sched = serialize_digit(&d, &constant_weights(4.5), V_BLACK, V_WHITE, &offset_ramp(k)).unwrap();
        let mut seen: Vec<usize> = sched.segments.iter().map(|s| s.pixel).collect();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..PIXELS).collect::<Vec<_>>());
        let mut order: Vec<usize> = (0..PIXELS).map(|i| pixel_index(i / 8, i % 8)).collect();
        order.sort_unstable();
        prop_assert_eq!(order, (0..PIXELS).collect::<Vec<_>>());
        for r in 0..8 {
            for c in 0..8 {
                let seg = sched.segments[pixel_index(r, c)];
                let base = if d.get(r, c) { V_BLACK } else { V_WHITE };
                prop_assert!((seg.voltage - base - k * (1.0 - seg.pixel as f64 / 32.0)).abs() < 1e-12);
            }
        }
    }
}
