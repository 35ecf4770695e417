//! Randomized properties of the device model: dead zone, drift signs,
//! state clamping and the resistance/state maps.

use imply_sim::{MemristorParams, OdeOpts};
use proptest::prelude::*;

fn nominal() -> MemristorParams {
    MemristorParams::nominal()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    /// No drift anywhere inside the closed dead zone [v_on, v_off].
    #[test]
    fn dead_zone_has_zero_drift(
        w in 0.0f64..=3.0,
        frac in 0.0f64..=1.0,
    ) {
        let d = nominal();
        let v = d.v_on + frac * (d.v_off - d.v_on);
        prop_assert_eq!(d.dwdt(w, v), 0.0);
    }

    /// Below the set threshold the state only grows; above the reset
    /// threshold it only shrinks. The window functions are positive, so
    /// the sign comes from the rate constants alone.
    #[test]
    fn drift_sign_matches_voltage_region(
        w in 0.0f64..=3.0,
        excess in 1e-6f64..=2.0,
    ) {
        let d = nominal();
        let set = d.dwdt(w, d.v_on - excess);
        let reset = d.dwdt(w, d.v_off + excess);
        prop_assert!(set >= 0.0, "set drift {set} at w={w}");
        prop_assert!(reset <= 0.0, "reset drift {reset} at w={w}");
        prop_assert!(set > 0.0 || reset < 0.0);
    }

    /// The bounded rate freezes at the rails instead of pushing past them.
    #[test]
    fn bounded_drift_respects_rails(excess in 1e-3f64..=2.0) {
        let d = nominal();
        prop_assert_eq!(d.dwdt_bounded(d.w_on, d.v_on - excess), 0.0);
        prop_assert_eq!(d.dwdt_bounded(d.w_off, d.v_off + excess), 0.0);
        // Away from the blocking rail the bounded rate is the plain rate.
        prop_assert_eq!(
            d.dwdt_bounded(1.5, d.v_on - excess),
            d.dwdt(1.5, d.v_on - excess)
        );
    }

    #[test]
    fn clamp_maps_into_state_interval(w in -10.0f64..=10.0) {
        let d = nominal();
        let c = d.clamp_w(w);
        prop_assert!((d.w_off..=d.w_on).contains(&c));
        if (d.w_off..=d.w_on).contains(&w) {
            prop_assert_eq!(c, w);
        }
    }

    /// r_of_w and w_of_r invert each other, and resistance decreases as the
    /// state grows (LRS at w_on, HRS at w_off).
    #[test]
    fn resistance_map_round_trips(w in 0.0f64..=3.0) {
        let d = nominal();
        let r = d.r_of_w(w);
        prop_assert!((d.r_on..=d.r_off).contains(&r));
        prop_assert!((d.w_of_r(r) - w).abs() < 1e-9);
        let s = d.s_of_w(w);
        prop_assert!((d.w_of_s(s) - w).abs() < 1e-9);
    }

    #[test]
    fn resistance_decreases_with_state(a in 0.0f64..=3.0, b in 0.0f64..=3.0) {
        let d = nominal();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(d.r_of_w(lo) >= d.r_of_w(hi));
    }

    /// Constant-drive integration is monotone in the drive direction and
    /// never leaves the state interval.
    #[test]
    fn integration_is_monotone_and_bounded(
        w0 in 0.0f64..=3.0,
        v in -1.5f64..=1.5,
        dt in 1e-9f64..=20e-6,
    ) {
        let d = nominal();
        let w1 = d.integrate_const(w0, v, dt, &OdeOpts::default());
        prop_assert!((d.w_off..=d.w_on).contains(&w1));
        if v < d.v_on {
            prop_assert!(w1 >= w0 - 1e-12);
        } else if v > d.v_off {
            prop_assert!(w1 <= w0 + 1e-12);
        } else {
            prop_assert!((w1 - w0).abs() < 1e-12);
        }
    }

    /// Both windows stay in (0, 1]: they slow the approach to their rail
    /// but never reverse or amplify the drift.
    #[test]
    fn windows_stay_in_unit_interval(w in 0.0f64..=3.0) {
        let d = nominal();
        for f in [d.window_set(w), d.window_reset(w)] {
            prop_assert!(f > 0.0 && f <= 1.0, "window {f} at w={w}");
        }
    }
}

#[test]
fn crossing_time_matches_direct_integration() {
    let d = nominal();
    let opts = OdeOpts::default();
    let t = d
        .time_to_state(0.01, 0.99, -1.0, 1e-3, &opts)
        .expect("full drive must switch");
    // Integrating for exactly that long lands on the target state.
    let w_end = d.integrate_const(d.w_of_s(0.01), -1.0, t, &opts);
    assert!(
        (d.s_of_w(w_end) - 0.99).abs() < 1e-3,
        "s(t_cross) = {}",
        d.s_of_w(w_end)
    );
    // Sub-threshold drive never gets there.
    assert_eq!(d.time_to_state(0.01, 0.99, -0.5, 1e-3, &opts), None);
}
