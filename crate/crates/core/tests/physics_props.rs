use proptest::prelude::*;
use tlsnoise::physics::*;

fn coupling() -> impl Strategy<Value = (f64, f64)> {
    // g in [100 Hz, 1 MHz], Γ1 in [10 kHz, 100 MHz], log-uniform.
    (2.0f64..6.0, 4.0f64..8.0).prop_map(|(lg, lt)| (10f64.powf(lg), 10f64.powf(lt)))
}

proptest! {
    #[test]
    fn population_bounded_and_monotone(
        (g, t1) in coupling(),
        det in -1e8f64..1e8,
        ln in -6.0f64..8.0,
        factor in 1.0f64..100.0,
    ) {
        let n = 10f64.powf(ln);
        let s1 = saturation_population(g, t1, det, n);
        let s2 = saturation_population(g, t1, det, n * factor);
        prop_assert!((-1.0..=0.0).contains(&s1));
        prop_assert!(s2 >= s1);
        prop_assert_eq!(saturation_population(g, t1, det, 0.0), -1.0);
    }

    #[test]
    fn half_saturation_on_resonance((g, t1) in coupling()) {
        let ns = saturation_number(g, t1);
        prop_assert!((saturation_population(g, t1, 0.0, ns) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn loss_even_and_peaked((g, t1) in coupling(), sigma in -1.0f64..0.0, det in 1.0f64..1e8) {
        let fr = 5.5e9;
        let plus = kappa_partial(g, t1, sigma, fr + det, fr);
        let minus = kappa_partial(g, t1, sigma, fr - det, fr);
        let peak = kappa_partial(g, t1, sigma, fr, fr);
        prop_assert!(plus >= 0.0);
        prop_assert!((plus - minus).abs() <= 1e-12 * peak.max(1e-300));
        prop_assert!(peak >= plus);
    }

    #[test]
    fn shift_odd((g, t1) in coupling(), sigma in -1.0f64..0.0, det in 0.0f64..1e8) {
        let fr = 5.5e9;
        let plus = freq_shift_partial(g, t1, sigma, fr + det, fr);
        let minus = freq_shift_partial(g, t1, sigma, fr - det, fr);
        prop_assert!((plus + minus).abs() <= 1e-9 * plus.abs().max(1e-300));
    }

    #[test]
    fn photon_number_even_and_increasing(
        flux in 1e3f64..1e20,
        det in 0.0f64..1e7,
        gext in 1e4f64..1e6,
        gint in 0.0f64..1e6,
    ) {
        let gtot = gext + gint;
        let a = mean_photon_number(flux, gext, gtot, det).unwrap();
        let b = mean_photon_number(flux, gext, gtot, -det).unwrap();
        let c = mean_photon_number(flux * 1.5, gext, gtot, det).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!(c > a);
    }

    #[test]
    fn thermal_factor_in_unit_interval(f in 1e8f64..1e11, t in 1e-3f64..5.0) {
        let x = thermal_factor(f, t);
        prop_assert!(x > 0.0 && x <= 1.0);
        prop_assert!(thermal_factor(f, t * 2.0) <= x);
    }
}

#[test]
fn aggregation_is_additive() {
    let res = ResonatorModel { f_r_tilde_hz: 5.581779e9, gamma_ext_hz: 584e3, gamma_int_bg_hz: 21.0e3, temperature_k: 0.06 };
    assert_eq!(aggregate(&res, std::iter::empty()), (21.0e3, 5.581779e9));
    let (g, f) = aggregate(&res, [(631.7, 0.0)]);
    assert!((g - 21_631.7).abs() < 1e-9);
    assert_eq!(f, 5.581779e9);
}

#[test]
fn pump_exclusion_band() {
    assert!(PumpSetting::on(1e-9, 0.5e6).is_err());
    assert!(PumpSetting::on(1e-9, -0.99e6).is_err());
    assert!(PumpSetting::on(1e-9, 1e6).is_ok());
}
