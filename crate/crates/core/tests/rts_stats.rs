use proptest::prelude::*;
use tlsnoise::dynamics::simulate_rts;
use tlsnoise::physics::TTls;
use tlsnoise::seeds;

fn grid(n: usize, dt: f64) -> Vec<f64> {
    (0..n).map(|i| i as f64 * dt).collect()
}

/// Mean of `n` samples of a stationary two-state chain relaxing at `2γ`
/// has the variance of `n (1 − ρ)/(1 + ρ)` independent draws, `ρ = e^{−2γ dt}`.
fn effective_samples(n: usize, gamma: f64, dt: f64) -> f64 {
    let rho = (-2.0 * gamma * dt).exp();
    n as f64 * (1.0 - rho) / (1.0 + rho)
}

#[test]
fn switch_counts_and_occupancy_across_regimes() {
    let dt = 1.0;
    for (k, gdt) in [1e-3, 1e-1, 10.0].into_iter().enumerate() {
        let gamma = gdt / dt;
        let n = 400_000;
        let t = TTls { delta_f_hz: 1.0, gamma_switch_hz: gamma, occupancy_bias: 0.5 };
        let times = grid(n, dt);
        let tr = simulate_rts(&t, &times, &mut seeds::stream(11, seeds::RTS, &[k as u64]));
        let span = times[n - 1] - times[0];
        let expect = gamma * span;
        assert!((tr.transitions as f64 - expect).abs() <= 3.0 * expect.sqrt(), "γdt={gdt}: {} vs {expect}", tr.transitions);
        let frac_minus = tr.states.iter().filter(|&&s| s < 0).count() as f64 / n as f64;
        let sd = (0.25 / effective_samples(n, gamma, dt)).sqrt();
        assert!((frac_minus - 0.5).abs() <= 3.0 * sd, "γdt={gdt}: {frac_minus} ± {sd}");
    }
}

#[test]
fn biased_occupancy_and_flux() {
    let (gamma, p, n) = (0.05, 0.8, 400_000);
    let t = TTls { delta_f_hz: 1.0, gamma_switch_hz: gamma, occupancy_bias: p };
    let tr = simulate_rts(&t, &grid(n, 1.0), &mut seeds::stream(5, seeds::RTS, &[0]));
    let frac_minus = tr.states.iter().filter(|&&s| s < 0).count() as f64 / n as f64;
    let sd = (p * (1.0 - p) / effective_samples(n, gamma, 1.0)).sqrt();
    assert!((frac_minus - p).abs() <= 3.0 * sd, "{frac_minus}");
    // Stationary transition rate 4γp(1−p).
    let rate = 4.0 * gamma * p * (1.0 - p) * (n - 1) as f64;
    assert!((tr.transitions as f64 - rate).abs() <= 4.0 * rate.sqrt());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn states_are_plus_minus_one(lg in -6.0f64..1.0, p in 0.0f64..=1.0, seed in any::<u64>()) {
        let t = TTls { delta_f_hz: 1.0, gamma_switch_hz: 10f64.powf(lg), occupancy_bias: p };
        let tr = simulate_rts(&t, &grid(500, 3.0), &mut seeds::stream(seed, seeds::RTS, &[]));
        prop_assert_eq!(tr.states.len(), 500);
        prop_assert!(tr.states.iter().all(|&s| s == 1 || s == -1));
        let changes = tr.states.windows(2).filter(|w| w[0] != w[1]).count() as u64;
        // Sampling can only hide transitions, never invent them.
        prop_assert!(changes <= tr.transitions);
    }
}
