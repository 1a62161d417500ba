use crate::physics::TTls;
use rand::Rng;

/// Telegraph states (`±1`) at the requested instants.
#[derive(Debug, Clone, PartialEq)]
pub struct RtsTrace {
    pub states: Vec<i8>,
    /// Continuous-time transitions between the first and last instant.
    pub transitions: u64,
}

fn exp_wait<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> f64 {
    if rate <= 0.0 {
        f64::INFINITY
    } else {
        -(1.0 - rng.random::<f64>()).ln() / rate
    }
}

/// Two-state Markov chain sampled at `times` (ascending).
///
/// With `p` the occupancy of the − state, the chain leaves + at rate `2γp`
/// and − at rate `2γ(1−p)`, so a symmetric fluctuator switches at rate γ in
/// either state. Dwell times are drawn exactly, so any `γ·dt` is handled.
pub fn simulate_rts<R: Rng + ?Sized>(t: &TTls, times: &[f64], rng: &mut R) -> RtsTrace {
    let p = t.occupancy_bias;
    let leave_plus = 2.0 * t.gamma_switch_hz * p;
    let leave_minus = 2.0 * t.gamma_switch_hz * (1.0 - p);
    let mut state: i8 = if rng.random::<f64>() < p { -1 } else { 1 };
    let mut states = Vec::with_capacity(times.len());
    let mut transitions = 0;
    let Some(&t0) = times.first() else {
        return RtsTrace { states, transitions };
    };
    let rate = |s: i8| if s > 0 { leave_plus } else { leave_minus };
    let mut next = t0 + exp_wait(rate(state), rng);
    for &ti in times {
        while next <= ti {
            state = -state;
            transitions += 1;
            next += exp_wait(rate(state), rng);
        }
        states.push(state);
    }
    RtsTrace { states, transitions }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn frozen_when_slow() {
        let t = TTls { delta_f_hz: 1e3, gamma_switch_hz: 1e-12, occupancy_bias: 0.5 };
        let times: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let tr = simulate_rts(&t, &times, &mut rng);
        assert_eq!(tr.transitions, 0);
        assert!(tr.states.iter().all(|&s| s == tr.states[0]));
    }

    #[test]
    fn fully_biased_never_leaves() {
        let t = TTls { delta_f_hz: 1e3, gamma_switch_hz: 1.0, occupancy_bias: 1.0 };
        let times: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let tr = simulate_rts(&t, &times, &mut rng);
        assert!(tr.states.iter().all(|&s| s == -1));
    }
}
