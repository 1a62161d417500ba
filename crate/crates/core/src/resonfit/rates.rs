use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// How a quality factor maps to a rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateConvention {
    /// `Γ = 2π f / Q`, the scale of the tabulated resonator rates.
    #[default]
    Angular,
    /// `Γ = f / Q`.
    Cyclic,
}

impl RateConvention {
    fn factor(self) -> f64 {
        match self {
            RateConvention::Angular => 2.0 * PI,
            RateConvention::Cyclic => 1.0,
        }
    }
}

/// `(Γ_int, Γ_ext)` from `(Q_int, Q_ext)`.
pub fn rates_from_q(f_r_hz: f64, q_int: f64, q_ext: f64, conv: RateConvention) -> (f64, f64) {
    let c = conv.factor() * f_r_hz;
    (c / q_int, c / q_ext)
}

/// `(Q_int, Q_ext)` from `(Γ_int, Γ_ext)`.
pub fn q_from_rates(f_r_hz: f64, gamma_int_hz: f64, gamma_ext_hz: f64, conv: RateConvention) -> (f64, f64) {
    let c = conv.factor() * f_r_hz;
    (c / gamma_int_hz, c / gamma_ext_hz)
}
