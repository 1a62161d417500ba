//! Closed-form driven-dissipative formulas for a resonator coupled to quantum TLSs.
//!
//! All rates (`gamma_*`, κ, Γ1) carry the numeric scale used by the measured
//! resonator tables: they are plugged into the Lorentzians exactly as printed,
//! next to `16π²Δ²` with Δ in Hz. Coupling strengths `g` are in Hz.

use crate::constants::{H, K_B};
use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const SIXTEEN_PI2: f64 = 16.0 * PI * PI;

/// Bare resonator parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonatorModel {
    pub f_r_tilde_hz: f64,
    pub gamma_ext_hz: f64,
    /// Background internal rate, i.e. loss not due to the simulated TLSs.
    pub gamma_int_bg_hz: f64,
    pub temperature_k: f64,
}

impl ResonatorModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.f_r_tilde_hz > 0.0 && self.f_r_tilde_hz.is_finite()) {
            return Err(invalid("f_r_tilde_hz must be positive"));
        }
        if !(self.gamma_ext_hz > 0.0) {
            return Err(invalid("gamma_ext_hz must be positive"));
        }
        if !(self.gamma_int_bg_hz >= 0.0) {
            return Err(invalid("gamma_int_bg_hz must be non-negative"));
        }
        if !(self.temperature_k >= 0.0) {
            return Err(invalid("temperature_k must be non-negative"));
        }
        Ok(())
    }
}

/// A thermal TLS that shifts one quantum TLS by `±delta_f_hz` as it switches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TTls {
    /// Magnitude of the shift; the sign follows the telegraph state.
    pub delta_f_hz: f64,
    pub gamma_switch_hz: f64,
    /// Probability of sitting in the lower (−) state.
    pub occupancy_bias: f64,
}

/// A quantum TLS near the resonator frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QTls {
    /// Candidate index in the generating stream; keys all downstream randomness.
    pub id: u64,
    pub f_tilde_hz: f64,
    pub g_hz: f64,
    pub gamma1_hz: f64,
    pub ttls: Vec<TTls>,
}

impl QTls {
    /// Photon number at which the resonant population is half saturated.
    pub fn saturation_number(&self) -> f64 {
        saturation_number(self.g_hz, self.gamma1_hz)
    }
}

pub fn saturation_number(g_hz: f64, gamma1_hz: f64) -> f64 {
    gamma1_hz * gamma1_hz / (32.0 * PI * PI * g_hz * g_hz)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PumpState {
    Off,
    On,
}

/// One drive configuration. `detuning_hz` is `f̃_r − f_p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpSetting {
    pub state: PumpState,
    pub power_at_sample_w: f64,
    pub detuning_hz: f64,
}

/// Pumps closer than this interfere with the probe measurement.
pub const MIN_PUMP_DETUNING_HZ: f64 = 1e6;

impl PumpSetting {
    /// Pump off: only the probe drives the resonator, on resonance.
    pub fn off(probe_power_w: f64) -> Self {
        PumpSetting { state: PumpState::Off, power_at_sample_w: probe_power_w, detuning_hz: 0.0 }
    }

    pub fn on(power_at_sample_w: f64, detuning_hz: f64) -> Result<Self> {
        if detuning_hz.abs() < MIN_PUMP_DETUNING_HZ {
            return Err(invalid(format!(
                "pump detuning {detuning_hz} Hz is inside the ±1 MHz exclusion band"
            )));
        }
        if !(power_at_sample_w >= 0.0) {
            return Err(invalid("pump power must be non-negative"));
        }
        Ok(PumpSetting { state: PumpState::On, power_at_sample_w, detuning_hz })
    }

    pub fn f_p(&self, f_r_tilde_hz: f64) -> f64 {
        f_r_tilde_hz - self.detuning_hz
    }

    /// Drive seen by the TLSs. `gamma_int_hz` enters the total linewidth;
    /// pass the background rate for the usual approximation.
    pub fn drive(&self, res: &ResonatorModel, gamma_int_hz: f64) -> Result<DriveContext> {
        let f_p = self.f_p(res.f_r_tilde_hz);
        let flux = photon_flux(self.power_at_sample_w, f_p)?;
        let mean_n = mean_photon_number(
            flux,
            res.gamma_ext_hz,
            res.gamma_ext_hz + gamma_int_hz,
            self.detuning_hz,
        )?;
        Ok(DriveContext { mean_n, f_p_hz: f_p })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveContext {
    pub mean_n: f64,
    pub f_p_hz: f64,
}

/// Photons per second carried by the line: `P / (h f_p)`.
pub fn photon_flux(power_w: f64, f_p_hz: f64) -> Result<f64> {
    if !(f_p_hz > 0.0) {
        return Err(invalid("drive frequency must be positive"));
    }
    if !(power_w >= 0.0) {
        return Err(invalid("power must be non-negative"));
    }
    Ok(power_w / (H * f_p_hz))
}

/// Intraresonator mean photon number `2ΦΓ_ext / (16π²Δ² + Γ_tot²)`.
pub fn mean_photon_number(flux: f64, gamma_ext_hz: f64, gamma_tot_hz: f64, detuning_hz: f64) -> Result<f64> {
    if !(gamma_tot_hz > 0.0) {
        return Err(invalid("total rate must be positive"));
    }
    if !(flux >= 0.0) {
        return Err(invalid("flux must be non-negative"));
    }
    Ok(2.0 * flux * gamma_ext_hz / (SIXTEEN_PI2 * detuning_hz * detuning_hz + gamma_tot_hz * gamma_tot_hz))
}

/// `tanh(h f / 2 k_B T)`; exactly 1 at zero temperature.
pub fn thermal_factor(f_hz: f64, temperature_k: f64) -> f64 {
    if temperature_k <= 0.0 {
        1.0
    } else {
        (H * f_hz / (2.0 * K_B * temperature_k)).tanh()
    }
}

/// Zero-temperature steady-state population of a TLS driven at detuning
/// `f_k − f_p` with mean photon number `mean_n`.
///
/// Written as `−(16π²Δ² + Γ1²) / (16π²Δ² + Γ1²(1 + n/n_s))`, algebraically the
/// usual saturation law but free of cancellation near −1.
pub fn saturation_population(g_hz: f64, gamma1_hz: f64, detuning_qp_hz: f64, mean_n: f64) -> f64 {
    let s = if mean_n == 0.0 { 0.0 } else { mean_n / saturation_number(g_hz, gamma1_hz) };
    let g1sq = gamma1_hz * gamma1_hz;
    let d = SIXTEEN_PI2 * detuning_qp_hz * detuning_qp_hz;
    -(d + g1sq) / (d + g1sq * (1.0 + s))
}

/// Population of `q` at instantaneous frequency `f_k_hz`, including the thermal factor.
pub fn sigma_z0(q: &QTls, f_k_hz: f64, ctx: &DriveContext, temperature_k: f64) -> f64 {
    thermal_factor(f_k_hz, temperature_k)
        * saturation_population(q.g_hz, q.gamma1_hz, f_k_hz - ctx.f_p_hz, ctx.mean_n)
}

/// Loss contributed by one TLS: `−σ 16π²g²Γ1 / (16π²Δ² + Γ1²)` with `Δ = f̃_r − f_k`.
pub fn kappa_partial(g_hz: f64, gamma1_hz: f64, sigma: f64, f_k_hz: f64, f_r_tilde_hz: f64) -> f64 {
    let d = f_r_tilde_hz - f_k_hz;
    let k = -sigma * SIXTEEN_PI2 * g_hz * g_hz * gamma1_hz / (SIXTEEN_PI2 * d * d + gamma1_hz * gamma1_hz);
    // σ ≤ 0 makes this non-negative; clamp away the −0.0 at σ = 0.
    k.max(0.0)
}

/// Frequency shift contributed by one TLS: `σ 8πg²Δ / (16π²Δ² + Γ1²)`, as printed.
pub fn freq_shift_partial(g_hz: f64, gamma1_hz: f64, sigma: f64, f_k_hz: f64, f_r_tilde_hz: f64) -> f64 {
    let d = f_r_tilde_hz - f_k_hz;
    sigma * 8.0 * PI * g_hz * g_hz * d / (SIXTEEN_PI2 * d * d + gamma1_hz * gamma1_hz)
}

/// Sign applied to [`freq_shift_partial`] when building `f_r(t)`.
///
/// `AsPrinted` uses the shift formula verbatim; with it a saturating pump
/// pushes `f_r` away from the pump. `Physical` flips the sign so a ground-state
/// TLS repels the resonator (dispersive shift), and a pump pulls `f_r` towards itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftConvention {
    AsPrinted,
    #[default]
    Physical,
}

impl ShiftConvention {
    pub fn sign(self) -> f64 {
        match self {
            ShiftConvention::AsPrinted => 1.0,
            ShiftConvention::Physical => -1.0,
        }
    }
}

/// `(Γ̃_int + Σκ, f̃_r + Σδf)`, summed in iteration order.
pub fn aggregate<I>(res: &ResonatorModel, partials: I) -> (f64, f64)
where
    I: IntoIterator<Item = (f64, f64)>,
{
    let (mut k, mut df) = (0.0, 0.0);
    for (kap, shift) in partials {
        debug_assert!(kap >= 0.0);
        k += kap;
        df += shift;
    }
    (res.gamma_int_bg_hz + k, res.f_r_tilde_hz + df)
}
