use super::{fit_noise_model, noise_level_at, normalize_series, welch_psd, Detrend, NoiseFit, NoiseFitConfig, Psd, TimeSeries, WelchConfig};
use crate::dynamics::SimulationResult;
use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};

/// Normalization, spectral estimation and fit settings applied to every series.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    pub detrend: Detrend,
    pub welch: WelchConfig,
    pub fit: NoiseFitConfig,
    /// Frequency at which fitted noise levels are reported.
    pub report_f_hz: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig { detrend: Detrend::None, welch: WelchConfig::default(), fit: NoiseFitConfig::default(), report_f_hz: 1e-5 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObservableAnalysis {
    pub psd: Psd,
    pub fit: NoiseFit,
    /// Fitted `S(report_f_hz)`.
    pub level: f64,
}

/// `y` is the normalized resonance frequency, `z` the normalized internal loss.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SettingAnalysis {
    pub label: String,
    pub y: ObservableAnalysis,
    pub z: ObservableAnalysis,
}

pub fn analyze_series(s: &TimeSeries, cfg: &AnalysisConfig) -> Result<ObservableAnalysis> {
    let norm = normalize_series(s, cfg.detrend)?;
    if norm.values.iter().all(|&v| v == 0.0) {
        return Err(invalid("series has zero variance; there is no noise to analyze"));
    }
    let psd = welch_psd(&norm, &cfg.welch)?;
    let fit = fit_noise_model(&psd, &cfg.fit)?;
    let level = noise_level_at(&fit, cfg.report_f_hz);
    Ok(ObservableAnalysis { psd, fit, level })
}

/// Analyzes both observables of every pump setting.
pub fn analyze_simulation(sim: &SimulationResult, cfg: &AnalysisConfig) -> Result<Vec<SettingAnalysis>> {
    (0..sim.labels.len())
        .map(|s| {
            Ok(SettingAnalysis {
                label: sim.labels[s].clone(),
                y: analyze_series(&sim.f_r_series(s), cfg)?,
                z: analyze_series(&sim.gamma_series(s), cfg)?,
            })
        })
        .collect()
}
