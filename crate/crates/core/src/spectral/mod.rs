//! Normalization, Welch spectra and the three-term noise model.

mod analysis;
mod noisefit;
mod series;
mod welch;

pub use analysis::{analyze_series, analyze_simulation, AnalysisConfig, ObservableAnalysis, SettingAnalysis};
pub use noisefit::{fit_noise_model, noise_level_at, NoiseFit, NoiseFitConfig};
pub use series::{normalize_series, split_periods_by_gap, Detrend, TimeSeries};
pub use welch::{default_segment_len, welch_psd, Psd, WelchConfig, Window};
