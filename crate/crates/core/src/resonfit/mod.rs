//! Hanger-resonator transmission, quality-factor conversions and the
//! power-dependent loss (S-curve) model.

mod rates;
mod s21;
mod scurve;

pub use rates::{q_from_rates, rates_from_q, RateConvention};
pub use s21::{
    fit_s21, normalize_trace, s21_model, synthesize_s21_trace, PointDensity, ResonanceFit, ResonanceParams, S21FitConfig,
    S21SynthConfig, S21Trace,
};
pub use scurve::{fit_scurve, scurve_model, synthesize_scurve, SCurveFit, SCurveParams, SCurvePoint};
