use super::Psd;
use crate::error::{invalid, Result};
use crate::lm::{self, LmConfig, Problem};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_10;

/// `S(f) = h0 + h−1/f + h−2/f²` with linearized standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseFit {
    pub h0_per_hz: f64,
    pub h_minus1: f64,
    pub h_minus2_hz: f64,
    pub se_h0_per_hz: f64,
    pub se_h_minus1: f64,
    pub se_h_minus2_hz: f64,
    /// Parameters pinned at zero, in the order (h0, h−1, h−2).
    pub bound_active: [bool; 3],
    /// Norm of the log10 residuals.
    pub residual_norm: f64,
    /// Power-of-ten scale the data were divided by before the fit.
    pub scale_s0: f64,
    pub n_bins: usize,
}

impl NoiseFit {
    pub fn params(&self) -> [f64; 3] {
        [self.h0_per_hz, self.h_minus1, self.h_minus2_hz]
    }

    pub fn std_errors(&self) -> [f64; 3] {
        [self.se_h0_per_hz, self.se_h_minus1, self.se_h_minus2_hz]
    }

    /// Power each term contributes between `f_lo` and `f_hi`, as (white, 1/f, 1/f²).
    pub fn band_power(&self, f_lo: f64, f_hi: f64) -> [f64; 3] {
        [self.h0_per_hz * (f_hi - f_lo), self.h_minus1 * (f_hi / f_lo).ln(), self.h_minus2_hz * (1.0 / f_lo - 1.0 / f_hi)]
    }

    /// Index of the term with the largest band power: 0 white, 1 flicker, 2 random walk.
    pub fn dominant_term(&self, f_lo: f64, f_hi: f64) -> usize {
        let p = self.band_power(f_lo, f_hi);
        (0..3).fold(0, |best, k| if p[k] > p[best] { k } else { best })
    }
}

pub fn noise_level_at(fit: &NoiseFit, f_hz: f64) -> f64 {
    fit.h0_per_hz + fit.h_minus1 / f_hz + fit.h_minus2_hz / (f_hz * f_hz)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseFitConfig {
    pub exclude_nyquist: bool,
    pub f_min_hz: Option<f64>,
    pub f_max_hz: Option<f64>,
    pub max_iterations: usize,
}

impl Default for NoiseFitConfig {
    fn default() -> Self {
        NoiseFitConfig { exclude_nyquist: true, f_min_hz: None, f_max_hz: None, max_iterations: 500 }
    }
}

/// Log-domain residuals in the scaled variables `q_k = h_k / (s0 f_ref^k)`.
struct LogModel {
    u: Vec<f64>,
    log_y: Vec<f64>,
}

impl LogModel {
    fn m(&self, q: &[f64], i: usize) -> f64 {
        let u = self.u[i];
        q[0] + q[1] * u + q[2] * u * u
    }
}

impl Problem for LogModel {
    fn n_residuals(&self) -> usize {
        self.u.len()
    }
    fn residuals(&self, q: &[f64], out: &mut [f64]) {
        for i in 0..self.u.len() {
            out[i] = self.m(q, i).log10() - self.log_y[i];
        }
    }
    fn jacobian(&self, q: &[f64], out: &mut DMatrix<f64>) {
        for i in 0..self.u.len() {
            let d = LN_10 * self.m(q, i);
            let u = self.u[i];
            out[(i, 0)] = 1.0 / d;
            out[(i, 1)] = u / d;
            out[(i, 2)] = u * u / d;
        }
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Fits the three-term model to `log10(S/s0)` with all amplitudes bounded below by zero.
pub fn fit_noise_model(psd: &Psd, cfg: &NoiseFitConfig) -> Result<NoiseFit> {
    let range = if cfg.exclude_nyquist { psd.interior_bins() } else { 0..psd.freqs_hz.len() };
    let (f, s): (Vec<f64>, Vec<f64>) = range
        .map(|i| (psd.freqs_hz[i], psd.power_per_hz[i]))
        .filter(|(f, _)| cfg.f_min_hz.is_none_or(|lo| *f >= lo) && cfg.f_max_hz.is_none_or(|hi| *f <= hi))
        .unzip();
    let n = f.len();
    if n < 3 {
        return Err(invalid(format!("{n} frequency bins are too few for a three-parameter fit")));
    }
    if s.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(invalid("PSD has zero or non-finite bins (zero-variance input?)"));
    }

    // Starting values from the high, middle and low ends of the band.
    let hi: Vec<f64> = s[3 * n / 4..].to_vec();
    let h0g = median(hi);
    let mid = n / 3..(2 * n / 3).max(n / 3 + 1);
    let h1g = median(mid.map(|i| (s[i] - h0g) * f[i]).collect()).max(0.0);
    let lo = (n / 10).max(2);
    let h2g = median((0..lo).map(|i| (s[i] - h0g - h1g / f[i]) * f[i] * f[i]).collect()).max(0.0);

    let s0 = if h0g > 0.0 { 10f64.powf(h0g.log10().round()) } else { 10f64.powf(median(s.clone()).log10().round()) };
    let f_ref = (f[0] * f[n - 1]).sqrt();
    let model = LogModel {
        u: f.iter().map(|fi| f_ref / fi).collect(),
        log_y: s.iter().map(|v| (v / s0).log10()).collect(),
    };
    let to_q = |h: [f64; 3]| [h[0] / s0, h[1] / (s0 * f_ref), h[2] / (s0 * f_ref * f_ref)];
    let smed = median(s.clone());
    let starts = [
        to_q([h0g, h1g, h2g]),
        to_q([h0g, 0.0, 0.0]),
        to_q([0.0, smed * f_ref, 0.0]),
        to_q([0.0, 0.0, smed * f_ref * f_ref]),
        to_q([h0g.max(smed * 1e-3), h1g.max(smed * f_ref * 1e-3), h2g.max(smed * f_ref * f_ref * 1e-3)]),
    ];
    let lm_cfg = LmConfig { max_iterations: cfg.max_iterations, ..LmConfig::default() };
    let mut best: Option<lm::LmReport> = None;
    let mut last_err = None;
    for q0 in starts {
        if q0.iter().all(|&v| v <= 0.0) {
            continue;
        }
        match lm::minimize(&model, &q0, &[0.0; 3], &[f64::INFINITY; 3], &lm_cfg) {
            Ok(rep) => {
                if best.as_ref().is_none_or(|b| rep.residual_norm < b.residual_norm) {
                    best = Some(rep);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    let rep = match best {
        Some(r) => r,
        None => return Err(last_err.unwrap_or_else(|| invalid("no usable starting point"))),
    };
    let scale = [s0, s0 * f_ref, s0 * f_ref * f_ref];
    let p: Vec<f64> = (0..3).map(|k| rep.params[k] * scale[k]).collect();
    let se: Vec<f64> = (0..3).map(|k| rep.std_errors[k] * scale[k]).collect();
    Ok(NoiseFit {
        h0_per_hz: p[0],
        h_minus1: p[1],
        h_minus2_hz: p[2],
        se_h0_per_hz: se[0],
        se_h_minus1: se[1],
        se_h_minus2_hz: se[2],
        bound_active: [rep.bound_active[0], rep.bound_active[1], rep.bound_active[2]],
        residual_norm: rep.residual_norm,
        scale_s0: s0,
        n_bins: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_psd(h: [f64; 3]) -> Psd {
        let (l, dt) = (332usize, 520.0);
        let freqs: Vec<f64> = (1..=l / 2).map(|k| k as f64 / (l as f64 * dt)).collect();
        let power = freqs.iter().map(|f| h[0] + h[1] / f + h[2] / (f * f)).collect();
        Psd { freqs_hz: freqs, power_per_hz: power, n_segments: 16, segment_len: l, dt_s: dt }
    }

    #[test]
    fn recovers_white_plus_flicker() {
        let fit = fit_noise_model(&grid_psd([15e-12, 5.7e-15, 0.0]), &NoiseFitConfig::default()).unwrap();
        assert!((fit.h0_per_hz / 15e-12 - 1.0).abs() < 1e-8, "{fit:?}");
        assert!((fit.h_minus1 / 5.7e-15 - 1.0).abs() < 1e-8);
        assert!(fit.h_minus2_hz.abs() < 1e-30);
        assert_eq!(fit.scale_s0, 1e-11);
    }

    #[test]
    fn pure_white() {
        let fit = fit_noise_model(&grid_psd([3e-9, 0.0, 0.0]), &NoiseFitConfig::default()).unwrap();
        assert!((fit.h0_per_hz / 3e-9 - 1.0).abs() < 1e-9);
        assert!(fit.h_minus1.abs() < 1e-20 && fit.h_minus2_hz.abs() < 1e-25);
    }

    #[test]
    fn pure_random_walk() {
        let a = 5e-20;
        let fit = fit_noise_model(&grid_psd([0.0, 0.0, a]), &NoiseFitConfig::default()).unwrap();
        assert!((fit.h_minus2_hz / a - 1.0).abs() < 1e-8, "{fit:?}");
        assert!(fit.h0_per_hz < 1e-6 * noise_level_at(&fit, 1e-3));
    }

    #[test]
    fn level_at_reference_frequency() {
        let fit = NoiseFit {
            h0_per_hz: 15e-12,
            h_minus1: 5.7e-15,
            h_minus2_hz: 5e-20,
            se_h0_per_hz: 0.0,
            se_h_minus1: 0.0,
            se_h_minus2_hz: 0.0,
            bound_active: [false; 3],
            residual_norm: 0.0,
            scale_s0: 1e-11,
            n_bins: 0,
        };
        let v = noise_level_at(&fit, 1e-5);
        assert!((v - (15e-12 + 5.7e-10 + 5e-10)).abs() < 1e-22);
        assert!((noise_level_at(&fit, 1e12) - 15e-12).abs() < 1e-20);
    }

    #[test]
    fn zero_bins_are_rejected() {
        assert!(fit_noise_model(&grid_psd([0.0, 0.0, 0.0]), &NoiseFitConfig::default()).is_err());
    }
}
