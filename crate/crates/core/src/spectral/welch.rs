use super::TimeSeries;
use crate::error::{invalid, Result};
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    #[default]
    Rectangular,
    Hann,
}

impl Window {
    fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; n],
            Window::Hann => (0..n)
                .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WelchConfig {
    /// Samples per segment; `None` picks [`default_segment_len`] of the shortest period.
    pub segment_len: Option<usize>,
    pub overlap: f64,
    pub window: Window,
}

impl Default for WelchConfig {
    fn default() -> Self {
        WelchConfig { segment_len: None, overlap: 0.5, window: Window::Rectangular }
    }
}

/// `floor(2N/5)`: four half-overlapping segments fit exactly in `N` samples.
pub fn default_segment_len(period_len: usize) -> usize {
    2 * period_len / 5
}

/// One-sided spectral density. The DC bin is dropped; Nyquist is kept when
/// the segment length is even.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Psd {
    pub freqs_hz: Vec<f64>,
    pub power_per_hz: Vec<f64>,
    pub n_segments: usize,
    pub segment_len: usize,
    pub dt_s: f64,
}

impl Psd {
    pub fn df(&self) -> f64 {
        1.0 / (self.segment_len as f64 * self.dt_s)
    }

    /// Indices of bins below Nyquist.
    pub fn interior_bins(&self) -> std::ops::Range<usize> {
        let n = self.freqs_hz.len();
        if self.segment_len % 2 == 0 && n > 0 {
            0..n - 1
        } else {
            0..n
        }
    }

    /// `Σ S Δf` over the retained bins.
    pub fn integrated_power(&self) -> f64 {
        self.power_per_hz.iter().sum::<f64>() * self.df()
    }
}

/// Welch estimate with segments confined to periods.
pub fn welch_psd(s: &TimeSeries, cfg: &WelchConfig) -> Result<Psd> {
    if !(0.0..1.0).contains(&cfg.overlap) {
        return Err(invalid("overlap must lie in [0, 1)"));
    }
    let periods = s.periods();
    let shortest = periods.iter().map(|r| r.len()).min().ok_or_else(|| invalid("empty series"))?;
    let l = cfg.segment_len.unwrap_or_else(|| default_segment_len(shortest));
    if l < 2 {
        return Err(invalid(format!("segment length {l} is too short")));
    }
    if let Some(r) = periods.iter().find(|r| r.len() < l) {
        return Err(invalid(format!("period of {} samples is shorter than the segment length {l}", r.len())));
    }
    let dt = s.dt().ok_or_else(|| invalid("cannot infer the sampling interval"))?;
    let step = l - (cfg.overlap * l as f64).round() as usize;
    if step == 0 {
        return Err(invalid("overlap leaves no step between segments"));
    }

    let w = cfg.window.coefficients(l);
    let u = w.iter().map(|v| v * v).sum::<f64>() / l as f64;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(l);
    let nbins = l / 2;
    let mut acc = vec![0.0; nbins];
    let mut buf = vec![Complex::new(0.0, 0.0); l];
    let mut n_segments = 0;
    for r in &periods {
        let mut start = r.start;
        while start + l <= r.end {
            for i in 0..l {
                buf[i] = Complex::new(s.values[start + i] * w[i], 0.0);
            }
            fft.process(&mut buf);
            for k in 1..=nbins {
                let mut p = buf[k].norm_sqr() * dt / (l as f64 * u);
                if 2 * k != l {
                    p *= 2.0;
                }
                acc[k - 1] += p;
            }
            n_segments += 1;
            start += step;
        }
    }
    let df = 1.0 / (l as f64 * dt);
    Ok(Psd {
        freqs_hz: (1..=nbins).map(|k| k as f64 * df).collect(),
        power_per_hz: acc.into_iter().map(|p| p / n_segments as f64).collect(),
        n_segments,
        segment_len: l,
        dt_s: dt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sinusoid_lands_in_one_bin() {
        let (l, dt, k0) = (64usize, 2.0, 5usize);
        let a = 0.3;
        let x: Vec<f64> = (0..l).map(|i| a * (2.0 * PI * k0 as f64 * i as f64 / l as f64).sin()).collect();
        let psd = welch_psd(&TimeSeries::uniform(dt, x, "1"), &WelchConfig { segment_len: Some(l), ..Default::default() }).unwrap();
        assert_eq!(psd.n_segments, 1);
        let ms = a * a / 2.0;
        assert!((psd.power_per_hz[k0 - 1] * psd.df() - ms).abs() < 1e-14);
        let rest: f64 = psd.power_per_hz.iter().enumerate().filter(|(i, _)| *i != k0 - 1).map(|(_, p)| p).sum();
        assert!(rest < 1e-25);
    }

    #[test]
    fn segment_bookkeeping() {
        let n = [831usize, 831, 831, 830];
        let mut ids = Vec::new();
        for (p, &len) in n.iter().enumerate() {
            ids.extend(std::iter::repeat_n(p as u32, len));
        }
        let total = ids.len();
        let s = TimeSeries::new((0..total).map(|i| i as f64 * 520.0).collect(), (0..total).map(|i| ((i * 7919) % 13) as f64).collect(), ids, "1").unwrap();
        let psd = welch_psd(&s, &WelchConfig::default()).unwrap();
        assert_eq!(psd.segment_len, 332);
        let expected: usize = n.iter().map(|&np| (np - 332) / 166 + 1).sum();
        assert_eq!(psd.n_segments, expected);
        assert_eq!(psd.n_segments, 16);
        assert!((psd.freqs_hz[0] - 1.0 / (332.0 * 520.0)).abs() < 1e-20);
    }

    #[test]
    fn short_period_is_rejected() {
        let s = TimeSeries::uniform(1.0, vec![0.0; 10], "1");
        assert!(welch_psd(&s, &WelchConfig { segment_len: Some(11), ..Default::default() }).is_err());
    }
}
