use crate::error::{invalid, Error, Result};
use crate::lm::{self, LmConfig, Problem};
use crate::seeds;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Parameters of the normalized hanger model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonanceParams {
    pub f_r_hz: f64,
    pub q_int: f64,
    pub q_ext: f64,
    /// Impedance-mismatch angle, radians.
    pub phi_rad: f64,
}

/// Fitted parameters with linearized standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceFit {
    pub params: ResonanceParams,
    pub se_f_r_hz: f64,
    pub se_q_int: f64,
    pub se_q_ext: f64,
    pub se_phi_rad: f64,
    pub residual_norm: f64,
    pub iterations: usize,
}

impl ResonanceFit {
    /// Half-widths of the linearized 95% confidence intervals, same order as the standard errors.
    pub fn ci95(&self) -> [f64; 4] {
        [self.se_f_r_hz, self.se_q_int, self.se_q_ext, self.se_phi_rad].map(|s| 1.96 * s)
    }
}

/// `(1 + (Q_i/Q_e) e^{iφ} f / (f − 2i Q_i (f_r − f)))⁻¹` at probe frequency `f`.
pub fn s21_model(p: &ResonanceParams, f_pr_hz: f64) -> Complex64 {
    Complex64::new(1.0, 0.0) / (1.0 + t_term(p, f_pr_hz))
}

fn t_term(p: &ResonanceParams, f: f64) -> Complex64 {
    let delta = p.f_r_hz - f;
    let denom = Complex64::new(f, -2.0 * p.q_int * delta);
    Complex64::from_polar(p.q_int / p.q_ext, p.phi_rad) * f / denom
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct S21Trace {
    pub freqs_hz: Vec<f64>,
    pub s21: Vec<Complex64>,
    /// Per-point standard deviation of each quadrature, when known.
    pub noise: Option<Vec<f64>>,
    /// Number of off-resonant baseline points, split between the two ends.
    pub n_normalization: usize,
}

impl S21Trace {
    pub fn validate(&self) -> Result<()> {
        if self.freqs_hz.len() != self.s21.len() {
            return Err(invalid("frequency and S21 columns differ in length"));
        }
        if self.freqs_hz.len() < 8 {
            return Err(invalid("a trace needs at least 8 points"));
        }
        if self.freqs_hz.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("trace frequencies must be strictly ascending"));
        }
        if let Some(n) = &self.noise {
            if n.len() != self.s21.len() || n.iter().any(|&s| !(s > 0.0)) {
                return Err(invalid("noise column must be positive and match the trace length"));
            }
        }
        Ok(())
    }
}

/// Divides the trace by the mean of its edge (normalization) points.
pub fn normalize_trace(trace: &S21Trace) -> Result<S21Trace> {
    let k = trace.n_normalization;
    if k == 0 {
        return Ok(trace.clone());
    }
    let n = trace.s21.len();
    let left = k / 2;
    let right = k - left;
    if k >= n {
        return Err(invalid("more normalization points than trace points"));
    }
    let base: Complex64 = trace.s21[..left].iter().chain(&trace.s21[n - right..]).sum::<Complex64>() / k as f64;
    if base.norm() == 0.0 {
        return Err(invalid("normalization points are zero"));
    }
    let mut out = trace.clone();
    out.s21.iter_mut().for_each(|s| *s /= base);
    if let Some(noise) = out.noise.as_mut() {
        noise.iter_mut().for_each(|s| *s /= base.norm());
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointDensity {
    /// Twice the point density in the middle third of the span.
    #[default]
    DoubledMiddle,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct S21SynthConfig {
    pub n_points: usize,
    pub n_normalization: usize,
    pub span_hz: f64,
    /// Distance of the innermost baseline point from the centre.
    pub normalization_offset_hz: f64,
    /// Spacing between consecutive baseline points on one side.
    pub normalization_step_hz: f64,
    pub density: PointDensity,
    /// Standard deviation of each quadrature.
    pub noise_std: f64,
    pub seed: u64,
}

impl Default for S21SynthConfig {
    fn default() -> Self {
        S21SynthConfig {
            n_points: 116,
            n_normalization: 4,
            span_hz: 0.5e6,
            normalization_offset_hz: 0.35e6,
            normalization_step_hz: 0.05e6,
            density: PointDensity::DoubledMiddle,
            noise_std: 0.0,
            seed: 0,
        }
    }
}

/// Probe grid centred on `center_hz`: baseline points at both ends and a scan
/// whose middle third is sampled twice as densely as the outer thirds.
fn probe_grid(center_hz: f64, cfg: &S21SynthConfig) -> Result<Vec<f64>> {
    if cfg.n_normalization >= cfg.n_points {
        return Err(invalid("normalization points exhaust the trace"));
    }
    let n_scan = cfg.n_points - cfg.n_normalization;
    let w = cfg.span_hz;
    let lo = center_hz - w / 2.0;
    let mut scan = Vec::with_capacity(n_scan);
    match cfg.density {
        PointDensity::Uniform => {
            for j in 0..n_scan {
                scan.push(lo + (j as f64 + 0.5) * w / n_scan as f64);
            }
        }
        PointDensity::DoubledMiddle => {
            let side = ((n_scan as f64) / 4.0).round() as usize;
            let mid = n_scan - 2 * side;
            let third = w / 3.0;
            for j in 0..side {
                scan.push(lo + (j as f64 + 0.5) * third / side as f64);
            }
            for j in 0..mid {
                scan.push(lo + third + (j as f64 + 0.5) * third / mid as f64);
            }
            for j in 0..side {
                scan.push(lo + 2.0 * third + (j as f64 + 0.5) * third / side as f64);
            }
        }
    }
    let left = cfg.n_normalization / 2;
    let right = cfg.n_normalization - left;
    let mut f: Vec<f64> = (0..left)
        .rev()
        .map(|j| center_hz - cfg.normalization_offset_hz - j as f64 * cfg.normalization_step_hz)
        .collect();
    f.extend(scan);
    f.extend((0..right).map(|j| center_hz + cfg.normalization_offset_hz + j as f64 * cfg.normalization_step_hz));
    if f.windows(2).any(|p| !(p[1] > p[0])) {
        return Err(invalid("baseline points overlap the scan; widen normalization_offset_hz"));
    }
    Ok(f)
}

/// Model trace with optional complex Gaussian noise.
pub fn synthesize_s21_trace(p: &ResonanceParams, cfg: &S21SynthConfig) -> Result<S21Trace> {
    let freqs = probe_grid(p.f_r_hz, cfg)?;
    let mut s21: Vec<Complex64> = freqs.iter().map(|&f| s21_model(p, f)).collect();
    let noise = if cfg.noise_std > 0.0 {
        let mut rng = seeds::stream(cfg.seed, seeds::S21_NOISE, &[]);
        let normal = Normal::new(0.0, cfg.noise_std).map_err(|e| invalid(e.to_string()))?;
        for s in s21.iter_mut() {
            *s += Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng));
        }
        Some(vec![cfg.noise_std; freqs.len()])
    } else {
        None
    };
    Ok(S21Trace { freqs_hz: freqs, s21, noise, n_normalization: cfg.n_normalization })
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct S21FitConfig {
    /// Divide by the baseline points before fitting.
    pub normalize: bool,
    pub initial: Option<ResonanceParams>,
}

/// Residuals in `x = [(f_r − f_c)/w, ln Q_i, ln Q_e, φ]`.
struct S21Problem<'a> {
    f: &'a [f64],
    y: &'a [Complex64],
    inv_sigma: Vec<f64>,
    f_c: f64,
    w: f64,
}

impl S21Problem<'_> {
    fn params(&self, x: &[f64]) -> ResonanceParams {
        ResonanceParams { f_r_hz: self.f_c + self.w * x[0], q_int: x[1].exp(), q_ext: x[2].exp(), phi_rad: x[3] }
    }
}

impl Problem for S21Problem<'_> {
    fn n_residuals(&self) -> usize {
        2 * self.f.len()
    }
    fn residuals(&self, x: &[f64], out: &mut [f64]) {
        let p = self.params(x);
        let m = self.f.len();
        for i in 0..m {
            let d = (s21_model(&p, self.f[i]) - self.y[i]) * self.inv_sigma[i];
            out[i] = d.re;
            out[m + i] = d.im;
        }
    }
    fn jacobian(&self, x: &[f64], out: &mut DMatrix<f64>) {
        let p = self.params(x);
        let m = self.f.len();
        let i_unit = Complex64::new(0.0, 1.0);
        for i in 0..m {
            let f = self.f[i];
            let t = t_term(&p, f);
            let s = Complex64::new(1.0, 0.0) / (1.0 + t);
            let ds_dt = -s * s * self.inv_sigma[i];
            let denom = Complex64::new(f, -2.0 * p.q_int * (p.f_r_hz - f));
            let cols = [
                t * i_unit * 2.0 * p.q_int / denom * self.w,
                t * f / denom,
                -t,
                i_unit * t,
            ];
            for (j, dt) in cols.iter().enumerate() {
                let d = ds_dt * dt;
                out[(i, j)] = d.re;
                out[(m + i, j)] = d.im;
            }
        }
    }
}

/// Closed-form starting point from the inverse trace.
///
/// With `u = 1/S21 − 1`, `1/u` is affine in `1/f`; a weighted complex linear
/// fit of `u (C + D/f) = 1` gives `f_r = −1/Re(C/D)`, `Q_e = |D|/(2 f_r)`,
/// `Q_i = 1/(2 Im(C f_r/D))` and `φ = −π/2 − arg(D)`.
fn algebraic_guess(f: &[f64], y: &[Complex64]) -> Option<ResonanceParams> {
    let m = f.len();
    let fs = f[m / 2];
    // Unknowns: Re C, Im C, Re D', Im D' with D' = D/fs for conditioning.
    let mut a = DMatrix::zeros(2 * m, 4);
    let mut b = DVector::zeros(2 * m);
    for i in 0..m {
        let u = Complex64::new(1.0, 0.0) / y[i] - 1.0;
        let v = u * (fs / f[i]);
        // u C + v D' = 1
        a[(i, 0)] = u.re;
        a[(i, 1)] = -u.im;
        a[(i, 2)] = v.re;
        a[(i, 3)] = -v.im;
        a[(m + i, 0)] = u.im;
        a[(m + i, 1)] = u.re;
        a[(m + i, 2)] = v.im;
        a[(m + i, 3)] = v.re;
        b[i] = 1.0;
    }
    let sol = a.svd(true, true).solve(&b, 1e-14).ok()?;
    let c = Complex64::new(sol[0], sol[1]);
    let d = Complex64::new(sol[2], sol[3]) * fs;
    let f_r = -1.0 / (c / d).re;
    let q_ext = d.norm() / (2.0 * f_r);
    let q_int = 1.0 / (2.0 * (c * f_r / d).im);
    let phi = wrap_angle(-PI / 2.0 - d.arg());
    let ok = f_r.is_finite() && f_r > 0.0 && q_int.is_finite() && q_int > 0.0 && q_ext.is_finite() && q_ext > 0.0;
    ok.then_some(ResonanceParams { f_r_hz: f_r, q_int, q_ext, phi_rad: phi })
}

/// Fallback guess: dip minimum and half-depth width.
fn dip_guess(f: &[f64], y: &[Complex64]) -> ResonanceParams {
    let (imin, smin) = y
        .iter()
        .enumerate()
        .map(|(i, s)| (i, s.norm()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((0, 0.5));
    let half = 0.5 * (1.0 + smin);
    let lo = (0..imin).rev().find(|&i| y[i].norm() > half).unwrap_or(0);
    let hi = (imin..f.len()).find(|&i| y[i].norm() > half).unwrap_or(f.len() - 1);
    let f_r = f[imin];
    let q_l = f_r / (f[hi] - f[lo]).max(f_r * 1e-9);
    // |S21| at resonance is Q_e/(Q_i + Q_e) for φ = 0.
    let ratio = (smin.clamp(1e-3, 0.999)).recip() - 1.0;
    let q_ext = q_l * (1.0 + ratio);
    let q_int = ratio * q_ext;
    ResonanceParams { f_r_hz: f_r, q_int, q_ext, phi_rad: 0.0 }
}

fn wrap_angle(a: f64) -> f64 {
    let mut x = a % (2.0 * PI);
    if x <= -PI {
        x += 2.0 * PI;
    } else if x > PI {
        x -= 2.0 * PI;
    }
    x
}

/// Complex least-squares fit of the hanger model.
pub fn fit_s21(trace: &S21Trace, cfg: &S21FitConfig) -> Result<ResonanceFit> {
    trace.validate()?;
    let trace = if cfg.normalize { normalize_trace(trace)? } else { trace.clone() };
    let f = &trace.freqs_hz;
    let y = &trace.s21;
    let inv_sigma = match &trace.noise {
        Some(n) => n.iter().map(|s| 1.0 / s).collect(),
        None => vec![1.0; f.len()],
    };
    let mut guesses = Vec::new();
    if let Some(p) = cfg.initial {
        guesses.push(p);
    }
    if let Some(p) = algebraic_guess(f, y) {
        guesses.push(p);
    }
    guesses.push(dip_guess(f, y));

    let mut best: Option<(lm::LmReport, f64, f64)> = None;
    let mut last_err = None;
    for g in guesses {
        let w = g.f_r_hz / (g.q_int.recip() + g.q_ext.recip()).recip().max(1.0);
        let problem = S21Problem { f, y, inv_sigma: inv_sigma.clone(), f_c: g.f_r_hz, w };
        let x0 = [0.0, g.q_int.ln(), g.q_ext.ln(), g.phi_rad];
        let lower = [f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY, -PI];
        let upper = [f64::INFINITY, f64::INFINITY, f64::INFINITY, PI];
        match lm::minimize(&problem, &x0, &lower, &upper, &LmConfig::default()) {
            Ok(rep) => {
                if best.as_ref().is_none_or(|b| rep.residual_norm < b.0.residual_norm) {
                    best = Some((rep, g.f_r_hz, w));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    let (rep, f_c, w) = match best {
        Some(b) => b,
        None => {
            return Err(last_err.unwrap_or(Error::FitFailure {
                iterations: 0,
                residual_norm: f64::NAN,
                reason: "no starting point".into(),
            }))
        }
    };
    let x = &rep.params;
    let params = ResonanceParams { f_r_hz: f_c + w * x[0], q_int: x[1].exp(), q_ext: x[2].exp(), phi_rad: wrap_angle(x[3]) };
    let se = &rep.std_errors;
    Ok(ResonanceFit {
        params,
        se_f_r_hz: w * se[0],
        se_q_int: params.q_int * se[1],
        se_q_ext: params.q_ext * se[2],
        se_phi_rad: se[3],
        residual_norm: rep.residual_norm,
        iterations: rep.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r1() -> ResonanceParams {
        ResonanceParams { f_r_hz: 5.581779e9, q_int: 3.5e5, q_ext: 6e4, phi_rad: 0.1 }
    }

    #[test]
    fn limits() {
        let p = ResonanceParams { f_r_hz: 5e9, q_int: 1e5, q_ext: 1e5, phi_rad: 0.0 };
        let s = s21_model(&p, 5e9);
        assert!((s - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((s21_model(&p, 5e9 + 1e9) - 1.0).norm() < 1e-4);
    }

    #[test]
    fn value_at_half_linewidth() {
        let p = r1();
        let f = p.f_r_hz - p.f_r_hz / (2.0 * p.q_int);
        // Δ = f_r/(2Q_i): the denominator becomes f − i f_r.
        let t = Complex64::from_polar(p.q_int / p.q_ext, p.phi_rad) * f / Complex64::new(f, -p.f_r_hz);
        let oracle = 1.0 / (1.0 + t);
        let d = (s21_model(&p, f) - oracle).norm();
        // Forming f_r − f loses about ten digits.
        assert!(d < 1e-9, "{d}");
    }

    #[test]
    fn grid_layout() {
        let trace = synthesize_s21_trace(&r1(), &S21SynthConfig::default()).unwrap();
        assert_eq!(trace.freqs_hz.len(), 116);
        let f0 = r1().f_r_hz - 0.25e6;
        let third = |k: f64| trace.freqs_hz.iter().filter(|&&f| f >= f0 + k * 0.5e6 / 3.0 && f < f0 + (k + 1.0) * 0.5e6 / 3.0).count();
        assert_eq!((third(0.0), third(1.0), third(2.0)), (28, 56, 28));
    }

    #[test]
    fn noiseless_round_trip() {
        let p = r1();
        let trace = synthesize_s21_trace(&p, &S21SynthConfig::default()).unwrap();
        let fit = fit_s21(&trace, &S21FitConfig::default()).unwrap();
        assert!((fit.params.f_r_hz / p.f_r_hz - 1.0).abs() < 1e-12);
        assert!((fit.params.q_int / p.q_int - 1.0).abs() < 1e-9);
        assert!((fit.params.q_ext / p.q_ext - 1.0).abs() < 1e-9);
        assert!((fit.params.phi_rad - p.phi_rad).abs() < 1e-9);
    }

    #[test]
    fn algebraic_guess_is_exact_without_noise() {
        let p = r1();
        let trace = synthesize_s21_trace(&p, &S21SynthConfig::default()).unwrap();
        let g = algebraic_guess(&trace.freqs_hz, &trace.s21).unwrap();
        assert!((g.q_int / p.q_int - 1.0).abs() < 1e-6, "{g:?}");
        assert!((g.f_r_hz - p.f_r_hz).abs() < 1.0);
    }

    #[test]
    fn normalization_divides_out_baseline() {
        let mut trace = synthesize_s21_trace(&r1(), &S21SynthConfig::default()).unwrap();
        let g = Complex64::from_polar(0.3, 1.2);
        trace.s21.iter_mut().for_each(|s| *s *= g);
        let n = normalize_trace(&trace).unwrap();
        let k = n.s21.len();
        let base = (n.s21[0] + n.s21[1] + n.s21[k - 2] + n.s21[k - 1]) / 4.0;
        assert!((base - 1.0).norm() < 1e-12);
    }
}
