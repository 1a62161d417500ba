use crate::error::{invalid, Error, Result};
use crate::lm::{self, LmConfig, Problem};
use crate::seeds;
use nalgebra::DMatrix;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// `1/Q = F tanδ⁰ (1 + n/n_c)^(−α) + 1/Q̃`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SCurveParams {
    pub f_tan_delta0: f64,
    pub n_c: f64,
    pub alpha: f64,
    /// Power-independent internal quality factor.
    pub q_int_bg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SCurveFit {
    pub params: SCurveParams,
    pub se_f_tan_delta0: f64,
    pub se_n_c: f64,
    pub se_alpha: f64,
    pub se_q_int_bg: f64,
    pub residual_norm: f64,
    pub condition_number: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SCurvePoint {
    pub mean_n: f64,
    pub q_int: f64,
    /// Standard deviation of `q_int`; `None` weights points by relative error.
    pub q_int_err: Option<f64>,
}

pub fn scurve_model(p: &SCurveParams, mean_n: f64) -> f64 {
    p.f_tan_delta0 * (1.0 + mean_n / p.n_c).powf(-p.alpha) + 1.0 / p.q_int_bg
}

/// Points on a log-spaced photon-number grid, with optional multiplicative
/// Gaussian noise of relative size `rel_noise` on `Q`.
pub fn synthesize_scurve(p: &SCurveParams, n_lo: f64, n_hi: f64, n_points: usize, rel_noise: f64, seed: u64) -> Vec<SCurvePoint> {
    let mut rng = seeds::stream(seed, seeds::SCURVE_NOISE, &[]);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    (0..n_points)
        .map(|i| {
            let t = if n_points > 1 { i as f64 / (n_points - 1) as f64 } else { 0.0 };
            let n = n_lo * (n_hi / n_lo).powf(t);
            let q = 1.0 / scurve_model(p, n);
            let (q, err) = if rel_noise > 0.0 { (q * (1.0 + rel_noise * normal.sample(&mut rng)), Some(rel_noise * q)) } else { (q, None) };
            SCurvePoint { mean_n: n, q_int: q, q_int_err: err }
        })
        .collect()
}

/// Residuals `(model − 1/Q)/σ_{1/Q}` in `x = ln(F, n_c, α, 1/Q̃)`.
struct SCurveProblem {
    n: Vec<f64>,
    inv_q: Vec<f64>,
    w: Vec<f64>,
}

fn from_x(x: &[f64]) -> SCurveParams {
    SCurveParams { f_tan_delta0: x[0].exp(), n_c: x[1].exp(), alpha: x[2].exp(), q_int_bg: (-x[3]).exp() }
}

impl Problem for SCurveProblem {
    fn n_residuals(&self) -> usize {
        self.n.len()
    }
    fn residuals(&self, x: &[f64], out: &mut [f64]) {
        let p = from_x(x);
        for i in 0..self.n.len() {
            out[i] = (scurve_model(&p, self.n[i]) - self.inv_q[i]) * self.w[i];
        }
    }
    fn jacobian(&self, x: &[f64], out: &mut DMatrix<f64>) {
        let p = from_x(x);
        for i in 0..self.n.len() {
            let r = self.n[i] / p.n_c;
            let base = 1.0 + r;
            let pw = base.powf(-p.alpha);
            let term = p.f_tan_delta0 * pw;
            out[(i, 0)] = term * self.w[i];
            out[(i, 1)] = term * p.alpha * r / base * self.w[i];
            out[(i, 2)] = -term * p.alpha * base.ln() * self.w[i];
            out[(i, 3)] = self.w[i] / p.q_int_bg;
        }
    }
}

/// Condition numbers above this mean the data cannot separate the parameters.
pub const SCURVE_MAX_CONDITION: f64 = 1e8;

pub fn fit_scurve(points: &[SCurvePoint]) -> Result<SCurveFit> {
    if points.len() < 5 {
        return Err(invalid("an S-curve fit needs at least 5 points"));
    }
    if points.iter().any(|p| !(p.q_int > 0.0) || !(p.mean_n >= 0.0)) {
        return Err(invalid("quality factors must be positive and photon numbers non-negative"));
    }
    let n: Vec<f64> = points.iter().map(|p| p.mean_n).collect();
    let inv_q: Vec<f64> = points.iter().map(|p| 1.0 / p.q_int).collect();
    // σ(1/Q) = σ_Q / Q²; unweighted points use relative residuals.
    let w: Vec<f64> = points
        .iter()
        .map(|p| match p.q_int_err {
            Some(e) if e > 0.0 => p.q_int * p.q_int / e,
            _ => p.q_int,
        })
        .collect();
    let scale_cov = points.iter().any(|p| p.q_int_err.is_none());

    let mut order: Vec<usize> = (0..n.len()).collect();
    order.sort_by(|&a, &b| n[a].total_cmp(&n[b]));
    let lo = inv_q[order[0]];
    let hi = inv_q[*order.last().unwrap()];
    let bg_guess = hi.min(lo) * 0.9;
    let f_guess = (lo - bg_guess).abs().max(lo * 1e-3);
    let half = bg_guess + 0.5 * (lo - bg_guess);
    let nc_guess = order.iter().find(|&&i| inv_q[i] < half).map(|&i| n[i]).unwrap_or(n[order[0]]).max(1e-6);

    let problem = SCurveProblem { n, inv_q, w };
    let cfg = LmConfig { scale_covariance: scale_cov, ..LmConfig::default() };
    let mut best: Option<lm::LmReport> = None;
    let mut last_err = None;
    let mut stalled: Option<lm::LmReport> = None;
    for alpha in [0.25, 0.5, 0.9] {
        for nc_mult in [0.1, 1.0, 10.0] {
            let x0 = [f_guess.ln(), (nc_guess * nc_mult).ln(), f64::ln(alpha), bg_guess.ln()];
            match lm::minimize_unchecked(&problem, &x0, &[f64::NEG_INFINITY; 4], &[f64::INFINITY; 4], &cfg) {
                Ok(rep) if !rep.converged => {
                    if stalled.as_ref().is_none_or(|b| rep.residual_norm < b.residual_norm) {
                        stalled = Some(rep);
                    }
                }
                Ok(rep) => {
                    if best.as_ref().is_none_or(|b| rep.residual_norm < b.residual_norm) {
                        best = Some(rep);
                    }
                }
                Err(e) => last_err = Some(e),
            }
        }
    }
    let rep = match best {
        Some(r) => r,
        None => {
            if let Some(s) = stalled {
                if !(s.condition_number < SCURVE_MAX_CONDITION) {
                    return Err(Error::IllConditioned(format!(
                        "no start converged; Jacobian condition number {:.2e} at the last iterate, so the photon-number span \
                         does not constrain all four parameters",
                        s.condition_number
                    )));
                }
                return Err(Error::FitFailure { iterations: s.iterations, residual_norm: s.residual_norm, reason: "iteration limit reached".into() });
            }
            return Err(last_err.unwrap_or(Error::FitFailure { iterations: 0, residual_norm: f64::NAN, reason: "no starting point".into() }))
        }
    };
    if !(rep.condition_number < SCURVE_MAX_CONDITION) {
        return Err(Error::IllConditioned(format!(
            "Jacobian condition number {:.2e}; the photon-number span does not constrain all four parameters",
            rep.condition_number
        )));
    }
    let p = from_x(&rep.params);
    let se = &rep.std_errors;
    Ok(SCurveFit {
        params: p,
        se_f_tan_delta0: p.f_tan_delta0 * se[0],
        se_n_c: p.n_c * se[1],
        se_alpha: p.alpha * se[2],
        se_q_int_bg: p.q_int_bg * se[3],
        residual_norm: rep.residual_norm,
        condition_number: rep.condition_number,
    })
}
