//! Bounded Levenberg-Marquardt for small dense least-squares problems.
//!
//! Box constraints are handled with an active set: a parameter sitting on a
//! bound whose gradient points outward is frozen for the step, the damped
//! normal equations are solved over the remaining ones, and the trial point is
//! projected back into the box.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// A residual vector `r(p)` and its Jacobian `∂r_i/∂p_j`.
pub trait Problem {
    fn n_residuals(&self) -> usize;
    fn residuals(&self, p: &[f64], out: &mut [f64]);
    /// Defaults to central differences.
    fn jacobian(&self, p: &[f64], out: &mut DMatrix<f64>) {
        finite_difference_jacobian(self, p, out);
    }
}

pub fn finite_difference_jacobian<P: Problem + ?Sized>(problem: &P, p: &[f64], out: &mut DMatrix<f64>) {
    let m = problem.n_residuals();
    let mut x = p.to_vec();
    let mut rp = vec![0.0; m];
    let mut rm = vec![0.0; m];
    for j in 0..p.len() {
        let h = 1e-6 * p[j].abs().max(1e-6);
        x[j] = p[j] + h;
        problem.residuals(&x, &mut rp);
        x[j] = p[j] - h;
        problem.residuals(&x, &mut rm);
        x[j] = p[j];
        for i in 0..m {
            out[(i, j)] = (rp[i] - rm[i]) / (2.0 * h);
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmConfig {
    pub max_iterations: usize,
    /// Stop when the relative cost decrease of an accepted step falls below this.
    pub ftol: f64,
    /// Stop when the relative step length falls below this.
    pub xtol: f64,
    /// Stop when the projected gradient (inf-norm) falls below this.
    pub gtol: f64,
    pub initial_damping: f64,
    /// Scale the covariance by the residual variance `2·cost/(m − n)`.
    /// Turn off when residuals are already divided by their standard deviations.
    pub scale_covariance: bool,
}

impl Default for LmConfig {
    fn default() -> Self {
        LmConfig {
            max_iterations: 500,
            ftol: 1e-15,
            xtol: 1e-15,
            gtol: 1e-30,
            initial_damping: 1e-3,
            scale_covariance: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmReport {
    pub params: Vec<f64>,
    /// Linearized standard errors; zero for parameters pinned at a bound.
    pub std_errors: Vec<f64>,
    pub covariance: DMatrix<f64>,
    pub bound_active: Vec<bool>,
    /// `sqrt(Σ r²)` at the solution.
    pub residual_norm: f64,
    pub iterations: usize,
    /// Ratio of extreme singular values of the Jacobian over free parameters.
    pub condition_number: f64,
    pub converged: bool,
}

fn cost(r: &[f64]) -> f64 {
    0.5 * r.iter().map(|v| v * v).sum::<f64>()
}

/// Minimizes `½‖r(p)‖²` subject to `lower ≤ p ≤ upper`.
pub fn minimize<P: Problem + ?Sized>(
    problem: &P,
    p0: &[f64],
    lower: &[f64],
    upper: &[f64],
    cfg: &LmConfig,
) -> Result<LmReport> {
    let rep = minimize_unchecked(problem, p0, lower, upper, cfg)?;
    if !rep.converged {
        return Err(Error::FitFailure { iterations: rep.iterations, residual_norm: rep.residual_norm, reason: "iteration limit reached".into() });
    }
    Ok(rep)
}

/// Like [`minimize`], but hitting the iteration limit still yields the last
/// iterate with `converged == false`, so callers can inspect why.
pub fn minimize_unchecked<P: Problem + ?Sized>(
    problem: &P,
    p0: &[f64],
    lower: &[f64],
    upper: &[f64],
    cfg: &LmConfig,
) -> Result<LmReport> {
    let n = p0.len();
    let m = problem.n_residuals();
    assert_eq!(lower.len(), n);
    assert_eq!(upper.len(), n);
    if m < n {
        return Err(Error::InvalidInput(format!("{m} residuals cannot determine {n} parameters")));
    }
    let project = |x: &mut [f64]| {
        for i in 0..n {
            x[i] = x[i].clamp(lower[i], upper[i]);
        }
    };

    let mut x = p0.to_vec();
    project(&mut x);
    let mut r = vec![0.0; m];
    problem.residuals(&x, &mut r);
    let mut c = cost(&r);
    if !c.is_finite() {
        return Err(Error::FitFailure { iterations: 0, residual_norm: f64::NAN, reason: "non-finite residuals at the initial guess".into() });
    }
    let mut jac = DMatrix::zeros(m, n);
    problem.jacobian(&x, &mut jac);
    let mut lambda = cfg.initial_damping;
    let mut x_trial = vec![0.0; n];
    let mut r_trial = vec![0.0; m];
    let mut iterations = 0;
    let mut converged = c == 0.0;

    while !converged && iterations < cfg.max_iterations {
        iterations += 1;
        let rv = DVector::from_column_slice(&r);
        let grad = jac.transpose() * &rv;
        let free: Vec<usize> = (0..n)
            .filter(|&i| !((x[i] <= lower[i] && grad[i] > 0.0) || (x[i] >= upper[i] && grad[i] < 0.0)))
            .collect();
        let pg = free.iter().map(|&i| grad[i].abs()).fold(0.0, f64::max);
        if free.is_empty() || pg <= cfg.gtol {
            converged = true;
            break;
        }
        let jf = jac.select_columns(&free);
        let jtj = jf.transpose() * &jf;
        let g_f = DVector::from_iterator(free.len(), free.iter().map(|&i| grad[i]));

        // Inner loop: raise the damping until a step lowers the cost.
        let mut accepted = false;
        for _ in 0..60 {
            let mut a = jtj.clone();
            for k in 0..free.len() {
                let d = jtj[(k, k)].max(1e-300);
                a[(k, k)] += lambda * d;
            }
            let step = match a.clone().cholesky() {
                Some(ch) => ch.solve(&(-&g_f)),
                None => match a.svd(true, true).solve(&(-&g_f), 1e-300) {
                    Ok(s) => s,
                    Err(_) => {
                        lambda *= 10.0;
                        continue;
                    }
                },
            };
            x_trial.copy_from_slice(&x);
            for (k, &i) in free.iter().enumerate() {
                x_trial[i] += step[k];
            }
            project(&mut x_trial);
            problem.residuals(&x_trial, &mut r_trial);
            let c_trial = cost(&r_trial);
            if c_trial.is_finite() && c_trial < c {
                let dx2: f64 = x.iter().zip(&x_trial).map(|(a, b)| (a - b) * (a - b)).sum();
                let x2: f64 = x.iter().map(|a| a * a).sum();
                let rel_drop = (c - c_trial) / c;
                x.copy_from_slice(&x_trial);
                r.copy_from_slice(&r_trial);
                c = c_trial;
                lambda = (lambda / 3.0).max(1e-15);
                accepted = true;
                if c == 0.0 || rel_drop < cfg.ftol || dx2.sqrt() <= cfg.xtol * (x2.sqrt() + cfg.xtol) {
                    converged = true;
                }
                break;
            }
            lambda *= 4.0;
            if lambda > 1e32 {
                break;
            }
        }
        if !accepted {
            // No downhill step exists at any damping: a (possibly constrained) minimum.
            converged = true;
        }
        problem.jacobian(&x, &mut jac);
    }

    let residual_norm = (2.0 * c).sqrt();

    let rv = DVector::from_column_slice(&r);
    let grad = jac.transpose() * &rv;
    let scale = jac.column_iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
    let bound_active: Vec<bool> = (0..n)
        .map(|i| {
            let tol = 1e-12 * (1.0 + x[i].abs());
            (x[i] - lower[i] <= tol && grad[i] >= -1e-12 * scale) || (upper[i] - x[i] <= tol && grad[i] <= 1e-12 * scale)
        })
        .collect();
    let free: Vec<usize> = (0..n).filter(|&i| !bound_active[i]).collect();
    let mut covariance = DMatrix::zeros(n, n);
    let mut condition_number = 1.0;
    if !free.is_empty() {
        let jf = jac.select_columns(&free);
        let svd = jf.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        condition_number = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        let jtj = jf.transpose() * &jf;
        let inv = jtj.clone().try_inverse().unwrap_or_else(|| {
            jtj.pseudo_inverse(1e-300).unwrap_or_else(|_| DMatrix::zeros(free.len(), free.len()))
        });
        let dof = (m - free.len()).max(1) as f64;
        let s2 = if cfg.scale_covariance { 2.0 * c / dof } else { 1.0 };
        for (a, &i) in free.iter().enumerate() {
            for (b, &j) in free.iter().enumerate() {
                covariance[(i, j)] = s2 * inv[(a, b)];
            }
        }
    }
    let std_errors = (0..n).map(|i| covariance[(i, i)].max(0.0).sqrt()).collect();
    Ok(LmReport { params: x, std_errors, covariance, bound_active, residual_norm, iterations, condition_number, converged })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Line {
        t: Vec<f64>,
        y: Vec<f64>,
    }

    impl Problem for Line {
        fn n_residuals(&self) -> usize {
            self.t.len()
        }
        fn residuals(&self, p: &[f64], out: &mut [f64]) {
            for i in 0..self.t.len() {
                out[i] = p[0] + p[1] * self.t[i] - self.y[i];
            }
        }
    }

    #[test]
    fn exact_line() {
        let t: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y = t.iter().map(|t| 2.0 - 0.5 * t).collect();
        let rep = minimize(&Line { t, y }, &[0.0, 0.0], &[-10.0; 2], &[10.0; 2], &LmConfig::default()).unwrap();
        assert!((rep.params[0] - 2.0).abs() < 1e-10);
        assert!((rep.params[1] + 0.5).abs() < 1e-10);
    }

    #[test]
    fn lower_bound_pins_slope() {
        // Best unconstrained slope is negative; with slope ≥ 0 the optimum is the mean.
        let t: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = t.iter().map(|t| 3.0 - 0.2 * t).collect();
        let mean = y.iter().sum::<f64>() / 10.0;
        let rep = minimize(&Line { t, y }, &[1.0, 1.0], &[-10.0, 0.0], &[10.0, 10.0], &LmConfig::default()).unwrap();
        assert_eq!(rep.params[1], 0.0);
        assert!(rep.bound_active[1] && !rep.bound_active[0]);
        assert!((rep.params[0] - mean).abs() < 1e-10);
        assert_eq!(rep.std_errors[1], 0.0);
    }

    struct Rosenbrock;
    impl Problem for Rosenbrock {
        fn n_residuals(&self) -> usize {
            2
        }
        fn residuals(&self, p: &[f64], out: &mut [f64]) {
            out[0] = 10.0 * (p[1] - p[0] * p[0]);
            out[1] = 1.0 - p[0];
        }
    }

    #[test]
    fn rosenbrock_valley() {
        let rep = minimize(&Rosenbrock, &[-1.2, 1.0], &[-5.0; 2], &[5.0; 2], &LmConfig::default()).unwrap();
        assert!((rep.params[0] - 1.0).abs() < 1e-8 && (rep.params[1] - 1.0).abs() < 1e-8, "{:?}", rep.params);
    }

    #[test]
    fn standard_errors_match_ols() {
        // y = a + b t with known residuals; compare against the closed-form OLS errors.
        let t: Vec<f64> = (0..8).map(|i| i as f64).collect();
        let noise = [0.1, -0.2, 0.05, 0.0, 0.15, -0.1, -0.05, 0.1];
        let y: Vec<f64> = t.iter().zip(noise).map(|(t, e)| 1.0 + 2.0 * t + e).collect();
        let rep = minimize(&Line { t: t.clone(), y: y.clone() }, &[0.0, 0.0], &[-1e3; 2], &[1e3; 2], &LmConfig::default()).unwrap();
        let n = t.len() as f64;
        let tm = t.iter().sum::<f64>() / n;
        let sxx: f64 = t.iter().map(|t| (t - tm).powi(2)).sum();
        let rss: f64 = t.iter().zip(&y).map(|(t, y)| (y - rep.params[0] - rep.params[1] * t).powi(2)).sum();
        let s2 = rss / (n - 2.0);
        let se_b = (s2 / sxx).sqrt();
        assert!((rep.std_errors[1] - se_b).abs() / se_b < 1e-6);
    }
}
