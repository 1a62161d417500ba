use super::{simulate_rts, RtsTrace, TimeGrid};
use crate::ensemble::Ensemble;
use crate::error::{invalid, Result};
use crate::physics::{
    freq_shift_partial, kappa_partial, saturation_population, thermal_factor, DriveContext, PumpSetting, QTls, ShiftConvention,
};
use crate::seeds;
use crate::spectral::TimeSeries;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthOptions {
    /// Multiply populations by `tanh(h f / 2 k_B T)`.
    pub thermal: bool,
    pub shift_convention: ShiftConvention,
    /// Internal rate used in the photon-number linewidth; `None` means the background rate.
    pub gamma_int_for_drive_hz: Option<f64>,
    /// TLSs per work unit. Fixed so sums do not depend on the thread count.
    pub chunk_size: usize,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions { thermal: true, shift_convention: ShiftConvention::Physical, gamma_int_for_drive_hz: None, chunk_size: 64 }
    }
}

/// Resonator series for every pump setting on a shared time axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub times_s: Vec<f64>,
    pub period_id: Vec<u32>,
    pub labels: Vec<String>,
    pub drives: Vec<DriveContext>,
    /// `gamma_int_hz[setting][sample]`.
    pub gamma_int_hz: Vec<Vec<f64>>,
    pub f_r_hz: Vec<Vec<f64>>,
    pub seed: u64,
}

impl SimulationResult {
    pub fn gamma_series(&self, setting: usize) -> TimeSeries {
        TimeSeries {
            timestamps_s: self.times_s.clone(),
            values: self.gamma_int_hz[setting].clone(),
            period_id: self.period_id.clone(),
            unit: "Hz".into(),
        }
    }

    pub fn f_r_series(&self, setting: usize) -> TimeSeries {
        TimeSeries {
            timestamps_s: self.times_s.clone(),
            values: self.f_r_hz[setting].clone(),
            period_id: self.period_id.clone(),
            unit: "Hz".into(),
        }
    }

    /// Rows `t_s, setting_id, gamma_int_hz, f_r_hz`, sample-major.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["t_s", "setting_id", "gamma_int_hz", "f_r_hz"])?;
        for i in 0..self.times_s.len() {
            for s in 0..self.labels.len() {
                wtr.write_record([
                    self.times_s[i].to_string(),
                    s.to_string(),
                    self.gamma_int_hz[s][i].to_string(),
                    self.f_r_hz[s][i].to_string(),
                ])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

/// `f_k(t) = f̃_k + Σ_ℓ s_ℓ(t) |δf_ℓ|`.
pub fn qtls_frequency_series(q: &QTls, traces: &[RtsTrace]) -> Result<Vec<f64>> {
    if traces.len() != q.ttls.len() {
        return Err(invalid(format!("{} telegraph traces for {} thermal TLSs", traces.len(), q.ttls.len())));
    }
    let n = traces.first().map_or(0, |t| t.states.len());
    if traces.iter().any(|t| t.states.len() != n) {
        return Err(invalid("telegraph traces differ in length"));
    }
    let mut f = vec![q.f_tilde_hz; n];
    for (tr, tt) in traces.iter().zip(&q.ttls) {
        for (fi, &s) in f.iter_mut().zip(&tr.states) {
            *fi += s as f64 * tt.delta_f_hz;
        }
    }
    Ok(f)
}

fn frequency_trajectory(q: &QTls, times: &[f64], seed: u64) -> Vec<f64> {
    if q.ttls.is_empty() {
        return vec![q.f_tilde_hz; times.len()];
    }
    let traces: Vec<RtsTrace> = q
        .ttls
        .iter()
        .enumerate()
        .map(|(l, t)| simulate_rts(t, times, &mut seeds::stream(seed, seeds::RTS, &[q.id, l as u64])))
        .collect();
    qtls_frequency_series(q, &traces).expect("one trace per thermal TLS")
}

/// Propagates every TLS trajectory to `Γ_int(t)` and `f_r(t)` for each pump
/// setting. The same trajectories are reused for all settings.
pub fn synthesize_resonator_series(
    ensemble: &Ensemble,
    settings: &[(String, PumpSetting)],
    grid: &TimeGrid,
    seed: u64,
    opts: &SynthOptions,
) -> Result<SimulationResult> {
    grid.validate()?;
    if settings.is_empty() {
        return Err(invalid("no pump settings"));
    }
    if opts.chunk_size == 0 {
        return Err(invalid("chunk_size must be positive"));
    }
    let res = &ensemble.resonator;
    res.validate()?;
    let gamma_drive = opts.gamma_int_for_drive_hz.unwrap_or(res.gamma_int_bg_hz);
    let drives: Vec<DriveContext> = settings.iter().map(|(_, s)| s.drive(res, gamma_drive)).collect::<Result<_>>()?;
    let times = grid.times();
    let n_t = times.len();
    let n_s = settings.len();
    let temperature = if opts.thermal { res.temperature_k } else { 0.0 };
    let f_r = res.f_r_tilde_hz;

    let partials: Vec<(Vec<f64>, Vec<f64>)> = ensemble
        .qtls
        .par_chunks(opts.chunk_size)
        .map(|chunk| {
            let mut kap = vec![0.0; n_s * n_t];
            let mut shift = vec![0.0; n_s * n_t];
            for q in chunk {
                let fk = frequency_trajectory(q, &times, seed);
                for (s, d) in drives.iter().enumerate() {
                    let (ks, ss) = (&mut kap[s * n_t..(s + 1) * n_t], &mut shift[s * n_t..(s + 1) * n_t]);
                    for i in 0..n_t {
                        let sigma = thermal_factor(fk[i], temperature)
                            * saturation_population(q.g_hz, q.gamma1_hz, fk[i] - d.f_p_hz, d.mean_n);
                        ks[i] += kappa_partial(q.g_hz, q.gamma1_hz, sigma, fk[i], f_r);
                        ss[i] += freq_shift_partial(q.g_hz, q.gamma1_hz, sigma, fk[i], f_r);
                    }
                }
            }
            (kap, shift)
        })
        .collect();

    let mut kap = vec![0.0; n_s * n_t];
    let mut shift = vec![0.0; n_s * n_t];
    for (k, s) in &partials {
        kap.iter_mut().zip(k).for_each(|(a, b)| *a += b);
        shift.iter_mut().zip(s).for_each(|(a, b)| *a += b);
    }
    let sign = opts.shift_convention.sign();
    let gamma_int_hz = (0..n_s).map(|s| kap[s * n_t..(s + 1) * n_t].iter().map(|k| res.gamma_int_bg_hz + k).collect()).collect();
    let f_r_hz = (0..n_s).map(|s| shift[s * n_t..(s + 1) * n_t].iter().map(|d| f_r + sign * d).collect()).collect();
    Ok(SimulationResult {
        times_s: times,
        period_id: grid.period_ids(),
        labels: settings.iter().map(|(l, _)| l.clone()).collect(),
        drives,
        gamma_int_hz,
        f_r_hz,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::TTls;

    fn q_with(deltas: &[f64]) -> QTls {
        QTls {
            id: 0,
            f_tilde_hz: 5e9,
            g_hz: 1e4,
            gamma1_hz: 1e6,
            ttls: deltas.iter().map(|&d| TTls { delta_f_hz: d, gamma_switch_hz: 1e-3, occupancy_bias: 0.5 }).collect(),
        }
    }

    #[test]
    fn no_ttls_is_constant() {
        let f = qtls_frequency_series(&q_with(&[]), &[]).unwrap();
        assert!(f.is_empty());
        let f = frequency_trajectory(&q_with(&[]), &[0.0, 1.0, 2.0], 1);
        assert_eq!(f, vec![5e9; 3]);
    }

    #[test]
    fn two_fluctuator_levels() {
        let q = q_with(&[1e3, 2e3]);
        let times: Vec<f64> = (0..5000).map(|i| i as f64 * 520.0).collect();
        let f = frequency_trajectory(&q, &times, 9);
        for v in &f {
            let k = (v - 5e9) / 1e3;
            assert!([-3.0, -1.0, 1.0, 3.0].contains(&k), "{k}");
        }
    }

    #[test]
    fn mismatched_traces_rejected() {
        let q = q_with(&[1e3]);
        assert!(qtls_frequency_series(&q, &[]).is_err());
    }
}
