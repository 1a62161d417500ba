use super::{coupling_from_dipole, EnsembleConfig, FieldMap};
use crate::error::{invalid, Result};
use crate::physics::{kappa_partial, QTls, ResonatorModel, TTls};
use crate::seeds;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// `round(D · B · V)` with B converted to GHz.
pub fn candidate_count(cfg: &EnsembleConfig) -> usize {
    (cfg.density_per_ghz_um3 * cfg.bandwidth_hz * 1e-9 * cfg.volume_int_um3).round() as usize
}

/// A generated ensemble together with what it was generated for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub resonator: ResonatorModel,
    pub config: EnsembleConfig,
    pub n_candidates: usize,
    pub qtls: Vec<QTls>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub n_candidates: usize,
    pub n_retained: usize,
    pub n_ttls: usize,
    pub g_median_hz: f64,
    pub g_max_hz: f64,
    /// Σκ with every TLS in its ground state at its bare frequency.
    pub sum_kappa_ground_hz: f64,
}

impl Ensemble {
    pub fn summary(&self) -> EnsembleSummary {
        let mut g: Vec<f64> = self.qtls.iter().map(|q| q.g_hz).collect();
        g.sort_by(f64::total_cmp);
        let f_r = self.resonator.f_r_tilde_hz;
        EnsembleSummary {
            n_candidates: self.n_candidates,
            n_retained: self.qtls.len(),
            n_ttls: self.qtls.iter().map(|q| q.ttls.len()).sum(),
            g_median_hz: if g.is_empty() { 0.0 } else { g[g.len() / 2] },
            g_max_hz: g.last().copied().unwrap_or(0.0),
            sum_kappa_ground_hz: self.qtls.iter().map(|q| kappa_partial(q.g_hz, q.gamma1_hz, -1.0, q.f_tilde_hz, f_r)).sum(),
        }
    }

    /// The same TLS population seen by a resonator with a different bare
    /// frequency: every TLS keeps its detuning from the resonator.
    pub fn retuned(&self, resonator: ResonatorModel) -> Ensemble {
        let shift = resonator.f_r_tilde_hz - self.resonator.f_r_tilde_hz;
        let mut out = self.clone();
        out.resonator = resonator;
        out.qtls.iter_mut().for_each(|q| q.f_tilde_hz += shift);
        out
    }

    pub fn to_json<W: std::io::Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer(w, self)?;
        Ok(())
    }

    pub fn from_json<R: std::io::Read>(r: R) -> Result<Self> {
        let e: Ensemble = serde_json::from_reader(r)?;
        e.resonator.validate()?;
        Ok(e)
    }
}

/// Thermal TLSs attached to the quantum TLS with candidate index `qtls_id`.
pub fn sample_ttls_for(qtls_id: u64, cfg: &EnsembleConfig) -> Vec<TTls> {
    let mut rng = seeds::stream(cfg.seed, seeds::TTLS, &[qtls_id]);
    let n = cfg.ttls_per_qtls.sample_count(&mut rng);
    let [lo, hi] = cfg.gamma_switch_range_hz;
    (0..n)
        .map(|_| {
            let delta_f_hz = cfg.delta_f_hz.sample(&mut rng).abs();
            let gamma_switch_hz = (lo.ln() + (hi.ln() - lo.ln()) * rng.random::<f64>()).exp();
            let occupancy_bias = cfg.occupancy_bias.sample(&mut rng).clamp(0.0, 1.0);
            TTls { delta_f_hz, gamma_switch_hz, occupancy_bias }
        })
        .collect()
}

/// Draws `round(D·B·V)` candidates and keeps those with `g ≥ g_min`.
///
/// Each candidate's frequency, position, dipole and Γ1 come from its own
/// stream, so changing `g_min` only changes which candidates survive.
pub fn sample_qtls_ensemble(cfg: &EnsembleConfig, resonator: &ResonatorModel, field: &FieldMap) -> Result<Ensemble> {
    cfg.validate()?;
    resonator.validate()?;
    if field.max() <= 0.0 {
        return Err(invalid("field map is zero everywhere"));
    }
    let n = candidate_count(cfg);
    let (x0, x1) = field.x_bounds();
    let (z0, z1) = field.z_bounds();
    let f_lo = resonator.f_r_tilde_hz - cfg.bandwidth_hz / 2.0;
    let qtls = (0..n as u64)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = seeds::stream(cfg.seed, seeds::CANDIDATE, &[i]);
            let f = f_lo + cfg.bandwidth_hz * rng.random::<f64>();
            let x = x0 + (x1 - x0) * rng.random::<f64>();
            let z = z0 + (z1 - z0) * rng.random::<f64>();
            let cos_t = 2.0 * rng.random::<f64>() - 1.0;
            let az = 2.0 * PI * rng.random::<f64>();
            let p = cfg.dipole_c_m.sample(&mut rng).abs();
            let gamma1 = cfg.gamma1_hz.sample(&mut rng);
            let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
            let dipole = [p * sin_t * az.cos(), p * sin_t * az.sin(), p * cos_t];
            let g = coupling_from_dipole(dipole, [0.0, 0.0, field.at(x, z)]);
            (g >= cfg.g_min_hz).then(|| QTls { id: i, f_tilde_hz: f, g_hz: g, gamma1_hz: gamma1, ttls: sample_ttls_for(i, cfg) })
        })
        .collect();
    Ok(Ensemble { resonator: *resonator, config: cfg.clone(), n_candidates: n, qtls })
}
