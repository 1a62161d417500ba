use crate::constants::E_ANGSTROM;
use crate::error::{invalid, Result};
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

/// A scalar distribution given in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Dist {
    Fixed { value: f64 },
    Uniform { lo: f64, hi: f64 },
    LogUniform { lo: f64, hi: f64 },
    /// Counts only.
    Poisson { mean: f64 },
}

impl Dist {
    pub fn validate(&self, name: &str) -> Result<()> {
        let ok = match *self {
            Dist::Fixed { value } => value.is_finite(),
            Dist::Uniform { lo, hi } => lo.is_finite() && hi.is_finite() && lo <= hi,
            Dist::LogUniform { lo, hi } => lo > 0.0 && hi.is_finite() && lo <= hi,
            Dist::Poisson { mean } => mean >= 0.0 && mean.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("{name}: invalid distribution {self:?}")))
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Dist::Fixed { value } => value,
            Dist::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            Dist::LogUniform { lo, hi } => (lo.ln() + (hi.ln() - lo.ln()) * rng.random::<f64>()).exp(),
            Dist::Poisson { mean } => {
                if mean == 0.0 {
                    0.0
                } else {
                    Poisson::new(mean).expect("validated mean").sample(rng)
                }
            }
        }
    }

    pub fn sample_count<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.sample(rng).round().max(0.0) as usize
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Dist::Fixed { value } => value,
            Dist::Uniform { lo, hi } => 0.5 * (lo + hi),
            Dist::LogUniform { lo, hi } if hi > lo => (hi - lo) / (hi / lo).ln(),
            Dist::LogUniform { lo, .. } => lo,
            Dist::Poisson { mean } => mean,
        }
    }

    /// Upper end of the support.
    pub fn max(&self) -> f64 {
        match *self {
            Dist::Fixed { value } => value,
            Dist::Uniform { hi, .. } | Dist::LogUniform { hi, .. } => hi,
            Dist::Poisson { .. } => f64::INFINITY,
        }
    }

    /// Lower end of the support.
    pub fn min(&self) -> f64 {
        match *self {
            Dist::Fixed { value } => value,
            Dist::Uniform { lo, .. } | Dist::LogUniform { lo, .. } => lo,
            Dist::Poisson { .. } => 0.0,
        }
    }
}

/// Generation parameters for the TLS ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleConfig {
    pub bandwidth_hz: f64,
    pub density_per_ghz_um3: f64,
    pub volume_int_um3: f64,
    pub g_min_hz: f64,
    pub seed: u64,
    pub dipole_c_m: Dist,
    pub gamma1_hz: Dist,
    pub ttls_per_qtls: Dist,
    pub delta_f_hz: Dist,
    /// Switching rates are log-uniform over this range.
    pub gamma_switch_range_hz: [f64; 2],
    pub occupancy_bias: Dist,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            bandwidth_hz: 300e6,
            density_per_ghz_um3: 400.0,
            volume_int_um3: 157.0,
            g_min_hz: 2e3,
            seed: 1,
            dipole_c_m: Dist::Fixed { value: E_ANGSTROM },
            gamma1_hz: Dist::LogUniform { lo: 3e6, hi: 3e7 },
            ttls_per_qtls: Dist::Poisson { mean: 4.0 },
            delta_f_hz: Dist::LogUniform { lo: 1e3, hi: 1e6 },
            gamma_switch_range_hz: [1e-6, 1e-2],
            occupancy_bias: Dist::Fixed { value: 0.5 },
        }
    }
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("bandwidth_hz", self.bandwidth_hz),
            ("density_per_ghz_um3", self.density_per_ghz_um3),
            ("volume_int_um3", self.volume_int_um3),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive")));
            }
        }
        if !(self.g_min_hz >= 0.0) {
            return Err(invalid("g_min_hz must be non-negative"));
        }
        let [lo, hi] = self.gamma_switch_range_hz;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(invalid("gamma_switch_range_hz must be positive and ordered"));
        }
        self.dipole_c_m.validate("dipole_c_m")?;
        self.gamma1_hz.validate("gamma1_hz")?;
        if !(self.gamma1_hz.min() > 0.0) {
            return Err(invalid("gamma1_hz must be strictly positive"));
        }
        self.ttls_per_qtls.validate("ttls_per_qtls")?;
        self.delta_f_hz.validate("delta_f_hz")?;
        self.occupancy_bias.validate("occupancy_bias")?;
        if self.occupancy_bias.min() < 0.0 || self.occupancy_bias.max() > 1.0 {
            return Err(invalid("occupancy_bias must lie in [0, 1]"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn log_uniform_mean() {
        let d = Dist::LogUniform { lo: 1.0, hi: std::f64::consts::E };
        assert!((d.mean() - (std::f64::consts::E - 1.0)).abs() < 1e-15);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let m: f64 = (0..200_000).map(|_| d.sample(&mut rng)).sum::<f64>() / 200_000.0;
        assert!((m - d.mean()).abs() < 0.01);
    }

    #[test]
    fn json_shape() {
        let d: Dist = serde_json::from_str(r#"{"kind":"poisson","mean":4}"#).unwrap();
        assert_eq!(d, Dist::Poisson { mean: 4.0 });
        assert!(serde_json::from_str::<Dist>(r#"{"kind":"poisson","mean":4,"x":1}"#).is_err());
    }

    #[test]
    fn default_validates() {
        EnsembleConfig::default().validate().unwrap();
        let bad = EnsembleConfig { density_per_ghz_um3: -1.0, ..Default::default() };
        assert!(bad.validate().unwrap_err().to_string().contains("density_per_ghz_um3"));
    }
}
