use crate::CliError;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use tlsnoise::dynamics::{PumpSchedule, SynthOptions, TimeGrid};
use tlsnoise::ensemble::{sample_qtls_ensemble, AnalyticField, Ensemble, EnsembleConfig, FieldMap};
use tlsnoise::physics::ResonatorModel;
use tlsnoise::presets::{self, Preset};
use tlsnoise::resonfit::SCurveParams;
use tlsnoise::spectral::AnalysisConfig;

/// On-disk run configuration. Every section is optional and overrides the
/// corresponding part of `preset` (R1 when absent).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Option<String>,
    pub resonator: Option<ResonatorModel>,
    pub scurve: Option<SCurveParams>,
    pub ensemble: Option<EnsembleConfig>,
    pub field: Option<AnalyticField>,
    /// Tabulated zero-point field (`x_m, z_m, e_mag_v_per_m`); replaces `field`.
    pub field_map_csv: Option<PathBuf>,
    pub field_ref_f_hz: Option<f64>,
    pub grid: Option<TimeGrid>,
    pub schedule: Option<PumpSchedule>,
    pub dynamics_seed: Option<u64>,
    pub synth: Option<SynthOptions>,
    pub analysis: Option<AnalysisConfig>,
}

/// Fully specified configuration; its JSON form is what gets hashed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Resolved {
    pub preset: Preset,
    pub field_map_csv: Option<PathBuf>,
    pub synth: SynthOptions,
    pub analysis: AnalysisConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let inner = e.inner();
            CliError::config(format!("{} (line {}, key `{}`): {inner}", path.display(), inner.line(), e.path()))
        })
    }

    /// A config that spells out every section of `p`.
    pub fn from_preset(p: &Preset) -> Self {
        RunConfig {
            preset: Some(p.name.clone()),
            resonator: Some(p.resonator),
            scurve: Some(p.scurve),
            ensemble: Some(p.ensemble.clone()),
            field: Some(p.field),
            field_map_csv: None,
            field_ref_f_hz: Some(p.field_ref_f_hz),
            grid: Some(p.grid),
            schedule: Some(p.schedule.clone()),
            dynamics_seed: Some(p.dynamics_seed),
            synth: Some(SynthOptions::default()),
            analysis: Some(AnalysisConfig::default()),
        }
    }

    pub fn resolve(self, preset_override: Option<&str>) -> Result<Resolved, CliError> {
        let name = preset_override.map(str::to_string).or(self.preset).unwrap_or_else(|| "r1".into());
        let mut p = presets::by_name(&name)
            .ok_or_else(|| CliError::config(format!("unknown preset `{name}` (expected one of {})", presets::NAMES.join(", "))))?;
        if let Some(v) = self.resonator {
            p.resonator = v;
        }
        if let Some(v) = self.scurve {
            p.scurve = v;
        }
        if let Some(v) = self.ensemble {
            p.ensemble = v;
        }
        if let Some(v) = self.field {
            p.field = v;
        }
        if let Some(v) = self.field_ref_f_hz {
            p.field_ref_f_hz = v;
        }
        if let Some(v) = self.grid {
            p.grid = v;
        }
        if let Some(v) = self.schedule {
            p.schedule = v;
        }
        if let Some(v) = self.dynamics_seed {
            p.dynamics_seed = v;
        }
        p.resonator.validate()?;
        p.ensemble.validate()?;
        p.grid.validate()?;
        Ok(Resolved { preset: p, field_map_csv: self.field_map_csv, synth: self.synth.unwrap_or_default(), analysis: self.analysis.unwrap_or_default() })
    }
}

impl Resolved {
    pub fn field_map(&self) -> Result<FieldMap, CliError> {
        match &self.field_map_csv {
            Some(path) => {
                let f = std::fs::File::open(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
                Ok(FieldMap::from_csv(std::io::BufReader::new(f))?)
            }
            None => Ok(self.preset.field_map()?),
        }
    }

    pub fn build_ensemble(&self) -> Result<Ensemble, CliError> {
        Ok(sample_qtls_ensemble(&self.preset.ensemble, &self.preset.resonator, &self.field_map()?)?)
    }

    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("configuration serializes")
    }
}

/// Source of a configuration on the command line.
pub fn load(config: Option<&Path>, preset: Option<&str>) -> Result<Resolved, CliError> {
    let base = match config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    base.resolve(preset)
}
