use crate::error::{invalid, Result};
use crate::physics::PumpSetting;
use crate::units::{dbm_to_watts, power_at_sample};
use serde::{Deserialize, Serialize};

/// One entry of the pump cycle, in source units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpSpec {
    pub label: String,
    /// Source power; `None` turns the pump off.
    pub source_dbm: Option<f64>,
    /// `f̃_r − f_p`; ignored when the pump is off.
    #[serde(default)]
    pub detuning_hz: f64,
}

impl PumpSpec {
    pub fn off() -> Self {
        PumpSpec { label: "off".into(), source_dbm: None, detuning_hz: 0.0 }
    }

    pub fn on(source_dbm: f64, detuning_hz: f64) -> Self {
        PumpSpec { label: format!("{source_dbm:+}dBm_{:+}MHz", detuning_hz / 1e6), source_dbm: Some(source_dbm), detuning_hz }
    }
}

/// Settings visited once per cycle, with the line attenuation that maps
/// source power to power at the sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PumpSchedule {
    pub attenuation_db: f64,
    pub probe_dbm_at_sample: f64,
    pub settings: Vec<PumpSpec>,
}

impl Default for PumpSchedule {
    fn default() -> Self {
        PumpSchedule {
            attenuation_db: 89.0,
            probe_dbm_at_sample: -160.0,
            settings: vec![
                PumpSpec::off(),
                PumpSpec::on(-3.0, 2e6),
                PumpSpec::on(-3.0, -2e6),
                PumpSpec::on(10.0, 2e6),
                PumpSpec::on(10.0, -2e6),
            ],
        }
    }
}

impl PumpSchedule {
    pub fn resolve(&self) -> Result<Vec<(String, PumpSetting)>> {
        if self.settings.is_empty() {
            return Err(invalid("pump schedule has no settings"));
        }
        self.settings
            .iter()
            .map(|s| {
                let setting = match s.source_dbm {
                    None => PumpSetting::off(dbm_to_watts(self.probe_dbm_at_sample)),
                    Some(dbm) => PumpSetting::on(power_at_sample(dbm, self.attenuation_db), s.detuning_hz)
                        .map_err(|e| invalid(format!("setting `{}`: {e}", s.label)))?,
                };
                Ok((s.label.clone(), setting))
            })
            .collect()
    }
}
