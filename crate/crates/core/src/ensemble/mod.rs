//! Quantum-TLS ensembles and the thermal TLSs attached to them.

mod config;
mod field;
mod modevol;
mod sampling;

pub use config::{Dist, EnsembleConfig};
pub use field::{AnalyticField, FieldMap};
pub use modevol::{
    coupling_from_dipole, effective_permittivity, mode_volume, zero_point_scale, zero_point_scale_rel, FieldCell, FILLING_FACTOR, MODE_VOLUME_M3,
};
pub use sampling::{candidate_count, sample_qtls_ensemble, sample_ttls_for, Ensemble, EnsembleSummary};
