//! Telegraph-noise trajectories and the resonator time series they produce.

mod grid;
mod rts;
mod schedule;
mod synth;

pub use grid::TimeGrid;
pub use rts::{simulate_rts, RtsTrace};
pub use schedule::{PumpSchedule, PumpSpec};
pub use synth::{qtls_frequency_series, synthesize_resonator_series, SimulationResult, SynthOptions};
