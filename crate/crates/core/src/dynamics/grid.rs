use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};

/// Sampling grid: one sample per pump cycle, split into measurement periods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeGrid {
    pub dt_s: f64,
    pub period_s: f64,
    pub n_periods: u32,
    /// Real time skipped between periods.
    pub period_gap_s: f64,
}

impl Default for TimeGrid {
    fn default() -> Self {
        TimeGrid { dt_s: 520.0, period_s: 120.0 * 3600.0, n_periods: 4, period_gap_s: 0.0 }
    }
}

impl TimeGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_s > 0.0) || !(self.period_s > 0.0) || self.n_periods == 0 || !(self.period_gap_s >= 0.0) {
            return Err(invalid(format!("invalid time grid {self:?}")));
        }
        if self.n_samples() < 2 {
            return Err(invalid("time grid has fewer than two samples"));
        }
        Ok(())
    }

    /// `floor(n_periods · period / dt)`.
    pub fn n_samples(&self) -> usize {
        (self.n_periods as f64 * self.period_s / self.dt_s + 1e-9).floor() as usize
    }

    fn period_of(&self, i: usize) -> u32 {
        (((i as f64 * self.dt_s) / self.period_s + 1e-12).floor() as u32).min(self.n_periods - 1)
    }

    pub fn period_ids(&self) -> Vec<u32> {
        (0..self.n_samples()).map(|i| self.period_of(i)).collect()
    }

    /// Sample instants; each period is offset by the accumulated gaps.
    pub fn times(&self) -> Vec<f64> {
        (0..self.n_samples()).map(|i| i as f64 * self.dt_s + self.period_of(i) as f64 * self.period_gap_s).collect()
    }

    pub fn samples_per_period(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_periods as usize];
        for p in self.period_ids() {
            counts[p as usize] += 1;
        }
        counts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid() {
        let g = TimeGrid::default();
        assert_eq!(g.n_samples(), 3323);
        assert_eq!(g.samples_per_period(), vec![831, 831, 831, 830]);
        assert_eq!(g.times()[1], 520.0);
    }

    #[test]
    fn gaps_shift_later_periods() {
        let g = TimeGrid { period_gap_s: 1e5, ..Default::default() };
        let t = g.times();
        let ids = g.period_ids();
        let first = ids.iter().position(|&p| p == 1).unwrap();
        assert_eq!(t[first] - t[first - 1], 520.0 + 1e5);
    }

    #[test]
    fn sixty_hour_period() {
        let g = TimeGrid { period_s: 60.0 * 3600.0, n_periods: 1, ..Default::default() };
        assert_eq!(g.n_samples(), 415);
    }
}
