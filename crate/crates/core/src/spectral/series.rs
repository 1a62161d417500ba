use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};
use std::ops::Range;

/// Samples of one observable, tagged with the measurement period they belong to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub timestamps_s: Vec<f64>,
    pub values: Vec<f64>,
    pub period_id: Vec<u32>,
    /// Unit of `values`, e.g. `"Hz"` or `"1"` once normalized.
    pub unit: String,
}

impl TimeSeries {
    pub fn new(timestamps_s: Vec<f64>, values: Vec<f64>, period_id: Vec<u32>, unit: impl Into<String>) -> Result<Self> {
        if timestamps_s.len() != values.len() || values.len() != period_id.len() {
            return Err(invalid("timestamps, values and period ids differ in length"));
        }
        let s = TimeSeries { timestamps_s, values, period_id, unit: unit.into() };
        for r in s.periods() {
            let t = &s.timestamps_s[r];
            if t.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(invalid("timestamps must be strictly increasing within a period"));
            }
        }
        Ok(s)
    }

    /// Single-period series on a uniform grid.
    pub fn uniform(dt_s: f64, values: Vec<f64>, unit: impl Into<String>) -> Self {
        let n = values.len();
        TimeSeries {
            timestamps_s: (0..n).map(|i| i as f64 * dt_s).collect(),
            values,
            period_id: vec![0; n],
            unit: unit.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Index ranges of consecutive samples sharing a period id.
    pub fn periods(&self) -> Vec<Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.period_id.len() {
            if i == self.period_id.len() || self.period_id[i] != self.period_id[start] {
                if i > start {
                    out.push(start..i);
                }
                start = i;
            }
        }
        out
    }

    /// Sampling interval, taken from the first period with two samples.
    pub fn dt(&self) -> Option<f64> {
        self.periods()
            .into_iter()
            .find(|r| r.len() >= 2)
            .map(|r| (self.timestamps_s[r.end - 1] - self.timestamps_s[r.start]) / (r.len() - 1) as f64)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Relabels periods wherever consecutive timestamps are more than `gap_factor`
/// sampling intervals apart.
pub fn split_periods_by_gap(timestamps_s: &[f64], gap_factor: f64) -> Vec<u32> {
    if timestamps_s.len() < 2 {
        return vec![0; timestamps_s.len()];
    }
    let mut diffs: Vec<f64> = timestamps_s.windows(2).map(|w| w[1] - w[0]).collect();
    diffs.sort_by(f64::total_cmp);
    let typical = diffs[diffs.len() / 2];
    let mut id = 0u32;
    let mut out = Vec::with_capacity(timestamps_s.len());
    out.push(0);
    for w in timestamps_s.windows(2) {
        if w[1] - w[0] > gap_factor * typical {
            id += 1;
        }
        out.push(id);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Detrend {
    #[default]
    None,
    /// Least-squares line removed from each period before normalization.
    Linear,
}

/// `(x − x̄)/x̄` with the mean taken over the whole record.
pub fn normalize_series(s: &TimeSeries, detrend: Detrend) -> Result<TimeSeries> {
    if s.is_empty() {
        return Err(invalid("cannot normalize an empty series"));
    }
    let mean = s.mean();
    if mean == 0.0 || !mean.is_finite() {
        return Err(invalid("series mean is zero or non-finite"));
    }
    let mut values = s.values.clone();
    if detrend == Detrend::Linear {
        for r in s.periods() {
            remove_line(&s.timestamps_s[r.clone()], &mut values[r]);
        }
        // Keep the record mean so the normalization scale is unchanged.
        let m = values.iter().sum::<f64>() / values.len() as f64;
        values.iter_mut().for_each(|v| *v += mean - m);
    }
    let values = values.into_iter().map(|v| (v - mean) / mean).collect();
    Ok(TimeSeries { timestamps_s: s.timestamps_s.clone(), values, period_id: s.period_id.clone(), unit: "1".into() })
}

fn remove_line(t: &[f64], y: &mut [f64]) {
    let n = t.len() as f64;
    if t.len() < 2 {
        return;
    }
    let tm = t.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let sxx: f64 = t.iter().map(|t| (t - tm) * (t - tm)).sum();
    let sxy: f64 = t.iter().zip(y.iter()).map(|(t, y)| (t - tm) * (y - ym)).sum();
    let b = sxy / sxx;
    for (yi, ti) in y.iter_mut().zip(t) {
        *yi -= ym + b * (ti - tm);
    }
    // Restore the period mean; only the slope is removed.
    y.iter_mut().for_each(|v| *v += ym);
}
