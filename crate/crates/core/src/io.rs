//! CSV formats shared by the library and the command line.

use crate::error::{Error, Result};
use crate::resonfit::{S21Trace, SCurvePoint};
use crate::spectral::Psd;
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::io::{Read, Write};

/// Header-checked CSV table of numbers.
struct Table {
    headers: Vec<String>,
    rows: Vec<csv::StringRecord>,
}

impl Table {
    fn read<R: Read>(r: R, what: &str) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let headers = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let rows = rdr.records().collect::<std::result::Result<Vec<_>, _>>()?;
        let _ = what;
        Ok(Table { headers, rows })
    }

    fn col(&self, name: &str, what: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Format(format!("{what} CSV is missing column `{name}` (found: {})", self.headers.join(", "))))
    }

    fn opt_col(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    fn num(&self, row: usize, col: usize) -> Result<f64> {
        let raw = self.rows[row].get(col).unwrap_or("").trim();
        raw.parse().map_err(|_| Error::Format(format!("row {}: `{raw}` in column `{}` is not a number", row + 2, self.headers[col])))
    }

    fn opt_num(&self, row: usize, col: usize) -> Result<Option<f64>> {
        match self.rows[row].get(col).map(str::trim) {
            None | Some("") => Ok(None),
            Some(_) => self.num(row, col).map(Some),
        }
    }
}

pub fn write_psd_csv<W: Write>(psd: &Psd, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["f_hz", "s_per_hz", "n_segments"])?;
    for (f, s) in psd.freqs_hz.iter().zip(&psd.power_per_hz) {
        wtr.write_record([f.to_string(), s.to_string(), psd.n_segments.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads a PSD written by [`write_psd_csv`]; the bin spacing fixes the segment length.
pub fn read_psd_csv<R: Read>(r: R) -> Result<Psd> {
    let t = Table::read(r, "PSD")?;
    let (cf, cs, cn) = (t.col("f_hz", "PSD")?, t.col("s_per_hz", "PSD")?, t.col("n_segments", "PSD")?);
    let mut freqs = Vec::new();
    let mut power = Vec::new();
    let mut n_seg = 0;
    for i in 0..t.rows.len() {
        freqs.push(t.num(i, cf)?);
        power.push(t.num(i, cs)?);
        n_seg = t.num(i, cn)? as usize;
    }
    if freqs.len() < 2 {
        return Err(Error::Format("PSD CSV needs at least two rows".into()));
    }
    let df = freqs[0];
    // Bins are k·df for k = 1..=L/2; an odd L ends half a bin short of Nyquist.
    let last_k = (freqs[freqs.len() - 1] / df).round() as usize;
    let segment_len = 2 * last_k;
    Ok(Psd { freqs_hz: freqs, power_per_hz: power, n_segments: n_seg, segment_len, dt_s: 1.0 / (segment_len as f64 * df) })
}

pub fn write_trace_csv<W: Write>(trace: &S21Trace, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["f_hz", "re_s21", "im_s21"])?;
    for (f, s) in trace.freqs_hz.iter().zip(&trace.s21) {
        wtr.write_record([f.to_string(), s.re.to_string(), s.im.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads `f_hz, re_s21, im_s21`; an optional `sigma` column gives per-point noise.
pub fn read_trace_csv<R: Read>(r: R, n_normalization: usize) -> Result<S21Trace> {
    let t = Table::read(r, "trace")?;
    let (cf, cr, ci) = (t.col("f_hz", "trace")?, t.col("re_s21", "trace")?, t.col("im_s21", "trace")?);
    let cs = t.opt_col("sigma");
    let mut trace = S21Trace { freqs_hz: vec![], s21: vec![], noise: cs.map(|_| vec![]), n_normalization };
    for i in 0..t.rows.len() {
        trace.freqs_hz.push(t.num(i, cf)?);
        trace.s21.push(Complex64::new(t.num(i, cr)?, t.num(i, ci)?));
        if let (Some(c), Some(n)) = (cs, trace.noise.as_mut()) {
            n.push(t.num(i, c)?);
        }
    }
    trace.validate()?;
    Ok(trace)
}

pub fn write_scurve_csv<W: Write>(points: &[SCurvePoint], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["mean_n", "q_int", "q_int_err"])?;
    for p in points {
        wtr.write_record([p.mean_n.to_string(), p.q_int.to_string(), p.q_int_err.map(|e| e.to_string()).unwrap_or_default()])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_scurve_csv<R: Read>(r: R) -> Result<Vec<SCurvePoint>> {
    let t = Table::read(r, "S-curve")?;
    let (cn, cq) = (t.col("mean_n", "S-curve")?, t.col("q_int", "S-curve")?);
    let ce = t.opt_col("q_int_err");
    (0..t.rows.len())
        .map(|i| {
            Ok(SCurvePoint {
                mean_n: t.num(i, cn)?,
                q_int: t.num(i, cq)?,
                q_int_err: match ce {
                    Some(c) => t.opt_num(i, c)?,
                    None => None,
                },
            })
        })
        .collect()
}

/// Per-setting columns of a simulation CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SettingSeries {
    pub setting_id: u32,
    pub times_s: Vec<f64>,
    pub gamma_int_hz: Vec<f64>,
    pub f_r_hz: Vec<f64>,
}

/// Reads `t_s, setting_id, gamma_int_hz, f_r_hz`, grouped by setting in id order.
pub fn read_simulation_csv<R: Read>(r: R) -> Result<Vec<SettingSeries>> {
    let t = Table::read(r, "simulation")?;
    let w = "simulation";
    let (ct, cs, cg, cf) = (t.col("t_s", w)?, t.col("setting_id", w)?, t.col("gamma_int_hz", w)?, t.col("f_r_hz", w)?);
    let mut by: BTreeMap<u32, SettingSeries> = BTreeMap::new();
    for i in 0..t.rows.len() {
        let id = t.num(i, cs)?;
        if id < 0.0 || id.fract() != 0.0 {
            return Err(Error::Format(format!("row {}: setting_id must be a non-negative integer", i + 2)));
        }
        let e = by.entry(id as u32).or_insert_with(|| SettingSeries { setting_id: id as u32, times_s: vec![], gamma_int_hz: vec![], f_r_hz: vec![] });
        e.times_s.push(t.num(i, ct)?);
        e.gamma_int_hz.push(t.num(i, cg)?);
        e.f_r_hz.push(t.num(i, cf)?);
    }
    Ok(by.into_values().collect())
}
