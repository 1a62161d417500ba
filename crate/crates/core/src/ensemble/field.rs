use crate::error::{invalid, Error, Result};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

/// Zero-point field magnitude on a rectilinear (x, z) grid over one unit cell
/// of the capacitor cross-section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMap {
    pub xs_m: Vec<f64>,
    pub zs_m: Vec<f64>,
    /// Row-major, `e[iz * xs.len() + ix]`, V/m.
    pub e_v_per_m: Vec<f64>,
}

fn locate(grid: &[f64], v: f64) -> (usize, f64) {
    if grid.len() == 1 {
        return (0, 0.0);
    }
    let i = match grid.partition_point(|&g| g <= v) {
        0 => 0,
        k if k >= grid.len() => grid.len() - 2,
        k => k - 1,
    };
    let t = ((v - grid[i]) / (grid[i + 1] - grid[i])).clamp(0.0, 1.0);
    (i, t)
}

impl FieldMap {
    pub fn new(xs_m: Vec<f64>, zs_m: Vec<f64>, e_v_per_m: Vec<f64>) -> Result<Self> {
        if xs_m.is_empty() || zs_m.is_empty() {
            return Err(invalid("field map has no grid points"));
        }
        if e_v_per_m.len() != xs_m.len() * zs_m.len() {
            return Err(invalid("field values do not fill the grid"));
        }
        if xs_m.windows(2).any(|w| !(w[1] > w[0])) || zs_m.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("grid coordinates must be strictly increasing"));
        }
        if e_v_per_m.iter().any(|&e| !(e >= 0.0) || !e.is_finite()) {
            return Err(invalid("field magnitudes must be finite and non-negative"));
        }
        Ok(FieldMap { xs_m, zs_m, e_v_per_m })
    }

    pub fn x_bounds(&self) -> (f64, f64) {
        (self.xs_m[0], *self.xs_m.last().unwrap())
    }

    pub fn z_bounds(&self) -> (f64, f64) {
        (self.zs_m[0], *self.zs_m.last().unwrap())
    }

    fn get(&self, ix: usize, iz: usize) -> f64 {
        self.e_v_per_m[iz * self.xs_m.len() + ix]
    }

    /// Bilinear interpolation, clamped to the grid.
    pub fn at(&self, x: f64, z: f64) -> f64 {
        let (ix, tx) = locate(&self.xs_m, x);
        let (iz, tz) = locate(&self.zs_m, z);
        let ix1 = (ix + 1).min(self.xs_m.len() - 1);
        let iz1 = (iz + 1).min(self.zs_m.len() - 1);
        let a = self.get(ix, iz) * (1.0 - tx) + self.get(ix1, iz) * tx;
        let b = self.get(ix, iz1) * (1.0 - tx) + self.get(ix1, iz1) * tx;
        a * (1.0 - tz) + b * tz
    }

    pub fn max(&self) -> f64 {
        self.e_v_per_m.iter().copied().fold(0.0, f64::max)
    }

    /// Reads `x_m, z_m, e_mag_v_per_m` rows in any order.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        let col = |name: &str| {
            headers.iter().position(|h| h.trim() == name).ok_or_else(|| Error::Format(format!("field map CSV is missing column `{name}`")))
        };
        let (cx, cz, ce) = (col("x_m")?, col("z_m")?, col("e_mag_v_per_m")?);
        let mut rows = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let parse = |c: usize| -> Result<f64> {
                rec.get(c)
                    .and_then(|v| v.trim().parse().ok())
                    .ok_or_else(|| Error::Format(format!("field map CSV row {}: bad number in column {}", line + 2, &headers[c])))
            };
            rows.push((parse(cx)?, parse(cz)?, parse(ce)?));
        }
        let mut xs: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let mut zs: Vec<f64> = rows.iter().map(|r| r.1).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        zs.sort_by(f64::total_cmp);
        zs.dedup();
        if xs.len() * zs.len() != rows.len() {
            return Err(Error::Format(format!(
                "field map is not a complete rectilinear grid: {} x values × {} z values ≠ {} rows",
                xs.len(),
                zs.len(),
                rows.len()
            )));
        }
        let mut e = vec![f64::NAN; rows.len()];
        for (x, z, v) in rows {
            let ix = xs.binary_search_by(|p| p.total_cmp(&x)).expect("x present");
            let iz = zs.binary_search_by(|p| p.total_cmp(&z)).expect("z present");
            e[iz * xs.len() + ix] = v;
        }
        if e.iter().any(|v| v.is_nan()) {
            return Err(Error::Format("field map has duplicate grid points".into()));
        }
        FieldMap::new(xs, zs, e)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["x_m", "z_m", "e_mag_v_per_m"])?;
        for (iz, z) in self.zs_m.iter().enumerate() {
            for (ix, x) in self.xs_m.iter().enumerate() {
                wtr.write_record([format!("{x:e}"), format!("{z:e}"), format!("{:e}", self.get(ix, iz))])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Analytic stand-in for a solved capacitor field.
///
/// One period of the finger pattern spans `[0, pitch]`; the gap between the
/// two electrode edges is bare substrate, the rest is metal-covered. The
/// normalized field peaks at the edges and decays exponentially with distance
/// from the nearest edge towards a region-dependent floor, and decays again
/// with depth `z` into the lossy interface layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalyticField {
    pub pitch_m: f64,
    pub edges_m: [f64; 2],
    pub z_range_m: [f64; 2],
    pub nz: usize,
    /// Normalized field at an electrode edge.
    pub edge_peak: f64,
    pub edge_decay_m: f64,
    pub z_decay_m: f64,
    pub floor_gap: f64,
    pub floor_metal: f64,
}

impl Default for AnalyticField {
    fn default() -> Self {
        AnalyticField {
            pitch_m: 10e-6,
            edges_m: [2.5e-6, 7.5e-6],
            z_range_m: [0.5e-9, 3.0e-9],
            nz: 6,
            edge_peak: 0.4,
            edge_decay_m: 20e-9,
            z_decay_m: 4.9e-9,
            floor_gap: 0.014,
            floor_metal: 0.007,
        }
    }
}

impl AnalyticField {
    pub fn validate(&self) -> Result<()> {
        let [a, b] = self.edges_m;
        let [z0, z1] = self.z_range_m;
        let ok = self.pitch_m > 0.0
            && 0.0 < a
            && a < b
            && b < self.pitch_m
            && 0.0 <= z0
            && z0 < z1
            && self.nz >= 2
            && self.edge_peak >= 0.0
            && self.edge_decay_m > 0.0
            && self.z_decay_m > 0.0
            && self.floor_gap >= 0.0
            && self.floor_metal >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("invalid analytic field parameters {self:?}")))
        }
    }

    /// Normalized field `G(x, z)`.
    pub fn shape(&self, x: f64, z: f64) -> f64 {
        let [a, b] = self.edges_m;
        let d = (x - a).abs().min((x - b).abs());
        let floor = if x > a && x < b { self.floor_gap } else { self.floor_metal };
        let zf = (-(z - self.z_range_m[0]) / self.z_decay_m).exp();
        floor + (self.edge_peak - floor) * (-d / self.edge_decay_m).exp() * zf
    }

    fn x_grid(&self) -> Vec<f64> {
        let coarse = 200;
        let mut xs: Vec<f64> = (0..=coarse).map(|i| self.pitch_m * i as f64 / coarse as f64).collect();
        let lam = self.edge_decay_m;
        for &e in &self.edges_m {
            // Fine steps out to ten decay lengths, then geometric growth.
            for j in 0..=100 {
                let d = lam * 0.1 * j as f64;
                xs.push(e - d);
                xs.push(e + d);
            }
            let mut d = 10.0 * lam;
            while d < self.pitch_m {
                xs.push(e - d);
                xs.push(e + d);
                d *= 1.15;
            }
        }
        xs.retain(|&x| (0.0..=self.pitch_m).contains(&x));
        xs.sort_by(f64::total_cmp);
        xs.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        xs
    }

    /// Tabulates `scale · G` on a grid refined around the edges.
    pub fn to_map(&self, scale_v_per_m: f64) -> Result<FieldMap> {
        self.validate()?;
        let xs = self.x_grid();
        let [z0, z1] = self.z_range_m;
        let zs: Vec<f64> = (0..self.nz).map(|i| z0 + (z1 - z0) * i as f64 / (self.nz - 1) as f64).collect();
        let mut e = Vec::with_capacity(xs.len() * zs.len());
        for &z in &zs {
            for &x in &xs {
                e.push(scale_v_per_m * self.shape(x, z));
            }
        }
        FieldMap::new(xs, zs, e)
    }
}
