use crate::constants::{EPS0, H};
use crate::error::{invalid, Result};

/// Reference mode volume of the interdigital capacitor resonators, m³.
pub const MODE_VOLUME_M3: f64 = 9.692e-17;
/// Fraction of the electric energy stored in the substrate.
pub const FILLING_FACTOR: f64 = 0.916;

/// `ε_eff/ε0 = ε_r q + (1 − q)`.
pub fn effective_permittivity(q_fill: f64, eps_ratio_substrate: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q_fill) {
        return Err(invalid(format!("filling factor {q_fill} outside [0, 1]")));
    }
    Ok(eps_ratio_substrate * q_fill + (1.0 - q_fill))
}

/// One discretization cell of a field solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldCell {
    pub volume_m3: f64,
    pub eps_r: f64,
    /// `|E|²` at the cell, any consistent unit.
    pub e_sq: f64,
}

/// `Σ ε|E|² dV / max(ε|E|²)`.
pub fn mode_volume(cells: &[FieldCell]) -> Result<f64> {
    if cells.is_empty() {
        return Err(invalid("mode volume of an empty grid"));
    }
    let mut total = 0.0;
    let mut peak: f64 = 0.0;
    for c in cells {
        let u = c.eps_r * c.e_sq;
        total += u * c.volume_m3;
        peak = peak.max(u);
    }
    if peak <= 0.0 {
        return Err(invalid("field vanishes everywhere; mode volume undefined"));
    }
    Ok(total / peak)
}

/// Zero-point field amplitude `sqrt(h f / (2 ε_eff V_m))`, V/m. `eps_eff` in F/m.
pub fn zero_point_scale(f_r_hz: f64, eps_eff: f64, v_m: f64) -> f64 {
    (H * f_r_hz / (2.0 * eps_eff * v_m)).sqrt()
}

/// Convenience: zero-point scale from a relative permittivity.
pub fn zero_point_scale_rel(f_r_hz: f64, eps_r_eff: f64, v_m: f64) -> f64 {
    zero_point_scale(f_r_hz, eps_r_eff * EPS0, v_m)
}

/// `|p · E| / h`, Hz.
pub fn coupling_from_dipole(p_c_m: [f64; 3], e_v_per_m: [f64; 3]) -> f64 {
    (p_c_m[0] * e_v_per_m[0] + p_c_m[1] * e_v_per_m[1] + p_c_m[2] * e_v_per_m[2]).abs() / H
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{E_ANGSTROM, EPS_R_SILICON};

    #[test]
    fn permittivity() {
        let e = effective_permittivity(FILLING_FACTOR, EPS_R_SILICON).unwrap();
        assert!((e - 10.98).abs() < 0.01);
        assert_eq!(effective_permittivity(0.0, 7.0).unwrap(), 1.0);
        assert_eq!(effective_permittivity(1.0, 11.9).unwrap(), 11.9);
        assert!(effective_permittivity(1.1, 11.9).is_err());
    }

    #[test]
    fn mode_volume_of_uniform_region() {
        let cells: Vec<FieldCell> = (0..10).map(|_| FieldCell { volume_m3: 0.1, eps_r: 1.0, e_sq: 4.0 }).collect();
        assert!((mode_volume(&cells).unwrap() - 1.0).abs() < 1e-12);
        let mut two = cells.clone();
        two.extend((0..10).map(|_| FieldCell { volume_m3: 0.1, eps_r: 11.9, e_sq: 0.0 }));
        assert!((mode_volume(&two).unwrap() - 1.0).abs() < 1e-12);
        assert!(mode_volume(&[FieldCell { volume_m3: 1.0, eps_r: 1.0, e_sq: 0.0 }]).is_err());
    }

    #[test]
    fn zero_point_field() {
        let e0 = zero_point_scale_rel(6.0814e9, 10.981, MODE_VOLUME_M3);
        assert!((e0 - 14.62).abs() < 0.01, "{e0}");
        let half = zero_point_scale_rel(6.0814e9, 10.981, 2.0 * MODE_VOLUME_M3);
        assert!((half * 2f64.sqrt() - e0).abs() < 1e-12);
    }

    #[test]
    fn dipole_coupling() {
        assert_eq!(coupling_from_dipole([1.0, 0.0, 0.0], [0.0, 0.0, 5.0]), 0.0);
        let g = coupling_from_dipole([0.0, 0.0, E_ANGSTROM], [0.0, 0.0, 14.6]);
        assert!((g - 353e3).abs() < 1e3, "{g}");
    }
}
