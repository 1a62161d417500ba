//! Power conversions between dBm and watts.

pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * (watts / 1e-3).log10()
}

/// Power reaching the sample from a source setting through `attenuation_db` of line loss.
pub fn power_at_sample(source_dbm: f64, attenuation_db: f64) -> f64 {
    dbm_to_watts(source_dbm - attenuation_db)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_dbm_is_one_milliwatt() {
        assert_eq!(dbm_to_watts(0.0), 1e-3);
        assert!((dbm_to_watts(-160.0) - 1e-19).abs() < 1e-30);
    }

    #[test]
    fn round_trip() {
        for dbm in [-170.0, -79.0, 0.0, 22.0] {
            assert!((watts_to_dbm(dbm_to_watts(dbm)) - dbm).abs() < 1e-12);
        }
    }

    #[test]
    fn attenuation_subtracts_in_db() {
        let p = power_at_sample(10.0, 89.0);
        assert!((watts_to_dbm(p) + 79.0).abs() < 1e-12);
    }
}
