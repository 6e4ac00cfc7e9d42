//! Decibel conversions used at the configuration and output boundary.

/// dBm to watts: 10^(x/10) mW.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) * 1e-3
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * (watts * 1e3).log10()
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Thermal noise power in watts: -174 dBm/Hz + 10 log10(B) + noise figure.
pub fn thermal_noise_watts(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    dbm_to_watts(-174.0 + 10.0 * bandwidth_hz.log10() + noise_figure_db)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions() {
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-15);
        assert!((dbm_to_watts(-70.0) - 1e-10).abs() < 1e-24);
        assert!((watts_to_dbm(4.67e-6) - (-23.306)).abs() < 1e-3);
        assert!((db_to_linear(-10.0) - 0.1).abs() < 1e-16);
        let n = thermal_noise_watts(200e3, 10.0);
        assert!((watts_to_dbm(n) - (-110.9897)).abs() < 1e-3);
    }
}
