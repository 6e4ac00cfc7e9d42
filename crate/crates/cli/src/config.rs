//! Flat `key = value [unit]` configuration files.
//!
//! Blank lines and text after `#` are ignored. Every key is optional and
//! falls back to the reference indoor deployment. A value without a unit is
//! read in the key's canonical unit (listed in [`KEYS`]).

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use swiptmc::compute::ComputeProfile;
use swiptmc::propagation::density_from_spacing;
use swiptmc::units::{db_to_linear, dbm_to_watts, thermal_noise_watts};
use swiptmc::NetworkScenario;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Length,
    Power,
    Frequency,
    /// Decibels or a plain ratio.
    Gain,
    Bits,
    PerMeter,
    Plain,
    Count,
}

impl Kind {
    fn canonical(self) -> &'static str {
        match self {
            Kind::Length => "m",
            Kind::Power => "dBm",
            Kind::Frequency => "Hz",
            Kind::Gain => "dB",
            Kind::Bits => "bit",
            Kind::PerMeter => "1/m",
            Kind::Plain | Kind::Count => "",
        }
    }

    /// Converts `value unit` to the canonical unit.
    fn convert(self, value: f64, unit: &str) -> Option<f64> {
        if unit.is_empty() || unit == self.canonical() {
            return Some(value);
        }
        match (self, unit) {
            (Kind::Length, "km") => Some(value * 1e3),
            (Kind::Length, "cm") => Some(value * 1e-2),
            (Kind::Power, "W") => Some(10.0 * (value * 1e3).log10()),
            (Kind::Power, "mW") => Some(10.0 * value.log10()),
            (Kind::Power, "dBW") => Some(value + 30.0),
            (Kind::Frequency, "kHz") => Some(value * 1e3),
            (Kind::Frequency, "MHz") => Some(value * 1e6),
            (Kind::Frequency, "GHz") => Some(value * 1e9),
            (Kind::Gain, "linear") => Some(10.0 * value.log10()),
            (Kind::Bits, "kbit" | "kb") => Some(value * 1e3),
            (Kind::PerMeter, "1/km") => Some(value * 1e-3),
            _ => None,
        }
    }
}

/// Recognised keys, their unit kind and a short description.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("disk_radius", "m", "radius of the deployment disk"),
    ("ph_spacing", "m", "d_PH; PH density is 1/(pi d_PH^2)"),
    ("tx_power", "dBm", "average PH transmit power"),
    ("bandwidth", "Hz", "signal bandwidth"),
    ("carrier_frequency", "Hz", "carrier frequency"),
    ("wall_frequency", "1/m", "wall lines per metre on each axis"),
    ("penetration_loss", "dB", "gain per crossed wall (negative dB)"),
    ("path_loss_exponent", "", "beta"),
    ("max_walls", "", "highest wall count kept in the analysis"),
    ("noise_figure", "dB", "receiver noise figure"),
    ("conversion_noise", "dBm", "RF-to-DC conversion noise power"),
    ("splitting_ratio", "", "power-splitting ratio rho"),
    ("harvest_efficiency", "", "harvester efficiency"),
    ("hit_probability", "", "q_hit"),
    ("tx_antennas", "", "antennas per PH"),
    ("rx_antennas", "", "antennas at the device"),
    ("capacitance", "", "effective switched capacitance in J s^2"),
    ("ops_per_bit", "", "k"),
    ("data_bits", "bit", "N"),
    ("message_bits", "bit", "M"),
    ("max_frequency", "Hz", "CPU clock limit"),
    ("level", "", "target J-CCDF for trade-off curves and operating points"),
    ("trials", "", "Monte Carlo trials per scenario"),
    ("seed", "", "base seed"),
    ("grid_points", "", "points per analytic curve"),
];

fn kind_of(key: &str) -> Option<Kind> {
    Some(match key {
        "disk_radius" | "ph_spacing" => Kind::Length,
        "tx_power" | "conversion_noise" => Kind::Power,
        "bandwidth" | "carrier_frequency" | "max_frequency" => Kind::Frequency,
        "penetration_loss" | "noise_figure" => Kind::Gain,
        "data_bits" | "message_bits" => Kind::Bits,
        "wall_frequency" => Kind::PerMeter,
        "max_walls" | "tx_antennas" | "rx_antennas" | "trials" | "seed" | "grid_points" => Kind::Count,
        "path_loss_exponent" | "splitting_ratio" | "harvest_efficiency" | "hit_probability" | "capacitance"
        | "ops_per_bit" | "level" => Kind::Plain,
        _ => return None,
    })
}

/// Experiment-independent solver settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub level: f64,
    pub trials: usize,
    pub seed: u64,
    pub grid_points: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            level: 0.75,
            trials: 100_000,
            seed: 1,
            grid_points: 16,
        }
    }
}

/// Values as written in the file, in boundary units (dB, dBm, metres).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub disk_radius_m: f64,
    pub ph_spacing_m: f64,
    pub tx_power_dbm: f64,
    pub bandwidth_hz: f64,
    pub carrier_frequency_hz: f64,
    pub wall_frequency_per_m: f64,
    pub penetration_loss_db: f64,
    pub path_loss_exponent: f64,
    pub max_walls: u32,
    pub noise_figure_db: f64,
    pub conversion_noise_dbm: f64,
    pub splitting_ratio: f64,
    pub harvest_efficiency: f64,
    pub hit_probability: f64,
    pub tx_antennas: usize,
    pub rx_antennas: usize,
    pub capacitance: f64,
    pub ops_per_bit: f64,
    pub data_bits: f64,
    pub message_bits: f64,
    pub max_frequency_hz: f64,
    pub solver: SolverConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            disk_radius_m: 60.0,
            ph_spacing_m: 3.0,
            tx_power_dbm: 30.0,
            bandwidth_hz: 200e3,
            carrier_frequency_hz: 2.1e9,
            wall_frequency_per_m: 0.03,
            penetration_loss_db: -10.0,
            path_loss_exponent: 2.5,
            max_walls: 6,
            noise_figure_db: 10.0,
            conversion_noise_dbm: -70.0,
            splitting_ratio: 0.99,
            harvest_efficiency: 0.8,
            hit_probability: 0.7,
            tx_antennas: 4,
            rx_antennas: 2,
            capacitance: 1e-28,
            ops_per_bit: 20.0,
            data_bits: 600.0,
            message_bits: 32.0,
            max_frequency_hz: 1e9,
            solver: SolverConfig::default(),
        }
    }
}

/// Parse failure tied to a line and key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub line: usize,
    pub key: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.key.is_empty() {
            write!(f, "line {}: {}", self.line, self.message)
        } else {
            write!(f, "line {}: `{}`: {}", self.line, self.key, self.message)
        }
    }
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let config = Self::parse(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn parse(text: &str) -> Result<Self, FieldError> {
        let mut config = Self::default();
        let mut seen: Vec<String> = Vec::new();
        for (index, raw) in text.lines().enumerate() {
            let line = index + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fail = |key: &str, message: String| FieldError {
                line,
                key: key.to_string(),
                message,
            };
            let (key, rest) = content
                .split_once('=')
                .ok_or_else(|| fail("", format!("expected `key = value [unit]`, got `{content}`")))?;
            let key = key.trim();
            let kind = kind_of(key).ok_or_else(|| fail(key, "unknown key".into()))?;
            if seen.iter().any(|k| k == key) {
                return Err(fail(key, "set more than once".into()));
            }
            seen.push(key.to_string());
            let mut parts = rest.split_whitespace();
            let number = parts.next().ok_or_else(|| fail(key, "missing value".into()))?;
            let unit = parts.next().unwrap_or("");
            if let Some(extra) = parts.next() {
                return Err(fail(key, format!("unexpected trailing text `{extra}`")));
            }
            let value: f64 = number
                .parse()
                .map_err(|_| fail(key, format!("`{number}` is not a number")))?;
            if !value.is_finite() {
                return Err(fail(key, "value must be finite".into()));
            }
            let value = kind.convert(value, unit).ok_or_else(|| {
                let expected = match kind.canonical() {
                    "" => "no unit".to_string(),
                    c => format!("`{c}` or a compatible unit"),
                };
                fail(key, format!("unit `{unit}` not accepted, expected {expected}"))
            })?;
            let count = |v: f64| -> Result<u64, FieldError> {
                if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                    Ok(v as u64)
                } else {
                    Err(fail(key, format!("expected a nonnegative integer, got {v}")))
                }
            };
            match key {
                "disk_radius" => config.disk_radius_m = value,
                "ph_spacing" => config.ph_spacing_m = value,
                "tx_power" => config.tx_power_dbm = value,
                "bandwidth" => config.bandwidth_hz = value,
                "carrier_frequency" => config.carrier_frequency_hz = value,
                "wall_frequency" => config.wall_frequency_per_m = value,
                "penetration_loss" => config.penetration_loss_db = value,
                "path_loss_exponent" => config.path_loss_exponent = value,
                "max_walls" => config.max_walls = count(value)? as u32,
                "noise_figure" => config.noise_figure_db = value,
                "conversion_noise" => config.conversion_noise_dbm = value,
                "splitting_ratio" => config.splitting_ratio = value,
                "harvest_efficiency" => config.harvest_efficiency = value,
                "hit_probability" => config.hit_probability = value,
                "tx_antennas" => config.tx_antennas = count(value)? as usize,
                "rx_antennas" => config.rx_antennas = count(value)? as usize,
                "capacitance" => config.capacitance = value,
                "ops_per_bit" => config.ops_per_bit = value,
                "data_bits" => config.data_bits = value,
                "message_bits" => config.message_bits = value,
                "max_frequency" => config.max_frequency_hz = value,
                "level" => config.solver.level = value,
                "trials" => config.solver.trials = count(value)? as usize,
                "seed" => config.solver.seed = count(value)?,
                "grid_points" => config.solver.grid_points = count(value)? as usize,
                _ => unreachable!("key table and match disagree"),
            }
        }
        Ok(config)
    }

    /// Range checks, reported against the offending key.
    pub fn validate(&self) -> Result<(), CliError> {
        let invalid = |key: &str, message: String| CliError::Invalid {
            key: key.to_string(),
            message,
        };
        let checks: [(&str, f64, bool, &str); 12] = [
            ("disk_radius", self.disk_radius_m, self.disk_radius_m > 0.0, "must be positive"),
            ("ph_spacing", self.ph_spacing_m, self.ph_spacing_m > 0.0, "must be positive"),
            ("bandwidth", self.bandwidth_hz, self.bandwidth_hz > 0.0, "must be positive"),
            ("carrier_frequency", self.carrier_frequency_hz, self.carrier_frequency_hz > 0.0, "must be positive"),
            ("wall_frequency", self.wall_frequency_per_m, self.wall_frequency_per_m >= 0.0, "must be nonnegative"),
            ("penetration_loss", self.penetration_loss_db, self.penetration_loss_db <= 0.0, "must be at most 0 dB"),
            ("path_loss_exponent", self.path_loss_exponent, self.path_loss_exponent > 2.0, "must exceed 2"),
            ("splitting_ratio", self.splitting_ratio, (0.0..1.0).contains(&self.splitting_ratio), "must lie in [0, 1)"),
            (
                "harvest_efficiency",
                self.harvest_efficiency,
                self.harvest_efficiency > 0.0 && self.harvest_efficiency <= 1.0,
                "must lie in (0, 1]",
            ),
            ("hit_probability", self.hit_probability, (0.0..=1.0).contains(&self.hit_probability), "must lie in [0, 1]"),
            ("level", self.solver.level, self.solver.level > 0.0 && self.solver.level < 1.0, "must lie in (0, 1)"),
            ("ops_per_bit", self.ops_per_bit, self.ops_per_bit > 0.0, "must be positive"),
        ];
        for (key, value, ok, rule) in checks {
            if !ok {
                return Err(invalid(key, format!("{rule}, got {value}")));
            }
        }
        if self.solver.trials == 0 {
            return Err(invalid("trials", "must be positive".into()));
        }
        if self.solver.grid_points < 2 {
            return Err(invalid("grid_points", "must be at least 2".into()));
        }
        self.scenario().validate().map_err(|e| invalid("scenario", e.to_string()))?;
        self.profile().validate().map_err(|e| invalid("profile", e.to_string()))?;
        Ok(())
    }

    pub fn scenario(&self) -> NetworkScenario {
        let mut s = NetworkScenario::default();
        let p = &mut s.propagation;
        p.disk_radius = self.disk_radius_m;
        p.ph_density = density_from_spacing(self.ph_spacing_m);
        p.carrier_frequency = self.carrier_frequency_hz;
        p.wall_frequency = self.wall_frequency_per_m;
        p.penetration_loss = db_to_linear(self.penetration_loss_db);
        p.path_loss_exponent = self.path_loss_exponent;
        p.max_walls = self.max_walls;
        let b = &mut s.budget;
        b.tx_power = dbm_to_watts(self.tx_power_dbm);
        b.bandwidth = self.bandwidth_hz;
        b.thermal_noise = thermal_noise_watts(self.bandwidth_hz, self.noise_figure_db);
        b.conversion_noise = dbm_to_watts(self.conversion_noise_dbm);
        b.splitting_ratio = self.splitting_ratio;
        b.harvest_efficiency = self.harvest_efficiency;
        s.hit_probability = self.hit_probability;
        s.tx_antennas = self.tx_antennas;
        s.rx_antennas = self.rx_antennas;
        s
    }

    pub fn profile(&self) -> ComputeProfile {
        ComputeProfile {
            capacitance: self.capacitance,
            ops_per_bit: self.ops_per_bit,
            data_bits: self.data_bits,
            message_bits: self.message_bits,
            max_frequency: self.max_frequency_hz,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_listed_key_parses() {
        for (key, unit, _) in KEYS {
            let text = format!("{key} = 1 {unit}\n");
            ScenarioConfig::parse(&text).unwrap_or_else(|e| panic!("{key}: {e}"));
        }
    }

    #[test]
    fn unit_conversions() {
        let c = ScenarioConfig::parse("tx_power = 1 W\nbandwidth = 0.2 MHz\ndata_bits = 0.6 kb\npenetration_loss = 0.1 linear").unwrap();
        assert!((c.tx_power_dbm - 30.0).abs() < 1e-12);
        assert!((c.bandwidth_hz - 200e3).abs() < 1e-6);
        assert!((c.data_bits - 600.0).abs() < 1e-9);
        assert!((c.penetration_loss_db + 10.0).abs() < 1e-12);
    }

    #[test]
    fn errors_name_line_and_key() {
        let e = ScenarioConfig::parse("# header\n\ntx_power = 30 dBx").unwrap_err();
        assert_eq!((e.line, e.key.as_str()), (3, "tx_power"));
        assert!(ScenarioConfig::parse("foo = 1").unwrap_err().message.contains("unknown key"));
        assert!(ScenarioConfig::parse("seed = 1.5").is_err());
        assert!(ScenarioConfig::parse("seed = 1\nseed = 2").is_err());
        assert!(ScenarioConfig::parse("level 0.5").is_err());
        assert!(ScenarioConfig::parse("level = 0.5 0.6 0.7").is_err());
    }
}
