//! CPU energy under dynamic voltage and frequency scaling, the harvested
//! power needed for real-time processing, and the resulting operating point
//! and outage.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tradeoff::{log_root, JccdfModel, TradeoffPoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComputeProfile {
    /// ξ, effective switched capacitance (J·s²).
    pub capacitance: f64,
    /// k, logical operations per processed bit.
    pub ops_per_bit: f64,
    /// N, bits of local data per task.
    pub data_bits: f64,
    /// M, bits per control message.
    pub message_bits: f64,
    /// f_max in hertz.
    pub max_frequency: f64,
}

impl Default for ComputeProfile {
    fn default() -> Self {
        Self {
            capacitance: 1e-28,
            ops_per_bit: 20.0,
            data_bits: 600.0,
            message_bits: 32.0,
            max_frequency: 1e9,
        }
    }
}

impl ComputeProfile {
    /// Profile whose elementary tasks need `ops` operations per bit each.
    pub fn from_tasks(ops: &[f64]) -> Result<Self> {
        if ops.iter().any(|&k| !(k >= 0.0)) {
            return Err(Error::Domain("per-task operation counts must be nonnegative".into()));
        }
        Ok(Self {
            ops_per_bit: ops.iter().sum(),
            ..Self::default()
        })
    }

    pub fn with_ops_per_bit(mut self, k: f64) -> Self {
        self.ops_per_bit = k;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("capacitance", self.capacitance),
            ("data bits", self.data_bits),
            ("message bits", self.message_bits),
            ("maximum frequency", self.max_frequency),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.ops_per_bit >= 0.0 && self.ops_per_bit.is_finite()) {
            return Err(Error::Domain(format!(
                "operations per bit must be nonnegative, got {}",
                self.ops_per_bit
            )));
        }
        Ok(())
    }

    /// CPU cycles per task, kN.
    pub fn cycles_per_task(&self) -> f64 {
        self.ops_per_bit * self.data_bits
    }

    /// Largest rate the CPU can follow in real time, f_max M/(kN).
    pub fn max_rate(&self) -> f64 {
        self.max_frequency * self.message_bits / self.cycles_per_task()
    }

    /// CPU cycles per second kNR/M at rate R.
    pub fn cycles_per_second(&self, rate: f64) -> f64 {
        self.cycles_per_task() * rate / self.message_bits
    }

    pub fn tasks_per_second(&self, rate: f64) -> f64 {
        rate / self.message_bits
    }

    /// Inverse of [`cycles_per_second`](Self::cycles_per_second).
    pub fn rate_for_cycles(&self, cycles_per_second: f64) -> f64 {
        cycles_per_second * self.message_bits / self.cycles_per_task()
    }

    fn check_rate(&self, rate: f64) -> Result<()> {
        self.validate()?;
        if !(rate >= 0.0) {
            return Err(Error::Domain(format!("rate must be nonnegative, got {rate}")));
        }
        let max_rate = self.max_rate();
        if rate > max_rate * (1.0 + 1e-12) {
            return Err(Error::Infeasible { rate, max_rate });
        }
        Ok(())
    }
}

/// Energy ξ Σ f_i² of running one cycle at each listed clock frequency.
pub fn cycle_energy(capacitance: f64, frequencies: &[f64]) -> f64 {
    capacitance * frequencies.iter().map(|f| f * f).sum::<f64>()
}

/// Time Σ 1/f_i taken by the listed cycles.
pub fn completion_time(frequencies: &[f64]) -> f64 {
    frequencies.iter().map(|f| f.recip()).sum()
}

/// Common clock frequency kNR/M and task energy ξR²(kN)³/M² minimising the
/// CPU energy under the deadline M/R.
pub fn optimal_frequencies(profile: &ComputeProfile, rate: f64) -> Result<(f64, f64)> {
    profile.check_rate(rate)?;
    let cycles = profile.cycles_per_task();
    let f = cycles * rate / profile.message_bits;
    let energy = profile.capacitance * rate * rate * cycles.powi(3) / profile.message_bits.powi(2);
    Ok((f.min(profile.max_frequency), energy))
}

/// Harvested power ξ(kNR)³/M³ needed to process every message in real time.
pub fn required_power(profile: &ComputeProfile, rate: f64) -> Result<f64> {
    profile.check_rate(rate)?;
    Ok(profile.capacitance * (profile.cycles_per_task() * rate / profile.message_bits).powi(3))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub point: TradeoffPoint,
    pub tasks_per_second: f64,
    pub cycles_per_second: f64,
}

/// Rate at which the trade-off level set meets the required-power curve.
pub fn operating_point(profile: &ComputeProfile, level: f64, model: &JccdfModel) -> Result<OperatingPoint> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!("level must lie in (0, 1), got {level}")));
    }
    profile.validate()?;
    let top = model.serving_probability();
    if level >= top {
        return Err(Error::NoIntersection(format!(
            "level {level} exceeds the serving probability {top}"
        )));
    }
    let excess = |rate: f64| -> Result<f64> { Ok(model.jccdf(rate, required_power(profile, rate)?)? - level) };
    let max_rate = profile.max_rate();
    let mut lo = (1.0f64).min(0.5 * max_rate);
    if excess(lo)? < 0.0 {
        return Err(Error::NoIntersection(format!("level {level} is missed even at rate {lo} bit/s")));
    }
    let mut hi = lo;
    loop {
        let next = (hi * 4.0).min(max_rate);
        if excess(next)? < 0.0 {
            hi = next;
            break;
        }
        if next >= max_rate {
            return Err(Error::NoIntersection(format!(
                "level {level} still met at the CPU limit {max_rate} bit/s"
            )));
        }
        lo = next;
        hi = next;
    }
    let rate = log_root(|u| excess(u.exp()), lo.ln(), hi.ln(), 1e-6)?.exp();
    let power = required_power(profile, rate)?;
    Ok(OperatingPoint {
        point: TradeoffPoint {
            rate,
            power,
            jccdf: model.jccdf(rate, power)?,
        },
        tasks_per_second: profile.tasks_per_second(rate),
        cycles_per_second: profile.cycles_per_second(rate),
    })
}

/// Probability that the link misses either the rate R or the power needed
/// to process at rate R.
pub fn outage_probability(profile: &ComputeProfile, rate: f64, model: &JccdfModel) -> Result<f64> {
    let power = required_power(profile, rate)?;
    Ok(1.0 - model.jccdf(rate, power)?)
}

/// Rate with outage probability `target`; outage is nondecreasing in rate.
pub fn rate_at_outage(profile: &ComputeProfile, target: f64, model: &JccdfModel) -> Result<f64> {
    Ok(operating_point(profile, 1.0 - target, model)?.point.rate)
}
