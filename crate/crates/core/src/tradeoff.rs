//! Joint complementary CDF of the information rate and the harvested power
//! at the typical device, and the trade-off curves it induces.
//!
//! For a serving loss y and MIMO gain g, both targets are met exactly when
//! the interference lies in [q*/P − g/y, γg/y − σ*²/P]. Writing the
//! interference CDF through its characteristic function turns the gain
//! expectation into incomplete-gamma kernels, leaving a double integral over
//! (y, ω) that is evaluated on fixed quadrature grids.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interference::InterferenceCf;
use crate::mimo::{eigen_pdf_coefficients, EigenPdfCoefficients};
use crate::quad::{GaussLegendre, OscillatoryRule, PiecewiseChebyshev};
use crate::scenario::NetworkScenario;
use crate::units::{dbm_to_watts, thermal_noise_watts};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    /// P in watts.
    pub tx_power: f64,
    /// B in hertz.
    pub bandwidth: f64,
    /// ρ, the fraction of received power sent to the harvester.
    pub splitting_ratio: f64,
    pub harvest_efficiency: f64,
    /// σ_n² in watts.
    pub thermal_noise: f64,
    /// σ_c² in watts.
    pub conversion_noise: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        Self {
            tx_power: dbm_to_watts(30.0),
            bandwidth: 200e3,
            splitting_ratio: 0.99,
            harvest_efficiency: 0.8,
            thermal_noise: thermal_noise_watts(200e3, 10.0),
            conversion_noise: dbm_to_watts(-70.0),
        }
    }
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Domain(format!("{name} must be positive, got {v}")))
            }
        };
        positive("transmit power", self.tx_power)?;
        positive("bandwidth", self.bandwidth)?;
        if !(0.0..1.0).contains(&self.splitting_ratio) {
            return Err(Error::Domain(format!(
                "splitting ratio must lie in [0, 1), got {}",
                self.splitting_ratio
            )));
        }
        if !(self.harvest_efficiency > 0.0 && self.harvest_efficiency <= 1.0) {
            return Err(Error::Domain(format!(
                "harvesting efficiency must lie in (0, 1], got {}",
                self.harvest_efficiency
            )));
        }
        if !(self.thermal_noise >= 0.0 && self.conversion_noise >= 0.0) {
            return Err(Error::Domain("noise powers must be nonnegative".into()));
        }
        Ok(())
    }

    /// σ*² = σ_n² + σ_c²/(1 − ρ).
    pub fn effective_noise(&self) -> f64 {
        self.thermal_noise + self.conversion_noise / (1.0 - self.splitting_ratio)
    }
}

/// Targets R* (bit/s) and Q* (W).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeoffQuery {
    pub rate: f64,
    pub power: f64,
}

impl TradeoffQuery {
    pub fn new(rate: f64, power: f64) -> Result<Self> {
        if !(rate >= 0.0 && power >= 0.0) {
            return Err(Error::Domain(format!("targets must be nonnegative, got R*={rate}, Q*={power}")));
        }
        Ok(Self { rate, power })
    }

    /// γ = 1/(2^{R*/B} − 1); infinite when R* = 0.
    pub fn gamma(&self, budget: &LinkBudget) -> f64 {
        1.0 / (self.rate / budget.bandwidth).exp2().ln().exp_m1().max(0.0)
    }

    /// q* = Q*/(ρ ζ).
    pub fn power_target(&self, budget: &LinkBudget) -> f64 {
        self.power / (budget.splitting_ratio * budget.harvest_efficiency)
    }

    /// T* = (q* + σ*²)/(γ + 1).
    pub fn threshold(&self, budget: &LinkBudget) -> f64 {
        let g = self.gamma(budget);
        if g.is_infinite() {
            0.0
        } else {
            (self.power_target(budget) + budget.effective_noise()) / (g + 1.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub rate: f64,
    pub power: f64,
    pub jccdf: f64,
}

/// Rate and harvested power for a gain `g0`, serving loss `l0` and
/// normalised interference `i`.
pub fn instantaneous_rate_energy(g0: f64, l0: f64, i: f64, budget: &LinkBudget) -> (f64, f64) {
    let p = budget.tx_power;
    let signal = p * g0 / l0;
    let sinr = signal / (p * i + budget.effective_noise());
    let rate = budget.bandwidth * sinr.ln_1p() / std::f64::consts::LN_2;
    let power = budget.splitting_ratio * budget.harvest_efficiency * p * (g0 / l0 + i);
    (rate, power)
}

/// Discretisation of the (y, ω) integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JccdfSettings {
    pub y_panels_per_decade: f64,
    pub y_nodes: usize,
    /// Serving-loss mass ignored below the first y node.
    pub y_lower_mass: f64,
    /// Nodes whose weight falls below this are dropped.
    pub weight_cutoff: f64,
    /// Lower end of the tabulated interference CF.
    pub omega_min: f64,
    /// Start of the ω integral unless the rate kernel needs smaller ω.
    pub omega_start: f64,
    pub omega_max: f64,
    pub cf_panels_per_decade: f64,
    pub cf_nodes: usize,
    /// |Φ| level at which the ω integral is truncated.
    pub cf_floor: f64,
    pub omega_panels_per_decade: f64,
    pub omega_nodes: usize,
}

impl Default for JccdfSettings {
    fn default() -> Self {
        Self {
            y_panels_per_decade: 1.0,
            y_nodes: 8,
            y_lower_mass: 1e-10,
            weight_cutoff: 1e-14,
            omega_min: 1e-10,
            omega_start: 1e-4,
            omega_max: 1e13,
            cf_panels_per_decade: 2.0,
            cf_nodes: 16,
            cf_floor: 1e-10,
            omega_panels_per_decade: 3.0,
            omega_nodes: 12,
        }
    }
}

#[derive(Debug, Clone)]
struct YNode {
    y: f64,
    weight: f64,
    log_cf: Vec<Complex64>,
    omega_cut: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JccdfValue {
    pub value: f64,
    pub raw: f64,
    pub residual: f64,
}

/// Precomputed serving-loss quadrature and interference CF tables for one scenario.
#[derive(Debug, Clone)]
pub struct JccdfModel {
    scenario: NetworkScenario,
    settings: JccdfSettings,
    eigen: EigenPdfCoefficients,
    /// Gain-density terms grouped by rate s: (s, [(t, a_{s,t})]).
    groups: Vec<(f64, Vec<(u32, f64)>)>,
    serving_probability: f64,
    cheb: PiecewiseChebyshev,
    nodes: Vec<YNode>,
    rule: OscillatoryRule,
}

impl JccdfModel {
    pub fn new(scenario: &NetworkScenario) -> Result<Self> {
        Self::with_settings(scenario, JccdfSettings::default())
    }

    pub fn with_settings(scenario: &NetworkScenario, settings: JccdfSettings) -> Result<Self> {
        scenario.validate()?;
        let eigen = eigen_pdf_coefficients(scenario.tx_antennas, scenario.rx_antennas)?;
        let mut groups: Vec<(f64, Vec<(u32, f64)>)> = Vec::new();
        for &(s, t, a) in &eigen.pdf_terms {
            match groups.iter_mut().find(|g| g.0 == s as f64) {
                Some(g) => g.1.push((t, a)),
                None => groups.push((s as f64, vec![(t, a)])),
            }
        }
        let prop = scenario.propagation;
        let q_hit = scenario.hit_probability;
        let table = InterferenceCf::new(prop, q_hit)?;
        let unit = table.unit_model();
        let serving_probability = -(-q_hit * unit.total_mass()).exp_m1();

        let mut ys = Vec::new();
        let mut weights = Vec::new();
        if q_hit > 0.0 && prop.ph_density > 0.0 {
            let mut y_lo = prop.saturation_loss(0);
            while q_hit * unit.total_intensity(y_lo) > settings.y_lower_mass && y_lo > 1e-300 {
                y_lo *= 0.1;
            }
            let mut breaks = vec![y_lo.ln()];
            breaks.extend(
                (0..=prop.max_walls)
                    .map(|w| prop.saturation_loss(w).ln())
                    .filter(|&u| u > y_lo.ln()),
            );
            let gl = GaussLegendre::new(settings.y_nodes);
            for win in breaks.windows(2) {
                let decades = (win[1] - win[0]) / std::f64::consts::LN_10;
                let n = (decades * settings.y_panels_per_decade).ceil().max(1.0) as usize;
                for k in 0..n {
                    let lo = win[0] + (win[1] - win[0]) * k as f64 / n as f64;
                    let hi = win[0] + (win[1] - win[0]) * (k + 1) as f64 / n as f64;
                    for (u, wt) in gl.on(lo, hi) {
                        let y = u.exp();
                        let density = q_hit * unit.total_derivative(y) * (-q_hit * unit.total_intensity(y)).exp();
                        let weight = wt * y * density;
                        if weight > settings.weight_cutoff {
                            ys.push(y);
                            weights.push(weight);
                        }
                    }
                }
            }
        }
        let captured: f64 = weights.iter().sum();
        if (captured - serving_probability).abs() > 1e-6 {
            log::warn!(
                "serving-loss quadrature captures {captured} of {serving_probability}; refine the y grid"
            );
        }

        let (u_lo, u_hi) = (settings.omega_min.ln(), settings.omega_max.ln());
        let cf_panels = ((u_hi - u_lo) / std::f64::consts::LN_10 * settings.cf_panels_per_decade).ceil() as usize;
        let cheb = PiecewiseChebyshev::new(u_lo, u_hi, cf_panels, settings.cf_nodes);
        let points = cheb.points();
        let omegas: Vec<f64> = points.iter().map(|u| u.exp()).collect();
        let grid = table.log_cf_grid(&omegas, &ys);
        let floor = settings.cf_floor.ln();
        let nodes = ys
            .into_iter()
            .zip(weights)
            .zip(grid)
            .map(|((y, weight), log_cf)| {
                let omega_cut = omegas
                    .iter()
                    .zip(&log_cf)
                    .filter(|(_, l)| l.re < floor)
                    .map(|(&w, _)| w)
                    .fold(settings.omega_max, f64::min);
                YNode {
                    y,
                    weight,
                    log_cf,
                    omega_cut,
                }
            })
            .collect();
        Ok(Self {
            scenario: *scenario,
            settings,
            eigen,
            groups,
            serving_probability,
            cheb,
            nodes,
            rule: OscillatoryRule::new(settings.omega_nodes),
        })
    }

    pub fn scenario(&self) -> &NetworkScenario {
        &self.scenario
    }

    pub fn eigen(&self) -> &EigenPdfCoefficients {
        &self.eigen
    }

    /// F_{L⁽⁰⁾}(∞): probability that a serving head exists.
    pub fn serving_probability(&self) -> f64 {
        self.serving_probability
    }

    /// Number of serving-loss quadrature nodes.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn jccdf(&self, rate: f64, power: f64) -> Result<f64> {
        Ok(self.evaluate(&TradeoffQuery::new(rate, power)?)?.value)
    }

    pub fn evaluate(&self, query: &TradeoffQuery) -> Result<JccdfValue> {
        let budget = &self.scenario.budget;
        let p = budget.tx_power;
        let gamma = query.gamma(budget);
        let qs = query.power_target(budget) / p;
        let s2 = budget.effective_noise() / p;
        if gamma.is_infinite() && qs == 0.0 {
            let v = self.serving_probability;
            return Ok(JccdfValue {
                value: v,
                raw: v,
                residual: 0.0,
            });
        }
        let rate_free = gamma.is_infinite();
        let t_over_p = query.threshold(budget) / p;
        let nu = if rate_free { qs } else { (gamma * qs - s2) / (gamma + 1.0) };
        let parts: Vec<f64> = self
            .nodes
            .par_iter()
            .map(|node| node.weight * self.node_integral(node, gamma, t_over_p, nu))
            .collect();
        let mut raw = self.eigen.k_mn * parts.iter().sum::<f64>();
        if rate_free {
            raw += 0.5 * self.nodes.iter().map(|n| n.weight).sum::<f64>();
        }
        let value = raw.clamp(0.0, 1.0);
        let residual = (raw - value).abs();
        if residual > crate::interference::RESIDUAL_LIMIT {
            return Err(Error::Residual {
                what: "joint CCDF",
                value,
                residual,
            });
        }
        if residual > 0.0 {
            log::debug!("joint CCDF clamped by {residual:e}");
        }
        Ok(JccdfValue { value, raw, residual })
    }

    /// (1/π) ∫ Im{Φ(ω; y) Σ a_{s,t}[J1 − J2 kernels]}/ω dω for one serving loss.
    ///
    /// Both kernels oscillate as e^{-iνω}; the factor e^{-x0 z} inside
    /// Γ(t+1, x0 z) cancels the remaining phases, so the integrand is handed
    /// to the Filon rule as a smooth amplitude times that single exponential.
    fn node_integral(&self, node: &YNode, gamma: f64, t_over_p: f64, nu: f64) -> f64 {
        let y = node.y;
        let x0 = t_over_p * y;
        let rate_free = gamma.is_infinite();
        let kernel = |omega: f64| -> Complex64 {
            let mut total = Complex64::new(0.0, 0.0);
            for (s, terms) in &self.groups {
                let damping = (-x0 * s).exp();
                if damping == 0.0 {
                    continue;
                }
                let mut add = |z: Complex64, sign: f64| {
                    let t_max = terms.iter().map(|x| x.0).max().unwrap_or(0) as usize;
                    // e^{w} Γ(t+1, w) = t e^{w} Γ(t, w) + w^t
                    let w = z * x0;
                    let mut scaled = Vec::with_capacity(t_max + 1);
                    let (mut current, mut power) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
                    scaled.push(current);
                    for t in 1..=t_max {
                        power *= w;
                        current = current * t as f64 + power;
                        scaled.push(current);
                    }
                    let inv = z.inv();
                    let mut acc = Complex64::new(0.0, 0.0);
                    for &(t, a) in terms {
                        acc += scaled[t as usize] * inv.powi(t as i32 + 1) * a;
                    }
                    total += acc * (damping * sign);
                };
                add(Complex64::new(*s, -omega / y), 1.0);
                if !rate_free {
                    add(Complex64::new(*s, omega * gamma / y), -1.0);
                }
            }
            total
        };
        let amplitude = |omega: f64| -> Complex64 {
            // Below the table the CF differs from 1 by far less than the quadrature error.
            let phi = if omega < self.settings.omega_min {
                Complex64::new(1.0, 0.0)
            } else {
                self.cheb.eval(&node.log_cf, omega.ln()).exp()
            };
            phi * kernel(omega) / omega
        };
        // The rate kernel varies on the scale y/γ, which shrinks as R* → 0.
        let w0 = if rate_free {
            self.settings.omega_start
        } else {
            (1e-2 * y / gamma).clamp(f64::MIN_POSITIVE, self.settings.omega_start)
        };
        let mut integral = (amplitude(w0) * Complex64::from_polar(w0, -nu * w0)).im;
        let ratio = 10f64.powf(1.0 / self.settings.omega_panels_per_decade);
        let mut a = w0;
        while a < node.omega_cut {
            let b = (a * ratio).min(node.omega_cut);
            integral += self.rule.integrate(a, b, nu, amplitude).im;
            a = b;
        }
        integral / std::f64::consts::PI
    }

    /// Largest Q with jccdf(rate, Q) ≥ level, to relative tolerance `rel_tol`;
    /// `None` when even a vanishing power target misses the level.
    pub fn max_power(&self, rate: f64, level: f64, rel_tol: f64) -> Result<Option<f64>> {
        const Q_FLOOR: f64 = 1e-15;
        let f = |q: f64| -> Result<f64> { Ok(self.jccdf(rate, q)? - level) };
        if f(Q_FLOOR)? < 0.0 {
            return Ok(None);
        }
        let mut lo = Q_FLOOR;
        let mut hi = 1e-6;
        let mut f_hi = f(hi)?;
        while f_hi >= 0.0 {
            lo = hi;
            hi *= 10.0;
            if hi > 1e6 {
                return Err(Error::NoConvergence {
                    what: "trade-off power bracket",
                    iterations: 12,
                    estimate: hi,
                });
            }
            f_hi = f(hi)?;
        }
        let root = log_root(|u| f(u.exp()), lo.ln(), hi.ln(), (1.0 + rel_tol).ln())?;
        Ok(Some(root.exp()))
    }

    /// Largest R with jccdf(R, power) ≥ level, to relative tolerance `rel_tol`;
    /// `None` when the level is missed even at a vanishing rate.
    pub fn max_rate(&self, power: f64, level: f64, rel_tol: f64) -> Result<Option<f64>> {
        const R_FLOOR: f64 = 1e-3;
        let f = |r: f64| -> Result<f64> { Ok(self.jccdf(r, power)? - level) };
        if f(R_FLOOR)? < 0.0 {
            return Ok(None);
        }
        let mut lo = R_FLOOR;
        let mut hi = self.scenario.budget.bandwidth;
        while f(hi)? >= 0.0 {
            lo = hi;
            hi *= 4.0;
            if hi > 1e4 * self.scenario.budget.bandwidth {
                return Err(Error::NoConvergence {
                    what: "trade-off rate bracket",
                    iterations: 7,
                    estimate: hi,
                });
            }
        }
        let root = log_root(|u| f(u.exp()), lo.ln(), hi.ln(), (1.0 + rel_tol).ln())?;
        Ok(Some(root.exp()))
    }

    /// Level set jccdf = level over `rates`; rates with no feasible power are omitted.
    pub fn tradeoff_curve(&self, level: f64, rates: &[f64]) -> Result<Vec<TradeoffPoint>> {
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::Domain(format!("level must lie in (0, 1), got {level}")));
        }
        let mut out = Vec::new();
        for &rate in rates {
            if let Some(power) = self.max_power(rate, level, 1e-3)? {
                out.push(TradeoffPoint {
                    rate,
                    power,
                    jccdf: self.jccdf(rate, power)?,
                });
            }
        }
        if out.is_empty() {
            log::warn!("level {level} is unreachable on the whole rate grid");
        }
        Ok(out)
    }
}

/// Root of a decreasing function on [lo, hi] (f(lo) ≥ 0 > f(hi)) by the
/// Illinois variant of regula falsi, stopped when the bracket is below `tol`.
pub(crate) fn log_root(mut f: impl FnMut(f64) -> Result<f64>, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut f_lo = f(lo)?;
    let mut f_hi = f(hi)?;
    if f_lo < 0.0 || f_hi >= 0.0 {
        return Err(Error::NoIntersection(format!(
            "no sign change on [{lo}, {hi}] ({f_lo}, {f_hi})"
        )));
    }
    let mut side = 0i8;
    for _ in 0..200 {
        if hi - lo <= tol {
            return Ok(0.5 * (lo + hi));
        }
        let mut x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        let margin = 0.01 * (hi - lo);
        if !(x > lo + margin && x < hi - margin) {
            x = 0.5 * (lo + hi);
        }
        let fx = f(x)?;
        if fx >= 0.0 {
            lo = x;
            f_lo = fx;
            if side == 1 {
                f_hi *= 0.5;
            }
            side = 1;
        } else {
            hi = x;
            f_hi = fx;
            if side == -1 {
                f_lo *= 0.5;
            }
            side = -1;
        }
    }
    Err(Error::NoConvergence {
        what: "bracketed root",
        iterations: 200,
        estimate: 0.5 * (lo + hi),
    })
}

pub fn jccdf(query: &TradeoffQuery, scenario: &NetworkScenario) -> Result<f64> {
    Ok(JccdfModel::new(scenario)?.evaluate(query)?.value)
}

pub fn tradeoff_curve(level: f64, rates: &[f64], scenario: &NetworkScenario) -> Result<Vec<TradeoffPoint>> {
    JccdfModel::new(scenario)?.tradeoff_curve(level, rates)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds() {
        let b = LinkBudget::default();
        let q = TradeoffQuery::new(200e3, 1e-6).unwrap();
        assert!((q.gamma(&b) - 1.0).abs() < 1e-12);
        assert!((q.power_target(&b) - 1e-6 / (0.99 * 0.8)).abs() < 1e-18);
        let sigma = b.effective_noise();
        assert!((q.threshold(&b) - (q.power_target(&b) + sigma) / 2.0).abs() < 1e-18);
        let zero = TradeoffQuery::new(0.0, 1e-6).unwrap();
        assert!(zero.gamma(&b).is_infinite());
        assert_eq!(zero.threshold(&b), 0.0);
        assert!(TradeoffQuery::new(-1.0, 0.0).is_err());
    }

    #[test]
    fn rate_energy_mapping() {
        let b = LinkBudget::default();
        assert_eq!(instantaneous_rate_energy(0.0, 10.0, 0.0, &b), (0.0, 0.0));
        let (g, l, i) = (3.0, 2e5, 4e-6);
        let (r, q) = instantaneous_rate_energy(g, l, i, &b);
        let sigma = b.thermal_noise + b.conversion_noise / (1.0 - 0.99);
        let sinr = (1.0 * 3.0 / 2e5) / (1.0 * 4e-6 + sigma);
        assert!((r - 200e3 * (1.0 + sinr).log2()).abs() < 1e-6);
        assert!((q - 0.99 * 0.8 * (3.0 / 2e5 + 4e-6)).abs() < 1e-18);
        let mut prev = (f64::INFINITY, 0.0);
        for k in 0..60 {
            let i = 1e-9 * 10f64.powf(k as f64 * 0.2);
            let (r, q) = instantaneous_rate_energy(g, l, i, &b);
            assert!(r <= prev.0 && q >= prev.1);
            prev = (r, q);
        }
        assert!(prev.0 < 1.0 && prev.1 > 1e2);
    }

    #[test]
    fn illinois_root() {
        let r = log_root(|x| Ok(2.0 - x * x), 0.0, 3.0, 1e-12).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-11);
        assert!(log_root(|x| Ok(x), 1.0, 2.0, 1e-9).is_err());
    }
}
