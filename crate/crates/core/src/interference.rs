//! Characteristic function of the aggregate interference seen by the typical
//! device, and its inversion into a conditional CDF.
//!
//! Every log-CF below has the form ∫ jω/(α − jω) dΛ(α): the interferer fading
//! is unit-mean exponential, so averaging e^{jωh/α} over h yields the kernel
//! in closed form.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::propagation::{IntensityModel, PropagationParams};
use crate::quad::{adaptive_piecewise, GaussLegendre, Tolerance};
use crate::specfun::gauss_2f1;

const J: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Relative distance of a = p/β from an integer below which the hit closed
/// form is replaced by direct integration of that term.
const INTEGER_ORDER_GUARD: f64 = 1e-4;
const TERM_CANCELLATION_LIMIT: f64 = 1e6;

#[inline]
fn kernel(omega: f64, alpha: f64) -> Complex64 {
    let d = alpha * alpha + omega * omega;
    Complex64::new(-omega * omega / d, omega * alpha / d)
}

/// ∫_{lo}^{hi} jω/(α−jω) d[(αK^W/κ)^a] by adaptive quadrature in ln α.
fn power_term_integral(omega: f64, lo: f64, hi: f64, a: f64, scale: f64) -> Result<Complex64> {
    let (ulo, uhi) = (lo.ln(), hi.ln());
    let mut breaks = vec![ulo];
    let uw = omega.ln();
    if uw > ulo && uw < uhi {
        breaks.push(uw);
    }
    breaks.push(uhi);
    let magnitude = (hi * scale).powf(a);
    let out = adaptive_piecewise(
        |u: f64| {
            let alpha = u.exp();
            kernel(omega, alpha) * (a * (alpha * scale).powf(a))
        },
        &breaks,
        Tolerance::new(1e-15 * magnitude, 1e-12),
    )?;
    Ok(out.value)
}

/// ln Φ_{W,q}(ω; L0) for the hit heads beyond the serving loss, from the
/// term-wise hypergeometric antiderivative. `model.q()` is the hit probability.
pub fn log_cf_hit(omega: f64, l0: f64, w: u32, model: &IntensityModel) -> Result<Complex64> {
    if omega < 0.0 {
        return log_cf_hit(-omega, l0, w, model).map(|v| v.conj());
    }
    if !(l0 > 0.0) {
        return Err(Error::Domain(format!("serving loss must be positive, got {l0}")));
    }
    let p = *model.params();
    let sat = p.saturation_loss(w);
    if omega == 0.0 || l0 >= sat || model.q() == 0.0 || p.ph_density == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let beta = p.path_loss_exponent;
    let scale = p.penetration_loss.powi(w as i32) / p.kappa();
    let antiderivative = |alpha: f64, a: f64| -> Result<Complex64> {
        let f = gauss_2f1(1.0, -a, 1.0 - a, J * (omega / alpha))?;
        Ok((Complex64::new(1.0, 0.0) - f) * (alpha * scale).powf(a))
    };
    let mut sum = Complex64::new(0.0, 0.0);
    for (i, e) in model.radial_coefficients(w).take(model.edge_terms()).enumerate() {
        if e == 0.0 {
            continue;
        }
        let pw = (i as u32 + w + 2) as f64;
        let a = pw / beta;
        let closed = if (a - a.round()).abs() < INTEGER_ORDER_GUARD {
            None
        } else {
            match (antiderivative(l0, a), antiderivative(sat, a)) {
                (Ok(lo), Ok(hi)) => {
                    let delta = lo - hi;
                    (lo.norm() <= TERM_CANCELLATION_LIMIT * delta.norm()).then_some(delta)
                }
                _ => None,
            }
        };
        let delta = match closed {
            Some(d) => d,
            None => power_term_integral(omega, l0, sat, a, scale)?,
        };
        sum += delta * e;
    }
    Ok(sum)
}

/// ln Φ_{W,q}(ω) for heads that interfere regardless of the serving loss.
pub fn log_cf_nohit(omega: f64, w: u32, model: &IntensityModel) -> Result<Complex64> {
    if omega < 0.0 {
        return log_cf_nohit(-omega, w, model).map(|v| v.conj());
    }
    let p = *model.params();
    if omega == 0.0 || model.q() == 0.0 || p.ph_density == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let beta = p.path_loss_exponent;
    let sat = p.saturation_loss(w);
    let z = Complex64::new(0.0, -sat / omega);
    let mut sum = Complex64::new(0.0, 0.0);
    for (i, e) in model.radial_coefficients(w).take(model.edge_terms()).enumerate() {
        if e == 0.0 {
            continue;
        }
        let pw = (i as u32 + w + 2) as f64;
        let a = pw / beta;
        let f = match gauss_2f1(1.0, a, a + 1.0, z) {
            Ok(f) => f,
            Err(err) => {
                log::debug!("non-hit closed form failed ({err}); integrating instead");
                return log_cf_generic(omega, 0.0, w, model);
            }
        };
        sum -= f * (e * p.disk_radius.powf(pw));
    }
    Ok(sum)
}

/// ln of the single-integral form exp(∫_{lower}^{∞} jω/(α−jω) Λ̂_{W,q}(α) dα).
pub fn log_cf_generic(omega: f64, lower: f64, w: u32, model: &IntensityModel) -> Result<Complex64> {
    if omega < 0.0 {
        return log_cf_generic(-omega, lower, w, model).map(|v| v.conj());
    }
    if !(lower >= 0.0) {
        return Err(Error::Domain(format!("lower limit must be nonnegative, got {lower}")));
    }
    let sat = model.params().saturation_loss(w);
    if omega == 0.0 || lower >= sat {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mass = model.intensity(w, sat);
    if mass == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let lo = lower.max(sat * 1e-40);
    let (ulo, uhi) = (lo.ln(), sat.ln());
    let n = ((uhi - ulo) / std::f64::consts::LN_10).ceil().max(1.0) as usize;
    let mut breaks: Vec<f64> = (0..=n).map(|k| ulo + (uhi - ulo) * k as f64 / n as f64).collect();
    let uw = omega.ln();
    if uw > ulo && uw < uhi {
        breaks.push(uw);
        breaks.sort_by(f64::total_cmp);
    }
    let out = adaptive_piecewise(
        |u: f64| {
            let alpha = u.exp();
            kernel(omega, alpha) * (alpha * model.derivative(w, alpha))
        },
        &breaks,
        Tolerance::new(1e-15 * mass, 1e-12),
    )?;
    Ok(out.value)
}

pub fn cf_hit(omega: f64, l0: f64, w: u32, model: &IntensityModel) -> Result<Complex64> {
    log_cf_hit(omega, l0, w, model).map(Complex64::exp)
}

pub fn cf_nohit(omega: f64, w: u32, model: &IntensityModel) -> Result<Complex64> {
    log_cf_nohit(omega, w, model).map(Complex64::exp)
}

pub fn cf_generic(omega: f64, lower: f64, w: u32, model: &IntensityModel) -> Result<Complex64> {
    log_cf_generic(omega, lower, w, model).map(Complex64::exp)
}

const TABLE_NODES: usize = 8;
const TABLE_PANELS_PER_DECADE: f64 = 4.0;

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    start: usize,
}

/// Quadrature table of the all-tier unit intensity measure dΛ₁ in ln α,
/// from which the interference CF for any serving loss is assembled.
#[derive(Debug, Clone)]
pub struct InterferenceCf {
    q_hit: f64,
    unit: IntensityModel,
    gl: GaussLegendre,
    panels: Vec<Panel>,
    alphas: Vec<f64>,
    masses: Vec<f64>,
}

impl InterferenceCf {
    pub fn new(params: PropagationParams, q_hit: f64) -> Result<Self> {
        let unit = IntensityModel::new(params, 1.0)?;
        if !(0.0..=1.0).contains(&q_hit) {
            return Err(Error::Domain(format!("hit probability must lie in [0, 1], got {q_hit}")));
        }
        let gl = GaussLegendre::new(TABLE_NODES);
        let mut panels = Vec::new();
        let mut alphas = Vec::new();
        let mut masses = Vec::new();
        if params.ph_density > 0.0 {
            let r_lo = (1e-15 / (params.ph_density * std::f64::consts::PI))
                .sqrt()
                .min(params.disk_radius * 1e-3);
            let a_lo = params.kappa() * r_lo.powf(params.path_loss_exponent);
            let mut breaks = vec![a_lo.ln()];
            breaks.extend((0..=params.max_walls).map(|w| params.saturation_loss(w).ln()));
            let step = std::f64::consts::LN_10 / TABLE_PANELS_PER_DECADE;
            for win in breaks.windows(2) {
                let n = ((win[1] - win[0]) / step).ceil().max(1.0) as usize;
                for k in 0..n {
                    let lo = win[0] + (win[1] - win[0]) * k as f64 / n as f64;
                    let hi = win[0] + (win[1] - win[0]) * (k + 1) as f64 / n as f64;
                    panels.push(Panel {
                        lo,
                        hi,
                        start: alphas.len(),
                    });
                    for (u, wt) in gl.on(lo, hi) {
                        let alpha = u.exp();
                        alphas.push(alpha);
                        masses.push(wt * alpha * unit.total_derivative(alpha));
                    }
                }
            }
        }
        Ok(Self {
            q_hit,
            unit,
            gl,
            panels,
            alphas,
            masses,
        })
    }

    pub fn q_hit(&self) -> f64 {
        self.q_hit
    }

    /// The q = 1 all-tier intensity used to build the table.
    pub fn unit_model(&self) -> &IntensityModel {
        &self.unit
    }

    /// Node set of the interference measure given serving loss `l0`:
    /// non-hit heads everywhere and hit heads with loss above `l0`.
    pub fn conditional(&self, l0: f64) -> ConditionalCf {
        let q_miss = 1.0 - self.q_hit;
        let mut alphas = Vec::with_capacity(self.alphas.len() + TABLE_NODES);
        let mut masses = Vec::with_capacity(self.alphas.len() + TABLE_NODES);
        let ul0 = if l0 > 0.0 { l0.ln() } else { f64::NEG_INFINITY };
        for panel in &self.panels {
            let range = panel.start..panel.start + TABLE_NODES;
            if panel.lo >= ul0 {
                alphas.extend_from_slice(&self.alphas[range.clone()]);
                masses.extend_from_slice(&self.masses[range]);
                continue;
            }
            if q_miss > 0.0 {
                alphas.extend_from_slice(&self.alphas[range.clone()]);
                masses.extend(self.masses[range].iter().map(|m| m * q_miss));
            }
            if panel.hi > ul0 && self.q_hit > 0.0 {
                for (u, wt) in self.gl.on(ul0, panel.hi) {
                    let alpha = u.exp();
                    alphas.push(alpha);
                    masses.push(self.q_hit * wt * alpha * self.unit.total_derivative(alpha));
                }
            }
        }
        let total: f64 = masses.iter().sum();
        let mean = alphas.iter().zip(&masses).map(|(a, m)| m / a).sum();
        ConditionalCf {
            alphas,
            masses,
            total,
            mean,
        }
    }

    pub fn log_cf(&self, omega: f64, l0: f64) -> Complex64 {
        self.conditional(l0).log_cf(omega)
    }

    /// ln Φ(ω_j; l_i) for every serving loss `lowers[i]` and frequency
    /// `omegas[j]`, sharing the per-panel partial sums across serving losses.
    pub fn log_cf_grid(&self, omegas: &[f64], lowers: &[f64]) -> Vec<Vec<Complex64>> {
        let zero = Complex64::new(0.0, 0.0);
        let np = self.panels.len();
        // suffix[p][j] = Σ over panels ≥ p of the unit-intensity contribution.
        let mut suffix = vec![vec![zero; omegas.len()]; np + 1];
        for p in (0..np).rev() {
            let start = self.panels[p].start;
            let (head, tail) = suffix.split_at_mut(p + 1);
            for (j, &omega) in omegas.iter().enumerate() {
                let mut acc = tail[0][j];
                for k in start..start + TABLE_NODES {
                    acc += kernel(omega, self.alphas[k]) * self.masses[k];
                }
                head[p][j] = acc;
            }
        }
        let q_miss = 1.0 - self.q_hit;
        lowers
            .iter()
            .map(|&l0| {
                let ul0 = l0.ln();
                let idx = self.panels.partition_point(|p| p.hi <= ul0);
                let mut fresh = Vec::new();
                let base = if idx == np {
                    &suffix[np]
                } else if self.panels[idx].lo >= ul0 {
                    &suffix[idx]
                } else {
                    for (u, wt) in self.gl.on(ul0, self.panels[idx].hi) {
                        let alpha = u.exp();
                        fresh.push((alpha, wt * alpha * self.unit.total_derivative(alpha)));
                    }
                    &suffix[idx + 1]
                };
                omegas
                    .iter()
                    .enumerate()
                    .map(|(j, &omega)| {
                        let hit = fresh
                            .iter()
                            .fold(base[j], |acc, &(a, m)| acc + kernel(omega, a) * m);
                        suffix[0][j] * q_miss + hit * self.q_hit
                    })
                    .collect()
            })
            .collect()
    }
}

/// Interference characteristic function for one serving loss.
#[derive(Debug, Clone)]
pub struct ConditionalCf {
    alphas: Vec<f64>,
    masses: Vec<f64>,
    total: f64,
    mean: f64,
}

impl ConditionalCf {
    pub fn log_cf(&self, omega: f64) -> Complex64 {
        let w2 = omega * omega;
        let (mut re, mut im) = (0.0, 0.0);
        for (&a, &m) in self.alphas.iter().zip(&self.masses) {
            let s = m / (a * a + w2);
            re -= s;
            im += s * a;
        }
        Complex64::new(re * w2, im * omega)
    }

    pub fn cf(&self, omega: f64) -> Complex64 {
        self.log_cf(omega).exp()
    }

    /// Analytic continuation of the log-CF off the real axis (Re ω > 0).
    pub fn log_cf_complex(&self, omega: Complex64) -> Complex64 {
        let s = J * omega;
        self.alphas
            .iter()
            .zip(&self.masses)
            .fold(Complex64::new(0.0, 0.0), |acc, (&a, &m)| acc + s * m / (a - s))
    }

    /// Expected number of interferers.
    pub fn interferer_mass(&self) -> f64 {
        self.total
    }

    /// Mean aggregate interference E[Σ h/l].
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Probability that there is no interferer at all.
    pub fn void_probability(&self) -> f64 {
        (-self.total).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfEstimate {
    pub value: f64,
    /// Amount removed by clamping to [0, 1].
    pub residual: f64,
    pub tail_bound: f64,
    pub omega_max: f64,
}

const CDF_PANELS_PER_DECADE: f64 = 5.0;
const CDF_NODES: usize = 16;
const CDF_FLOOR: f64 = 1e-9;
const CDF_TAIL_LIMIT: f64 = 1e-7;
const CDF_OMEGA_CEILING: f64 = 1e22;
/// Number of oscillation periods after which the tail is taken along a ray
/// into the lower half plane, where e^{-jωz} decays.
const CDF_ROTATION_PERIODS: f64 = 4.0;
const CDF_ROTATION_ANGLE: f64 = std::f64::consts::FRAC_PI_4;
pub const RESIDUAL_LIMIT: f64 = 1e-3;

/// P(I ≤ z) by Gil-Pelaez inversion of the continuous part of the CF; the
/// atom at zero (no interferer) is added back explicitly.
pub fn interference_cdf_conditional(z: f64, cf: &ConditionalCf) -> Result<CdfEstimate> {
    let exact = |value| CdfEstimate {
        value,
        residual: 0.0,
        tail_bound: 0.0,
        omega_max: 0.0,
    };
    if z < 0.0 {
        return Ok(exact(0.0));
    }
    if z.is_infinite() {
        return Ok(exact(1.0));
    }
    let p0 = cf.void_probability();
    let continuous = 1.0 - p0;
    if continuous <= 1e-15 || z == 0.0 {
        return Ok(exact(p0));
    }
    let gl = GaussLegendre::new(CDF_NODES);
    let excess = |omega: f64| cf.cf(omega) - p0;
    let integrand = |omega: f64| (Complex64::from_polar(1.0, -omega * z) * excess(omega)).im / omega;
    let omega_lo = 1e-9 / (z + cf.mean()).max(1e-300);
    let mut integral = integrand(omega_lo) * omega_lo;
    let ratio = 10f64.powf(1.0 / CDF_PANELS_PER_DECADE);
    let period = if z > 0.0 { std::f64::consts::TAU / z } else { f64::INFINITY };
    let mut a = omega_lo;
    let mut mag_a = excess(a).norm();
    loop {
        if z > 0.0 && a * z >= std::f64::consts::TAU * CDF_ROTATION_PERIODS {
            integral += rotated_tail(z, a, p0, cf, &gl);
            let raw = p0 + 0.5 * continuous - integral / std::f64::consts::PI;
            let value = raw.clamp(0.0, 1.0);
            return Ok(CdfEstimate {
                value,
                residual: (raw - value).abs(),
                tail_bound: 0.0,
                omega_max: a,
            });
        }
        let b = a * ratio;
        let pieces = ((b - a) / period).ceil().max(1.0) as usize;
        let h = (b - a) / pieces as f64;
        for k in 0..pieces {
            let lo = a + h * k as f64;
            integral += gl.integrate(lo, lo + h, integrand);
        }
        let mag_b = excess(b).norm();
        let slope = (mag_b / mag_a).ln() / ratio.ln();
        let decay_bound = if mag_b == 0.0 {
            0.0
        } else if slope < 0.0 {
            mag_b / (std::f64::consts::PI * -slope)
        } else {
            f64::INFINITY
        };
        // Integrating the oscillatory tail by parts bounds it by 2|g(Ω)|/z.
        let oscillation_bound = if z > 0.0 && slope < 0.0 {
            2.0 * mag_b / (std::f64::consts::PI * b * z)
        } else {
            f64::INFINITY
        };
        let tail = decay_bound.min(oscillation_bound);
        let raw = p0 + 0.5 * continuous - integral / std::f64::consts::PI;
        if (mag_b < CDF_FLOOR || tail < 0.1 * CDF_TAIL_LIMIT) && tail < CDF_TAIL_LIMIT {
            let value = raw.clamp(0.0, 1.0);
            let residual = (raw - value).abs();
            if residual > 0.0 {
                log::debug!("interference CDF clamped by {residual:e} at z = {z:e}");
            }
            return Ok(CdfEstimate {
                value,
                residual,
                tail_bound: tail,
                omega_max: b,
            });
        }
        if b > CDF_OMEGA_CEILING {
            return Err(Error::Truncation {
                partial: raw,
                tail_bound: tail,
            });
        }
        a = b;
        mag_a = mag_b;
    }
}

/// Im ∫ e^{-jωz}(Φ(ω) − p0)/ω dω along ω = start + t e^{-jθ}, t ≥ 0.
fn rotated_tail(z: f64, start: f64, p0: f64, cf: &ConditionalCf, gl: &GaussLegendre) -> f64 {
    let dir = Complex64::from_polar(1.0, -CDF_ROTATION_ANGLE);
    let width = std::f64::consts::PI / z;
    let panels = (40.0 / (CDF_ROTATION_ANGLE.sin() * std::f64::consts::PI)).ceil() as usize;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..panels {
        let lo = width * k as f64;
        acc += gl.integrate(lo, lo + width, |t| {
            let omega = dir * t + start;
            (-J * omega * z).exp() * (cf.log_cf_complex(omega).exp() - p0) / omega * dir
        });
    }
    acc.im
}

/// P(I ≤ z | L⁽⁰⁾ = l0).
pub fn interference_cdf(z: f64, l0: f64, cf: &InterferenceCf) -> Result<CdfEstimate> {
    if !(l0 > 0.0) {
        return Err(Error::Domain(format!("serving loss must be positive, got {l0}")));
    }
    let out = interference_cdf_conditional(z, &cf.conditional(l0))?;
    if out.residual > RESIDUAL_LIMIT {
        return Err(Error::Residual {
            what: "interference CDF",
            value: out.value,
            residual: out.residual,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn models(q_hit: f64) -> (IntensityModel, IntensityModel) {
        let p = PropagationParams::default();
        (IntensityModel::new(p, q_hit).unwrap(), IntensityModel::new(p, 1.0 - q_hit).unwrap())
    }

    #[test]
    fn trivial_values() {
        let (hit, miss) = models(0.7);
        let sat = hit.params().saturation_loss(2);
        assert_eq!(cf_hit(1e5, sat, 2, &hit).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(cf_hit(0.0, 1e3, 0, &hit).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(cf_nohit(0.0, 0, &miss).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(cf_generic(0.0, 0.0, 1, &hit).unwrap(), Complex64::new(1.0, 0.0));
        let (_, none) = models(1.0);
        assert_eq!(cf_nohit(1e6, 0, &none).unwrap(), Complex64::new(1.0, 0.0));
        let v = cf_hit(1e-9, 1e4, 0, &hit).unwrap();
        assert!((v - 1.0).norm() < 1e-6);
    }

    #[test]
    fn closed_forms_match_single_integral() {
        let (hit, miss) = models(0.7);
        for w in 0..=6u32 {
            let sat = hit.params().saturation_loss(w);
            let mass = hit.intensity(w, sat);
            for &omega in &[1e2, 1e4, 1e6, 1e7, 1e8] {
                for &frac in &[1e-9, 1e-6, 1e-3, 0.3] {
                    let l0 = sat * frac;
                    let closed = log_cf_hit(omega, l0, w, &hit).unwrap();
                    let generic = log_cf_generic(omega, l0, w, &hit).unwrap();
                    assert!(
                        (closed - generic).norm() <= 1e-8 * mass.max(1e-12),
                        "hit W={w} omega={omega:e} l0={l0:e}: {closed} vs {generic}"
                    );
                    assert!((closed.exp() - generic.exp()).norm() <= 1e-6);
                }
                let closed = log_cf_nohit(omega, w, &miss).unwrap();
                let generic = log_cf_generic(omega, 0.0, w, &miss).unwrap();
                let mass = miss.intensity(w, sat);
                assert!(
                    (closed - generic).norm() <= 1e-8 * mass.max(1e-12),
                    "nohit W={w} omega={omega:e}: {closed} vs {generic}"
                );
            }
        }
    }

    #[test]
    fn table_matches_tier_sum() {
        let p = PropagationParams::default();
        let q_hit = 0.7;
        let table = InterferenceCf::new(p, q_hit).unwrap();
        let (hit, miss) = models(q_hit);
        for &l0 in &[3e3, 1e5, 2e7, 5e9] {
            let cond = table.conditional(l0);
            for &omega in &[1e1, 1e3, 1e5, 1e6, 1e7, 1e8, 1e10] {
                let mut want = Complex64::new(0.0, 0.0);
                for w in 0..=p.max_walls {
                    want += log_cf_generic(omega, l0, w, &hit).unwrap();
                    want += log_cf_generic(omega, 0.0, w, &miss).unwrap();
                }
                let got = cond.log_cf(omega);
                assert!((got - want).norm() < 1e-9 * (1.0 + want.norm()), "l0={l0:e} omega={omega:e}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn grid_evaluation_matches_conditional() {
        let table = InterferenceCf::new(PropagationParams::default(), 0.6).unwrap();
        let omegas = [1e-3, 1.0, 1e4, 3e6, 1e9, 1e12];
        let lowers = [1e-6, 5.0, 4e4, 1e8, 1e13, 1e20];
        let grid = table.log_cf_grid(&omegas, &lowers);
        for (i, &l0) in lowers.iter().enumerate() {
            let cond = table.conditional(l0);
            for (j, &omega) in omegas.iter().enumerate() {
                let want = cond.log_cf(omega);
                assert!((grid[i][j] - want).norm() < 1e-11 * (1.0 + want.norm()));
            }
        }
    }

    #[test]
    fn modulus_properties() {
        let table = InterferenceCf::new(PropagationParams::default(), 0.5).unwrap();
        let near = table.conditional(1e4);
        let far = table.conditional(1e6);
        let mut prev = 1.0;
        for k in 0..120 {
            let omega = 10f64.powf(-2.0 + 0.12 * k as f64);
            let a = near.cf(omega);
            let b = far.cf(omega);
            assert!(a.norm() <= 1.0 && b.norm() <= 1.0);
            assert!(b.norm() >= a.norm() * (1.0 - 1e-12));
            assert!(a.norm() <= prev * (1.0 + 1e-12));
            prev = a.norm();
            assert!((near.cf(-omega) - a.conj()).norm() < 1e-15);
        }
    }

    #[test]
    fn cdf_is_monotone_and_bounded() {
        let table = InterferenceCf::new(PropagationParams::default(), 0.7).unwrap();
        for &l0 in &[1e4, 1e5, 1e6, 1e7, 1e8] {
            let cond = table.conditional(l0);
            assert_eq!(interference_cdf(-1.0, l0, &table).unwrap().value, 0.0);
            let mut prev = 0.0;
            for k in 0..200 {
                let z = 10f64.powf(-9.0 + 8.0 * k as f64 / 199.0);
                let f = interference_cdf_conditional(z, &cond).unwrap();
                assert!(f.residual < 1e-6, "residual {}", f.residual);
                assert!(f.value >= prev - 1e-7, "l0={l0:e} z={z:e}: {} < {prev}", f.value);
                prev = f.value;
            }
            assert!(prev > 0.999, "F(0.1) = {prev}");
        }
    }

    #[test]
    fn sparse_network_keeps_the_atom_at_zero() {
        let mut p = PropagationParams::default();
        p.ph_density = crate::propagation::density_from_spacing(60.0);
        let table = InterferenceCf::new(p, 1.0).unwrap();
        let cond = table.conditional(1e3);
        let p0 = cond.void_probability();
        assert!(p0 > 0.1);
        let at_zero = interference_cdf_conditional(0.0, &cond).unwrap().value;
        assert!((at_zero - p0).abs() < 1e-6);
        let big = interference_cdf_conditional(1e3 * cond.mean(), &cond).unwrap().value;
        assert!(big > 0.99);
    }
}
