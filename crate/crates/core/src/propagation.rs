//! Wall-penalised path loss and the loss-domain intensity of the power-head
//! process.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::poisson_pmf;
use crate::quad::{adaptive, Tolerance};
use crate::specfun::{factorial, gauss_2f1, log_gamma};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

const INTENSITY_MAX_TERMS: usize = 200;
const INTENSITY_TERM_TOL: f64 = 1e-16;
/// Largest tolerated ratio between the biggest series term and the sum.
const CANCELLATION_LIMIT: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationParams {
    /// β
    pub path_loss_exponent: f64,
    /// K, linear, per wall.
    pub penetration_loss: f64,
    /// f_c in Hz.
    pub carrier_frequency: f64,
    pub max_walls: u32,
    /// λ_w in walls per metre along each axis.
    pub wall_frequency: f64,
    /// λ_PH in heads per square metre.
    pub ph_density: f64,
    /// R_D in metres.
    pub disk_radius: f64,
}

impl Default for PropagationParams {
    fn default() -> Self {
        Self {
            path_loss_exponent: 2.5,
            penetration_loss: 0.1,
            carrier_frequency: 2.1e9,
            max_walls: 6,
            wall_frequency: 0.03,
            ph_density: density_from_spacing(3.0),
            disk_radius: 60.0,
        }
    }
}

/// Density whose mean nearest-neighbour disk of radius `spacing` holds one head.
pub fn density_from_spacing(spacing: f64) -> f64 {
    1.0 / (std::f64::consts::PI * spacing * spacing)
}

impl PropagationParams {
    pub fn validate(&self) -> Result<()> {
        let p = self;
        if !(p.path_loss_exponent > 2.0 && p.path_loss_exponent.is_finite()) {
            return Err(Error::Domain(format!("path-loss exponent must exceed 2, got {}", p.path_loss_exponent)));
        }
        if !(p.penetration_loss > 0.0 && p.penetration_loss <= 1.0) {
            return Err(Error::Domain(format!("penetration loss must lie in (0, 1], got {}", p.penetration_loss)));
        }
        if !(p.carrier_frequency > 0.0 && p.carrier_frequency.is_finite()) {
            return Err(Error::Domain(format!("carrier frequency must be positive, got {}", p.carrier_frequency)));
        }
        if !(p.wall_frequency >= 0.0 && p.wall_frequency.is_finite()) {
            return Err(Error::Domain(format!("wall frequency must be nonnegative, got {}", p.wall_frequency)));
        }
        if !(p.ph_density >= 0.0 && p.ph_density.is_finite()) {
            return Err(Error::Domain(format!("PH density must be nonnegative, got {}", p.ph_density)));
        }
        if !(p.disk_radius > 0.0 && p.disk_radius.is_finite()) {
            return Err(Error::Domain(format!("disk radius must be positive, got {}", p.disk_radius)));
        }
        Ok(())
    }

    /// κ = (4π f_c / c₀)².
    pub fn kappa(&self) -> f64 {
        let x = 4.0 * std::f64::consts::PI * self.carrier_frequency / SPEED_OF_LIGHT;
        x * x
    }

    /// Distance below which the loss is clamped to one.
    pub fn near_field_radius(&self) -> f64 {
        self.kappa().powf(-1.0 / self.path_loss_exponent)
    }

    /// Loss of a head at the disk edge behind `w` walls; the intensity is flat beyond it.
    pub fn saturation_loss(&self, w: u32) -> f64 {
        self.disk_radius.powf(self.path_loss_exponent) * self.kappa() / self.penetration_loss.powi(w as i32)
    }

    /// Distance at which the unclamped loss behind `w` walls equals `alpha`, capped at R_D.
    pub fn radius_at(&self, w: u32, alpha: f64) -> f64 {
        let r = (alpha * self.penetration_loss.powi(w as i32) / self.kappa()).powf(1.0 / self.path_loss_exponent);
        r.min(self.disk_radius)
    }
}

pub fn path_loss(r: f64, w: u32, params: &PropagationParams) -> f64 {
    if r < params.near_field_radius() {
        return 1.0;
    }
    params.kappa() * r.powf(params.path_loss_exponent) / params.penetration_loss.powi(w as i32)
}

/// A quarter of the angular integral ∫₀^{2π} (|cos θ| + |sin θ|)^n dθ.
pub fn angular_moment(n: u32) -> f64 {
    let nf = n as f64;
    let lead = (0.5 * nf * std::f64::consts::LN_2 + 0.5 * std::f64::consts::PI.ln() + log_gamma(0.5 * (nf + 1.0))
        - log_gamma(0.5 * nf + 1.0))
    .exp();
    let f = gauss_2f1(0.5, 0.5 * (nf + 1.0), 0.5 * (nf + 3.0), Complex64::new(0.5, 0.0))
        .expect("2F1 at z = 1/2 with positive parameters is always defined");
    lead - std::f64::consts::SQRT_2 * f.re / (nf + 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalRoute {
    Series,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensityValue {
    pub value: f64,
    pub route: EvalRoute,
}

/// Λ_{W,q}([0, α)) and its α-derivative for every wall tier W ≤ W_max.
#[derive(Debug, Clone)]
pub struct IntensityModel {
    params: PropagationParams,
    q: f64,
    kappa: f64,
    /// Per tier: (−1)^i λ_w^{i+W} B_{i+W} / (i! (i+W+2)).
    coeffs: Vec<Vec<f64>>,
}

impl IntensityModel {
    pub fn new(params: PropagationParams, q: f64) -> Result<Self> {
        params.validate()?;
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::Domain(format!("probability tag must lie in [0, 1], got {q}")));
        }
        let moments: Vec<f64> = (0..=params.max_walls + INTENSITY_MAX_TERMS as u32)
            .map(angular_moment)
            .collect();
        let lw = params.wall_frequency;
        let coeffs = (0..=params.max_walls)
            .map(|w| {
                let mut inv_fact = 1.0;
                (0..INTENSITY_MAX_TERMS)
                    .map(|i| {
                        if i > 0 {
                            inv_fact /= i as f64;
                        }
                        let n = w + i as u32;
                        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                        sign * lw.powi(n as i32) * moments[n as usize] * inv_fact / (n as f64 + 2.0)
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            params,
            q,
            kappa: params.kappa(),
            coeffs,
        })
    }

    pub fn params(&self) -> &PropagationParams {
        &self.params
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn max_walls(&self) -> u32 {
        self.params.max_walls
    }

    fn prefactor(&self, w: u32) -> f64 {
        4.0 * self.q * self.params.ph_density / factorial(w)
    }

    /// Coefficients e_i with Λ_{W,q}([0, α)) = Σ_i e_i r_α^{i+W+2} below saturation.
    pub(crate) fn radial_coefficients(&self, w: u32) -> impl Iterator<Item = f64> + '_ {
        let pref = self.prefactor(w);
        self.coeffs[w as usize].iter().map(move |c| pref * c)
    }

    /// Number of series terms needed at the disk edge.
    pub(crate) fn edge_terms(&self) -> usize {
        (self.params.wall_frequency * self.params.disk_radius * std::f64::consts::SQRT_2 * 2.0 + 40.0)
            .min(INTENSITY_MAX_TERMS as f64) as usize
    }

    fn radius(&self, w: u32, alpha: f64) -> f64 {
        let p = &self.params;
        (alpha * p.penetration_loss.powi(w as i32) / self.kappa).powf(1.0 / p.path_loss_exponent)
    }

    /// Σ_i c_i (i+W+2)^{deriv} r^{i+W+2}, or `None` if the series cannot be trusted.
    fn series(&self, w: u32, r: f64, derivative: bool) -> Option<f64> {
        let coeffs = &self.coeffs[w as usize];
        let peak = self.params.wall_frequency * r * std::f64::consts::SQRT_2 + 2.0;
        let mut sum = 0.0;
        let mut biggest: f64 = 0.0;
        let mut power = r.powi(w as i32 + 2);
        for (i, &c) in coeffs.iter().enumerate() {
            let p = (i as u32 + w + 2) as f64;
            let term = if derivative { c * p * power } else { c * power };
            sum += term;
            biggest = biggest.max(term.abs());
            if i as f64 > peak && term.abs() <= INTENSITY_TERM_TOL * sum.abs() {
                if biggest == 0.0 {
                    return Some(0.0);
                }
                if biggest > CANCELLATION_LIMIT * sum.abs() {
                    return None;
                }
                return Some(sum);
            }
            power *= r;
        }
        if biggest == 0.0 {
            Some(0.0)
        } else {
            None
        }
    }

    pub fn intensity_checked(&self, w: u32, alpha: f64) -> Result<IntensityValue> {
        self.check_tier(w)?;
        if !(alpha >= 0.0) {
            return Err(Error::Domain(format!("loss must be nonnegative, got {alpha}")));
        }
        if alpha == 0.0 || self.q == 0.0 || self.params.ph_density == 0.0 {
            return Ok(IntensityValue {
                value: 0.0,
                route: EvalRoute::Series,
            });
        }
        let r = if alpha >= self.params.saturation_loss(w) {
            self.params.disk_radius
        } else {
            self.radius(w, alpha)
        };
        match self.series(w, r, false) {
            Some(s) => Ok(IntensityValue {
                value: self.prefactor(w) * s,
                route: EvalRoute::Series,
            }),
            None => {
                log::debug!("intensity series for W={w} at alpha={alpha:e} fell back to quadrature");
                Ok(IntensityValue {
                    value: self.intensity_quadrature(w, alpha)?,
                    route: EvalRoute::Quadrature,
                })
            }
        }
    }

    pub fn derivative_checked(&self, w: u32, alpha: f64) -> Result<IntensityValue> {
        self.check_tier(w)?;
        if !(alpha >= 0.0) {
            return Err(Error::Domain(format!("loss must be nonnegative, got {alpha}")));
        }
        let series = |value| IntensityValue {
            value,
            route: EvalRoute::Series,
        };
        if self.q == 0.0 || self.params.ph_density == 0.0 || alpha >= self.params.saturation_loss(w) {
            return Ok(series(0.0));
        }
        let beta = self.params.path_loss_exponent;
        if alpha == 0.0 {
            let exponent = (w as f64 + 2.0) / beta - 1.0;
            return Ok(series(if exponent < 0.0 {
                f64::INFINITY
            } else if exponent > 0.0 {
                0.0
            } else {
                self.prefactor(w) * self.coeffs[w as usize][0] * (w as f64 + 2.0) / beta
                    * (self.params.penetration_loss.powi(w as i32) / self.kappa).powf((w as f64 + 2.0) / beta)
            }));
        }
        let r = self.radius(w, alpha);
        match self.series(w, r, true) {
            Some(s) => Ok(series(self.prefactor(w) * s / (beta * alpha))),
            None => Ok(IntensityValue {
                value: self.derivative_quadrature(w, alpha)?,
                route: EvalRoute::Quadrature,
            }),
        }
    }

    fn check_tier(&self, w: u32) -> Result<()> {
        if w > self.params.max_walls {
            return Err(Error::Domain(format!(
                "wall tier {w} exceeds the configured maximum {}",
                self.params.max_walls
            )));
        }
        Ok(())
    }

    /// Λ_{W,q}([0, α)). Falls back to quadrature transparently.
    pub fn intensity(&self, w: u32, alpha: f64) -> f64 {
        match self.intensity_checked(w, alpha) {
            Ok(v) => v.value,
            Err(e) => {
                log::warn!("intensity evaluation failed: {e}");
                f64::NAN
            }
        }
    }

    pub fn derivative(&self, w: u32, alpha: f64) -> f64 {
        match self.derivative_checked(w, alpha) {
            Ok(v) => v.value,
            Err(e) => {
                log::warn!("intensity derivative evaluation failed: {e}");
                f64::NAN
            }
        }
    }

    /// Σ_W Λ_{W,q}([0, α)).
    pub fn total_intensity(&self, alpha: f64) -> f64 {
        (0..=self.params.max_walls).map(|w| self.intensity(w, alpha)).sum()
    }

    pub fn total_derivative(&self, alpha: f64) -> f64 {
        (0..=self.params.max_walls).map(|w| self.derivative(w, alpha)).sum()
    }

    /// Saturated total mass Σ_W Λ_{W,q}(∞).
    pub fn total_mass(&self) -> f64 {
        (0..=self.params.max_walls)
            .map(|w| self.intensity(w, self.params.saturation_loss(w)))
            .sum()
    }

    /// Direct two-dimensional integration of the blockage probability over
    /// the region whose loss behind `w` walls is below `alpha`.
    pub fn intensity_quadrature(&self, w: u32, alpha: f64) -> Result<f64> {
        if alpha <= 0.0 {
            return Ok(0.0);
        }
        let p = self.params;
        let r_max = self.radius(w, alpha).min(p.disk_radius);
        let tol = Tolerance::new(0.0, 1e-12);
        let mut failure = None;
        let outer = adaptive(
            |theta: f64| {
                let angular = theta.cos() + theta.sin();
                match adaptive(
                    |r: f64| poisson_pmf(w, p.wall_frequency * r * angular) * r,
                    0.0,
                    r_max,
                    tol,
                ) {
                    Ok(o) => o.value,
                    Err(e) => {
                        failure = Some(e);
                        0.0
                    }
                }
            },
            0.0,
            std::f64::consts::FRAC_PI_2,
            tol,
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(4.0 * self.q * p.ph_density * outer.value)
    }

    /// Angular integral form of the derivative: q λ r (dr/dα) ∫ P_W(r, θ) dθ.
    pub fn derivative_quadrature(&self, w: u32, alpha: f64) -> Result<f64> {
        let p = self.params;
        if alpha <= 0.0 || alpha >= p.saturation_loss(w) {
            return Ok(0.0);
        }
        let r = self.radius(w, alpha);
        let angular = adaptive(
            |theta: f64| poisson_pmf(w, p.wall_frequency * r * (theta.cos() + theta.sin())),
            0.0,
            std::f64::consts::FRAC_PI_2,
            Tolerance::new(0.0, 1e-13),
        )?;
        Ok(4.0 * self.q * p.ph_density * r * r / (p.path_loss_exponent * alpha) * angular.value)
    }
}

pub fn intensity(model: &IntensityModel, w: u32, alpha: f64) -> Result<IntensityValue> {
    model.intensity_checked(w, alpha)
}

pub fn intensity_derivative(model: &IntensityModel, w: u32, alpha: f64) -> Result<IntensityValue> {
    model.derivative_checked(w, alpha)
}

/// CDF of the minimum loss over hit heads; `hit_model` carries q = q_hit.
pub fn serving_loss_cdf(hit_model: &IntensityModel, alpha: f64) -> f64 {
    -(-hit_model.total_intensity(alpha)).exp_m1()
}

pub fn serving_loss_pdf_weight(hit_model: &IntensityModel, alpha: f64) -> f64 {
    let d = hit_model.total_derivative(alpha);
    if d == 0.0 {
        return 0.0;
    }
    d * (-hit_model.total_intensity(alpha)).exp()
}
