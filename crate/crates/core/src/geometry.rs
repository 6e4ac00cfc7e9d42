//! Power-head deployments, Manhattan wall fields and wall-crossing counts.
//!
//! The low-power device sits at the origin; every distance and angle is
//! measured from it.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::log_gamma;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskRegion {
    pub radius: f64,
}

impl DiskRegion {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Domain(format!("disk radius must be positive, got {radius}")));
        }
        Ok(Self { radius })
    }

    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.radius * self.radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint {
    pub r: f64,
    pub theta: f64,
}

impl PolarPoint {
    pub fn cartesian(&self) -> (f64, f64) {
        (self.r * self.theta.cos(), self.r * self.theta.sin())
    }
}

/// Axis-aligned walls. Both coordinate lists are kept sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WallField {
    pub vertical_lines: Vec<f64>,
    pub horizontal_lines: Vec<f64>,
    pub frequency: f64,
}

impl WallField {
    pub fn empty() -> Self {
        Self {
            vertical_lines: Vec::new(),
            horizontal_lines: Vec::new(),
            frequency: 0.0,
        }
    }

    pub fn from_lines(mut vertical_lines: Vec<f64>, mut horizontal_lines: Vec<f64>, frequency: f64) -> Self {
        vertical_lines.sort_by(f64::total_cmp);
        horizontal_lines.sort_by(f64::total_cmp);
        Self {
            vertical_lines,
            horizontal_lines,
            frequency,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhDeployment {
    pub positions: Vec<PolarPoint>,
    pub hit_flags: Vec<bool>,
    pub density: f64,
}

impl PhDeployment {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<usize> {
    if !(mean >= 0.0 && mean.is_finite()) {
        return Err(Error::Domain(format!("Poisson mean must be finite and nonnegative, got {mean}")));
    }
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(dist.sample(rng) as usize)
}

pub fn sample_ph_deployment_with<R: Rng + ?Sized>(
    region: DiskRegion,
    density: f64,
    q_hit: f64,
    rng: &mut R,
) -> Result<PhDeployment> {
    if !(density >= 0.0) {
        return Err(Error::Domain(format!("PH density must be nonnegative, got {density}")));
    }
    if !(0.0..=1.0).contains(&q_hit) {
        return Err(Error::Domain(format!("hit probability must lie in [0, 1], got {q_hit}")));
    }
    let n = poisson_count(density * region.area(), rng)?;
    let mut positions = Vec::with_capacity(n);
    let mut hit_flags = Vec::with_capacity(n);
    for _ in 0..n {
        let r = region.radius * rng.random::<f64>().sqrt();
        let theta = std::f64::consts::TAU * rng.random::<f64>();
        positions.push(PolarPoint { r, theta });
        hit_flags.push(rng.random::<f64>() < q_hit);
    }
    Ok(PhDeployment {
        positions,
        hit_flags,
        density,
    })
}

pub fn sample_ph_deployment(region: DiskRegion, density: f64, q_hit: f64, seed: u64) -> Result<PhDeployment> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_ph_deployment_with(region, density, q_hit, &mut rng)
}

fn poisson_lines<R: Rng + ?Sized>(half_width: f64, frequency: f64, rng: &mut R) -> Result<Vec<f64>> {
    let n = poisson_count(frequency * 2.0 * half_width, rng)?;
    Ok((0..n).map(|_| half_width * (2.0 * rng.random::<f64>() - 1.0)).collect())
}

pub fn sample_walls_with<R: Rng + ?Sized>(region: DiskRegion, frequency: f64, rng: &mut R) -> Result<WallField> {
    if !(frequency >= 0.0) {
        return Err(Error::Domain(format!("wall frequency must be nonnegative, got {frequency}")));
    }
    let vertical = poisson_lines(region.radius, frequency, rng)?;
    let horizontal = poisson_lines(region.radius, frequency, rng)?;
    Ok(WallField::from_lines(vertical, horizontal, frequency))
}

pub fn sample_walls(region: DiskRegion, frequency: f64, seed: u64) -> Result<WallField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_walls_with(region, frequency, &mut rng)
}

/// Number of sorted coordinates strictly between 0 and `end`.
fn crossings(lines: &[f64], end: f64) -> usize {
    if end > 0.0 {
        lines.partition_point(|&x| x < end) - lines.partition_point(|&x| x <= 0.0)
    } else if end < 0.0 {
        lines.partition_point(|&x| x < 0.0) - lines.partition_point(|&x| x <= end)
    } else {
        0
    }
}

pub fn count_walls(walls: &WallField, ph: PolarPoint) -> u32 {
    let (x, y) = ph.cartesian();
    (crossings(&walls.vertical_lines, x) + crossings(&walls.horizontal_lines, y)) as u32
}

/// Poisson probability of exactly `w` walls on the link to a PH at (r, θ).
pub fn blockage_probability(w: u32, r: f64, theta: f64, frequency: f64) -> f64 {
    let mean = frequency * r * (theta.cos().abs() + theta.sin().abs());
    poisson_pmf(w, mean)
}

pub(crate) fn poisson_pmf(k: u32, mean: f64) -> f64 {
    if mean <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let kf = k as f64;
    (kf * mean.ln() - mean - log_gamma(kf + 1.0)).exp()
}

/// Replayable snapshot of one sampled trial layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioDump {
    pub radius: f64,
    pub deployment: PhDeployment,
    pub walls: WallField,
}

impl ScenarioDump {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Domain(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Domain(e.to_string()))
    }
}
