//! Trial-by-trial network simulator: PH deployment, walls, association,
//! fading and the resulting rate and harvested power at the device at the
//! origin.
//!
//! Trial `i` of a run with base seed `b` draws all of its randomness from a
//! ChaCha8 stream seeded with [`trial_seed`]`(b, i)`, so results do not
//! depend on thread scheduling.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compute::{required_power, ComputeProfile};
use crate::error::{Error, Result};
use crate::geometry::{count_walls, sample_ph_deployment_with, sample_walls_with, DiskRegion, PhDeployment};
use crate::mimo::sample_gain_with;
use crate::propagation::{path_loss, PropagationParams};
use crate::scenario::NetworkScenario;
use crate::tradeoff::instantaneous_rate_energy;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    /// Loss of the serving link; `None` when no hit PH is deployed.
    pub serving_loss: Option<f64>,
    /// Σ h/l over every PH except the serving one.
    pub interference: f64,
    pub gain: f64,
    pub rate: f64,
    pub power: f64,
}

impl TrialOutcome {
    /// Whether the trial meets both targets.
    pub fn meets(&self, rate: f64, power: f64) -> bool {
        self.serving_loss.is_some() && self.rate >= rate && self.power >= power
    }
}

/// How wall crossings are drawn for the links of one trial.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum WallModel {
    /// One Manhattan line field per trial, shared by every link.
    #[default]
    Shared,
    /// An independent Poisson wall count per link, with the same per-link
    /// law as the shared field but no correlation between links.
    PerLink,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SimulationOptions {
    /// Credit the device with the harvested interference power when no
    /// serving PH exists.
    pub ambient_harvest: bool,
    pub walls: WallModel,
}

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// SplitMix64(base ⊕ SplitMix64(index)).
pub fn trial_seed(base_seed: u64, index: u64) -> u64 {
    splitmix64(base_seed ^ splitmix64(index))
}

pub fn run_trial(scenario: &NetworkScenario, seed: u64) -> Result<TrialOutcome> {
    run_trial_with(scenario, SimulationOptions::default(), seed)
}

pub fn run_trial_with(scenario: &NetworkScenario, options: SimulationOptions, seed: u64) -> Result<TrialOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_trial(scenario, options, &mut rng)
}

/// Loss of every deployed PH under the chosen wall model.
fn link_losses<R: Rng + ?Sized>(
    deployment: &PhDeployment,
    region: DiskRegion,
    prop: &PropagationParams,
    walls: WallModel,
    rng: &mut R,
) -> Result<Vec<f64>> {
    Ok(match walls {
        WallModel::Shared => {
            let walls = sample_walls_with(region, prop.wall_frequency, rng)?;
            deployment
                .positions
                .iter()
                .map(|&p| path_loss(p.r, count_walls(&walls, p), prop))
                .collect()
        }
        WallModel::PerLink => deployment
            .positions
            .iter()
            .map(|&p| {
                let mean = prop.wall_frequency * p.r * (p.theta.cos().abs() + p.theta.sin().abs());
                let w = if mean > 0.0 {
                    Poisson::new(mean).map_err(|e| Error::Domain(e.to_string()))?.sample(rng) as u32
                } else {
                    0
                };
                Ok(path_loss(p.r, w, prop))
            })
            .collect::<Result<_>>()?,
    })
}

fn sample_trial<R: Rng + ?Sized>(
    scenario: &NetworkScenario,
    options: SimulationOptions,
    rng: &mut R,
) -> Result<TrialOutcome> {
    let prop = &scenario.propagation;
    let region = DiskRegion::new(prop.disk_radius)?;
    let deployment = sample_ph_deployment_with(region, prop.ph_density, scenario.hit_probability, rng)?;
    let losses = link_losses(&deployment, region, prop, options.walls, rng)?;
    let serving = losses
        .iter()
        .zip(&deployment.hit_flags)
        .enumerate()
        .filter(|(_, (_, &hit))| hit)
        .min_by(|a, b| a.1 .0.total_cmp(b.1 .0))
        .map(|(i, _)| i);
    let interference: f64 = losses
        .iter()
        .enumerate()
        .filter(|&(i, _)| Some(i) != serving)
        .map(|(_, l)| {
            let h: f64 = Exp1.sample(rng);
            h / l
        })
        .sum();
    let gain = sample_gain_with(scenario.tx_antennas, scenario.rx_antennas, rng);
    let budget = &scenario.budget;
    Ok(match serving {
        Some(i) => {
            let (rate, power) = instantaneous_rate_energy(gain, losses[i], interference, budget);
            TrialOutcome {
                serving_loss: Some(losses[i]),
                interference,
                gain,
                rate,
                power,
            }
        }
        None => TrialOutcome {
            serving_loss: None,
            interference,
            gain,
            rate: 0.0,
            power: if options.ambient_harvest {
                budget.splitting_ratio * budget.harvest_efficiency * budget.tx_power * interference
            } else {
                0.0
            },
        },
    })
}

/// Interference at the origin when the serving loss is `l0`: every non-hit
/// PH plus every hit PH whose loss exceeds `l0`.
pub fn sample_conditional_interference(
    scenario: &NetworkScenario,
    l0: f64,
    walls: WallModel,
    seed: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let prop = &scenario.propagation;
    let region = DiskRegion::new(prop.disk_radius)?;
    let deployment = sample_ph_deployment_with(region, prop.ph_density, scenario.hit_probability, &mut rng)?;
    let losses = link_losses(&deployment, region, prop, walls, &mut rng)?;
    Ok(losses
        .iter()
        .zip(&deployment.hit_flags)
        .filter(|&(&l, &hit)| !hit || l > l0)
        .map(|(l, _)| {
            let h: f64 = Exp1.sample(&mut rng);
            h / l
        })
        .sum())
}

/// Runs `trials` independent trials in parallel, returned in index order.
pub fn simulate(scenario: &NetworkScenario, trials: usize, base_seed: u64) -> Result<Vec<TrialOutcome>> {
    simulate_with(scenario, SimulationOptions::default(), trials, base_seed)
}

pub fn simulate_with(
    scenario: &NetworkScenario,
    options: SimulationOptions,
    trials: usize,
    base_seed: u64,
) -> Result<Vec<TrialOutcome>> {
    scenario.validate()?;
    (0..trials as u64)
        .into_par_iter()
        .map(|i| run_trial_with(scenario, options, trial_seed(base_seed, i)))
        .collect()
}

/// Writes one JSON object per trial.
pub fn write_trace<W: Write>(outcomes: &[TrialOutcome], mut out: W) -> Result<()> {
    for (index, outcome) in outcomes.iter().enumerate() {
        let line = serde_json::json!({ "trial": index, "outcome": outcome });
        writeln!(out, "{line}").map_err(|e| Error::Domain(format!("trace write failed: {e}")))?;
    }
    Ok(())
}

/// Half-width of the normal-approximation 95% interval for a proportion.
pub fn binomial_half_width(p: f64, n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    1.959_963_984_540_054 * (p * (1.0 - p) / n as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalJccdf {
    pub rates: Vec<f64>,
    pub powers: Vec<f64>,
    /// `values[i][j]` is the fraction of trials meeting (rates[i], powers[j]).
    pub values: Vec<Vec<f64>>,
    pub half_widths: Vec<Vec<f64>>,
    pub trials: usize,
}

impl EmpiricalJccdf {
    pub fn from_outcomes(outcomes: &[TrialOutcome], rates: &[f64], powers: &[f64]) -> Self {
        let n = outcomes.len();
        let values: Vec<Vec<f64>> = rates
            .iter()
            .map(|&r| {
                powers
                    .iter()
                    .map(|&q| {
                        let hits = outcomes.iter().filter(|o| o.meets(r, q)).count();
                        if n == 0 {
                            0.0
                        } else {
                            hits as f64 / n as f64
                        }
                    })
                    .collect()
            })
            .collect();
        let half_widths = values
            .iter()
            .map(|row| row.iter().map(|&p| binomial_half_width(p, n)).collect())
            .collect();
        Self {
            rates: rates.to_vec(),
            powers: powers.to_vec(),
            values,
            half_widths,
            trials: n,
        }
    }

    pub fn mean_half_width(&self) -> f64 {
        let all: Vec<f64> = self.half_widths.iter().flatten().copied().collect();
        all.iter().sum::<f64>() / all.len().max(1) as f64
    }
}

pub fn estimate_jccdf(
    scenario: &NetworkScenario,
    rates: &[f64],
    powers: &[f64],
    trials: usize,
    base_seed: u64,
) -> Result<EmpiricalJccdf> {
    if trials == 0 {
        return Err(Error::Domain("at least one trial is required".into()));
    }
    let outcomes = simulate(scenario, trials, base_seed)?;
    Ok(EmpiricalJccdf::from_outcomes(&outcomes, rates, powers))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutageSample {
    pub rate: f64,
    pub outage: f64,
    pub half_width: f64,
}

/// Fraction of trials missing the rate or the power required at that rate.
pub fn outage_from_outcomes(
    outcomes: &[TrialOutcome],
    profile: &ComputeProfile,
    rates: &[f64],
) -> Result<Vec<OutageSample>> {
    let n = outcomes.len();
    rates
        .iter()
        .map(|&rate| {
            let power = required_power(profile, rate)?;
            let met = outcomes.iter().filter(|o| o.meets(rate, power)).count();
            let outage = 1.0 - met as f64 / n.max(1) as f64;
            Ok(OutageSample {
                rate,
                outage,
                half_width: binomial_half_width(outage, n),
            })
        })
        .collect()
}

pub fn empirical_outage(
    scenario: &NetworkScenario,
    profile: &ComputeProfile,
    rates: &[f64],
    trials: usize,
    base_seed: u64,
) -> Result<Vec<OutageSample>> {
    let outcomes = simulate(scenario, trials, base_seed)?;
    outage_from_outcomes(&outcomes, profile, rates)
}
