//! Simulation-based checks of the analytic distributions.

mod common;

use common::{chi_square, ks_distance};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use swiptmc::geometry::{blockage_probability, count_walls, sample_ph_deployment, sample_walls, DiskRegion, PolarPoint};
use swiptmc::interference::{interference_cdf_conditional, InterferenceCf};
use swiptmc::mimo::{eigen_cdf, eigen_pdf_coefficients, sample_gain_with};
use swiptmc::montecarlo::{
    sample_conditional_interference, simulate_with, trial_seed, SimulationOptions, WallModel,
};
use swiptmc::propagation::{serving_loss_cdf, IntensityModel};
use swiptmc::NetworkScenario;

const TRIALS: usize = 100_000;

/// Link-independent walls: the propagation law the analytic model assumes.
fn per_link() -> SimulationOptions {
    SimulationOptions {
        walls: WallModel::PerLink,
        ..SimulationOptions::default()
    }
}

#[test]
fn serving_loss_matches_simulation() {
    let scenario = NetworkScenario::default();
    let hit = IntensityModel::new(scenario.propagation, scenario.hit_probability).unwrap();
    let outcomes = simulate_with(&scenario, per_link(), TRIALS, 2024).unwrap();
    let mut losses: Vec<f64> = outcomes.iter().map(|o| o.serving_loss.unwrap_or(f64::INFINITY)).collect();
    let d = ks_distance(&mut losses, |a| serving_loss_cdf(&hit, a));
    eprintln!("serving loss KS distance {d:.4}");
    assert!(d < 0.01, "KS distance {d}");
}

#[test]
fn sparse_network_void_probability_matches_simulation() {
    let scenario = NetworkScenario::default().with_ph_spacing(40.0).with_hit_probability(0.5);
    let hit = IntensityModel::new(scenario.propagation, scenario.hit_probability).unwrap();
    let served = serving_loss_cdf(&hit, f64::INFINITY);
    let outcomes = simulate_with(&scenario, per_link(), 20_000, 3).unwrap();
    let fraction = outcomes.iter().filter(|o| o.serving_loss.is_some()).count() as f64 / outcomes.len() as f64;
    let tol = 4.0 * (served * (1.0 - served) / outcomes.len() as f64).sqrt();
    assert!(served < 0.99 && (fraction - served).abs() < tol, "{fraction} vs {served}");
}

#[test]
fn conditional_interference_matches_simulation() {
    let scenario = NetworkScenario::default();
    let table = InterferenceCf::new(scenario.propagation, scenario.hit_probability).unwrap();
    for (k, l0) in [1e3, 1.3e5, 1e7].into_iter().enumerate() {
        let cf = table.conditional(l0);
        let mut sample: Vec<f64> = (0..TRIALS as u64)
            .map(|i| sample_conditional_interference(&scenario, l0, WallModel::PerLink, trial_seed(k as u64, i)).unwrap())
            .collect();
        sample.sort_by(f64::total_cmp);
        // The CDF is evaluated at every 50th order statistic; the maximal gap
        // between neighbouring evaluations is below 1e-3.
        let n = sample.len();
        let mut d: f64 = 0.0;
        for i in (0..n).step_by(50).chain([n - 1]) {
            let f = interference_cdf_conditional(sample[i], &cf).unwrap().value;
            d = d.max((i + 1) as f64 / n as f64 - f).max(f - i as f64 / n as f64);
        }
        eprintln!("conditional interference KS distance {d:.4} at l0 = {l0:.1e}");
        assert!(d < 0.02, "l0 = {l0}: KS distance {d}");
    }
}

#[test]
fn eigen_gain_matches_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (nt, nr) in [(1, 1), (4, 2), (2, 4), (3, 3), (4, 4), (1, 3)] {
        let c = eigen_pdf_coefficients(nt, nr).unwrap();
        let mut xs: Vec<f64> = (0..TRIALS).map(|_| sample_gain_with(nt, nr, &mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((mean / c.mean() - 1.0).abs() < 0.02, "({nt},{nr}) mean {mean} vs {}", c.mean());
        let d = ks_distance(&mut xs, |x| eigen_cdf(&c, x));
        eprintln!("eigen gain ({nt},{nr}) KS distance {d:.4}");
        assert!(d < 0.01, "({nt},{nr}) KS distance {d}");
    }
}

#[test]
fn wall_counts_follow_the_blockage_law() {
    let region = DiskRegion::new(60.0).unwrap();
    let frequency = 0.03;
    for p in [PolarPoint { r: 40.0, theta: 0.6 }, PolarPoint { r: 15.0, theta: 3.5 }] {
        let mut counts = vec![0u64; 40];
        for seed in 0..TRIALS as u64 {
            let walls = sample_walls(region, frequency, seed).unwrap();
            counts[(count_walls(&walls, p) as usize).min(39)] += 1;
        }
        let expected: Vec<f64> = (0..40)
            .map(|w| TRIALS as f64 * blockage_probability(w, p.r, p.theta, frequency))
            .collect();
        let (stat, critical) = chi_square(&counts, &expected);
        eprintln!("wall counts at {p:?}: chi-square {stat:.2} (99% critical {critical:.2})");
        assert!(stat < critical);
    }
}

#[test]
fn deployment_counts_are_poisson() {
    let region = DiskRegion::new(60.0).unwrap();
    let density = 1.0 / (std::f64::consts::PI * 9.0);
    let seeds = 2000;
    let counts: Vec<f64> = (0..seeds)
        .map(|s| sample_ph_deployment(region, density, 0.5, s).unwrap().len() as f64)
        .collect();
    let mean = counts.iter().sum::<f64>() / seeds as f64;
    assert!((mean - 400.0).abs() < 4.0 * (400.0 / seeds as f64).sqrt() * 1.5);
    // Dispersion index Σ(x − x̄)²/x̄ is χ² with n − 1 degrees of freedom.
    let dispersion: f64 = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / mean;
    let chi = statrs::distribution::ChiSquared::new(seeds as f64 - 1.0).unwrap();
    use statrs::distribution::ContinuousCDF;
    let (lo, hi) = (chi.inverse_cdf(0.005), chi.inverse_cdf(0.995));
    eprintln!("dispersion {dispersion:.1} in [{lo:.1}, {hi:.1}]");
    assert!(dispersion > lo && dispersion < hi);
    let flags: usize = (0..200)
        .map(|s| sample_ph_deployment(region, density, 0.5, 10_000 + s).unwrap().hit_flags.iter().filter(|&&h| h).count())
        .sum();
    let total: usize = (0..200).map(|s| sample_ph_deployment(region, density, 0.5, 10_000 + s).unwrap().len()).sum();
    let share = flags as f64 / total as f64;
    assert!((share - 0.5).abs() < 4.0 * (0.25 / total as f64).sqrt());
}
