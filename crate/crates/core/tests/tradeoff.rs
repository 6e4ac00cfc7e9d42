use swiptmc::montecarlo::{simulate_with, EmpiricalJccdf, SimulationOptions, WallModel};
use swiptmc::tradeoff::{JccdfModel, TradeoffQuery};
use swiptmc::units::dbm_to_watts;
use swiptmc::NetworkScenario;

/// Numerical slack for monotonicity and bound checks of the quadrature.
const SLACK: f64 = 1e-5;

const RATES: [f64; 5] = [0.0, 2e4, 1e5, 3e5, 1e6];

fn powers() -> Vec<f64> {
    [-40.0, -30.0, -25.0, -20.0, -15.0].iter().map(|&d| dbm_to_watts(d)).collect()
}

fn sparse() -> NetworkScenario {
    NetworkScenario::default().with_ph_spacing(25.0).with_hit_probability(0.5)
}

#[test]
fn origin_value_is_the_serving_probability() {
    for scenario in [NetworkScenario::default(), sparse()] {
        let model = JccdfModel::new(&scenario).unwrap();
        let top = model.serving_probability();
        assert_eq!(model.jccdf(0.0, 0.0).unwrap(), top);
        let near = model.jccdf(1e-3, 1e-15).unwrap();
        assert!((near - top).abs() < 1e-4, "{near} vs {top}");
    }
    assert!(JccdfModel::new(&sparse()).unwrap().serving_probability() < 0.95);
}

#[test]
fn monotone_in_both_targets() {
    for scenario in [NetworkScenario::default(), sparse()] {
        let model = JccdfModel::new(&scenario).unwrap();
        let p = powers();
        let grid: Vec<Vec<f64>> = RATES
            .iter()
            .map(|&r| p.iter().map(|&q| model.jccdf(r, q).unwrap()).collect())
            .collect();
        for i in 0..RATES.len() {
            for j in 0..p.len() {
                assert!((0.0..=1.0).contains(&grid[i][j]));
                if i > 0 {
                    assert!(grid[i][j] <= grid[i - 1][j] + SLACK, "rate step at ({i},{j})");
                }
                if j > 0 {
                    assert!(grid[i][j] <= grid[i][j - 1] + SLACK, "power step at ({i},{j})");
                }
            }
        }
    }
}

#[test]
fn frechet_bounds_hold() {
    let model = JccdfModel::new(&sparse()).unwrap();
    let top = model.serving_probability();
    for &r in &RATES[1..] {
        let rate_margin = model.jccdf(r, 0.0).unwrap();
        for &q in &powers() {
            let power_margin = model.jccdf(0.0, q).unwrap();
            let joint = model.jccdf(r, q).unwrap();
            assert!(joint <= rate_margin.min(power_margin) + SLACK);
            assert!(joint >= rate_margin + power_margin - top - SLACK);
        }
    }
}

#[test]
fn more_hits_raise_the_jccdf() {
    let models: Vec<JccdfModel> = [0.2, 0.5, 0.7, 1.0]
        .iter()
        .map(|&q| JccdfModel::new(&NetworkScenario::default().with_hit_probability(q)).unwrap())
        .collect();
    for &r in &RATES[1..] {
        for &q in &powers() {
            let values: Vec<f64> = models.iter().map(|m| m.jccdf(r, q).unwrap()).collect();
            assert!(values.windows(2).all(|w| w[1] >= w[0] - SLACK), "{values:?} at ({r}, {q})");
        }
    }
}

#[test]
fn analytic_matches_simulation_on_grid() {
    // Default (shared) walls and the per-link variant.
    for walls in [WallModel::Shared, WallModel::PerLink] {
        let scenario = NetworkScenario::default();
        let model = JccdfModel::new(&scenario).unwrap();
        let options = SimulationOptions {
            walls,
            ..SimulationOptions::default()
        };
        let outcomes = simulate_with(&scenario, options, 100_000, 99).unwrap();
        let p = powers();
        let empirical = EmpiricalJccdf::from_outcomes(&outcomes, &RATES, &p);
        let mut worst: f64 = 0.0;
        for (i, &r) in RATES.iter().enumerate() {
            for (j, &q) in p.iter().enumerate() {
                let gap = (model.jccdf(r, q).unwrap() - empirical.values[i][j]).abs();
                worst = worst.max(gap);
            }
        }
        eprintln!("{walls:?} walls: worst analytic-simulation gap {worst:.4}");
        assert!(worst <= 0.03, "{walls:?}: {worst}");
    }
}

#[test]
fn trade_off_curves() {
    let model = JccdfModel::new(&NetworkScenario::default()).unwrap();
    let rates: Vec<f64> = (0..6).map(|i| 1e4 * 2f64.powi(i)).collect();
    let level = 0.75;
    let curve = model.tradeoff_curve(level, &rates).unwrap();
    assert!(!curve.is_empty());
    for w in curve.windows(2) {
        assert!(w[1].power <= w[0].power * (1.0 + 2e-3));
    }
    for p in &curve {
        assert!((p.jccdf - level).abs() < 1e-3, "{p:?}");
        let above = model.jccdf(p.rate, p.power * 1.01).unwrap();
        assert!(above < level);
    }
    let top = model.serving_probability();
    let near_top = model.tradeoff_curve(top - 1e-3, &[1.0]).unwrap();
    assert_eq!(near_top.len(), 1);
    assert!(model.tradeoff_curve(level, &[5e6]).unwrap().is_empty());
    assert!(model.tradeoff_curve(1.5, &rates).is_err());
}

#[test]
fn query_thresholds_and_infinite_gamma() {
    let scenario = NetworkScenario::default();
    let q = TradeoffQuery::new(0.0, 1e-6).unwrap();
    assert!(q.gamma(&scenario.budget).is_infinite());
    let model = JccdfModel::new(&scenario).unwrap();
    let rate_free = model.evaluate(&q).unwrap();
    let tiny_rate = model.jccdf(1e-2, 1e-6).unwrap();
    assert!((rate_free.value - tiny_rate).abs() < 1e-4);
}
