use swiptmc::compute::{operating_point, outage_probability, rate_at_outage, required_power, ComputeProfile};
use swiptmc::montecarlo::{empirical_outage, outage_from_outcomes, simulate};
use swiptmc::tradeoff::JccdfModel;
use swiptmc::units::watts_to_dbm;
use swiptmc::{Error, NetworkScenario};

fn profile(k: f64) -> ComputeProfile {
    ComputeProfile::default().with_ops_per_bit(k)
}

#[test]
fn required_power_reference_values() {
    // ξ (kNR/M)³ evaluated independently of the library.
    let direct = |k: f64, r: f64| 1e-28 * (k * 600.0 * r / 32.0f64).powi(3);
    let q10 = required_power(&profile(10.0), 192e3).unwrap();
    let q100 = required_power(&profile(100.0), 32e3).unwrap();
    assert!((q10 / direct(10.0, 192e3) - 1.0).abs() < 1e-12);
    assert!((q100 / direct(100.0, 32e3) - 1.0).abs() < 1e-12);
    assert!((watts_to_dbm(q10) + 23.3).abs() < 0.05);
    assert!((watts_to_dbm(q100) + 16.66).abs() < 0.05);
}

#[test]
fn operating_point_sits_on_the_level_set() {
    let model = JccdfModel::new(&NetworkScenario::default()).unwrap();
    for k in [10.0, 50.0] {
        let op = operating_point(&profile(k), 0.75, &model).unwrap();
        assert!((op.point.jccdf - 0.75).abs() < 1e-3, "{op:?}");
        assert_eq!(op.point.power, required_power(&profile(k), op.point.rate).unwrap());
        assert!((op.tasks_per_second - op.point.rate / 32.0).abs() < 1e-9);
    }
}

#[test]
fn unreachable_level_is_reported() {
    let sparse = NetworkScenario::default().with_ph_spacing(25.0).with_hit_probability(0.5);
    let model = JccdfModel::new(&sparse).unwrap();
    let level = (model.serving_probability() + 1.0) / 2.0;
    assert!(matches!(operating_point(&profile(20.0), level, &model), Err(Error::NoIntersection(_))));
    let r0 = outage_probability(&profile(20.0), 0.0, &model).unwrap();
    assert!((r0 - (1.0 - model.serving_probability())).abs() < 1e-12);
}

#[test]
fn outage_grows_with_rate_complexity_and_data() {
    let model = JccdfModel::new(&NetworkScenario::default()).unwrap();
    let rates = [5e3, 2e4, 6e4, 1.5e5, 3e5];
    let tol = 1e-5;
    for k in [10.0, 20.0, 50.0] {
        let out: Vec<f64> = rates.iter().map(|&r| outage_probability(&profile(k), r, &model).unwrap()).collect();
        assert!(out.windows(2).all(|w| w[1] >= w[0] - tol), "k={k}: {out:?}");
    }
    for &r in &rates {
        let by_k: Vec<f64> = [10.0, 20.0, 50.0]
            .iter()
            .map(|&k| outage_probability(&profile(k), r, &model).unwrap())
            .collect();
        assert!(by_k.windows(2).all(|w| w[1] >= w[0] - tol));
        let by_n: Vec<f64> = [300.0, 600.0, 1200.0]
            .iter()
            .map(|&n| {
                let p = ComputeProfile { data_bits: n, ..profile(20.0) };
                outage_probability(&p, r, &model).unwrap()
            })
            .collect();
        assert!(by_n.windows(2).all(|w| w[1] >= w[0] - tol));
    }
}

#[test]
fn fixed_cycle_budget_favours_complex_tasks() {
    let model = JccdfModel::new(&NetworkScenario::default()).unwrap();
    for cycles in [2e7, 4e7, 6e7] {
        let out: Vec<f64> = [10.0, 20.0, 50.0]
            .iter()
            .map(|&k| {
                let p = profile(k);
                outage_probability(&p, p.rate_for_cycles(cycles), &model).unwrap()
            })
            .collect();
        assert!(out.windows(2).all(|w| w[1] < w[0]), "{cycles}: {out:?}");
    }
}

#[test]
fn empirical_outage_tracks_the_analysis() {
    let scenario = NetworkScenario::default();
    let model = JccdfModel::new(&scenario).unwrap();
    let rates = [1e4, 5e4, 1e5, 2e5, 4e5];
    let p = profile(20.0);
    let outcomes = simulate(&scenario, 50_000, 4).unwrap();
    let empirical = outage_from_outcomes(&outcomes, &p, &rates).unwrap();
    for s in &empirical {
        let analytic = outage_probability(&p, s.rate, &model).unwrap();
        assert!((s.outage - analytic).abs() <= 0.03, "{s:?} vs {analytic}");
    }
    assert!(empirical.windows(2).all(|w| w[1].outage >= w[0].outage));
    let zero = empirical_outage(&scenario, &p, &[0.0], 2_000, 4).unwrap();
    let served = outcomes[..2_000].iter().filter(|o| o.serving_loss.is_some()).count() as f64 / 2_000.0;
    assert!((zero[0].outage - (1.0 - served)).abs() < 1e-12);
    let r = rate_at_outage(&p, 0.4, &model).unwrap();
    assert!((outage_probability(&p, r, &model).unwrap() - 0.4).abs() < 1e-3);
}
