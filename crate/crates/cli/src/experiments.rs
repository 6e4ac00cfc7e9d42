//! Experiment drivers. Each one writes its curves as CSV files into the
//! output directory and returns the written paths.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use swiptmc::compute::{operating_point, outage_probability, required_power, ComputeProfile};
use swiptmc::montecarlo::{binomial_half_width, outage_from_outcomes, simulate, EmpiricalJccdf, TrialOutcome};
use swiptmc::tradeoff::JccdfModel;
use swiptmc::units::watts_to_dbm;
use swiptmc::NetworkScenario;

use crate::config::ScenarioConfig;
use crate::error::CliError;
use crate::output::{write_curve, Curve, Shape, Source};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Validate,
    OperatingPoints,
    OutageTasks,
    OutageCycles,
    OutageQhit,
    Densify,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Validate,
        Experiment::OperatingPoints,
        Experiment::OutageTasks,
        Experiment::OutageCycles,
        Experiment::OutageQhit,
        Experiment::Densify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Validate => "validate",
            Experiment::OperatingPoints => "operating-points",
            Experiment::OutageTasks => "outage-tasks",
            Experiment::OutageCycles => "outage-cycles",
            Experiment::OutageQhit => "outage-qhit",
            Experiment::Densify => "densify",
        }
    }
}

impl FromStr for Experiment {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| CliError::UnknownExperiment(s.to_string()))
    }
}

/// Everything an experiment needs besides its name.
pub struct RunContext<'a> {
    pub config: &'a ScenarioConfig,
    pub out_dir: &'a Path,
}

impl RunContext<'_> {
    fn trials(&self) -> usize {
        self.config.solver.trials
    }

    fn seed(&self) -> u64 {
        self.config.solver.seed
    }

    fn points(&self) -> usize {
        self.config.solver.grid_points
    }

    fn level(&self) -> f64 {
        self.config.solver.level
    }
}

pub fn run(experiment: Experiment, ctx: &RunContext<'_>) -> Result<Vec<PathBuf>, CliError> {
    let curves = match experiment {
        Experiment::Validate => validate(ctx)?,
        Experiment::OperatingPoints => operating_points(ctx)?,
        Experiment::OutageTasks => outage_family(ctx, &[10.0, 20.0, 50.0], Axis::Tasks, "outage-tasks")?,
        Experiment::OutageCycles => outage_family(ctx, &[10.0, 20.0, 50.0], Axis::Cycles, "outage-cycles")?,
        Experiment::OutageQhit => outage_qhit(ctx)?,
        Experiment::Densify => densify(ctx)?,
    };
    curves.iter().map(|c| write_curve(ctx.out_dir, c)).collect()
}

/// `n` points from `lo` to `hi`, evenly spaced in logarithm.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

fn tag(value: f64) -> String {
    format!("{value}")
}

/// Largest power Q with at least `fraction` of the trials meeting (rate, Q).
fn empirical_max_power(outcomes: &[TrialOutcome], rate: f64, fraction: f64) -> Option<f64> {
    let needed = (fraction * outcomes.len() as f64).ceil().max(1.0) as usize;
    let mut powers: Vec<f64> = outcomes
        .iter()
        .filter(|o| o.meets(rate, 0.0))
        .map(|o| o.power)
        .collect();
    if powers.len() < needed {
        return None;
    }
    powers.sort_by(|a, b| b.total_cmp(a));
    Some(powers[needed - 1])
}

fn validate(ctx: &RunContext<'_>) -> Result<Vec<Curve>, CliError> {
    let level = ctx.level();
    let rates = log_grid(1e3, 1e6, ctx.points());
    let mut curves = Vec::new();
    for q in [0.2, 0.7, 1.0] {
        let scenario = ctx.config.scenario().with_hit_probability(q);
        let model = JccdfModel::new(&scenario)?;
        let outcomes = simulate(&scenario, ctx.trials(), ctx.seed())?;
        let name = format!("validate_q{}", tag(q));

        let mut analytic = Curve::new(format!("{name}_analytic"), Source::Analytic, "kbit/s", "dBm")
            .shape(Shape::Nonincreasing);
        let mut check = Curve::new(format!("{name}_mc_at_analytic"), Source::Mc, "kbit/s", "jccdf").probability();
        for p in model.tradeoff_curve(level, &rates)? {
            analytic.push(p.rate / 1e3, watts_to_dbm(p.power));
            let e = EmpiricalJccdf::from_outcomes(&outcomes, &[p.rate], &[p.power]);
            let (v, hw) = (e.values[0][0], e.half_widths[0][0]);
            check.push_ci(p.rate / 1e3, v, (v - hw).max(0.0), (v + hw).min(1.0));
        }

        let hw = binomial_half_width(level, outcomes.len());
        let mut mc = Curve::new(format!("{name}_mc"), Source::Mc, "kbit/s", "dBm").shape(Shape::Nonincreasing);
        for &rate in &rates {
            if let Some(q_mid) = empirical_max_power(&outcomes, rate, level) {
                let low = empirical_max_power(&outcomes, rate, (level + hw).min(1.0)).unwrap_or(0.0);
                let high = empirical_max_power(&outcomes, rate, (level - hw).max(0.0)).unwrap_or(q_mid);
                mc.push_ci(rate / 1e3, watts_to_dbm(q_mid), watts_to_dbm(low), watts_to_dbm(high));
            }
        }
        curves.extend([analytic, mc, check]);
    }
    Ok(curves)
}

fn operating_points(ctx: &RunContext<'_>) -> Result<Vec<Curve>, CliError> {
    let level = ctx.level();
    let scenario = ctx.config.scenario();
    let model = JccdfModel::new(&scenario)?;
    let rates = log_grid(1e3, 1e6, ctx.points());
    let mut tradeoff =
        Curve::new("operating-points_tradeoff", Source::Analytic, "kbit/s", "dBm").shape(Shape::Nonincreasing);
    for p in model.tradeoff_curve(level, &rates)? {
        tradeoff.push(p.rate / 1e3, watts_to_dbm(p.power));
    }
    let mut curves = vec![tradeoff];
    let mut points = Vec::new();
    for k in [10.0, 20.0, 50.0, 100.0] {
        let profile = ctx.config.profile().with_ops_per_bit(k);
        let mut required = Curve::new(format!("operating-points_required_k{}", tag(k)), Source::Analytic, "kbit/s", "dBm")
            .shape(Shape::Nondecreasing);
        for &r in rates.iter().filter(|&&r| r <= profile.max_rate()) {
            required.push(r / 1e3, watts_to_dbm(required_power(&profile, r)?));
        }
        curves.push(required);
        let op = operating_point(&profile, level, &model)?;
        points.push((op.tasks_per_second / 1e3, watts_to_dbm(op.point.power)));
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut ops = Curve::new("operating-points_points", Source::Analytic, "ktask/s", "dBm");
    for (x, y) in points {
        ops.push(x, y);
    }
    curves.push(ops);
    Ok(curves)
}

#[derive(Debug, Clone, Copy)]
enum Axis {
    Tasks,
    Cycles,
}

/// Analytic and simulated outage against tasks/s or cycles/s.
fn outage_curves(
    name: &str,
    scenario: &NetworkScenario,
    model: &JccdfModel,
    outcomes: &[TrialOutcome],
    profile: &ComputeProfile,
    rates: &[f64],
    axis: Axis,
) -> Result<Vec<Curve>, CliError> {
    let rates: Vec<f64> = rates.iter().copied().filter(|&r| r <= profile.max_rate()).collect();
    let (x_unit, x_of): (&'static str, Box<dyn Fn(f64) -> f64>) = match axis {
        Axis::Tasks => ("ktask/s", Box::new(|r| profile.tasks_per_second(r) / 1e3)),
        Axis::Cycles => ("Mcycle/s", Box::new(|r| profile.cycles_per_second(r) / 1e6)),
    };
    debug_assert_eq!(model.scenario(), scenario);
    let mut analytic = Curve::new(format!("{name}_analytic"), Source::Analytic, x_unit, "outage")
        .shape(Shape::Nondecreasing)
        .probability();
    for &r in &rates {
        analytic.push(x_of(r), outage_probability(profile, r, model)?);
    }
    let mut mc = Curve::new(format!("{name}_mc"), Source::Mc, x_unit, "outage")
        .shape(Shape::Nondecreasing)
        .probability();
    for s in outage_from_outcomes(outcomes, profile, &rates)? {
        mc.push_ci(
            x_of(s.rate),
            s.outage,
            (s.outage - s.half_width).max(0.0),
            (s.outage + s.half_width).min(1.0),
        );
    }
    Ok(vec![analytic, mc])
}

fn outage_rates(ctx: &RunContext<'_>) -> Vec<f64> {
    log_grid(1e3, 2e6, ctx.points().max(2) * 2)
}

fn outage_family(ctx: &RunContext<'_>, ks: &[f64], axis: Axis, prefix: &str) -> Result<Vec<Curve>, CliError> {
    let scenario = ctx.config.scenario();
    let model = JccdfModel::new(&scenario)?;
    let outcomes = simulate(&scenario, ctx.trials(), ctx.seed())?;
    let rates = outage_rates(ctx);
    let mut curves = Vec::new();
    for &k in ks {
        let profile = ctx.config.profile().with_ops_per_bit(k);
        let name = format!("{prefix}_k{}", tag(k));
        curves.extend(outage_curves(&name, &scenario, &model, &outcomes, &profile, &rates, axis)?);
    }
    Ok(curves)
}

fn outage_qhit(ctx: &RunContext<'_>) -> Result<Vec<Curve>, CliError> {
    let rates = outage_rates(ctx);
    let profile = ctx.config.profile();
    let mut curves = Vec::new();
    for q in [0.2, 0.5, 0.7, 1.0] {
        let scenario = ctx.config.scenario().with_hit_probability(q);
        let model = JccdfModel::new(&scenario)?;
        let outcomes = simulate(&scenario, ctx.trials(), ctx.seed())?;
        let name = format!("outage-qhit_q{}", tag(q));
        curves.extend(outage_curves(&name, &scenario, &model, &outcomes, &profile, &rates, Axis::Tasks)?);
    }
    Ok(curves)
}

fn densify(ctx: &RunContext<'_>) -> Result<Vec<Curve>, CliError> {
    let rates = outage_rates(ctx);
    let mut curves = Vec::new();
    for d in [3.0, 5.0, 7.0] {
        let scenario = ctx.config.scenario().with_ph_spacing(d).with_hit_probability(1.0);
        let model = JccdfModel::new(&scenario)?;
        let outcomes = simulate(&scenario, ctx.trials(), ctx.seed())?;
        for k in [1.0, 20.0] {
            let profile = ctx.config.profile().with_ops_per_bit(k);
            for (axis, label) in [(Axis::Cycles, "cycles"), (Axis::Tasks, "tasks")] {
                let name = format!("densify_{label}_d{}_k{}", tag(d), tag(k));
                curves.extend(outage_curves(&name, &scenario, &model, &outcomes, &profile, &rates, axis)?);
            }
        }
    }
    Ok(curves)
}
