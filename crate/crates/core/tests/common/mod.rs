#![allow(dead_code)]

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Two-sided Kolmogorov-Smirnov distance between a sample and a CDF.
pub fn ks_distance(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    d
}

/// Pearson statistic and its 99% critical value, pooling trailing cells
/// whose expected count is below 5.
pub fn chi_square(observed: &[u64], expected: &[f64]) -> (f64, f64) {
    let mut obs = Vec::new();
    let mut exp = Vec::new();
    let (mut o_acc, mut e_acc) = (0u64, 0.0);
    for (&o, &e) in observed.iter().zip(expected) {
        o_acc += o;
        e_acc += e;
        if e_acc >= 5.0 {
            obs.push(o_acc);
            exp.push(e_acc);
            o_acc = 0;
            e_acc = 0.0;
        }
    }
    if let (Some(o), Some(e)) = (obs.last_mut(), exp.last_mut()) {
        *o += o_acc;
        *e += e_acc;
    }
    let stat = obs
        .iter()
        .zip(&exp)
        .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
        .sum();
    let dof = (obs.len() - 1).max(1) as f64;
    let critical = ChiSquared::new(dof).unwrap().inverse_cdf(0.99);
    (stat, critical)
}
