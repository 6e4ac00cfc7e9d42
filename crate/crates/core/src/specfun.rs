//! Special functions used by the closed forms: real gamma, the Gauss
//! hypergeometric function for complex argument, and the upper incomplete
//! gamma function of integer order.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative size of the last retained term at which power series stop.
pub const SERIES_REL_TOL: f64 = 1e-12;
/// Hard cap on the number of power-series terms.
pub const SERIES_MAX_TERMS: usize = 10_000;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(x: f64) -> f64 {
    LANCZOS[1..]
        .iter()
        .enumerate()
        .fold(LANCZOS[0], |acc, (i, c)| acc + c / (x + i as f64 + 1.0))
}

/// sin(πx), exactly zero at the integers.
fn sin_pi(x: f64) -> f64 {
    let r = x.rem_euclid(2.0);
    if r == 0.0 || r == 1.0 {
        return 0.0;
    }
    (PI * r).sin()
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// ln Γ(x) for x > 0.
pub fn log_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "log_gamma needs a positive argument, got {x}");
    if x < 0.5 {
        // Γ(x)Γ(1-x) = π / sin(πx)
        return (PI / sin_pi(x)).ln() - log_gamma(1.0 - x);
    }
    let xm = x - 1.0;
    let t = xm + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (xm + 0.5) * t.ln() - t + lanczos_sum(xm).ln()
}

/// Γ(x) for real x; infinite at the poles.
pub fn gamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return f64::INFINITY;
    }
    if x < 0.5 {
        return PI / (sin_pi(x) * gamma(1.0 - x));
    }
    if x > 171.0 {
        return log_gamma(x).exp();
    }
    let xm = x - 1.0;
    let t = xm + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(xm + 0.5) * (-t).exp() * lanczos_sum(xm)
}

/// 1/Γ(x), which vanishes at the poles of Γ.
pub fn rgamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return 0.0;
    }
    if x < 0.5 {
        return sin_pi(x) * gamma(1.0 - x) / PI;
    }
    1.0 / gamma(x)
}

/// n! as a float.
pub fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Gauss hypergeometric function ₂F₁(a, b; c; z) on the principal branch
/// (cut along [1, ∞); points on the cut take the limit from above).
///
/// |z| ≤ 0.7 uses the defining series; points mapped inside that disc by
/// z → z/(z−1) use the Pfaff transformation; |z| ≥ 1.5 with non-integer
/// b − a uses the z → 1/z connection formula. Everything else is obtained
/// by analytic continuation of the hypergeometric ODE with Taylor steps.
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: Complex64) -> Result<Complex64> {
    if !(a.is_finite() && b.is_finite() && c.is_finite() && z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain("non-finite hypergeometric argument".into()));
    }
    if is_nonpositive_integer(c) {
        return Err(Error::Domain(format!("c = {c} is a non-positive integer")));
    }
    let one = Complex64::new(1.0, 0.0);
    if z == Complex64::new(0.0, 0.0) {
        return Ok(one);
    }
    if is_nonpositive_integer(a) || is_nonpositive_integer(b) {
        return series(a, b, c, z);
    }
    if z.norm() <= 0.7 {
        return series(a, b, c, z);
    }
    if z.im == 0.0 && z.re == 1.0 {
        if c - a - b > 0.0 {
            let v = gamma(c) * gamma(c - a - b) * rgamma(c - a) * rgamma(c - b);
            return Ok(Complex64::new(v, 0.0));
        }
        return Err(Error::Domain(format!("2F1 diverges at z = 1 with c - a - b = {}", c - a - b)));
    }
    let on_cut = z.im == 0.0 && z.re > 1.0;
    if !on_cut {
        let w = z / (z - one);
        if w.norm() <= 0.7 {
            return Ok((one - z).powf(-a) * series(a, c - b, c, w)?);
        }
        let d = b - a;
        if z.norm() >= 1.5 && (d - d.round()).abs() > 1e-3 {
            return inverse_transform(a, b, c, z);
        }
    }
    continue_ode(a, b, c, z)
}

/// Defining power series; valid for |z| < 1 or terminating parameters.
pub(crate) fn series(a: f64, b: f64, c: f64, z: Complex64) -> Result<Complex64> {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for k in 0..SERIES_MAX_TERMS {
        let kf = k as f64;
        term *= z * ((a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)));
        sum += term;
        if term.norm() <= SERIES_REL_TOL * sum.norm() {
            return Ok(sum);
        }
    }
    Err(Error::NoConvergence {
        what: "2F1 power series",
        iterations: SERIES_MAX_TERMS,
        estimate: sum.norm(),
    })
}

/// Series value and first derivative at z.
fn series_with_derivative(a: f64, b: f64, c: f64, z: Complex64) -> Result<(Complex64, Complex64)> {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut dsum = Complex64::new(0.0, 0.0);
    for k in 0..SERIES_MAX_TERMS {
        let kf = k as f64;
        term *= z * ((a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)));
        sum += term;
        dsum += term * (kf + 1.0);
        if term.norm() * (kf + 1.0) <= 1e-16 * (sum.norm() + dsum.norm()) {
            return Ok((sum, dsum / z));
        }
    }
    Err(Error::NoConvergence {
        what: "2F1 power series",
        iterations: SERIES_MAX_TERMS,
        estimate: sum.norm(),
    })
}

/// Connection formula around z = ∞; requires b − a ∉ ℤ and z off the cut.
pub(crate) fn inverse_transform(a: f64, b: f64, c: f64, z: Complex64) -> Result<Complex64> {
    let minus_z = -z;
    let inv = Complex64::new(1.0, 0.0) / z;
    let g_c = gamma(c);
    let c1 = g_c * gamma(b - a) * rgamma(b) * rgamma(c - a);
    let c2 = g_c * gamma(a - b) * rgamma(a) * rgamma(c - b);
    let mut out = Complex64::new(0.0, 0.0);
    if c1 != 0.0 {
        out += minus_z.powf(-a) * c1 * series(a, a - c + 1.0, a - b + 1.0, inv)?;
    }
    if c2 != 0.0 {
        out += minus_z.powf(-b) * c2 * series(b, b - c + 1.0, b - a + 1.0, inv)?;
    }
    Ok(out)
}

/// Analytic continuation by Taylor stepping along a path that avoids the cut.
pub(crate) fn continue_ode(a: f64, b: f64, c: f64, z: Complex64) -> Result<Complex64> {
    let sigma = if z.im < 0.0 { -1.0 } else { 1.0 };
    let (start, waypoints) = if z.arg().abs() >= PI / 4.0 {
        (z * (0.5 / z.norm()), vec![z])
    } else {
        (Complex64::new(0.0, 0.5 * sigma), vec![Complex64::new(z.re, sigma), z])
    };
    let (mut w, mut dw) = series_with_derivative(a, b, c, start)?;
    let mut p = start;
    let mut steps = 0usize;
    for target in waypoints {
        loop {
            let d = target - p;
            let dist = d.norm();
            if dist == 0.0 {
                break;
            }
            let radius = p.norm().min((Complex64::new(1.0, 0.0) - p).norm());
            let h = if dist <= 0.5 * radius { d } else { d * (0.5 * radius / dist) };
            let (nw, ndw) = taylor_step(a, b, c, p, w, dw, h)?;
            w = nw;
            dw = ndw;
            p = if h == d { target } else { p + h };
            steps += 1;
            if steps > 20_000 {
                return Err(Error::NoConvergence {
                    what: "2F1 analytic continuation",
                    iterations: steps,
                    estimate: w.norm(),
                });
            }
        }
    }
    Ok(w)
}

/// One Taylor step of the hypergeometric ODE from `z0` by `h`.
fn taylor_step(
    a: f64,
    b: f64,
    c: f64,
    z0: Complex64,
    w: Complex64,
    dw: Complex64,
    h: Complex64,
) -> Result<(Complex64, Complex64)> {
    let one = Complex64::new(1.0, 0.0);
    let p0 = z0 * (one - z0);
    let p1 = one - z0 * 2.0;
    let q0 = Complex64::new(c, 0.0) - z0 * (a + b + 1.0);
    let q1 = -(a + b + 1.0);
    let r = -a * b;
    let h2 = h * h;
    // e_k = c_k h^k
    let mut e_prev = w;
    let mut e_cur = dw * h;
    let mut sum = e_prev + e_cur;
    let mut dsum = e_cur;
    for k in 0..4000usize {
        let kf = k as f64;
        let e_next = -((p1 * (kf * (kf + 1.0)) + q0 * (kf + 1.0)) * e_cur * h
            + (kf * (kf - 1.0) * -1.0 + q1 * kf + r) * e_prev * h2)
            / (p0 * ((kf + 1.0) * (kf + 2.0)));
        sum += e_next;
        dsum += e_next * (kf + 2.0);
        let scale = sum.norm() + dsum.norm();
        if k > 2 && (e_next.norm() + e_cur.norm()) * (kf + 2.0) <= 1e-17 * scale {
            return Ok((sum, dsum / h));
        }
        e_prev = e_cur;
        e_cur = e_next;
    }
    Err(Error::NoConvergence {
        what: "2F1 Taylor step",
        iterations: 4000,
        estimate: sum.norm(),
    })
}

/// Γ(t+1, z) = t! e^{-z} Σ_{k=0}^{t} z^k / k! for integer t ≥ 0.
pub fn upper_incomplete_gamma_int(t: u32, z: Complex64) -> Complex64 {
    if z.norm() <= 1.0 {
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for k in 1..=t {
            term *= z / k as f64;
            sum += term;
        }
        return (-z).exp() * sum * factorial(t);
    }
    // e^{-z} z^t Σ_j t!/(t-j)! z^{-j}, accumulated in Horner form.
    let inv = Complex64::new(1.0, 0.0) / z;
    let mut acc = Complex64::new(1.0, 0.0);
    for j in (1..=t).rev() {
        acc = Complex64::new(1.0, 0.0) + acc * inv * (t - j + 1) as f64;
    }
    (-z + z.ln() * t as f64).exp() * acc
}

/// Γ(t+1, z) for t = 0..=t_max, by upward recurrence Γ(t+1,z) = tΓ(t,z) + z^t e^{-z}.
pub fn upper_incomplete_gamma_int_seq(t_max: u32, z: Complex64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(t_max as usize + 1);
    let e = (-z).exp();
    let mut g = e;
    out.push(g);
    let mut zpow_e = e;
    for t in 1..=t_max {
        zpow_e *= z;
        g = g * t as f64 + zpow_e;
        out.push(g);
    }
    out
}
