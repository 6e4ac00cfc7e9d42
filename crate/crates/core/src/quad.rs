//! Quadrature rules: fixed Gauss-Legendre panels and an adaptive
//! Gauss-Kronrod (7/15) integrator for finite and semi-infinite ranges.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that can be accumulated by the integrators.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds an `n`-point rule by Newton iteration on the Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped onto [a, b].
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<T: QuadValue>(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> T) -> T {
        self.on(a, b).fold(T::zero(), |acc, (x, w)| acc + f(x) * w)
    }
}

/// Filon-type rule for ∫_a^b f(x) e^{-iνx} dx with smooth `f`: `f` is
/// expanded in Legendre polynomials at the Gauss nodes and each term is
/// integrated against the exponential exactly through spherical Bessel
/// moments. Cost per panel does not grow with the number of periods.
#[derive(Debug, Clone)]
pub struct OscillatoryRule {
    gl: GaussLegendre,
    /// (2n+1)/2 · w_k · P_n(x_k), indexed [n][k].
    projection: Vec<Vec<f64>>,
}

impl OscillatoryRule {
    pub fn new(n: usize) -> Self {
        let gl = GaussLegendre::new(n);
        let projection = (0..n)
            .map(|order| {
                gl.nodes
                    .iter()
                    .zip(&gl.weights)
                    .map(|(&x, &w)| (order as f64 + 0.5) * w * legendre(order, x))
                    .collect()
            })
            .collect();
        Self { gl, projection }
    }

    pub fn integrate(&self, a: f64, b: f64, nu: f64, mut f: impl FnMut(f64) -> Complex64) -> Complex64 {
        let n = self.gl.len();
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let kappa = nu * half;
        if kappa.abs() < n as f64 {
            // Few periods: plain Gauss-Legendre on sub-panels is accurate and
            // avoids the unstable small-argument Bessel recurrence.
            let pieces = (kappa.abs() / std::f64::consts::PI).ceil().max(1.0) as usize;
            let h = (b - a) / pieces as f64;
            return (0..pieces)
                .map(|k| {
                    let lo = a + h * k as f64;
                    self.gl
                        .integrate(lo, lo + h, |x| f(x) * Complex64::from_polar(1.0, -nu * x))
                })
                .sum();
        }
        let values: Vec<Complex64> = self.gl.nodes.iter().map(|&x| f(mid + half * x)).collect();
        let bessel = spherical_bessel(n, kappa);
        let mut total = Complex64::new(0.0, 0.0);
        // ∫_{-1}^{1} P_m(x) e^{-iκx} dx = 2 (-i)^m j_m(κ)
        let mut rot = Complex64::new(2.0, 0.0);
        for (row, j) in self.projection.iter().zip(&bessel) {
            let coeff: Complex64 = row.iter().zip(&values).map(|(&p, &v)| v * p).sum();
            total += coeff * rot * *j;
            rot *= Complex64::new(0.0, -1.0);
        }
        total * Complex64::from_polar(half, -nu * mid)
    }
}

/// j_0 … j_{n-1} at `x` by upward recurrence; accurate for |x| ≥ n.
fn spherical_bessel(n: usize, x: f64) -> Vec<f64> {
    let (s, c) = x.sin_cos();
    let mut out = Vec::with_capacity(n);
    let mut prev = s / x;
    out.push(prev);
    if n > 1 {
        let mut cur = s / (x * x) - c / x;
        out.push(cur);
        for m in 1..n - 1 {
            let next = (2 * m + 1) as f64 / x * cur - prev;
            prev = cur;
            cur = next;
            out.push(cur);
        }
    }
    out
}

fn legendre(n: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return p0;
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    p1
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

// Kronrod 15-point abscissae/weights and embedded Gauss 7-point weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Stopping rule for [`adaptive`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_panels: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 1e-13,
            rel: 1e-11,
            max_panels: 4000,
        }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self {
            abs,
            rel,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOutput<T> {
    pub value: T,
    pub error: f64,
    pub panels: usize,
}

fn gk15<T: QuadValue>(f: &mut impl FnMut(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(mid - dx);
        let f2 = f(mid + dx);
        let s = f1 + f2;
        kron = kron + s * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + s * WG[j / 2];
        }
    }
    let kron = kron * half;
    let gauss = gauss * half;
    (kron, (kron - gauss).magnitude())
}

/// Globally adaptive Gauss-Kronrod integration of `f` over the finite interval [a, b].
pub fn adaptive<T: QuadValue>(mut f: impl FnMut(f64) -> T, a: f64, b: f64, tol: Tolerance) -> Result<QuadOutput<T>> {
    if a == b {
        return Ok(QuadOutput {
            value: T::zero(),
            error: 0.0,
            panels: 0,
        });
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut segments = vec![(a, b, v, e)];
    loop {
        let total = segments.iter().fold(T::zero(), |acc, s| acc + s.2);
        let err: f64 = segments.iter().map(|s| s.3).sum();
        if err <= tol.abs.max(tol.rel * total.magnitude()) {
            return Ok(QuadOutput {
                value: total,
                error: err,
                panels: segments.len(),
            });
        }
        let (idx, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("at least one segment");
        let (sa, sb, _, _) = segments[idx];
        let sm = 0.5 * (sa + sb);
        if segments.len() >= tol.max_panels || sm <= sa || sm >= sb {
            return Err(Error::Quadrature {
                what: "adaptive Gauss-Kronrod",
                panels: segments.len(),
                estimate: total.magnitude(),
                error: err,
            });
        }
        let (v1, e1) = gk15(&mut f, sa, sm);
        let (v2, e2) = gk15(&mut f, sm, sb);
        segments[idx] = (sa, sm, v1, e1);
        segments.push((sm, sb, v2, e2));
    }
}

/// Adaptive integration over [a, ∞) through the map x = a + t/(1 - t).
pub fn adaptive_semi_infinite<T: QuadValue>(mut f: impl FnMut(f64) -> T, a: f64, tol: Tolerance) -> Result<QuadOutput<T>> {
    adaptive(
        |t| {
            let u = 1.0 - t;
            f(a + t / u) * (1.0 / (u * u))
        },
        0.0,
        1.0,
        tol,
    )
}

/// Adaptive integration over consecutive sub-intervals given by sorted breakpoints.
pub fn adaptive_piecewise<T: QuadValue>(
    mut f: impl FnMut(f64) -> T,
    breakpoints: &[f64],
    tol: Tolerance,
) -> Result<QuadOutput<T>> {
    let mut out = QuadOutput {
        value: T::zero(),
        error: 0.0,
        panels: 0,
    };
    for w in breakpoints.windows(2) {
        let part = adaptive(&mut f, w[0], w[1], tol)?;
        out.value = out.value + part.value;
        out.error += part.error;
        out.panels += part.panels;
    }
    Ok(out)
}

/// Piecewise Chebyshev interpolation on equal panels of [start, end], with
/// barycentric evaluation at Chebyshev points of the second kind.
#[derive(Debug, Clone)]
pub struct PiecewiseChebyshev {
    start: f64,
    width: f64,
    panels: usize,
    reference: Vec<f64>,
    weights: Vec<f64>,
}

impl PiecewiseChebyshev {
    pub fn new(start: f64, end: f64, panels: usize, nodes: usize) -> Self {
        assert!(end > start && panels >= 1 && nodes >= 2);
        let reference = (0..nodes)
            .map(|k| (std::f64::consts::PI * k as f64 / (nodes - 1) as f64).cos())
            .collect();
        let weights = (0..nodes)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                if k == 0 || k == nodes - 1 {
                    0.5 * sign
                } else {
                    sign
                }
            })
            .collect();
        Self {
            start,
            width: (end - start) / panels as f64,
            panels,
            reference,
            weights,
        }
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.start + self.width * self.panels as f64
    }

    pub fn nodes_per_panel(&self) -> usize {
        self.reference.len()
    }

    /// Sample abscissae, panel by panel.
    pub fn points(&self) -> Vec<f64> {
        (0..self.panels)
            .flat_map(|p| {
                let mid = self.start + self.width * (p as f64 + 0.5);
                self.reference.iter().map(move |&t| mid + 0.5 * self.width * t)
            })
            .collect()
    }

    /// Interpolates `values` (laid out as [`Self::points`]) at `x`; clamps to the covered range.
    pub fn eval<T: QuadValue>(&self, values: &[T], x: f64) -> T {
        let n = self.reference.len();
        let p = (((x - self.start) / self.width).floor().max(0.0) as usize).min(self.panels - 1);
        let mid = self.start + self.width * (p as f64 + 0.5);
        let t = ((x - mid) / (0.5 * self.width)).clamp(-1.0, 1.0);
        let vals = &values[p * n..(p + 1) * n];
        let mut num = T::zero();
        let mut den = 0.0;
        for k in 0..n {
            let d = t - self.reference[k];
            if d == 0.0 {
                return vals[k];
            }
            let c = self.weights[k] / d;
            num = num + vals[k] * c;
            den += c;
        }
        num * (1.0 / den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oscillatory_rule_matches_closed_forms() {
        let rule = OscillatoryRule::new(16);
        for nu in [0.3, 5.0, 40.0, 2e3, -7e4] {
            for (a, b) in [(1.0, 2.0), (10.0, 21.5), (0.5, 3.0)] {
                // f(x) = x² e^{iβx} with β inside the smooth part.
                let beta: f64 = 0.2;
                let k = beta - nu;
                let prim = |x: f64| {
                    let e = Complex64::new(0.0, k * x).exp();
                    let ik = Complex64::new(0.0, k);
                    e * (x * x / ik - 2.0 * x / (ik * ik) + 2.0 / (ik * ik * ik))
                };
                let exact = prim(b) - prim(a);
                let got = rule.integrate(a, b, nu, |x| Complex64::new(0.0, beta * x).exp() * x * x);
                assert!((got - exact).norm() <= 1e-12 * exact.norm().max(1.0), "nu={nu} [{a},{b}]: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        for n in [1usize, 2, 5, 8, 16] {
            let rule = GaussLegendre::new(n);
            let wsum: f64 = rule.on(-1.0, 1.0).map(|(_, w)| w).sum();
            assert!((wsum - 2.0).abs() < 1e-14, "n={n} weight sum {wsum}");
            let deg = 2 * n - 1;
            let got = rule.integrate(0.0, 2.0, |x| x.powi(deg as i32));
            let want = 2f64.powi(deg as i32 + 1) / (deg as f64 + 1.0);
            assert!((got - want).abs() < 1e-12 * want, "n={n}: {got} vs {want}");
        }
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let out = adaptive(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, Tolerance::new(1e-10, 1e-10)).unwrap();
        assert!((out.value - 2.0).abs() < 1e-8);
    }

    #[test]
    fn semi_infinite_exponential() {
        let out = adaptive_semi_infinite(|x: f64| (-x).exp(), 0.0, Tolerance::default()).unwrap();
        assert!((out.value - 1.0).abs() < 1e-12);
        let c = adaptive_semi_infinite(
            |x: f64| Complex64::new(0.0, x).exp() * (-x).exp(),
            0.0,
            Tolerance::default(),
        )
        .unwrap();
        // ∫ e^{(i-1)x} dx = 1/(1-i)
        let want = Complex64::new(1.0, 0.0) / Complex64::new(1.0, -1.0);
        assert!((c.value - want).norm() < 1e-11);
    }

    #[test]
    fn chebyshev_interpolation_is_spectrally_accurate() {
        let cheb = PiecewiseChebyshev::new(-3.0, 5.0, 8, 16);
        let values: Vec<Complex64> = cheb.points().iter().map(|&x| Complex64::new(x.sin(), x.exp())).collect();
        for k in 0..=200 {
            let x = -3.0 + 8.0 * k as f64 / 200.0;
            let got = cheb.eval(&values, x);
            assert!((got - Complex64::new(x.sin(), x.exp())).norm() < 1e-12 * (1.0 + x.exp()));
        }
    }

    #[test]
    fn exhausted_panel_budget_is_an_error() {
        let tol = Tolerance {
            abs: 0.0,
            rel: 0.0,
            max_panels: 10,
        };
        let err = adaptive(|x: f64| (50.0 * x).sin(), 0.0, 10.0, tol).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }
}
