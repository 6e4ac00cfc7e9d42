//! Distribution of the largest eigenvalue of a complex Wishart matrix, which
//! is the serving-link gain under maximum-ratio transmission and combining.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::factorial;

pub const MAX_SMALL_DIMENSION: usize = 4;
pub const MAX_LARGE_DIMENSION: usize = 8;

/// Σ_s e^{-s x} Σ_t c_{s,t} x^t with exact integer coefficients.
#[derive(Debug, Clone, PartialEq, Default)]
struct ExpPoly(BTreeMap<u32, Vec<i128>>);

fn overflow() -> Error {
    Error::Domain("eigenvalue coefficient arithmetic overflowed".into())
}

impl ExpPoly {
    /// Lower incomplete gamma γ(k, x) = (k−1)! − e^{-x} Σ_{l<k} (k−1)!/l! x^l.
    fn lower_gamma(k: u32) -> Result<Self> {
        let fact = |n: u32| (1..=n as i128).try_fold(1i128, |acc, v| acc.checked_mul(v));
        let top = fact(k - 1).ok_or_else(overflow)?;
        let mut poly = Vec::with_capacity(k as usize);
        for l in 0..k {
            poly.push(-(top / fact(l).ok_or_else(overflow)?));
        }
        Ok(Self(BTreeMap::from([(0, vec![top]), (1, poly)])))
    }

    fn add_assign(&mut self, other: &Self, sign: i128) -> Result<()> {
        for (&s, poly) in &other.0 {
            let dst = self.0.entry(s).or_default();
            if dst.len() < poly.len() {
                dst.resize(poly.len(), 0);
            }
            for (d, &c) in dst.iter_mut().zip(poly) {
                *d = c.checked_mul(sign).and_then(|v| d.checked_add(v)).ok_or_else(overflow)?;
            }
        }
        Ok(())
    }

    fn mul(&self, other: &Self) -> Result<Self> {
        let mut out = Self::default();
        for (&s1, p1) in &self.0 {
            for (&s2, p2) in &other.0 {
                let dst = out.0.entry(s1 + s2).or_default();
                let len = p1.len() + p2.len() - 1;
                if dst.len() < len {
                    dst.resize(len, 0);
                }
                for (i, &a) in p1.iter().enumerate() {
                    for (j, &b) in p2.iter().enumerate() {
                        let v = a.checked_mul(b).ok_or_else(overflow)?;
                        dst[i + j] = dst[i + j].checked_add(v).ok_or_else(overflow)?;
                    }
                }
            }
        }
        Ok(out)
    }

    fn derivative(&self) -> Result<Self> {
        let mut out = Self::default();
        for (&s, poly) in &self.0 {
            let mut d = vec![0i128; poly.len()];
            for (t, &c) in poly.iter().enumerate() {
                if t > 0 {
                    d[t - 1] = (t as i128).checked_mul(c).and_then(|v| d[t - 1].checked_add(v)).ok_or_else(overflow)?;
                }
                d[t] = (s as i128).checked_mul(c).and_then(|v| d[t].checked_sub(v)).ok_or_else(overflow)?;
            }
            out.0.insert(s, d);
        }
        Ok(out)
    }

    fn terms(&self) -> Vec<(u32, u32, i128)> {
        self.0
            .iter()
            .flat_map(|(&s, poly)| {
                poly.iter()
                    .enumerate()
                    .filter(|(_, &c)| c != 0)
                    .map(move |(t, &c)| (s, t as u32, c))
            })
            .collect()
    }
}

fn determinant(matrix: &[Vec<ExpPoly>]) -> Result<ExpPoly> {
    let n = matrix.len();
    if n == 1 {
        return Ok(matrix[0][0].clone());
    }
    let mut out = ExpPoly::default();
    for col in 0..n {
        let minor: Vec<Vec<ExpPoly>> = matrix[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(j, _)| *j != col)
                    .map(|(_, e)| e.clone())
                    .collect()
            })
            .collect();
        let term = matrix[0][col].mul(&determinant(&minor)?)?;
        out.add_assign(&term, if col % 2 == 0 { 1 } else { -1 })?;
    }
    Ok(out)
}

/// f(x) = K_mn Σ a_{s,t} x^t e^{-s x} for the largest eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPdfCoefficients {
    pub m: usize,
    pub n: usize,
    pub k_mn: f64,
    /// (s, t, a_{s,t}) with s ≥ 1.
    pub pdf_terms: Vec<(u32, u32, f64)>,
    /// CDF terms (s, t, c_{s,t}); the s = 0 entry equals 1/K_mn.
    pub cdf_terms: Vec<(u32, u32, f64)>,
}

pub fn eigen_pdf_coefficients(n_t: usize, n_r: usize) -> Result<EigenPdfCoefficients> {
    let m = n_t.min(n_r);
    let n = n_t.max(n_r);
    if m == 0 || m > MAX_SMALL_DIMENSION || n > MAX_LARGE_DIMENSION {
        return Err(Error::Domain(format!(
            "antenna pair ({n_t}, {n_r}) outside the supported range 1 ≤ min ≤ {MAX_SMALL_DIMENSION}, max ≤ {MAX_LARGE_DIMENSION}"
        )));
    }
    let matrix = (1..=m)
        .map(|i| {
            (1..=m)
                .map(|j| ExpPoly::lower_gamma((n - m + i + j - 1) as u32))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let cdf = determinant(&matrix)?;
    let pdf = cdf.derivative()?;
    let denominator: f64 = (1..=m)
        .map(|i| factorial((m - i) as u32) * factorial((n - i) as u32))
        .product();
    let to_f64 = |terms: Vec<(u32, u32, i128)>| terms.into_iter().map(|(s, t, c)| (s, t, c as f64)).collect();
    Ok(EigenPdfCoefficients {
        m,
        n,
        k_mn: 1.0 / denominator,
        pdf_terms: to_f64(pdf.terms()),
        cdf_terms: to_f64(cdf.terms()),
    })
}

impl EigenPdfCoefficients {
    /// Largest exponential rate s appearing in the expansion.
    pub fn max_rate(&self) -> u32 {
        self.pdf_terms.iter().map(|&(s, _, _)| s).max().unwrap_or(0)
    }

    /// Largest power t for a given rate s.
    pub fn max_power(&self, s: u32) -> Option<u32> {
        self.pdf_terms.iter().filter(|x| x.0 == s).map(|x| x.1).max()
    }

    /// E[g] = K Σ a (t+1)! / s^{t+2}.
    pub fn mean(&self) -> f64 {
        self.k_mn
            * self
                .pdf_terms
                .iter()
                .map(|&(s, t, a)| a * factorial(t + 1) / (s as f64).powi(t as i32 + 2))
                .sum::<f64>()
    }
}

fn evaluate(k: f64, terms: &[(u32, u32, f64)], x: f64) -> f64 {
    k * terms
        .iter()
        .map(|&(s, t, a)| a * x.powi(t as i32) * (-(s as f64) * x).exp())
        .sum::<f64>()
}

pub fn eigen_pdf(coeffs: &EigenPdfCoefficients, x: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    evaluate(coeffs.k_mn, &coeffs.pdf_terms, x).max(0.0)
}

pub fn eigen_cdf(coeffs: &EigenPdfCoefficients, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    evaluate(coeffs.k_mn, &coeffs.cdf_terms, x).clamp(0.0, 1.0)
}

/// Largest eigenvalue of a real symmetric matrix by cyclic Jacobi rotations.
pub(crate) fn largest_symmetric_eigenvalue(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let frob: f64 = a.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    if frob == 0.0 {
        return 0.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * frob {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).fold(f64::NEG_INFINITY, f64::max)
}

/// Largest eigenvalue of H Hᴴ for an n_r × n_t matrix of unit-variance
/// circularly-symmetric complex Gaussians.
pub fn sample_gain_with<R: Rng + ?Sized>(n_t: usize, n_r: usize, rng: &mut R) -> f64 {
    assert!(n_t >= 1 && n_r >= 1, "antenna counts must be positive");
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let h: Vec<Vec<(f64, f64)>> = (0..n_r)
        .map(|_| {
            (0..n_t)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    (re * scale, im * scale)
                })
                .collect()
        })
        .collect();
    if n_t == 1 || n_r == 1 {
        return h.iter().flatten().map(|(re, im)| re * re + im * im).sum();
    }
    // Gram matrix on the smaller side: G = A + iB.
    let m = n_t.min(n_r);
    let entry = |i: usize, j: usize| -> (f64, f64) {
        let (mut re, mut im) = (0.0, 0.0);
        if n_t <= n_r {
            // (Hᴴ H)_{ij} = Σ_k conj(h_ki) h_kj
            for row in &h {
                let (ar, ai) = row[i];
                let (br, bi) = row[j];
                re += ar * br + ai * bi;
                im += ar * bi - ai * br;
            }
        } else {
            // (H Hᴴ)_{ij} = Σ_k h_ik conj(h_jk)
            for k in 0..n_t {
                let (ar, ai) = h[i][k];
                let (br, bi) = h[j][k];
                re += ar * br + ai * bi;
                im += ai * br - ar * bi;
            }
        }
        (re, im)
    };
    let mut real = vec![vec![0.0; 2 * m]; 2 * m];
    for i in 0..m {
        for j in 0..m {
            let (re, im) = entry(i, j);
            real[i][j] = re;
            real[i + m][j + m] = re;
            real[i][j + m] = -im;
            real[i + m][j] = im;
        }
    }
    largest_symmetric_eigenvalue(real)
}

pub fn sample_gain(n_t: usize, n_r: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_gain_with(n_t, n_r, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{adaptive_semi_infinite, Tolerance};

    #[test]
    fn scalar_channel_is_exponential() {
        let c = eigen_pdf_coefficients(1, 1).unwrap();
        assert_eq!(c.k_mn, 1.0);
        for x in [0.0, 0.3, 2.0, 7.5] {
            assert!((eigen_pdf(&c, x) - (-x as f64).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn normalising_constant() {
        let c = eigen_pdf_coefficients(4, 2).unwrap();
        assert!((c.k_mn - 1.0 / 12.0).abs() < 1e-15);
        assert_eq!((c.m, c.n), (2, 4));
    }

    #[test]
    fn unsupported_pairs() {
        assert!(eigen_pdf_coefficients(0, 2).is_err());
        assert!(eigen_pdf_coefficients(5, 5).is_err());
        assert!(eigen_pdf_coefficients(2, 9).is_err());
    }

    #[test]
    fn densities_integrate_to_one() {
        for m in 1..=4 {
            for n in m..=8 {
                let c = eigen_pdf_coefficients(n, m).unwrap();
                let constant: f64 = c.cdf_terms.iter().filter(|x| x.0 == 0).map(|x| x.2).sum();
                assert!((constant * c.k_mn - 1.0).abs() < 1e-12, "({m},{n})");
                let total = adaptive_semi_infinite(|x| eigen_pdf(&c, x), 0.0, Tolerance::new(1e-12, 1e-12))
                    .unwrap()
                    .value;
                assert!((total - 1.0).abs() < 1e-6, "({m},{n}): {total}");
                for k in 0..400 {
                    let x = k as f64 * 0.1;
                    assert!(evaluate(c.k_mn, &c.pdf_terms, x) > -1e-9, "({m},{n}) negative at {x}");
                }
                assert_eq!(eigen_pdf(&c, 0.0), if m * n == 1 { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn cdf_derivative_matches_pdf() {
        let c = eigen_pdf_coefficients(4, 2).unwrap();
        for x in [0.5, 2.0, 5.0, 11.0] {
            let h = 1e-5;
            let fd = (eigen_cdf(&c, x + h) - eigen_cdf(&c, x - h)) / (2.0 * h);
            assert!((fd - eigen_pdf(&c, x)).abs() < 1e-8);
        }
    }

    #[test]
    fn jacobi_recovers_known_spectrum() {
        let a = vec![vec![2.0, 1.0, 0.0], vec![1.0, 2.0, 1.0], vec![0.0, 1.0, 2.0]];
        let top = largest_symmetric_eigenvalue(a);
        assert!((top - (2.0 + std::f64::consts::SQRT_2)).abs() < 1e-13);
    }

    #[test]
    fn samples_replay_and_respect_trace_bound() {
        assert_eq!(sample_gain(4, 2, 11), sample_gain(4, 2, 11));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let mut r1 = rng.clone();
            let g = sample_gain_with(4, 2, &mut rng);
            // Recompute the trace from the same draws.
            let trace: f64 = (0..8)
                .map(|_| {
                    let a: f64 = r1.sample(StandardNormal);
                    let b: f64 = r1.sample(StandardNormal);
                    0.5 * (a * a + b * b)
                })
                .sum();
            assert!(g >= trace / 2.0 - 1e-12 && g <= trace + 1e-12);
        }
    }
}
