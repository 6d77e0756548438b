//! Special functions shared by every other module.
//!
//! Hermite polynomials never appear in raw form. Everything that the
//! closed-form expressions write as `H_n(x)^2 e^{-x^2} / (2^n n! sqrt(pi))`
//! is evaluated through the normalized harmonic-oscillator eigenfunctions
//! `psi_n(x)`, which stay finite for `n` in the thousands, whereas `2^n n!`
//! overflows an `f64` near `n = 150`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check, Result};

/// `1 / sqrt(pi)`.
pub const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// Error function, accurate to a few ulp on the whole real line.
#[inline]
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// Complementary error function `1 - erf(x)`, computed without cancellation
/// for large positive `x`.
#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// `exp(-z^2) / erfc(z)`, finite for every finite `z`.
///
/// This ratio appears in every moment formula. For large `z` both numerator
/// and denominator underflow, so the continued fraction of `erfc` is used
/// there instead.
pub fn gaussian_tail_ratio(z: f64) -> f64 {
    if z < 25.0 {
        return (-z * z).exp() / erfc(z);
    }
    // erfc(z) = exp(-z^2)/sqrt(pi) / (z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))
    let mut k = z;
    for j in (1..=60).rev() {
        k = z + 0.5 * j as f64 / k;
    }
    PI.sqrt() * k
}

/// `ln(n!)`.
pub fn ln_factorial(n: usize) -> f64 {
    if n < 2 {
        0.0
    } else {
        libm::lgamma(n as f64 + 1.0)
    }
}

/// A dimensionless quadrature value; finite by construction.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct QuadratureValue(f64);

impl QuadratureValue {
    pub fn new(x: f64) -> Result<Self> {
        check(x.is_finite(), "x", x, "quadrature value must be finite")?;
        Ok(Self(x))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// `psi_0(x) .. psi_{n_max}(x)` at a single point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillatorEigenfunctionTable {
    pub x: f64,
    pub values: Vec<f64>,
}

impl OscillatorEigenfunctionTable {
    pub fn n_max(&self) -> usize {
        self.values.len() - 1
    }

    pub fn psi(&self, n: usize) -> f64 {
        self.values[n]
    }
}

/// Normalized oscillator eigenfunctions
/// `psi_n(x) = H_n(x) exp(-x^2/2) / sqrt(2^n n! sqrt(pi))` for `n = 0..=n_max`,
/// by the three-term recurrence
/// `psi_n = x sqrt(2/n) psi_{n-1} - sqrt((n-1)/n) psi_{n-2}`.
pub fn oscillator_eigenfunctions(x: QuadratureValue, n_max: usize) -> OscillatorEigenfunctionTable {
    OscillatorEigenfunctionTable {
        x: x.get(),
        values: psi_values(x.get(), n_max),
    }
}

pub(crate) fn psi_values(x: f64, n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let psi0 = FRAC_1_SQRT_PI.sqrt() * (-0.5 * x * x).exp();
    out.push(psi0);
    if n_max == 0 {
        return out;
    }
    out.push(std::f64::consts::SQRT_2 * x * psi0);
    for n in 2..=n_max {
        let nf = n as f64;
        let next = x * (2.0 / nf).sqrt() * out[n - 1] - ((nf - 1.0) / nf).sqrt() * out[n - 2];
        out.push(next);
    }
    out
}

/// Quadrature probability density `|<x|n>|^2 = psi_n(x)^2` of the Fock state
/// `|n>`; independent of the local-oscillator phase.
pub fn fock_quadrature_pdf(n: usize, x: f64) -> f64 {
    let psi = psi_values(x, n)[n];
    psi * psi
}

/// `P(|X| > x0)` for `X ~ N(0, variance)`.
pub fn gaussian_tail_two_sided(variance: f64, x0: f64) -> Result<f64> {
    check(
        variance > 0.0 && variance.is_finite(),
        "variance",
        variance,
        "must be positive and finite",
    )?;
    check(
        x0 >= 0.0 && x0.is_finite(),
        "x0",
        x0,
        "must be finite and >= 0",
    )?;
    Ok(erfc(x0 / (2.0 * variance).sqrt()))
}

/// `exp(-x/2) L_n(x)` for `n = 0..=n_max`, by the forward Laguerre recurrence
/// `(n+1) L_{n+1} = (2n+1-x) L_n - n L_{n-1}` started from scaled values.
pub fn scaled_laguerre(x: f64, n_max: usize) -> Vec<f64> {
    let scale = (-0.5 * x).exp();
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(scale);
    if n_max == 0 {
        return out;
    }
    out.push((1.0 - x) * scale);
    for n in 1..n_max {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0 - x) * out[n] - nf * out[n - 1]) / (nf + 1.0);
        out.push(next);
    }
    out
}

pub(crate) fn binomial_row_update(row: &mut Vec<f64>, p: f64) {
    // row of Binomial(m, p) -> Binomial(m + 1, p)
    let q = 1.0 - p;
    row.push(0.0);
    for j in (1..row.len()).rev() {
        row[j] = q * row[j] + p * row[j - 1];
    }
    row[0] *= q;
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Maclaurin series for |x| < 3, Laplace continued fraction beyond.
    /// Independent of libm.
    fn erf_oracle(x: f64) -> f64 {
        let ax = x.abs();
        let v = if ax < 3.0 {
            let mut term = ax;
            let mut sum = ax;
            let x2 = ax * ax;
            let mut n = 0.0;
            loop {
                n += 1.0;
                term *= -x2 / n;
                let add = term / (2.0 * n + 1.0);
                sum += add;
                if add.abs() < 1e-18 * sum.abs() {
                    break;
                }
            }
            2.0 * FRAC_1_SQRT_PI * sum
        } else {
            let mut k = ax;
            for j in (1..=200).rev() {
                k = ax + 0.5 * j as f64 / k;
            }
            1.0 - (-ax * ax).exp() * FRAC_1_SQRT_PI / k
        };
        v.copysign(x)
    }

    #[test]
    fn erf_matches_series_oracle_on_grid() {
        let mut worst: f64 = 0.0;
        for i in 0..1000 {
            let x = -6.0 + 12.0 * i as f64 / 999.0;
            worst = worst.max((erf(x) - erf_oracle(x)).abs());
        }
        assert!(worst <= 1e-13, "worst {worst:e}");
    }

    #[test]
    fn erf_examples() {
        assert_eq!(erf(0.0), 0.0);
        assert_abs_diff_eq!(erf(0.4248), erf_oracle(0.4248), epsilon = 1e-14);
        assert_abs_diff_eq!(erf(0.4248), 0.452_0, epsilon = 1e-4);
        assert_abs_diff_eq!(erf(2.0), 0.995_322_265_018_952_7, epsilon = 1e-14);
        assert_eq!(erf(-1.3), -erf(1.3));
        assert!(erf(6.0) <= 1.0);
    }

    #[test]
    fn tail_ratio_is_continuous_across_branch() {
        let below = gaussian_tail_ratio(25.0 - 1e-9);
        let above = gaussian_tail_ratio(25.0);
        assert!((below - above).abs() / above < 1e-10);
        // large z: ratio ~ sqrt(pi) (z + 1/(2z))
        let z = 300.0;
        assert!((gaussian_tail_ratio(z) / (PI.sqrt() * (z + 0.5 / z)) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn psi_small_cases() {
        let t = oscillator_eigenfunctions(QuadratureValue::new(0.0).unwrap(), 1);
        assert_abs_diff_eq!(t.psi(0), PI.powf(-0.25), epsilon = 1e-15);
        assert_eq!(t.psi(1), 0.0);
        assert_abs_diff_eq!(fock_quadrature_pdf(0, 0.0), FRAC_1_SQRT_PI, epsilon = 1e-15);
        assert_eq!(fock_quadrature_pdf(1, 0.0), 0.0);
    }

    /// Exact integer Hermite coefficients, explicit factorials.
    fn psi_oracle(n: usize, x: f64) -> f64 {
        let mut h: Vec<Vec<i128>> = vec![vec![1], vec![0, 2]];
        for k in 2..=n {
            let mut next = vec![0i128; k + 1];
            for (j, c) in h[k - 1].iter().enumerate() {
                next[j + 1] += 2 * c;
            }
            for (j, c) in h[k - 2].iter().enumerate() {
                next[j] -= 2 * (k as i128 - 1) * c;
            }
            h.push(next);
        }
        let hn: f64 = h[n]
            .iter()
            .enumerate()
            .map(|(j, &c)| c as f64 * x.powi(j as i32))
            .sum();
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        hn * (-x * x / 2.0).exp() / (2f64.powi(n as i32) * fact * PI.sqrt()).sqrt()
    }

    #[test]
    fn psi_matches_exact_hermite() {
        let t = oscillator_eigenfunctions(QuadratureValue::new(1.3).unwrap(), 20);
        for n in 0..=20 {
            assert_abs_diff_eq!(t.psi(n), psi_oracle(n, 1.3), epsilon = 1e-12);
        }
    }

    #[test]
    fn psi_parity_and_stability() {
        for &x in &[0.3, 1.7, 4.2] {
            let a = psi_values(x, 40);
            let b = psi_values(-x, 40);
            for n in 0..=40 {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                assert_abs_diff_eq!(b[n], sign * a[n], epsilon = 1e-14);
            }
        }
        for &x in &[-10.0, -3.3, 0.0, 5.5, 10.0] {
            assert!(psi_values(x, 500).iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn tail_examples() {
        assert_eq!(gaussian_tail_two_sided(3.0, 0.0).unwrap(), 1.0);
        assert_abs_diff_eq!(
            gaussian_tail_two_sided(0.5, 0.4248).unwrap(),
            0.548,
            epsilon = 1e-3
        );
        let v = 1.25 / (2.0 * 0.75);
        assert_abs_diff_eq!(
            gaussian_tail_two_sided(v, 2.0).unwrap(),
            0.0284,
            epsilon = 1e-4
        );
        assert!(gaussian_tail_two_sided(0.0, 1.0).is_err());
        assert!(gaussian_tail_two_sided(1.0, -1.0).is_err());
        assert!(QuadratureValue::new(f64::NAN).is_err());
    }

    #[test]
    fn laguerre_matches_explicit_sum() {
        let x = 3.7;
        let l = scaled_laguerre(x, 12);
        for (n, &ln) in l.iter().enumerate().take(13) {
            let mut s = 0.0;
            for j in 0..=n {
                let binom = (ln_factorial(n) - ln_factorial(j) - ln_factorial(n - j)).exp();
                s += binom * (-x).powi(j as i32) / (ln_factorial(j)).exp();
            }
            assert_abs_diff_eq!(ln, s * (-x / 2.0).exp(), epsilon = 1e-11);
        }
    }

    #[test]
    fn binomial_rows_sum_to_one() {
        let mut row = vec![1.0];
        for _ in 0..50 {
            binomial_row_update(&mut row, 0.3);
        }
        assert_abs_diff_eq!(row.iter().sum::<f64>(), 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(row[0], 0.7f64.powi(50), epsilon = 1e-20);
    }
}
