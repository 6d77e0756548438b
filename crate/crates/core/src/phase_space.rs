//! Radial Husimi and Wigner profiles of Fock-diagonal states.
//!
//! A state diagonal in the Fock basis carries no phase information, so both
//! quasidistributions depend on `r = |alpha|` only. The conventions match a
//! quadrature `x = (a + a^dag)/sqrt(2)` with vacuum variance 1/2, so that
//! `2 pi * integral W(r) r dr = 1` for both functions.

use std::f64::consts::FRAC_1_PI;

use serde::{Deserialize, Serialize};

use crate::error::{check, Error, Result};
use crate::par;
use crate::special::{ln_factorial, scaled_laguerre};

const NORMALIZATION_SLACK: f64 = 1e-6;

fn validate(p: &[f64], r: f64) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidParameter {
            name: "p",
            value: 0.0,
            reason: "distribution must not be empty",
        });
    }
    let total: f64 = p.iter().sum();
    check(
        (total - 1.0).abs() <= NORMALIZATION_SLACK && p.iter().all(|&x| x >= 0.0),
        "p",
        total,
        "must be a nonnegative distribution summing to 1",
    )?;
    check(r >= 0.0 && r.is_finite(), "r", r, "must be finite and >= 0")
}

/// `Q(alpha) = (1/pi) <alpha| rho |alpha> = (1/pi) e^{-r^2} sum_n p_n r^{2n} / n!`.
pub fn husimi(p: &[f64], r: f64) -> Result<f64> {
    validate(p, r)?;
    if r == 0.0 {
        return Ok(p[0] * FRAC_1_PI);
    }
    let ln_r2 = (r * r).ln();
    let sum: f64 = p
        .iter()
        .enumerate()
        .filter(|(_, &pn)| pn > 0.0)
        .map(|(n, &pn)| (pn.ln() + n as f64 * ln_r2 - ln_factorial(n) - r * r).exp())
        .sum();
    Ok(sum * FRAC_1_PI)
}

/// `W(r) = (1/pi) sum_n p_n (-1)^n e^{-r^2} L_n(2 r^2)`.
pub fn wigner(p: &[f64], r: f64) -> Result<f64> {
    validate(p, r)?;
    let lag = scaled_laguerre(2.0 * r * r, p.len() - 1);
    let sum: f64 = p
        .iter()
        .zip(&lag)
        .enumerate()
        .map(|(n, (pn, ln))| if n % 2 == 0 { pn * ln } else { -pn * ln })
        .sum();
    Ok(sum * FRAC_1_PI)
}

/// Quasidistribution values on a radial grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
}

impl RadialGrid {
    /// `count` equally spaced radii on `[0, r_max]`.
    pub fn radii(r_max: f64, count: usize) -> Vec<f64> {
        match count {
            0 => vec![],
            1 => vec![0.0],
            _ => (0..count)
                .map(|i| r_max * i as f64 / (count - 1) as f64)
                .collect(),
        }
    }

    /// `(radius, value)` of the largest value.
    pub fn peak(&self) -> (f64, f64) {
        self.radii
            .iter()
            .zip(&self.values)
            .fold((0.0, f64::NEG_INFINITY), |best, (&r, &v)| {
                if v > best.1 {
                    (r, v)
                } else {
                    best
                }
            })
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn profile(p: &[f64], radii: &[f64], f: fn(&[f64], f64) -> Result<f64>) -> Result<RadialGrid> {
    let increasing = radii.windows(2).all(|w| w[0] < w[1]);
    check(
        increasing && radii.first() == Some(&0.0),
        "radii",
        radii.first().copied().unwrap_or(f64::NAN),
        "must be strictly increasing from 0",
    )?;
    let values = par::map(radii, |&r| f(p, r))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(RadialGrid {
        radii: radii.to_vec(),
        values,
    })
}

pub fn husimi_profile(p: &[f64], radii: &[f64]) -> Result<RadialGrid> {
    profile(p, radii, husimi)
}

pub fn wigner_profile(p: &[f64], radii: &[f64]) -> Result<RadialGrid> {
    profile(p, radii, wigner)
}
