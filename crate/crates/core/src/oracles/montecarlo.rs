//! Shot-level simulation of the heralding experiment.
//!
//! Each shot draws the photon number `n` shared by signal and idler from the
//! geometric law `(1 - lambda) lambda^n`, draws the ideal idler quadrature
//! from `psi_n(x)^2`, mixes in detector noise, and keeps the shot when the
//! detected value falls in the acceptance window. The local-oscillator phase
//! is not drawn: `psi_n(x)^2` does not depend on it.
//!
//! Shots are grouped in fixed batches of [`BATCH_SIZE`]; batch `i` uses the
//! ChaCha8 stream `i` under the user seed. Tallies are integer counts, so the
//! result is bit-identical for any thread count.

use std::f64::consts::PI;
use std::sync::OnceLock;

use log::warn;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check, Result};
use crate::par;
use crate::params::{AcceptanceWindow, DetectorModel, Squeezing};
use crate::special::psi_values;

/// Shots per RNG stream.
pub const BATCH_SIZE: u64 = 4096;

const REJECTION_MAX_N: usize = 50;
const TABLE_STEP: f64 = 2e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardErrors {
    pub acceptance: f64,
    pub mean: Option<f64>,
    pub mandel_q: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloResult {
    pub shots: u64,
    pub accepted: u64,
    pub seed: u64,
    /// Accepted shots per signal photon number.
    pub counts: Vec<u64>,
    pub empirical_p: Vec<f64>,
    pub empirical_c: f64,
    pub empirical_mean: Option<f64>,
    pub empirical_q: Option<f64>,
    pub standard_errors: StandardErrors,
}

enum Method {
    Rejection { variance: f64, bound: f64 },
    Table { xs: Vec<f64>, cdf: Vec<f64> },
}

impl Method {
    fn build(n: usize) -> Method {
        let radius = (2.0 * n as f64 + 1.0).sqrt() + 8.0;
        let steps = (2.0 * radius / TABLE_STEP).ceil() as usize;
        let xs: Vec<f64> = (0..=steps)
            .map(|i| -radius + 2.0 * radius * i as f64 / steps as f64)
            .collect();
        let pdf: Vec<f64> = xs
            .iter()
            .map(|&x| {
                let p = psi_values(x, n)[n];
                p * p
            })
            .collect();
        if n <= REJECTION_MAX_N {
            let variance = n as f64 + 1.0;
            let bound = xs
                .iter()
                .zip(&pdf)
                .map(|(&x, &p)| p / gauss(x, variance))
                .fold(0.0, f64::max);
            return Method::Rejection {
                variance,
                bound: 1.05 * bound,
            };
        }
        let mut cdf = Vec::with_capacity(pdf.len());
        let mut acc = 0.0;
        cdf.push(0.0);
        for w in pdf.windows(2) {
            acc += 0.5 * (w[0] + w[1]);
            cdf.push(acc);
        }
        for c in cdf.iter_mut() {
            *c /= acc;
        }
        Method::Table { xs, cdf }
    }

    fn sample<R: Rng>(&self, n: usize, rng: &mut R) -> f64 {
        match self {
            Method::Rejection { variance, bound } => loop {
                let z: f64 = StandardNormal.sample(rng);
                let y = variance.sqrt() * z;
                let u: f64 = rng.random();
                let psi = psi_values(y, n)[n];
                if u * bound * gauss(y, *variance) <= psi * psi {
                    return y;
                }
            },
            Method::Table { xs, cdf } => {
                let u: f64 = rng.random();
                let k = cdf.partition_point(|&c| c < u).clamp(1, cdf.len() - 1);
                let (c0, c1) = (cdf[k - 1], cdf[k]);
                let t = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
                xs[k - 1] + t * (xs[k] - xs[k - 1])
            }
        }
    }
}

fn gauss(x: f64, variance: f64) -> f64 {
    (-x * x / (2.0 * variance)).exp() / (2.0 * PI * variance).sqrt()
}

/// Lazily built per-`n` samplers for `psi_n(x)^2`.
struct FockSamplers {
    cache: Vec<OnceLock<Method>>,
}

impl FockSamplers {
    fn new(lambda: f64) -> Self {
        // photon numbers beyond this occur with probability < 1e-16 per shot
        let n_cache = if lambda == 0.0 {
            1
        } else {
            ((1e-16f64).ln() / lambda.ln()).ceil().clamp(1.0, 4000.0) as usize + 1
        };
        Self {
            cache: (0..n_cache).map(|_| OnceLock::new()).collect(),
        }
    }

    fn sample<R: Rng>(&self, n: usize, rng: &mut R) -> f64 {
        match self.cache.get(n) {
            Some(slot) => slot.get_or_init(|| Method::build(n)).sample(n, rng),
            None => Method::build(n).sample(n, rng),
        }
    }
}

struct Experiment {
    ln_lambda: f64,
    signal_amplitude: f64,
    noise_sd: f64,
    samplers: FockSamplers,
}

impl Experiment {
    fn new(s: Squeezing, d: DetectorModel) -> Self {
        let l = s.lambda();
        Self {
            ln_lambda: if l == 0.0 { f64::NEG_INFINITY } else { l.ln() },
            signal_amplitude: d.eta().sqrt(),
            noise_sd: ((1.0 - d.eta()) * d.auxiliary_variance()).sqrt(),
            samplers: FockSamplers::new(l),
        }
    }

    /// One shot: `(photon number, detected idler quadrature)`.
    fn shot<R: Rng>(&self, rng: &mut R) -> (usize, f64) {
        let u: f64 = 1.0 - rng.random::<f64>();
        let n = if self.ln_lambda == f64::NEG_INFINITY {
            0
        } else {
            (u.ln() / self.ln_lambda).floor() as usize
        };
        let ideal = self.samplers.sample(n, rng);
        let noise = if self.noise_sd > 0.0 {
            let z: f64 = StandardNormal.sample(rng);
            self.noise_sd * z
        } else {
            0.0
        };
        (n, self.signal_amplitude * ideal + noise)
    }
}

fn batch_rng(seed: u64, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    rng
}

fn batch_len(shots: u64, batch: u64) -> u64 {
    BATCH_SIZE.min(shots - batch * BATCH_SIZE)
}

/// Simulates `shots` heralding attempts.
pub fn monte_carlo_experiment(
    s: Squeezing,
    w: &AcceptanceWindow,
    d: DetectorModel,
    shots: u64,
    seed: u64,
) -> Result<MonteCarloResult> {
    check(shots >= 1, "shots", shots as f64, "must be at least 1")?;
    let exp = Experiment::new(s, d);
    let batches = shots.div_ceil(BATCH_SIZE);
    let tallies = par::map_range(batches as usize, |b| {
        let b = b as u64;
        let mut rng = batch_rng(seed, b);
        let mut counts: Vec<u64> = Vec::new();
        for _ in 0..batch_len(shots, b) {
            let (n, x) = exp.shot(&mut rng);
            if w.contains(x) {
                if counts.len() <= n {
                    counts.resize(n + 1, 0);
                }
                counts[n] += 1;
            }
        }
        counts
    });
    let mut counts: Vec<u64> = Vec::new();
    for t in tallies {
        if counts.len() < t.len() {
            counts.resize(t.len(), 0);
        }
        for (c, v) in counts.iter_mut().zip(t) {
            *c += v;
        }
    }
    let accepted: u64 = counts.iter().sum();
    if accepted < 100 {
        warn!("only {accepted} of {shots} shots accepted; empirical statistics are unreliable");
    }
    Ok(summarize(shots, seed, counts, accepted))
}

fn summarize(shots: u64, seed: u64, counts: Vec<u64>, accepted: u64) -> MonteCarloResult {
    let c = accepted as f64 / shots as f64;
    let se_c = (c * (1.0 - c) / shots as f64).sqrt();
    let a = accepted as f64;
    let empirical_p: Vec<f64> = counts
        .iter()
        .map(|&k| if accepted > 0 { k as f64 / a } else { 0.0 })
        .collect();
    let (mean, q, se_mean, se_q) = if accepted == 0 {
        (None, None, None, None)
    } else {
        let m: f64 = empirical_p
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum();
        let central = |k: i32| -> f64 {
            empirical_p
                .iter()
                .enumerate()
                .map(|(n, p)| (n as f64 - m).powi(k) * p)
                .sum()
        };
        let (mu2, mu3, mu4) = (central(2), central(3), central(4));
        let se_mean = (mu2 / a).sqrt();
        if m > 0.0 {
            let q = mu2 / m - 1.0;
            let var_s2 = (mu4 - mu2 * mu2) / a;
            let var_m = mu2 / a;
            let cov = mu3 / a;
            let var_q =
                var_s2 / (m * m) + mu2 * mu2 / m.powi(4) * var_m - 2.0 * mu2 / m.powi(3) * cov;
            (Some(m), Some(q), Some(se_mean), Some(var_q.max(0.0).sqrt()))
        } else {
            (Some(m), None, Some(se_mean), None)
        }
    };
    MonteCarloResult {
        shots,
        accepted,
        seed,
        counts,
        empirical_p,
        empirical_c: c,
        empirical_mean: mean,
        empirical_q: q,
        standard_errors: StandardErrors {
            acceptance: se_c,
            mean: se_mean,
            mandel_q: se_q,
        },
    }
}

/// Detected idler quadratures of every shot, before acceptance, in shot
/// order.
pub fn sample_detected_quadratures(
    s: Squeezing,
    d: DetectorModel,
    shots: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    check(shots >= 1, "shots", shots as f64, "must be at least 1")?;
    let exp = Experiment::new(s, d);
    let batches = shots.div_ceil(BATCH_SIZE);
    let chunks = par::map_range(batches as usize, |b| {
        let b = b as u64;
        let mut rng = batch_rng(seed, b);
        (0..batch_len(shots, b))
            .map(|_| exp.shot(&mut rng).1)
            .collect::<Vec<f64>>()
    });
    Ok(chunks.concat())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_threshold_accepts_everything() {
        let s = Squeezing::new(0.25).unwrap();
        let w = AcceptanceWindow::threshold(0.0).unwrap();
        let r = monte_carlo_experiment(s, &w, DetectorModel::ideal(), 10_000, 3).unwrap();
        assert_eq!(r.accepted, r.shots);
        assert_eq!(r.empirical_c, 1.0);
        assert!((r.empirical_p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_zero_shots() {
        let s = Squeezing::new(0.25).unwrap();
        let w = AcceptanceWindow::threshold(0.0).unwrap();
        assert!(monte_carlo_experiment(s, &w, DetectorModel::ideal(), 0, 1).is_err());
    }

    #[test]
    fn replay_is_identical_and_seed_matters() {
        let s = Squeezing::new(0.3).unwrap();
        let w = AcceptanceWindow::threshold(1.0).unwrap();
        let d = DetectorModel::new(0.8, 0.1).unwrap();
        let a = monte_carlo_experiment(s, &w, d, 20_000, 42).unwrap();
        let b = monte_carlo_experiment(s, &w, d, 20_000, 42).unwrap();
        let c = monte_carlo_experiment(s, &w, d, 20_000, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.counts, c.counts);
    }

    #[test]
    fn table_sampler_has_unit_variance_scaling() {
        // <x^2> = n + 1/2 for |n>
        let n = 60;
        let m = Method::build(n);
        let mut rng = batch_rng(7, 0);
        let k = 40_000;
        let second: f64 = (0..k).map(|_| m.sample(n, &mut rng).powi(2)).sum::<f64>() / k as f64;
        let sd = (0.5 * (n * n + n + 1) as f64 / k as f64).sqrt();
        assert!((second - 60.5).abs() < 4.0 * sd, "{second}");
    }
}
