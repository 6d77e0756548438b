//! Acceptance probability, photon-number distribution and moments of the
//! heralded signal state.
//!
//! The signal state is diagonal in the Fock basis with
//! `p_n = (1 - lambda) lambda^n q_n / C`, where `q_n` is the probability that
//! the idler quadrature of the Fock state `|n>` lands in the acceptance
//! window and `C = (1 - lambda) sum_n lambda^n q_n` is the probability of a
//! successful heralding event. `C / (1 - lambda)` is the generating function
//! of the distribution, so closed forms for `C` give closed forms for every
//! moment.
//!
//! A thermal auxiliary mode (`n_bar > 0`) is handled by mapping the detector
//! onto its vacuum-auxiliary equivalent, see
//! [`DetectorModel::vacuum_equivalent`].

use serde::{Deserialize, Serialize};

use crate::error::{check, Error, Result};
use crate::params::{AcceptanceWindow, DetectorModel, Squeezing};
use crate::special::{binomial_row_update, erfc, gaussian_tail_ratio, psi_values, FRAC_1_SQRT_PI};

/// Default truncation tolerance for [`photon_distribution`].
pub const DEFAULT_TOL: f64 = 1e-12;
/// Largest photon number [`photon_distribution`] is willing to tabulate.
pub const DEFAULT_N_CAP: usize = 10_000;

/// Ideal-detector heralding probability `1 - erf(x0 sqrt((1-lambda)/(1+lambda)))`.
pub fn acceptance_probability(s: Squeezing, w: &AcceptanceWindow) -> Result<f64> {
    let x0 = w.x0()?;
    let l = s.lambda();
    Ok(erfc(x0 * ((1.0 - l) / (1.0 + l)).sqrt()))
}

/// Heralding probability for an imperfect detector: a two-sided Gaussian tail
/// with the detected-quadrature variance of the `(eta, n_bar)` model.
pub fn acceptance_probability_imperfect(
    s: Squeezing,
    w: &AcceptanceWindow,
    d: DetectorModel,
) -> Result<f64> {
    let x0 = w.x0()?;
    Ok(generating_c(s.lambda(), x0, d))
}

// C(lambda) for any lambda where the variance stays positive; also used by the
// finite-difference stencil.
fn generating_c(lambda: f64, x0: f64, d: DetectorModel) -> f64 {
    if x0 == 0.0 {
        return 1.0;
    }
    let variance = d.detected_variance_raw(lambda);
    erfc(x0 / (2.0 * variance).sqrt())
}

/// `q_0 .. q_{n_max}` for an ideal detector and threshold `x0`.
///
/// `q_0 = 1 - erf(x0)` and `q_n = q_{n-1} + sqrt(2/n) psi_{n-1}(x0) psi_n(x0)`.
pub fn qn_ideal(n_max: usize, x0: f64) -> Result<Vec<f64>> {
    check(
        x0 >= 0.0 && x0.is_finite(),
        "x0",
        x0,
        "must be finite and >= 0",
    )?;
    Ok(qn_ideal_unchecked(n_max, x0))
}

fn ideal_increments(n_max: usize, x0: f64) -> Vec<f64> {
    let psi = psi_values(x0, n_max);
    let mut inc = vec![0.0; n_max + 1];
    for n in 1..=n_max {
        inc[n] = (2.0 / n as f64).sqrt() * psi[n - 1] * psi[n];
    }
    inc
}

fn qn_ideal_unchecked(n_max: usize, x0: f64) -> Vec<f64> {
    let inc = ideal_increments(n_max, x0);
    let mut q = Vec::with_capacity(n_max + 1);
    let mut acc = erfc(x0);
    q.push(acc);
    for d in &inc[1..] {
        acc += d;
        q.push(acc.clamp(0.0, 1.0));
    }
    q
}

/// `q_0 .. q_{n_max}` for a detector of efficiency `eta`.
///
/// The increment `q_n - q_{n-1}` is the binomial mixture
/// `eta * sum_j B(n-1, j; eta) * dq_{j+1}` of the ideal increments
/// `dq_m = sqrt(2/m) psi_{m-1}(x0) psi_m(x0)`. The binomial rows are built by
/// Pascal updates, so no factorial ever overflows. At `eta = 1` only the
/// `j = n - 1` term survives and the ideal recurrence is recovered.
pub fn qn_imperfect(n_max: usize, x0: f64, d: DetectorModel) -> Result<Vec<f64>> {
    check(
        x0 >= 0.0 && x0.is_finite(),
        "x0",
        x0,
        "must be finite and >= 0",
    )?;
    let (reduced, scale) = d.vacuum_equivalent();
    let x0 = x0 * scale;
    let eta = reduced.eta();
    if eta == 1.0 {
        return Ok(qn_ideal_unchecked(n_max, x0));
    }
    let inc = ideal_increments(n_max, x0);
    let mut q = Vec::with_capacity(n_max + 1);
    let mut acc = erfc(x0);
    q.push(acc);
    let mut row = vec![1.0];
    for n in 1..=n_max {
        let step: f64 = row.iter().zip(&inc[1..=n]).map(|(w, dq)| w * dq).sum();
        acc += eta * step;
        q.push(acc.clamp(0.0, 1.0));
        binomial_row_update(&mut row, eta);
    }
    Ok(q)
}

/// Mean photon number and second factorial moment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub second_factorial: f64,
}

impl Moments {
    /// `(<:n^2:> - <n>^2) / <n>`; `None` when the mean vanishes.
    pub fn mandel_q(&self) -> Option<f64> {
        (self.mean > 0.0).then(|| (self.second_factorial - self.mean * self.mean) / self.mean)
    }
}

/// Closed-form moments for the ideal detector, written in the ideal-detector
/// form (`1 + lambda` denominators).
pub fn ideal_moments(lambda: f64, x0: f64) -> Moments {
    let l = lambda;
    let thermal = l / (1.0 - l);
    let z = x0 * ((1.0 - l) / (1.0 + l)).sqrt();
    let ratio = gaussian_tail_ratio(z);
    let mean =
        thermal + 2.0 * l * x0 * ratio * FRAC_1_SQRT_PI / ((1.0 - l) * (1.0 + l).powi(3)).sqrt();
    let second_factorial = 2.0 * thermal * thermal
        + ((1.0 - l) / (1.0 + l)).sqrt() * 2.0 * x0 * l * l * FRAC_1_SQRT_PI * ratio
            / (1.0 - l * l)
            * ((1.0 + 4.0 * l) / (1.0 - l * l) + 2.0 * x0 * x0 / (1.0 + l).powi(2));
    Moments {
        mean,
        second_factorial,
    }
}

/// Closed-form moments for efficiency `eta` and a vacuum auxiliary mode.
pub fn vacuum_aux_moments(lambda: f64, x0: f64, eta: f64) -> Moments {
    let l = lambda;
    let a = 2.0 * eta - 1.0;
    let denom = 1.0 + a * l;
    let thermal = l / (1.0 - l);
    let z = x0 * ((1.0 - l) / denom).sqrt();
    let ratio = gaussian_tail_ratio(z);
    let t = 2.0 * eta * l * x0 * ratio * FRAC_1_SQRT_PI / ((1.0 - l) * denom.powi(3)).sqrt();
    let bracket = (4.0 - 3.0 * eta + 4.0 * a * l) / ((1.0 - l) * denom)
        + 2.0 * eta * x0 * x0 / (denom * denom);
    Moments {
        mean: thermal + t,
        second_factorial: 2.0 * thermal * thermal + t * l * bracket,
    }
}

/// Closed-form moments for any detector.
pub fn moments(s: Squeezing, w: &AcceptanceWindow, d: DetectorModel) -> Result<Moments> {
    let x0 = w.x0()?;
    if d.is_ideal() {
        return Ok(ideal_moments(s.lambda(), x0));
    }
    let (reduced, scale) = d.vacuum_equivalent();
    Ok(vacuum_aux_moments(s.lambda(), x0 * scale, reduced.eta()))
}

/// Mean photon number `<n>` of the heralded signal.
pub fn mean_photon(s: Squeezing, w: &AcceptanceWindow, d: DetectorModel) -> Result<f64> {
    moments(s, w, d).map(|m| m.mean)
}

/// Second factorial moment `<n(n-1)>` of the heralded signal.
pub fn second_factorial_moment(
    s: Squeezing,
    w: &AcceptanceWindow,
    d: DetectorModel,
) -> Result<f64> {
    moments(s, w, d).map(|m| m.second_factorial)
}

/// Mandel Q-factor. Undefined for `lambda = 0`.
pub fn mandel_q(s: Squeezing, w: &AcceptanceWindow, d: DetectorModel) -> Result<f64> {
    if s.lambda() == 0.0 {
        return Err(Error::UndefinedQ);
    }
    moments(s, w, d)?.mandel_q().ok_or(Error::UndefinedQ)
}

/// Leading weak-squeezing coefficients `(A, B)` with
/// `<n> ~ A lambda` and `<:n^2:> ~ B lambda^2` as `lambda -> 0`.
pub fn weak_squeezing_coefficients(x0: f64, d: DetectorModel) -> (f64, f64) {
    let (reduced, scale) = d.vacuum_equivalent();
    let x0 = x0 * scale;
    let eta = reduced.eta();
    let g = 2.0 * eta * x0 * gaussian_tail_ratio(x0) * FRAC_1_SQRT_PI;
    (1.0 + g, 2.0 + g * (4.0 - 3.0 * eta + 2.0 * eta * x0 * x0))
}

/// `lim_{lambda -> 0} Q / lambda = (B - A^2) / A`.
///
/// Q itself vanishes linearly in lambda, so its sign at weak squeezing is
/// the sign of this slope.
pub fn weak_squeezing_q_slope(x0: f64, d: DetectorModel) -> f64 {
    let (a, b) = weak_squeezing_coefficients(x0, d);
    (b - a * a) / a
}

/// Moment ordering for [`moment_via_generating`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ordering {
    /// `<n^k>`
    Raw,
    /// `<n!/(n-k)!>`
    Normal,
}

/// Finite-difference step used by [`moment_via_generating`].
pub const GENERATING_STEP: f64 = 1e-4;

/// Moments of order `k <= 2` from derivatives of the generating function
/// `G(lambda) = C(lambda) / (1 - lambda)`, by central differences with one
/// Richardson extrapolation. Meant as a cross-check of the closed forms.
///
/// `C` is taken directly from the `(eta, n_bar)` tail formula, so for a
/// thermal auxiliary mode this route does not go through the
/// vacuum-equivalent mapping.
pub fn moment_via_generating(
    k: u32,
    s: Squeezing,
    w: &AcceptanceWindow,
    d: DetectorModel,
    ordering: Ordering,
) -> Result<f64> {
    let x0 = w.x0()?;
    check(k <= 2, "k", k as f64, "only k = 0, 1, 2 are supported")?;
    let l = s.lambda();
    if k == 0 {
        return Ok(1.0);
    }
    if l == 0.0 {
        return Ok(0.0);
    }
    let h = GENERATING_STEP;
    if l - h < 0.0 || l + h >= 1.0 {
        return Err(Error::StencilOutOfRange {
            lambda: l,
            reach: h,
        });
    }
    let g = |lam: f64| generating_c(lam, x0, d) / (1.0 - lam);
    let g0 = g(l);
    let d1 = |h: f64| (g(l + h) - g(l - h)) / (2.0 * h);
    let d2 = |h: f64| (g(l + h) - 2.0 * g0 + g(l - h)) / (h * h);
    let first = (4.0 * d1(h / 2.0) - d1(h)) / 3.0;
    if k == 1 {
        return Ok(l * first / g0);
    }
    let second = (4.0 * d2(h / 2.0) - d2(h)) / 3.0;
    Ok(match ordering {
        Ordering::Normal => l * l * second / g0,
        Ordering::Raw => (l * first + l * l * second) / g0,
    })
}

/// Truncated photon-number distribution of the heralded signal with its
/// moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalStatistics {
    pub lambda: f64,
    pub x0: f64,
    pub eta: f64,
    pub n_bar: f64,
    /// `p_0 .. p_{N_max}`
    pub p: Vec<f64>,
    /// `q_0 .. q_{N_max}`
    pub q: Vec<f64>,
    pub acceptance_probability: f64,
    pub mean_n: f64,
    pub second_factorial: f64,
    /// `None` for a vacuum signal.
    pub mandel_q: Option<f64>,
    /// Upper bound `lambda^{N_max+1} / C` on the probability mass beyond `N_max`.
    pub truncation_error_bound: f64,
}

impl ConditionalStatistics {
    pub fn n_max(&self) -> usize {
        self.p.len() - 1
    }

    pub fn total_probability(&self) -> f64 {
        self.p.iter().sum()
    }

    /// `sum n p_n` over the truncated distribution.
    pub fn distribution_mean(&self) -> f64 {
        self.p.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    /// `sum n (n-1) p_n` over the truncated distribution.
    pub fn distribution_second_factorial(&self) -> f64 {
        self.p
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * (n as f64 - 1.0) * p)
            .sum()
    }

    pub fn distribution_mandel_q(&self) -> Option<f64> {
        Moments {
            mean: self.distribution_mean(),
            second_factorial: self.distribution_second_factorial(),
        }
        .mandel_q()
    }

    /// Index of the most probable photon number.
    pub fn mode(&self) -> usize {
        self.p
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (n, &p)| {
                if p > best.1 {
                    (n, p)
                } else {
                    best
                }
            })
            .0
    }
}

/// Builds the truncated distribution with the default photon-number cap.
pub fn photon_distribution(
    s: Squeezing,
    w: &AcceptanceWindow,
    d: DetectorModel,
    tol: f64,
) -> Result<ConditionalStatistics> {
    photon_distribution_capped(s, w, d, tol, DEFAULT_N_CAP)
}

/// `N_max` is the least `n` with `lambda^{n+1} / C <= tol`. The bound holds
/// because every `q_n <= 1`.
pub fn photon_distribution_capped(
    s: Squeezing,
    w: &AcceptanceWindow,
    d: DetectorModel,
    tol: f64,
    n_cap: usize,
) -> Result<ConditionalStatistics> {
    check(
        tol > 0.0 && tol <= 1e-3,
        "tol",
        tol,
        "must lie in (0, 1e-3]",
    )?;
    let x0 = w.x0()?;
    let l = s.lambda();
    let c = acceptance_probability_imperfect(s, w, d)?;
    if c.is_nan() || c <= 0.0 {
        return Err(Error::NonConvergence {
            what: "photon_distribution",
            detail: format!("acceptance probability underflows at x0 = {x0}"),
        });
    }
    let n_max = if l == 0.0 {
        0
    } else {
        let needed = ((tol * c).ln() / l.ln()).ceil() - 1.0;
        if needed > n_cap as f64 {
            return Err(Error::NonConvergence {
                what: "photon_distribution",
                detail: format!("needs N_max = {needed} > cap {n_cap} (lambda = {l}, C = {c:e})"),
            });
        }
        let mut n = needed.max(0.0) as usize;
        while n < n_cap && l.powi(n as i32 + 1) / c > tol {
            n += 1;
        }
        n
    };
    let q = qn_imperfect(n_max, x0, d)?;
    let ln_l = l.ln();
    let p: Vec<f64> = q
        .iter()
        .enumerate()
        .map(|(n, &qn)| {
            let weight = if n == 0 { 1.0 } else { (n as f64 * ln_l).exp() };
            (1.0 - l) * weight * qn / c
        })
        .collect();
    let (mean_n, second_factorial, mandel) = if l == 0.0 {
        (0.0, 0.0, None)
    } else {
        let m = moments(s, w, d)?;
        (m.mean, m.second_factorial, m.mandel_q())
    };
    Ok(ConditionalStatistics {
        lambda: l,
        x0,
        eta: d.eta(),
        n_bar: d.n_bar(),
        p,
        q,
        acceptance_probability: c,
        mean_n,
        second_factorial,
        mandel_q: mandel,
        truncation_error_bound: if l == 0.0 {
            0.0
        } else {
            l.powi(n_max as i32 + 1) / c
        },
    })
}
