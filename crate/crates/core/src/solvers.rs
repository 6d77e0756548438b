//! Threshold and optimum problems: the threshold `x0` that yields a target
//! Mandel Q, its weak-squeezing floor, the squeezing that maximizes the
//! heralding probability along a Q contour, and the efficiency threshold.

use serde::{Deserialize, Serialize};

use crate::error::{check, Error, Result};
use crate::par;
use crate::params::{AcceptanceWindow, DetectorModel, Squeezing};
use crate::special::{erfc, gaussian_tail_ratio, FRAC_1_SQRT_PI};
use crate::stats::{self, weak_squeezing_q_slope};

/// Outcome of a one-dimensional solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// `None` when infeasible.
    pub solution: Option<f64>,
    /// Objective or equation residual at `solution`.
    pub residual: Option<f64>,
    /// For maximizations, the maximum value (heralding probability).
    pub value: Option<f64>,
    pub iterations: usize,
    pub bracket: (f64, f64),
    pub feasible: bool,
    /// The solution sits on the edge of the admissible range; for
    /// maximizations the optimum is a supremum approached at that edge.
    pub boundary: bool,
}

impl SolveReport {
    fn infeasible(bracket: (f64, f64), iterations: usize) -> Self {
        Self {
            solution: None,
            residual: None,
            value: None,
            iterations,
            bracket,
            feasible: false,
            boundary: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Absolute tolerance on the root.
    pub x_tol: f64,
    /// Largest threshold tried before declaring a target unreachable.
    pub x0_cap: f64,
    /// Points in the coarse lambda scan of [`optimal_lambda`].
    pub scan_points: usize,
    pub lambda_range: (f64, f64),
    /// Absolute tolerance on the optimal lambda.
    pub lambda_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            x_tol: 1e-13,
            x0_cap: 64.0,
            scan_points: 50,
            lambda_range: (1e-3, 0.95),
            lambda_tol: 1e-8,
        }
    }
}

/// Brent's method on a sign-changing bracket. Returns `(root, iterations)`.
pub fn brent_root<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    x_tol: f64,
    max_iter: usize,
) -> Result<(f64, usize)> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok((a, 0));
    }
    if fb == 0.0 {
        return Ok((b, 0));
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::NonConvergence {
            what: "brent_root",
            detail: format!("no sign change on [{lo}, {hi}]: f = {fa}, {fb}"),
        });
    }
    let (mut c, mut fc) = (a, fa);
    let (mut d, mut e) = (b - a, b - a);
    for iter in 1..=max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * x_tol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok((b, iter));
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Err(Error::NonConvergence {
        what: "brent_root",
        detail: format!("{max_iter} iterations without meeting x_tol = {x_tol}"),
    })
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
/// Returns `(argmax, max, iterations)`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> (f64, f64, usize) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (a, b);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut iters = 0;
    while (b - a).abs() > tol && iters < 200 {
        iters += 1;
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc, iters)
    } else {
        (d, fd, iters)
    }
}

fn q_at(s: Squeezing, x0: f64, d: DetectorModel) -> f64 {
    let w = AcceptanceWindow::threshold(x0).expect("x0 >= 0 by construction");
    stats::mandel_q(s, &w, d).expect("lambda > 0 checked by caller")
}

/// Threshold `x0` at which the heralded state reaches Mandel `q_target`.
///
/// Q decreases with `x0`, so the root is bracketed on `[0, x_hi]` with
/// `x_hi` doubled from 4 up to `opts.x0_cap`. If Q already lies at or below
/// the target at `x0 = 0` the report carries `x0 = 0` with the boundary
/// flag set.
pub fn solve_x0_for_q(
    s: Squeezing,
    q_target: f64,
    d: DetectorModel,
    opts: &SolverOptions,
) -> Result<SolveReport> {
    if s.lambda() == 0.0 {
        return Err(Error::UndefinedQ);
    }
    check(
        q_target >= -1.0 && q_target.is_finite(),
        "q_target",
        q_target,
        "must be finite and >= -1",
    )?;
    let f = |x0: f64| q_at(s, x0, d) - q_target;
    let f0 = f(0.0);
    if f0 <= 0.0 {
        return Ok(SolveReport {
            solution: Some(0.0),
            residual: Some(f0),
            value: None,
            iterations: 0,
            bracket: (0.0, 0.0),
            feasible: true,
            boundary: f0 != 0.0,
        });
    }
    let mut hi = 4.0;
    let mut probes = 1;
    while f(hi) > 0.0 {
        if hi >= opts.x0_cap {
            return Ok(SolveReport::infeasible((0.0, hi), probes));
        }
        hi = (2.0 * hi).min(opts.x0_cap);
        probes += 1;
    }
    let (root, iters) = brent_root(f, 0.0, hi, opts.x_tol, 200)?;
    Ok(SolveReport {
        solution: Some(root),
        residual: Some(f(root)),
        value: None,
        iterations: iters + probes,
        bracket: (0.0, hi),
        feasible: true,
        boundary: false,
    })
}

/// Residual of the weak-squeezing Poissonian condition
/// `(1 + g)^2 - 2 - g (1 + 2 x0^2)` with `g = 2 x0 e^{-x0^2} / (sqrt(pi) erfc(x0))`.
pub fn x0_min_residual(x0: f64) -> f64 {
    let g = 2.0 * x0 * gaussian_tail_ratio(x0) * FRAC_1_SQRT_PI;
    (1.0 + g).powi(2) - 2.0 - g * (1.0 + 2.0 * x0 * x0)
}

/// Smallest threshold that can bring the heralded state to Poissonian
/// statistics in the weak-squeezing limit, about 0.4248.
pub fn x0_min() -> Result<SolveReport> {
    let (lo, hi) = (0.0, 2.0);
    let scan: Vec<f64> = (0..=400)
        .map(|i| x0_min_residual(lo + (hi - lo) * i as f64 / 400.0))
        .collect();
    let changes = scan
        .windows(2)
        .filter(|w| w[0].signum() != w[1].signum())
        .count();
    if changes != 1 {
        return Err(Error::NonConvergence {
            what: "x0_min",
            detail: format!("expected one sign change on [0, 2], found {changes}"),
        });
    }
    let (root, iters) = brent_root(x0_min_residual, lo, hi, 1e-15, 200)?;
    Ok(SolveReport {
        solution: Some(root),
        residual: Some(x0_min_residual(root)),
        value: Some(erfc(root)),
        iterations: iters,
        bracket: (lo, hi),
        feasible: true,
        boundary: false,
    })
}

/// Weak-squeezing floor of the Poissonian threshold for any detector: the
/// root of `lim Q/lambda`. Infeasible when the limit slope never turns
/// negative below `opts.x0_cap`.
pub fn weak_squeezing_threshold(d: DetectorModel, opts: &SolverOptions) -> Result<SolveReport> {
    let f = |x0: f64| weak_squeezing_q_slope(x0, d);
    let mut hi = 2.0;
    while f(hi) > 0.0 {
        if hi >= opts.x0_cap {
            return Ok(SolveReport::infeasible((0.0, hi), 0));
        }
        hi = (2.0 * hi).min(opts.x0_cap);
    }
    let (root, iters) = brent_root(f, 0.0, hi, opts.x_tol, 200)?;
    let (_, scale) = d.vacuum_equivalent();
    Ok(SolveReport {
        solution: Some(root),
        residual: Some(f(root)),
        value: Some(erfc(root * scale)),
        iterations: iters,
        bracket: (0.0, hi),
        feasible: true,
        boundary: false,
    })
}

/// Heralding probability along the `q_target` contour, or `None` where the
/// target cannot be reached.
pub fn contour_probability(
    lambda: f64,
    q_target: f64,
    d: DetectorModel,
    opts: &SolverOptions,
) -> Option<(f64, f64)> {
    let s = Squeezing::new(lambda).ok()?;
    let rep = solve_x0_for_q(s, q_target, d, opts).ok()?;
    let x0 = rep.solution?;
    let w = AcceptanceWindow::threshold(x0).ok()?;
    let c = stats::acceptance_probability_imperfect(s, &w, d).ok()?;
    Some((x0, c))
}

/// `lambda` grid used by the coarse scan.
pub fn scan_grid(opts: &SolverOptions) -> Vec<f64> {
    let (lo, hi) = opts.lambda_range;
    let n = opts.scan_points.max(3);
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Squeezing that maximizes the heralding probability of states with Mandel
/// `q_target`.
///
/// A coarse scan over `opts.lambda_range` locates every local maximum of
/// the contour probability; each is refined by golden-section search and
/// the best one is reported. A maximum on the first or last scan point is
/// reported as a boundary supremum; for `q_target = 0` at small lambda its
/// value is the weak-squeezing limit.
pub fn optimal_lambda(
    q_target: f64,
    d: DetectorModel,
    opts: &SolverOptions,
) -> Result<SolveReport> {
    check(
        q_target >= -1.0 && q_target.is_finite(),
        "q_target",
        q_target,
        "must be finite and >= -1",
    )?;
    let grid = scan_grid(opts);
    let probs: Vec<Option<f64>> = par::map(&grid, |&l| {
        contour_probability(l, q_target, d, opts).map(|p| p.1)
    });
    let objective =
        |l: f64| contour_probability(l, q_target, d, opts).map_or(f64::NEG_INFINITY, |p| p.1);
    let vals: Vec<f64> = probs
        .iter()
        .map(|p| p.unwrap_or(f64::NEG_INFINITY))
        .collect();
    let bracket = (grid[0], grid[grid.len() - 1]);
    if vals.iter().all(|v| *v == f64::NEG_INFINITY) {
        return Ok(SolveReport::infeasible(bracket, grid.len()));
    }
    let last = grid.len() - 1;
    let peaks: Vec<usize> = (0..=last)
        .filter(|&i| {
            vals[i] > f64::NEG_INFINITY
                && (i == 0 || vals[i] >= vals[i - 1])
                && (i == last || vals[i] > vals[i + 1])
        })
        .collect();
    let mut best: Option<SolveReport> = None;
    for &i in &peaks {
        let report = if i == 0 || i == last {
            let edge = grid[i];
            let (solution, value) = if i == 0 && q_target == 0.0 {
                let lim = weak_squeezing_threshold(d, opts)?;
                (0.0, lim.value.unwrap_or(vals[i]))
            } else {
                (edge, vals[i])
            };
            SolveReport {
                solution: Some(solution),
                residual: Some(0.0),
                value: Some(value),
                iterations: grid.len(),
                bracket,
                feasible: true,
                boundary: true,
            }
        } else {
            let (l, c, iters) =
                golden_section_max(objective, grid[i - 1], grid[i + 1], opts.lambda_tol);
            let x0 = contour_probability(l, q_target, d, opts).map(|p| p.0);
            let residual = x0.map(|x0| {
                let s = Squeezing::new(l).expect("inside scan range");
                q_at(s, x0, d) - q_target
            });
            SolveReport {
                solution: Some(l),
                residual,
                value: Some(c),
                iterations: grid.len() + iters,
                bracket: (grid[i - 1], grid[i + 1]),
                feasible: true,
                boundary: false,
            }
        };
        if best.as_ref().is_none_or(|b| report.value > b.value) {
            best = Some(report);
        }
    }
    Ok(best.expect("at least one feasible scan point yields a peak"))
}

/// Minimum homodyne efficiency `(1 + 2 n_bar) / (2 + 2 n_bar)` for heralding
/// sub-Poissonian light.
pub fn eta_threshold(n_bar: f64) -> Result<f64> {
    check(
        n_bar >= 0.0 && n_bar.is_finite(),
        "n_bar",
        n_bar,
        "must be finite and >= 0",
    )?;
    Ok((1.0 + 2.0 * n_bar) / (2.0 + 2.0 * n_bar))
}
