use std::f64::consts::{PI, SQRT_2};

use super::quad::{integrate, QuadOptions};
use crate::error::Result;
use crate::params::{AcceptanceWindow, DetectorModel, Interval};
use crate::special::{erfc, fock_quadrature_pdf};

// beyond this the Fock densities for the photon numbers in use carry no mass
fn support_radius(n: usize, w: &AcceptanceWindow) -> f64 {
    let edge = w
        .as_intervals()
        .iter()
        .flat_map(|i| [i.lo, i.hi])
        .filter(|v| v.is_finite())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    20f64
        .max(edge + 15.0)
        .max((2.0 * n as f64 + 1.0).sqrt() + 15.0)
}

fn opts() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-13,
        max_panels: 20_000,
    }
}

/// Probability that the idler quadrature of `|n>` is detected inside `w`.
///
/// Ideal detector: `integral_w psi_n(x)^2 dx`. Otherwise the detected
/// quadrature is `sqrt(eta) x' + sqrt(1-eta) x_aux` with `x_aux` Gaussian of
/// variance `(1 + 2 n_bar)/2`; the Gaussian smearing over the window is
/// done in closed form and the remaining integral over `x'` numerically.
pub fn qn_quadrature(n: usize, w: &AcceptanceWindow, d: DetectorModel) -> Result<f64> {
    let radius = support_radius(n, w);
    let pdf = |x: f64| fock_quadrature_pdf(n, x);
    if d.eta() == 1.0 {
        let mut total = 0.0;
        for Interval { lo, hi } in w.as_intervals() {
            let (lo, hi) = (lo.max(-radius), hi.min(radius));
            if lo < hi {
                total += integrate(pdf, lo, hi, opts())?.value;
            }
        }
        return Ok(total);
    }
    let mean_scale = d.eta().sqrt();
    let sigma = ((1.0 - d.eta()) * d.auxiliary_variance()).sqrt();
    let intervals = w.as_intervals();
    let window_prob = |x: f64| -> f64 {
        let mu = mean_scale * x;
        intervals
            .iter()
            .map(|i| {
                0.5 * (erfc((i.lo - mu) / (SQRT_2 * sigma)) - erfc((i.hi - mu) / (SQRT_2 * sigma)))
            })
            .sum()
    };
    // split at the origin and at the turning points so panels start aligned
    // with the oscillation envelope
    let turn = (2.0 * n as f64 + 1.0).sqrt();
    let knots = [-radius, -turn, 0.0, turn, radius];
    let mut total = 0.0;
    for pair in knots.windows(2) {
        total += integrate(|x| pdf(x) * window_prob(x), pair[0], pair[1], opts())?.value;
    }
    Ok(total)
}

/// Density of the detected quadrature for `|n>`:
/// `integral psi_n(x')^2 N(x; sqrt(eta) x', (1-eta)(1+2 n_bar)/2) dx'`.
pub fn smeared_quadrature_pdf(n: usize, x: f64, d: DetectorModel) -> Result<f64> {
    if d.eta() == 1.0 {
        return Ok(fock_quadrature_pdf(n, x));
    }
    let var = (1.0 - d.eta()) * d.auxiliary_variance();
    let s = d.eta().sqrt();
    let norm = 1.0 / (2.0 * PI * var).sqrt();
    let radius = 20f64.max((2.0 * n as f64 + 1.0).sqrt() + 15.0);
    let f = |xp: f64| {
        let dx = x - s * xp;
        fock_quadrature_pdf(n, xp) * norm * (-dx * dx / (2.0 * var)).exp()
    };
    Ok(integrate(f, -radius, radius, opts())?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::FRAC_1_SQRT_PI;

    #[test]
    fn full_line_is_normalized() {
        let full =
            AcceptanceWindow::intervals(vec![
                Interval::new(f64::NEG_INFINITY, f64::INFINITY).unwrap()
            ])
            .unwrap();
        let q = qn_quadrature(3, &full, DetectorModel::ideal()).unwrap();
        assert!((q - 1.0).abs() < 1e-12);
        let q = qn_quadrature(3, &full, DetectorModel::new(0.7, 0.3).unwrap()).unwrap();
        assert!((q - 1.0).abs() < 1e-10);
    }

    #[test]
    fn q1_threshold() {
        let w = AcceptanceWindow::threshold(1.0).unwrap();
        let q = qn_quadrature(1, &w, DetectorModel::ideal()).unwrap();
        let expected = erfc(1.0) + 2.0 * FRAC_1_SQRT_PI * (-1.0f64).exp();
        assert!((q - expected).abs() < 1e-12);
    }

    #[test]
    fn smeared_pdf_integrates_to_one() {
        let d = DetectorModel::new(0.6, 0.0).unwrap();
        let total = integrate(
            |x| smeared_quadrature_pdf(2, x, d).unwrap(),
            -20.0,
            20.0,
            QuadOptions {
                abs_tol: 1e-10,
                max_panels: 2000,
            },
        )
        .unwrap();
        assert!((total.value - 1.0).abs() < 1e-9);
    }
}
