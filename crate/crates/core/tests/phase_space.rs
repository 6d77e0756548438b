use herald_core::oracles::quad::{integrate, QuadOptions};
use herald_core::phase_space::{husimi, husimi_profile, wigner, wigner_profile, RadialGrid};
use herald_core::stats::photon_distribution;
use herald_core::{AcceptanceWindow, DetectorModel, Squeezing};
use std::f64::consts::PI;

fn dist(l: f64, x0: f64, eta: f64) -> Vec<f64> {
    photon_distribution(
        Squeezing::new(l).unwrap(),
        &AcceptanceWindow::threshold(x0).unwrap(),
        DetectorModel::with_efficiency(eta).unwrap(),
        1e-13,
    )
    .unwrap()
    .p
}

#[test]
fn quasi_probabilities_are_normalized() {
    let opts = QuadOptions {
        abs_tol: 1e-10,
        max_panels: 4000,
    };
    for &(l, x0, eta) in &[
        (0.25, 0.0, 1.0),
        (0.25, 2.0, 1.0),
        (0.5, 1.0, 0.8),
        (0.1, 3.0, 0.6),
    ] {
        let p = dist(l, x0, eta);
        let q = integrate(
            |r| 2.0 * PI * r * husimi(&p, r).unwrap(),
            0.0,
            f64::INFINITY,
            opts,
        )
        .unwrap();
        let w = integrate(|r| 2.0 * PI * r * wigner(&p, r).unwrap(), 0.0, 40.0, opts).unwrap();
        assert!((q.value - 1.0).abs() < 1e-6, "husimi {}", q.value);
        assert!((w.value - 1.0).abs() < 1e-6, "wigner {}", w.value);
    }
}

#[test]
fn origin_values_follow_parity() {
    let p = dist(0.25, 2.0, 1.0);
    let parity: f64 = p
        .iter()
        .enumerate()
        .map(|(n, p)| if n % 2 == 0 { *p } else { -*p })
        .sum();
    assert!((wigner(&p, 0.0).unwrap() - parity / PI).abs() < 1e-14);
    assert!((husimi(&p, 0.0).unwrap() - p[0] / PI).abs() < 1e-14);
}

#[test]
fn wigner_stays_nonnegative() {
    let radii = RadialGrid::radii(6.0, 600);
    for &l in &[0.05, 0.25, 0.5, 0.8] {
        for &x0 in &[0.0, 1.0, 2.0, 3.0] {
            for &eta in &[1.0, 0.8] {
                let g = wigner_profile(&dist(l, x0, eta), &radii).unwrap();
                assert!(
                    g.min_value() >= -1e-9,
                    "lambda {l} x0 {x0} eta {eta}: {}",
                    g.min_value()
                );
            }
        }
    }
}

#[test]
fn husimi_moves_off_origin_for_high_threshold() {
    let radii = RadialGrid::radii(4.0, 401);
    let low = husimi_profile(&dist(0.25, 0.0, 1.0), &radii).unwrap();
    let high = husimi_profile(&dist(0.25, 2.0, 1.0), &radii).unwrap();
    assert_eq!(low.peak().0, 0.0);
    assert!(high.peak().0 > 0.5);
    assert!(high.values[0] < high.peak().1);
}
