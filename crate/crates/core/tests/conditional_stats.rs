use herald_core::stats::{
    acceptance_probability, acceptance_probability_imperfect, mandel_q, mean_photon,
    moment_via_generating, moments, photon_distribution, qn_ideal, qn_imperfect, Ordering,
};
use herald_core::{AcceptanceWindow, DetectorModel, Squeezing};
use proptest::prelude::*;

fn sq(l: f64) -> Squeezing {
    Squeezing::new(l).unwrap()
}
fn win(x0: f64) -> AcceptanceWindow {
    AcceptanceWindow::threshold(x0).unwrap()
}

#[test]
fn series_identity_reproduces_closed_form_c() {
    for &l in &[0.1f64, 0.25, 0.5, 0.8] {
        for &x0 in &[0.0, 0.5, 1.0, 2.0] {
            let n = 400;
            let q = qn_ideal(n, x0).unwrap();
            let series: f64 = (1.0 - l)
                * q.iter()
                    .enumerate()
                    .map(|(k, q)| l.powi(k as i32) * q)
                    .sum::<f64>();
            let c = acceptance_probability(sq(l), &win(x0)).unwrap();
            let bound = l.powi(n as i32 + 1) + 1e-13;
            assert!(
                (series - c).abs() <= bound,
                "lambda {l} x0 {x0}: {series} vs {c}"
            );
        }
    }
}

#[test]
fn moments_match_distribution_sums() {
    for &l in &[0.05, 0.2, 0.35, 0.5, 0.7] {
        for &x0 in &[0.0, 0.5, 1.0, 2.0, 3.0] {
            for &eta in &[1.0, 0.8, 0.6] {
                let d = DetectorModel::with_efficiency(eta).unwrap();
                let st = photon_distribution(sq(l), &win(x0), d, 1e-12).unwrap();
                assert!((st.distribution_mean() - st.mean_n).abs() < 1e-6);
                assert!((st.distribution_second_factorial() - st.second_factorial).abs() < 1e-6);
                let q_dist = st.distribution_mandel_q().unwrap();
                assert!((q_dist - st.mandel_q.unwrap()).abs() < 1e-6);
                let total = st.total_probability();
                assert!(total <= 1.0 + 1e-12 && total >= 1.0 - st.truncation_error_bound - 1e-12);
            }
        }
    }
}

#[test]
fn thermal_reduction_matches_direct_generating_function() {
    let mut k = 0;
    for &eta in &[0.55, 0.7, 0.85, 0.95] {
        for &n_bar in &[0.1, 0.5, 1.0, 2.5, 4.0] {
            k += 1;
            let l = 0.05 + 0.04 * k as f64;
            let x0 = 0.3 + 0.12 * k as f64;
            let d = DetectorModel::new(eta, n_bar).unwrap();
            let (reduced, scale) = d.vacuum_equivalent();
            let c_direct = acceptance_probability_imperfect(sq(l), &win(x0), d).unwrap();
            let c_reduced =
                acceptance_probability_imperfect(sq(l), &win(x0 * scale), reduced).unwrap();
            assert!((c_direct - c_reduced).abs() < 1e-14);
            // moments from the reduction vs finite differences of the direct C
            let m = moments(sq(l), &win(x0), d).unwrap();
            let fd1 = moment_via_generating(1, sq(l), &win(x0), d, Ordering::Raw).unwrap();
            let fd2 = moment_via_generating(2, sq(l), &win(x0), d, Ordering::Normal).unwrap();
            assert!((m.mean - fd1).abs() < 1e-6, "mean {} vs {fd1}", m.mean);
            assert!((m.second_factorial - fd2).abs() < 1e-5 * (1.0 + fd2));
        }
    }
    assert_eq!(k, 20);
}

#[test]
fn thermal_reduction_is_consistent_with_eta_threshold() {
    for &n_bar in &[0.0, 0.5, 1.0, 3.0] {
        let th = (1.0 + 2.0 * n_bar) / (2.0 + 2.0 * n_bar);
        for (eta, above) in [(th + 0.01, true), (th - 0.01, false)] {
            let (reduced, _) = DetectorModel::new(eta, n_bar).unwrap().vacuum_equivalent();
            assert_eq!(reduced.eta() > 0.5, above);
        }
    }
}

#[test]
fn imperfect_ideal_paths_agree() {
    for &l in &[0.1, 0.4, 0.75] {
        for &x0 in &[0.0, 0.7, 2.2] {
            let d = DetectorModel::ideal();
            let a = photon_distribution(sq(l), &win(x0), d, 1e-12).unwrap();
            let qi = qn_ideal(a.n_max(), x0).unwrap();
            let qm = qn_imperfect(a.n_max(), x0, d).unwrap();
            for (x, y) in qi.iter().zip(&qm) {
                assert!((x - y).abs() < 1e-12);
            }
            let general = herald_core::stats::vacuum_aux_moments(l, x0, 1.0);
            assert!((general.mean - a.mean_n).abs() < 1e-12);
            assert!((general.second_factorial - a.second_factorial).abs() < 1e-12);
        }
    }
}

#[test]
fn mean_grows_and_q_falls_with_threshold() {
    for &l in &[0.05, 0.1, 0.2, 0.5] {
        for &eta in &[1.0, 0.8] {
            let d = DetectorModel::with_efficiency(eta).unwrap();
            let xs: Vec<f64> = (0..=400).map(|i| 4.0 * i as f64 / 400.0).collect();
            let means: Vec<f64> = xs
                .iter()
                .map(|&x| mean_photon(sq(l), &win(x), d).unwrap())
                .collect();
            let qs: Vec<f64> = xs
                .iter()
                .map(|&x| mandel_q(sq(l), &win(x), d).unwrap())
                .collect();
            assert!(means.windows(2).all(|w| w[1] > w[0]));
            assert!(qs.windows(2).all(|w| w[1] < w[0]));
        }
    }
}

proptest! {
    #[test]
    fn q_coefficients_are_probabilities(x0 in 0.0f64..6.0, eta in 0.05f64..=1.0, n_bar in 0.0f64..3.0) {
        let d = DetectorModel::new(eta, n_bar).unwrap();
        for q in qn_imperfect(120, x0, d).unwrap() {
            prop_assert!((0.0..=1.0).contains(&q));
        }
    }

    #[test]
    fn distribution_is_normalized_and_q_bounded(l in 0.01f64..0.9, x0 in 0.0f64..4.0, eta in 0.3f64..=1.0) {
        let d = DetectorModel::with_efficiency(eta).unwrap();
        let st = photon_distribution(sq(l), &win(x0), d, 1e-10).unwrap();
        prop_assert!(st.p.iter().all(|&p| p >= 0.0));
        prop_assert!((st.total_probability() - 1.0).abs() <= 1e-10 + 1e-12);
        prop_assert!(st.mandel_q.unwrap() >= -1.0);
    }

    #[test]
    fn r_and_lambda_agree(r in 0.0f64..3.0) {
        let s = Squeezing::from_r(r).unwrap();
        prop_assert!((s.lambda() - r.tanh().powi(2)).abs() < 1e-12);
    }
}
