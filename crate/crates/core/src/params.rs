//! Source, window and detector parameters.

use serde::{Deserialize, Serialize};

use crate::error::{check, Error, Result};

/// Squeezing of the two-mode squeezed vacuum, `lambda = tanh^2 r`.
///
/// A parametric gain `cosh^2 r = 10` corresponds to `lambda = 0.9`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Squeezing {
    lambda: f64,
    r: Option<f64>,
}

impl Squeezing {
    pub fn new(lambda: f64) -> Result<Self> {
        check(
            (0.0..1.0).contains(&lambda),
            "lambda",
            lambda,
            "must lie in [0, 1)",
        )?;
        Ok(Self { lambda, r: None })
    }

    /// From the squeezing constant `r >= 0`.
    pub fn from_r(r: f64) -> Result<Self> {
        check(r >= 0.0 && r.is_finite(), "r", r, "must be finite and >= 0")?;
        let t = r.tanh();
        let lambda = t * t;
        check(lambda < 1.0, "r", r, "too large: tanh^2 r rounds to 1")?;
        Ok(Self { lambda, r: Some(r) })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Squeezing constant; derived from lambda when not given explicitly.
    pub fn r(&self) -> f64 {
        self.r.unwrap_or_else(|| self.lambda.sqrt().atanh())
    }

    /// Mean photon number of either mode, `lambda / (1 - lambda)`.
    pub fn thermal_mean(&self) -> f64 {
        self.lambda / (1.0 - self.lambda)
    }
}

/// A closed-open-agnostic interval `(lo, hi)` of quadrature values; the
/// endpoints may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        check(!lo.is_nan(), "lo", lo, "must not be NaN")?;
        check(!hi.is_nan(), "hi", hi, "must not be NaN")?;
        check(lo < hi, "hi", hi, "interval must have lo < hi")?;
        Ok(Self { lo, hi })
    }
}

/// Quadrature acceptance region of the idler measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceWindow {
    x0: f64,
    intervals: Option<Vec<Interval>>,
}

impl AcceptanceWindow {
    /// Accept when `|x| > x0`.
    pub fn threshold(x0: f64) -> Result<Self> {
        check(
            x0 >= 0.0 && x0.is_finite(),
            "x0",
            x0,
            "must be finite and >= 0",
        )?;
        Ok(Self {
            x0,
            intervals: None,
        })
    }

    /// A general union of disjoint intervals. Only the oracles accept this
    /// form.
    pub fn intervals(mut intervals: Vec<Interval>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::InvalidParameter {
                name: "intervals",
                value: 0.0,
                reason: "at least one interval is required",
            });
        }
        intervals.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        for pair in intervals.windows(2) {
            check(
                pair[0].hi <= pair[1].lo,
                "intervals",
                pair[1].lo,
                "intervals must be disjoint",
            )?;
        }
        Ok(Self {
            x0: 0.0,
            intervals: Some(intervals),
        })
    }

    /// The threshold `x0`, or an error for a general interval union.
    pub fn x0(&self) -> Result<f64> {
        match self.intervals {
            None => Ok(self.x0),
            Some(_) => Err(Error::UnsupportedWindow),
        }
    }

    pub fn is_threshold(&self) -> bool {
        self.intervals.is_none()
    }

    /// The window as a sorted list of disjoint intervals.
    pub fn as_intervals(&self) -> Vec<Interval> {
        match &self.intervals {
            Some(v) => v.clone(),
            None => vec![
                Interval {
                    lo: f64::NEG_INFINITY,
                    hi: -self.x0,
                },
                Interval {
                    lo: self.x0,
                    hi: f64::INFINITY,
                },
            ],
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        match &self.intervals {
            None => x.abs() > self.x0,
            Some(v) => v.iter().any(|i| x > i.lo && x < i.hi),
        }
    }
}

/// Homodyne detector with efficiency `eta`, modelled as a beam splitter that
/// mixes the idler with an auxiliary thermal mode of mean occupation `n_bar`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    eta: f64,
    n_bar: f64,
}

impl DetectorModel {
    pub fn new(eta: f64, n_bar: f64) -> Result<Self> {
        check(eta > 0.0 && eta <= 1.0, "eta", eta, "must lie in (0, 1]")?;
        check(
            n_bar >= 0.0 && n_bar.is_finite(),
            "n_bar",
            n_bar,
            "must be finite and >= 0",
        )?;
        Ok(Self { eta, n_bar })
    }

    pub fn ideal() -> Self {
        Self {
            eta: 1.0,
            n_bar: 0.0,
        }
    }

    /// Vacuum auxiliary mode.
    pub fn with_efficiency(eta: f64) -> Result<Self> {
        Self::new(eta, 0.0)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn n_bar(&self) -> f64 {
        self.n_bar
    }

    pub fn is_ideal(&self) -> bool {
        self.eta == 1.0 && self.n_bar == 0.0
    }

    /// Variance of the detected idler quadrature,
    /// `[1 + 2 n_bar (1-eta) + lambda (2 eta (1+n_bar) - 1 - 2 n_bar)] / (2 (1-lambda))`.
    pub fn detected_variance(&self, s: Squeezing) -> f64 {
        self.detected_variance_raw(s.lambda())
    }

    pub(crate) fn detected_variance_raw(&self, l: f64) -> f64 {
        let nb = self.n_bar;
        (1.0 + 2.0 * nb * (1.0 - self.eta) + l * (2.0 * self.eta * (1.0 + nb) - 1.0 - 2.0 * nb))
            / (2.0 * (1.0 - l))
    }

    /// Variance `(1 + 2 n_bar) / 2` of the auxiliary-mode quadrature.
    pub fn auxiliary_variance(&self) -> f64 {
        0.5 + self.n_bar
    }

    /// Equivalent vacuum-auxiliary detector.
    ///
    /// With `s = 1 + 2 n_bar (1 - eta)`, detection with `(eta, n_bar)` and
    /// threshold `x0` has the same statistics as detection with
    /// `(eta / s, 0)` and threshold `x0 / sqrt(s)`. Returns the reduced
    /// detector and the threshold scale `1 / sqrt(s)`.
    pub fn vacuum_equivalent(&self) -> (DetectorModel, f64) {
        if self.n_bar == 0.0 {
            return (*self, 1.0);
        }
        let s = 1.0 + 2.0 * self.n_bar * (1.0 - self.eta);
        (
            DetectorModel {
                eta: self.eta / s,
                n_bar: 0.0,
            },
            1.0 / s.sqrt(),
        )
    }
}

impl Default for DetectorModel {
    fn default() -> Self {
        Self::ideal()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn squeezing_validation() {
        assert!(Squeezing::new(-0.1).is_err());
        assert!(Squeezing::new(1.0).is_err());
        assert!(Squeezing::new(0.0).is_ok());
        let s = Squeezing::from_r(0.7).unwrap();
        assert!((s.lambda() - 0.7f64.tanh().powi(2)).abs() < 1e-12);
        assert!((Squeezing::new(s.lambda()).unwrap().r() - 0.7).abs() < 1e-12);
        // cosh^2 r = 10
        let r = 10f64.sqrt().acosh();
        assert!((Squeezing::from_r(r).unwrap().lambda() - 0.9).abs() < 1e-12);
    }

    #[test]
    fn detector_validation() {
        assert!(DetectorModel::new(0.0, 0.0).is_err());
        assert!(DetectorModel::new(1.1, 0.0).is_err());
        assert!(DetectorModel::new(0.5, -1.0).is_err());
        let d = DetectorModel::ideal();
        assert_eq!((d.eta(), d.n_bar()), (1.0, 0.0));
    }

    #[test]
    fn ideal_variance_is_thermal() {
        let s = Squeezing::new(0.25).unwrap();
        let v = DetectorModel::ideal().detected_variance(s);
        assert!((v - 1.25 / 1.5).abs() < 1e-15);
    }

    #[test]
    fn vacuum_equivalent_preserves_variance_ratio() {
        let d = DetectorModel::new(0.8, 0.2).unwrap();
        let (r, scale) = d.vacuum_equivalent();
        for &l in &[0.1, 0.3, 0.7] {
            let s = Squeezing::new(l).unwrap();
            let lhs = d.detected_variance(s) * scale * scale;
            assert!((lhs - r.detected_variance(s)).abs() < 1e-14);
        }
    }

    #[test]
    fn windows() {
        let w = AcceptanceWindow::threshold(1.0).unwrap();
        assert!(w.contains(1.5) && w.contains(-1.5) && !w.contains(0.5));
        assert!(AcceptanceWindow::threshold(-1.0).is_err());
        let g = AcceptanceWindow::intervals(vec![
            Interval::new(2.0, f64::INFINITY).unwrap(),
            Interval::new(-1.0, 0.5).unwrap(),
        ])
        .unwrap();
        assert_eq!(g.x0(), Err(Error::UnsupportedWindow));
        assert_eq!(g.as_intervals()[0].lo, -1.0);
        assert!(AcceptanceWindow::intervals(vec![
            Interval::new(0.0, 2.0).unwrap(),
            Interval::new(1.0, 3.0).unwrap(),
        ])
        .is_err());
    }
}
