//! Data behind the standard plots: moments versus threshold, heralding
//! probability along Q contours, conditioned distributions and radial
//! Husimi/Wigner profiles.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::params::{AcceptanceWindow, DetectorModel, Squeezing};
use crate::phase_space::{husimi_profile, wigner_profile, RadialGrid};
use crate::report::{Cell, Table};
use crate::solvers::{contour_probability, SolverOptions};
use crate::stats::{self, DEFAULT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureId {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

impl FigureId {
    pub const ALL: [FigureId; 5] = [
        FigureId::Fig2,
        FigureId::Fig3,
        FigureId::Fig4,
        FigureId::Fig5,
        FigureId::Fig6,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::Fig6 => "fig6",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        FigureId::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| {
                format!("unknown figure `{s}` (expected one of fig2, fig3, fig4, fig5, fig6)")
            })
    }
}

/// Optional replacements for a figure's default parameter lists.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FigureOverrides {
    pub lambda: Option<Vec<f64>>,
    pub x0: Option<Vec<f64>>,
    pub eta: Option<Vec<f64>>,
    pub q: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureJob {
    pub figure: FigureId,
    #[serde(default)]
    pub overrides: FigureOverrides,
}

impl FigureJob {
    pub fn new(figure: FigureId) -> Self {
        Self {
            figure,
            overrides: FigureOverrides::default(),
        }
    }
}

pub const FIG2_LAMBDAS: [f64; 3] = [0.05, 0.1, 0.2];
pub const FIG3_Q: [f64; 4] = [0.0, -0.05, -0.1, -0.2];
pub const FIG4_LAMBDA: f64 = 0.25;
pub const FIG4_X0: [f64; 4] = [0.0, 1.0, 2.0, 3.0];
pub const FIG5_X0: [f64; 2] = [0.0, 2.0];
pub const FIG6_ETA: [f64; 4] = [0.9, 0.8, 0.7, 0.6];
pub const FIG6_Q: [f64; 2] = [0.0, -0.05];

/// 201 evenly spaced thresholds on `[0, 4]`.
pub fn fig2_thresholds() -> Vec<f64> {
    (0..=200).map(|i| 4.0 * i as f64 / 200.0).collect()
}

/// 200 values of lambda on `[0.001, 0.95]` with `1 - lambda` log-spaced.
pub fn contour_lambda_axis() -> Vec<f64> {
    let (a, b) = ((1.0f64 - 0.001).ln(), (1.0f64 - 0.95).ln());
    (0..200)
        .map(|i| {
            if i == 199 {
                return 0.95;
            }
            1.0 - (a + (b - a) * i as f64 / 199.0).exp()
        })
        .collect()
}

fn header(t: &mut Table, id: FigureId, about: &str, columns: &[(&str, &str)]) {
    t.meta("generator", format!("herald {}", crate::VERSION))
        .meta("figure", id)
        .meta("about", about);
    for (c, doc) in columns {
        t.meta(format!("column.{c}"), doc);
    }
}

fn list(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

/// Builds the table for one figure.
pub fn run_figure(job: &FigureJob) -> Result<Table> {
    let o = &job.overrides;
    match job.figure {
        FigureId::Fig2 => fig2(o),
        FigureId::Fig3 => contour_figure(FigureId::Fig3, o, &[1.0], &FIG3_Q),
        FigureId::Fig4 => fig4(o),
        FigureId::Fig5 => fig5(o),
        FigureId::Fig6 => contour_figure(FigureId::Fig6, o, &FIG6_ETA, &FIG6_Q),
    }
}

fn fig2(o: &FigureOverrides) -> Result<Table> {
    let lambdas = o.lambda.clone().unwrap_or(FIG2_LAMBDAS.to_vec());
    let xs = o.x0.clone().unwrap_or_else(fig2_thresholds);
    let etas = o.eta.clone().unwrap_or(vec![1.0]);
    let cols = [
        ("lambda", "squeezing lambda = tanh^2 r"),
        ("eta", "homodyne efficiency"),
        ("x0", "acceptance threshold |x| > x0"),
        ("C", "heralding probability"),
        ("mean", "mean photon number of the heralded signal"),
        ("Q", "Mandel Q-factor of the heralded signal"),
    ];
    let mut t = Table::new(cols.map(|c| c.0));
    header(
        &mut t,
        FigureId::Fig2,
        "mean photon number and Mandel Q versus threshold",
        &cols,
    );
    t.meta("lambda", list(&lambdas)).meta("eta", list(&etas));
    let mut points = Vec::new();
    for &l in &lambdas {
        for &e in &etas {
            for &x in &xs {
                points.push((
                    Squeezing::new(l)?,
                    DetectorModel::with_efficiency(e)?,
                    AcceptanceWindow::threshold(x)?,
                ));
            }
        }
    }
    let rows = par::map(&points, |(s, d, w)| -> Result<Vec<Cell>> {
        let m = stats::moments(*s, w, *d)?;
        Ok(vec![
            s.lambda().into(),
            d.eta().into(),
            w.x0()?.into(),
            stats::acceptance_probability_imperfect(*s, w, *d)?.into(),
            m.mean.into(),
            Cell::opt(m.mandel_q()),
        ])
    });
    for r in rows {
        t.push(r?);
    }
    Ok(t)
}

fn contour_figure(
    id: FigureId,
    o: &FigureOverrides,
    default_eta: &[f64],
    default_q: &[f64],
) -> Result<Table> {
    let etas = o.eta.clone().unwrap_or(default_eta.to_vec());
    let qs = o.q.clone().unwrap_or(default_q.to_vec());
    let lambdas = o.lambda.clone().unwrap_or_else(contour_lambda_axis);
    let cols = [
        ("eta", "homodyne efficiency"),
        ("q_target", "target Mandel Q"),
        ("lambda", "squeezing lambda = tanh^2 r"),
        ("x0", "threshold reaching q_target (empty when unreachable)"),
        (
            "C",
            "heralding probability at that threshold (empty when unreachable)",
        ),
        ("feasible", "whether q_target is reachable at this lambda"),
    ];
    let mut t = Table::new(cols.map(|c| c.0));
    header(
        &mut t,
        id,
        "heralding probability and threshold along Mandel Q contours versus lambda",
        &cols,
    );
    t.meta("eta", list(&etas)).meta("q_target", list(&qs));
    let mut points = Vec::new();
    for &e in &etas {
        let d = DetectorModel::with_efficiency(e)?;
        for &q in &qs {
            for &l in &lambdas {
                Squeezing::new(l)?;
                points.push((d, q, l));
            }
        }
    }
    let opts = SolverOptions::default();
    let rows = par::map(&points, |&(d, q, l)| {
        let hit = contour_probability(l, q, d, &opts);
        vec![
            d.eta().into(),
            q.into(),
            l.into(),
            Cell::opt(hit.map(|h| h.0)),
            Cell::opt(hit.map(|h| h.1)),
            Cell::Bool(hit.is_some()),
        ]
    });
    for r in rows {
        t.push(r);
    }
    Ok(t)
}

fn fig4(o: &FigureOverrides) -> Result<Table> {
    let l = o
        .lambda
        .as_ref()
        .and_then(|v| v.first().copied())
        .unwrap_or(FIG4_LAMBDA);
    let xs = o.x0.clone().unwrap_or(FIG4_X0.to_vec());
    let s = Squeezing::new(l)?;
    let d = DetectorModel::with_efficiency(
        o.eta
            .as_ref()
            .and_then(|v| v.first().copied())
            .unwrap_or(1.0),
    )?;
    let cols = [
        ("x0", "acceptance threshold |x| > x0"),
        ("n", "signal photon number"),
        ("p_n", "probability of n photons in the heralded signal"),
        ("Q", "Mandel Q-factor of this distribution"),
    ];
    let mut t = Table::new(cols.map(|c| c.0));
    header(
        &mut t,
        FigureId::Fig4,
        "photon-number distribution of the heralded signal",
        &cols,
    );
    t.meta("lambda", l)
        .meta("eta", d.eta())
        .meta("tol", DEFAULT_TOL);
    for &x in &xs {
        let st = stats::photon_distribution(s, &AcceptanceWindow::threshold(x)?, d, DEFAULT_TOL)?;
        for (n, p) in st.p.iter().enumerate() {
            t.push(vec![
                x.into(),
                n.into(),
                (*p).into(),
                Cell::opt(st.mandel_q),
            ]);
        }
    }
    Ok(t)
}

fn fig5(o: &FigureOverrides) -> Result<Table> {
    let l = o
        .lambda
        .as_ref()
        .and_then(|v| v.first().copied())
        .unwrap_or(FIG4_LAMBDA);
    let xs = o.x0.clone().unwrap_or(FIG5_X0.to_vec());
    let s = Squeezing::new(l)?;
    let d = DetectorModel::with_efficiency(
        o.eta
            .as_ref()
            .and_then(|v| v.first().copied())
            .unwrap_or(1.0),
    )?;
    let cols = [
        ("x0", "acceptance threshold |x| > x0"),
        ("r", "phase-space radius |alpha|"),
        ("husimi", "Husimi function (1/pi)<alpha|rho|alpha>"),
        ("wigner", "Wigner function at the same radius"),
    ];
    let mut t = Table::new(cols.map(|c| c.0));
    header(
        &mut t,
        FigureId::Fig5,
        "radial Husimi and Wigner profiles of the heralded signal",
        &cols,
    );
    t.meta("lambda", l).meta("eta", d.eta());
    let radii = RadialGrid::radii(4.0, 201);
    for &x in &xs {
        let st = stats::photon_distribution(s, &AcceptanceWindow::threshold(x)?, d, DEFAULT_TOL)?;
        let h = husimi_profile(&st.p, &radii)?;
        let w = wigner_profile(&st.p, &radii)?;
        for ((r, hv), wv) in radii.iter().zip(&h.values).zip(&w.values) {
            t.push(vec![x.into(), (*r).into(), (*hv).into(), (*wv).into()]);
        }
    }
    Ok(t)
}

/// Checks that a table carries the documented columns of its figure.
pub fn validate_figure_table(id: FigureId, t: &Table) -> Result<()> {
    let expected: &[&str] = match id {
        FigureId::Fig2 => &["lambda", "eta", "x0", "C", "mean", "Q"],
        FigureId::Fig3 | FigureId::Fig6 => &["eta", "q_target", "lambda", "x0", "C", "feasible"],
        FigureId::Fig4 => &["x0", "n", "p_n", "Q"],
        FigureId::Fig5 => &["x0", "r", "husimi", "wigner"],
    };
    let documented = expected
        .iter()
        .all(|c| t.metadata.iter().any(|(k, _)| k == &format!("column.{c}")));
    if t.columns != expected || !documented || t.rows.iter().any(|r| r.len() != expected.len()) {
        return Err(Error::InvalidParameter {
            name: "figure table",
            value: t.columns.len() as f64,
            reason: "columns do not match the figure schema",
        });
    }
    Ok(())
}
