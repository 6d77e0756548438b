//! Cartesian parameter sweeps and single-point reports.

use serde::{Deserialize, Serialize};

use crate::error::{check, Error, Result};
use crate::par;
use crate::params::{AcceptanceWindow, DetectorModel, Squeezing};
use crate::phase_space::{husimi, wigner};
use crate::report::{Cell, Table};
use crate::stats::{self, ConditionalStatistics, DEFAULT_TOL};

/// A grid axis: an explicit list or `count` evenly spaced points on
/// `[start, stop]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, count: usize },
}

impl Grid {
    pub fn single(v: f64) -> Self {
        Grid::List(vec![v])
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::List(v) => v.clone(),
            Grid::Range { start, stop, count } => match count {
                0 => vec![],
                1 => vec![*start],
                n => (0..*n)
                    .map(|i| start + (stop - start) * i as f64 / (*n - 1) as f64)
                    .collect(),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quantity {
    #[serde(rename = "C")]
    C,
    #[serde(rename = "mean")]
    Mean,
    #[serde(rename = "second_factorial")]
    SecondFactorial,
    #[serde(rename = "Q")]
    Q,
    #[serde(rename = "p_n")]
    Pn,
    #[serde(rename = "husimi")]
    Husimi,
    #[serde(rename = "wigner")]
    Wigner,
}

impl Quantity {
    pub const SCALARS: [Quantity; 4] = [
        Quantity::C,
        Quantity::Mean,
        Quantity::SecondFactorial,
        Quantity::Q,
    ];

    pub fn parse(s: &str) -> Option<Quantity> {
        serde_json::from_value(serde_json::Value::String(s.to_string())).ok()
    }
}

fn default_eta() -> Grid {
    Grid::single(1.0)
}
fn default_n_bar() -> Grid {
    Grid::single(0.0)
}
fn default_quantities() -> Vec<Quantity> {
    Quantity::SCALARS.to_vec()
}
fn default_tol() -> f64 {
    DEFAULT_TOL
}
fn default_p_columns() -> usize {
    30
}
fn default_radii() -> Grid {
    Grid::Range {
        start: 0.0,
        stop: 4.0,
        count: 9,
    }
}

/// Declarative sweep description, readable from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub lambda: Grid,
    pub x0: Grid,
    #[serde(default = "default_eta")]
    pub eta: Grid,
    #[serde(default = "default_n_bar")]
    pub n_bar: Grid,
    #[serde(default = "default_quantities")]
    pub quantities: Vec<Quantity>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Number of `p_n` columns when `p_n` is requested.
    #[serde(default = "default_p_columns")]
    pub p_columns: usize,
    /// Radii for `husimi` / `wigner` columns.
    #[serde(default = "default_radii")]
    pub radii: Grid,
}

impl SweepSpec {
    pub fn new(lambda: Grid, x0: Grid) -> Self {
        Self {
            lambda,
            x0,
            eta: default_eta(),
            n_bar: default_n_bar(),
            quantities: default_quantities(),
            tol: DEFAULT_TOL,
            p_columns: default_p_columns(),
            radii: default_radii(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let axes = [
            ("lambda", &self.lambda),
            ("x0", &self.x0),
            ("eta", &self.eta),
            ("n_bar", &self.n_bar),
        ];
        for (name, g) in axes {
            if g.values().is_empty() {
                return Err(Error::InvalidParameter {
                    name,
                    value: 0.0,
                    reason: "grid must not be empty",
                });
            }
        }
        for l in self.lambda.values() {
            Squeezing::new(l)?;
        }
        for x in self.x0.values() {
            AcceptanceWindow::threshold(x)?;
        }
        for e in self.eta.values() {
            for n in self.n_bar.values() {
                DetectorModel::new(e, n)?;
            }
        }
        check(
            self.tol > 0.0 && self.tol <= 1e-3,
            "tol",
            self.tol,
            "must lie in (0, 1e-3]",
        )?;
        if self.quantities.is_empty() {
            return Err(Error::InvalidParameter {
                name: "quantities",
                value: 0.0,
                reason: "at least one quantity is required",
            });
        }
        let radii = self.radii.values();
        check(
            radii.iter().all(|r| *r >= 0.0 && r.is_finite()),
            "radii",
            radii.first().copied().unwrap_or(0.0),
            "radii must be finite and >= 0",
        )
    }

    fn wants(&self, q: Quantity) -> bool {
        self.quantities.contains(&q)
    }

    /// Grid points in lexicographic index order (lambda slowest).
    pub fn points(&self) -> Vec<[f64; 4]> {
        let (ls, xs, es, ns) = (
            self.lambda.values(),
            self.x0.values(),
            self.eta.values(),
            self.n_bar.values(),
        );
        let mut out = Vec::with_capacity(ls.len() * xs.len() * es.len() * ns.len());
        for &l in &ls {
            for &x in &xs {
                for &e in &es {
                    for &n in &ns {
                        out.push([l, x, e, n]);
                    }
                }
            }
        }
        out
    }

    pub fn columns(&self) -> Vec<String> {
        let mut cols: Vec<String> = ["lambda", "x0", "eta", "n_bar"].map(String::from).to_vec();
        for q in Quantity::SCALARS {
            if self.wants(q) {
                cols.push(scalar_name(q).to_string());
            }
        }
        if self.wants(Quantity::Pn) {
            cols.extend((0..self.p_columns).map(|n| format!("p_{n}")));
            cols.push("p_rest".into());
        }
        for (q, prefix) in [(Quantity::Husimi, "husimi"), (Quantity::Wigner, "wigner")] {
            if self.wants(q) {
                cols.extend(self.radii.values().iter().map(|r| format!("{prefix}@{r}")));
            }
        }
        cols.push("error".into());
        cols
    }
}

fn scalar_name(q: Quantity) -> &'static str {
    match q {
        Quantity::C => "C",
        Quantity::Mean => "mean",
        Quantity::SecondFactorial => "second_factorial",
        Quantity::Q => "Q",
        _ => unreachable!("not a scalar quantity"),
    }
}

fn row(spec: &SweepSpec, [l, x0, eta, n_bar]: [f64; 4]) -> Vec<Cell> {
    let s = Squeezing::new(l).expect("validated");
    let w = AcceptanceWindow::threshold(x0).expect("validated");
    let d = DetectorModel::new(eta, n_bar).expect("validated");
    let mut cells: Vec<Cell> = vec![l.into(), x0.into(), eta.into(), n_bar.into()];
    let mut errors: Vec<String> = Vec::new();
    let mut record = |r: Result<f64>, cells: &mut Vec<Cell>| match r {
        Ok(v) => cells.push(Cell::Num(v)),
        Err(e) => {
            errors.push(e.to_string());
            cells.push(Cell::Empty);
        }
    };
    let moments = stats::moments(s, &w, d);
    for q in Quantity::SCALARS {
        if !spec.wants(q) {
            continue;
        }
        let v = match q {
            Quantity::C => stats::acceptance_probability_imperfect(s, &w, d),
            Quantity::Mean => moments.clone().map(|m| m.mean),
            Quantity::SecondFactorial => moments.clone().map(|m| m.second_factorial),
            _ => stats::mandel_q(s, &w, d),
        };
        record(v, &mut cells);
    }
    let needs_dist = [Quantity::Pn, Quantity::Husimi, Quantity::Wigner]
        .iter()
        .any(|q| spec.wants(*q));
    if needs_dist {
        let dist = stats::photon_distribution(s, &w, d, spec.tol);
        let width = spec.wants(Quantity::Pn) as usize * (spec.p_columns + 1)
            + (spec.wants(Quantity::Husimi) as usize + spec.wants(Quantity::Wigner) as usize)
                * spec.radii.values().len();
        match dist {
            Ok(st) => cells.extend(distribution_cells(spec, &st)),
            Err(e) => {
                errors.push(e.to_string());
                cells.extend(std::iter::repeat_n(Cell::Empty, width));
            }
        }
    }
    errors.dedup();
    cells.push(if errors.is_empty() {
        Cell::Empty
    } else {
        Cell::Text(errors.join("; "))
    });
    cells
}

fn distribution_cells(spec: &SweepSpec, st: &ConditionalStatistics) -> Vec<Cell> {
    let mut cells = Vec::new();
    if spec.wants(Quantity::Pn) {
        let shown: Vec<f64> = (0..spec.p_columns)
            .map(|n| st.p.get(n).copied().unwrap_or(0.0))
            .collect();
        let rest = (1.0 - st.p.iter().take(spec.p_columns).sum::<f64>()).max(0.0);
        cells.extend(shown.into_iter().map(Cell::Num));
        cells.push(Cell::Num(rest));
    }
    let radii = spec.radii.values();
    for (q, f) in [
        (Quantity::Husimi, husimi as fn(&[f64], f64) -> Result<f64>),
        (Quantity::Wigner, wigner),
    ] {
        if spec.wants(q) {
            cells.extend(
                radii
                    .iter()
                    .map(|&r| f(&st.p, r).map_or(Cell::Empty, Cell::Num)),
            );
        }
    }
    cells
}

/// Evaluates every grid point; rows come back in lexicographic grid order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Table> {
    spec.validate()?;
    let mut table = Table::new(spec.columns());
    table
        .meta("generator", format!("herald {}", crate::VERSION))
        .meta("kind", "sweep")
        .meta(
            "spec",
            serde_json::to_string(spec).expect("spec serializes"),
        )
        .meta("tol", spec.tol);
    let points = spec.points();
    for r in par::map(&points, |p| row(spec, *p)) {
        table.push(r);
    }
    Ok(table)
}

/// Scalar statistics at one point, as a one-row table with the same columns
/// as a sweep.
pub fn stats_table(s: Squeezing, x0: f64, d: DetectorModel, tol: f64) -> Result<Table> {
    let mut spec = SweepSpec::new(Grid::single(s.lambda()), Grid::single(x0));
    spec.eta = Grid::single(d.eta());
    spec.n_bar = Grid::single(d.n_bar());
    spec.tol = tol;
    let mut t = run_sweep(&spec)?;
    t.metadata.retain(|(k, _)| k != "spec");
    t.metadata
        .iter_mut()
        .find(|(k, _)| k == "kind")
        .expect("kind set")
        .1 = "stats".into();
    Ok(t)
}

/// Full truncated distribution `n, p_n, q_n` with the scalar results in the
/// header.
pub fn distribution_table(s: Squeezing, x0: f64, d: DetectorModel, tol: f64) -> Result<Table> {
    let w = AcceptanceWindow::threshold(x0)?;
    let st = stats::photon_distribution(s, &w, d, tol)?;
    let mut t = Table::new(["n", "p_n", "q_n"]);
    t.meta("generator", format!("herald {}", crate::VERSION))
        .meta("kind", "distribution")
        .meta("lambda", s.lambda())
        .meta("x0", x0)
        .meta("eta", d.eta())
        .meta("n_bar", d.n_bar())
        .meta("C", st.acceptance_probability)
        .meta("mean", st.mean_n)
        .meta("second_factorial", st.second_factorial)
        .meta(
            "Q",
            st.mandel_q
                .map_or("undefined".to_string(), |q| q.to_string()),
        )
        .meta("n_max", st.n_max())
        .meta("truncation_error_bound", st.truncation_error_bound);
    for (n, (p, q)) in st.p.iter().zip(&st.q).enumerate() {
        t.push(vec![n.into(), (*p).into(), (*q).into()]);
    }
    Ok(t)
}
