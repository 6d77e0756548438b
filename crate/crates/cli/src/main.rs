use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use herald_core::figures::{run_figure, FigureId, FigureJob};
use herald_core::oracles::monte_carlo_experiment;
use herald_core::report::{Cell, Format, Table};
use herald_core::solvers::{self, SolveReport, SolverOptions};
use herald_core::stats::{photon_distribution, DEFAULT_TOL};
use herald_core::sweep::{distribution_table, run_sweep, stats_table, Grid, Quantity, SweepSpec};
use herald_core::{AcceptanceWindow, DetectorModel, Error, Squeezing};

#[derive(Parser, Debug)]
#[command(
    name = "herald",
    version,
    about = "Photon statistics of homodyne-heralded squeezed vacuum"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
    /// Write to this file instead of stdout (a directory for `figure all`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Format {
        match f {
            OutFormat::Csv => Format::Csv,
            OutFormat::Json => Format::Json,
        }
    }
}

#[derive(Args, Debug, Clone, Copy)]
struct Detector {
    /// Homodyne efficiency.
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    /// Mean thermal photon number of the added detector noise.
    #[arg(long, default_value_t = 0.0)]
    nbar: f64,
}

impl Detector {
    fn model(self) -> herald_core::Result<DetectorModel> {
        DetectorModel::new(self.eta, self.nbar)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Conditional statistics at one operating point.
    Stats {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        x0: f64,
        #[command(flatten)]
        detector: Detector,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Print the full distribution n, p_n, q_n instead of the scalars.
        #[arg(long)]
        distribution: bool,
    },
    /// Grid sweep. Axes are comma lists or `start:stop:count`.
    Sweep {
        /// JSON sweep description; replaces the axis flags.
        #[arg(long, conflicts_with_all = ["lambda", "x0", "eta", "nbar", "quantities"])]
        spec: Option<PathBuf>,
        #[arg(long, required_unless_present = "spec", allow_hyphen_values = true)]
        lambda: Option<String>,
        #[arg(long, required_unless_present = "spec", allow_hyphen_values = true)]
        x0: Option<String>,
        #[arg(long)]
        eta: Option<String>,
        #[arg(long)]
        nbar: Option<String>,
        /// Comma list from C, mean, second_factorial, Q, p_n, husimi, wigner.
        #[arg(long)]
        quantities: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Regenerate the data behind a figure (fig2 .. fig6, or `all`).
    Figure {
        id: String,
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<String>,
        #[arg(long)]
        eta: Option<String>,
        /// Target Mandel Q values for contour figures.
        #[arg(long, allow_hyphen_values = true)]
        q: Option<String>,
    },
    /// Simulate the heralding experiment and compare with the analytic values.
    Montecarlo {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        x0: f64,
        #[command(flatten)]
        detector: Detector,
        #[arg(long, default_value_t = 1_000_000)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of p_n rows in the comparison.
        #[arg(long, default_value_t = 8)]
        levels: usize,
    },
    /// Inverse problems.
    Solve {
        #[arg(value_enum)]
        kind: SolveKind,
        #[arg(long)]
        lambda: Option<f64>,
        /// Target Mandel Q.
        #[arg(long, allow_hyphen_values = true)]
        q: Option<f64>,
        #[command(flatten)]
        detector: Detector,
        #[arg(long)]
        tol: Option<f64>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SolveKind {
    X0ForQ,
    X0Min,
    OptimalLambda,
    EtaThreshold,
}

fn parse_grid(name: &str, s: &str) -> anyhow::Result<Grid> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let start = parts[0].trim().parse::<f64>();
        let stop = parts[1].trim().parse::<f64>();
        let count = parts[2].trim().parse::<usize>();
        return match (start, stop, count) {
            (Ok(start), Ok(stop), Ok(count)) => Ok(Grid::Range { start, stop, count }),
            _ => Err(usage(format!(
                "--{name}: expected start:stop:count, got `{s}`"
            ))),
        };
    }
    Ok(Grid::List(parse_list(name, s)?))
}

fn parse_list(name: &str, s: &str) -> anyhow::Result<Vec<f64>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("--{name}: `{v}` is not a number")))
        })
        .collect()
}

#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: String) -> anyhow::Error {
    anyhow::Error::new(Usage(msg))
}

fn emit(table: &Table, format: Format, out: Option<&Path>) -> anyhow::Result<()> {
    let text = table.render(format);
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn solve_table(kind: SolveKind, report: &SolveReport) -> Table {
    let name = kind
        .to_possible_value()
        .expect("named")
        .get_name()
        .to_string();
    let mut t = Table::new([
        "kind",
        "solution",
        "residual",
        "value",
        "iterations",
        "bracket_lo",
        "bracket_hi",
        "feasible",
        "boundary",
    ]);
    t.meta("generator", format!("herald {}", herald_core::VERSION));
    t.meta("kind", format!("solve/{name}"));
    t.push(vec![
        Cell::Text(name),
        Cell::opt(report.solution),
        Cell::opt(report.residual),
        Cell::opt(report.value),
        Cell::from(report.iterations),
        Cell::from(report.bracket.0),
        Cell::from(report.bracket.1),
        Cell::Bool(report.feasible),
        Cell::Bool(report.boundary),
    ]);
    t
}

fn solve(
    kind: SolveKind,
    lambda: Option<f64>,
    q: Option<f64>,
    detector: Detector,
    tol: Option<f64>,
) -> anyhow::Result<Table> {
    let mut opts = SolverOptions::default();
    if let Some(tol) = tol {
        if tol.is_nan() || tol <= 0.0 {
            bail!(usage(format!("--tol must be positive, got {tol}")));
        }
        opts.x_tol = tol;
        opts.lambda_tol = tol.max(1e-10);
    }
    let need_q = || q.ok_or_else(|| usage("this solve needs --q".into()));
    let report = match kind {
        SolveKind::X0ForQ => {
            let lambda = lambda.ok_or_else(|| usage("x0-for-q needs --lambda".into()))?;
            let mut t = solvers::solve_x0_for_q(
                Squeezing::new(lambda)?,
                need_q()?,
                detector.model()?,
                &opts,
            )?;
            t.value = t
                .solution
                .map(|x0| {
                    herald_core::stats::acceptance_probability_imperfect(
                        Squeezing::new(lambda)?,
                        &AcceptanceWindow::threshold(x0)?,
                        detector.model()?,
                    )
                })
                .transpose()?;
            t
        }
        SolveKind::X0Min => solvers::x0_min()?,
        SolveKind::OptimalLambda => solvers::optimal_lambda(need_q()?, detector.model()?, &opts)?,
        SolveKind::EtaThreshold => {
            let eta = solvers::eta_threshold(detector.nbar)?;
            SolveReport {
                solution: Some(eta),
                residual: Some(0.0),
                value: None,
                iterations: 0,
                bracket: (0.0, 1.0),
                feasible: true,
                boundary: false,
            }
        }
    };
    if !report.feasible {
        log::warn!("target is not reachable in the admissible range");
    }
    let mut t = solve_table(kind, &report);
    if let Some(l) = lambda {
        t.meta("lambda", l);
    }
    if let Some(q) = q {
        t.meta("q_target", q);
    }
    t.meta("eta", detector.eta).meta("n_bar", detector.nbar);
    Ok(t)
}

fn montecarlo(
    lambda: f64,
    x0: f64,
    detector: Detector,
    shots: u64,
    seed: u64,
    levels: usize,
) -> anyhow::Result<Table> {
    let s = Squeezing::new(lambda)?;
    let w = AcceptanceWindow::threshold(x0)?;
    let d = detector.model()?;
    let mc = monte_carlo_experiment(s, &w, d, shots, seed)?;
    let exact = photon_distribution(s, &w, d, DEFAULT_TOL)?;
    let mut t = Table::new([
        "quantity",
        "monte_carlo",
        "standard_error",
        "analytic",
        "z_score",
    ]);
    t.meta("generator", format!("herald {}", herald_core::VERSION))
        .meta("kind", "montecarlo")
        .meta("lambda", lambda)
        .meta("x0", x0)
        .meta("eta", d.eta())
        .meta("n_bar", d.n_bar())
        .meta("shots", shots)
        .meta("seed", seed)
        .meta("accepted", mc.accepted);
    let mut row = |name: String, est: Option<f64>, se: Option<f64>, exact: Option<f64>| {
        let z = match (est, se, exact) {
            (Some(e), Some(s), Some(a)) if s > 0.0 => Some((e - a) / s),
            _ => None,
        };
        t.push(vec![
            Cell::Text(name),
            Cell::opt(est),
            Cell::opt(se),
            Cell::opt(exact),
            Cell::opt(z),
        ]);
    };
    let se = mc.standard_errors;
    row(
        "C".into(),
        Some(mc.empirical_c),
        Some(se.acceptance),
        Some(exact.acceptance_probability),
    );
    row(
        "mean".into(),
        mc.empirical_mean,
        se.mean,
        Some(exact.mean_n),
    );
    row("Q".into(), mc.empirical_q, se.mandel_q, exact.mandel_q);
    for n in 0..levels {
        let p = mc.empirical_p.get(n).copied().unwrap_or(0.0);
        let est = (mc.accepted > 0).then_some(p);
        let se_p = est.map(|p| (p * (1.0 - p) / mc.accepted as f64).sqrt());
        row(
            format!("p_{n}"),
            est,
            se_p,
            Some(exact.p.get(n).copied().unwrap_or(0.0)),
        );
    }
    Ok(t)
}

fn figure(
    id: &str,
    lambda: Option<String>,
    x0: Option<String>,
    eta: Option<String>,
    q: Option<String>,
    format: Format,
    out: Option<&Path>,
) -> anyhow::Result<()> {
    let ids: Vec<FigureId> = if id == "all" {
        FigureId::ALL.to_vec()
    } else {
        vec![id
            .parse::<FigureId>()
            .map_err(|_| usage(format!("unknown figure `{id}`; expected fig2..fig6 or all")))?]
    };
    if ids.len() > 1 && out.is_none() {
        bail!(usage("`figure all` needs --out <directory>".into()));
    }
    for fig in ids {
        let mut job = FigureJob::new(fig);
        job.overrides.lambda = lambda
            .as_deref()
            .map(|s| parse_list("lambda", s))
            .transpose()?;
        job.overrides.x0 = x0.as_deref().map(|s| parse_list("x0", s)).transpose()?;
        job.overrides.eta = eta.as_deref().map(|s| parse_list("eta", s)).transpose()?;
        job.overrides.q = q.as_deref().map(|s| parse_list("q", s)).transpose()?;
        let table = run_figure(&job)?;
        let target = match out {
            Some(p) if id == "all" => {
                fs::create_dir_all(p)?;
                let ext = match format {
                    Format::Csv => "csv",
                    Format::Json => "json",
                };
                Some(p.join(format!("{}.{ext}", fig.name())))
            }
            Some(p) => Some(p.to_path_buf()),
            None => None,
        };
        log::info!("{fig}: {} rows", table.rows.len());
        emit(&table, format, target.as_deref())?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let format: Format = cli.format.into();
    let out = cli.out.as_deref();
    let table = match cli.command {
        Command::Stats {
            lambda,
            x0,
            detector,
            tol,
            distribution,
        } => {
            let s = Squeezing::new(lambda)?;
            if distribution {
                distribution_table(s, x0, detector.model()?, tol)?
            } else {
                stats_table(s, x0, detector.model()?, tol)?
            }
        }
        Command::Sweep {
            spec,
            lambda,
            x0,
            eta,
            nbar,
            quantities,
            tol,
        } => {
            let mut spec = match spec {
                Some(path) => {
                    let text = fs::read_to_string(&path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    serde_json::from_str::<SweepSpec>(&text)
                        .map_err(|e| usage(format!("{}: {e}", path.display())))?
                }
                None => {
                    let lambda =
                        parse_grid("lambda", lambda.as_deref().expect("required by clap"))?;
                    let x0 = parse_grid("x0", x0.as_deref().expect("required by clap"))?;
                    let mut spec = SweepSpec::new(lambda, x0);
                    if let Some(e) = eta {
                        spec.eta = parse_grid("eta", &e)?;
                    }
                    if let Some(n) = nbar {
                        spec.n_bar = parse_grid("nbar", &n)?;
                    }
                    if let Some(q) = quantities {
                        spec.quantities = q
                            .split(',')
                            .map(|s| {
                                Quantity::parse(s.trim())
                                    .ok_or_else(|| usage(format!("unknown quantity `{s}`")))
                            })
                            .collect::<anyhow::Result<_>>()?;
                    }
                    spec
                }
            };
            if let Some(tol) = tol {
                spec.tol = tol;
            }
            run_sweep(&spec)?
        }
        Command::Figure {
            id,
            lambda,
            x0,
            eta,
            q,
        } => return figure(&id, lambda, x0, eta, q, format, out),
        Command::Montecarlo {
            lambda,
            x0,
            detector,
            shots,
            seed,
            levels,
        } => montecarlo(lambda, x0, detector, shots, seed, levels)?,
        Command::Solve {
            kind,
            lambda,
            q,
            detector,
            tol,
        } => solve(kind, lambda, q, detector, tol)?,
    };
    emit(&table, format, out)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some() {
        return 2;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::NonConvergence { .. }) => 3,
        Some(_) => 2,
        None => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
