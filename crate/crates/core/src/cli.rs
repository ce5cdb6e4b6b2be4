//! Batch front end: `rate`, `verify`, `contour` and `dirichlet` commands
//! reading a JSON problem file and writing CSV plus a metadata sidecar.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bv_model::BVFunction;
use crate::contour_lab::{self, ContourSample, ExtensionEvaluator, ScaledTail, DEFAULT_QUAD_DENSITY};
use crate::dirichlet_app::{self, build_instance, DirichletInstance, GrowthCalibration};
use crate::error::{LabError, Result};
use crate::growth::{CutoffRule, CutoffValue, GrowthBound};
use crate::problem::Problem;
use crate::rate_engine::{RateEngine, RateInputs};
use crate::transform::TauberianCertificate;
use crate::verification::{self, SupReport, TGrid};

pub const THREADS_ENV: &str = "TAUBERIAN_LAB_THREADS";

/// Exit status: success.
pub const EXIT_OK: i32 = 0;
/// Exit status: some bound report has a negative margin.
pub const EXIT_VIOLATION: i32 = 1;
/// Exit status: the input could not be used.
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "tauberian-lab",
    version,
    about = "Explicit Tauberian decay rates for Laplace-Stieltjes transforms: rate tables, bound verification, contour checks and Dirichlet series experiments",
    after_help = "Exit status: 0 success, 1 some bound report has a negative margin, 2 input error.\n\
                  Set TAUBERIAN_LAB_THREADS to cap the number of worker threads."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON problem file.
    #[arg(long, global = true)]
    pub problem: Option<PathBuf>,
    /// CSV output path (default: stdout). Metadata goes to <out>.meta.json,
    /// or to stderr when writing to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Time grid as a:b:n (n equally spaced points) or a comma-separated list.
    /// Defaults: rate 1:50:50; verify 512 uniform points on [0, 50] plus 64
    /// points after each jump; dirichlet 0.25-spaced points up to min(13, log N_max).
    #[arg(long, global = true)]
    pub t_grid: Option<String>,
    /// Abscissa grid as a:b:n (n log-spaced points) or a comma-separated list.
    /// Default: 64 log-spaced points from x0 to the largest cutoff on the time grid (capped at 1e6).
    #[arg(long, global = true)]
    pub x_grid: Option<String>,
    /// Absolute tolerance for Stieltjes quadrature.
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub quad_tol: f64,
    /// Seed for randomized property checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Tabulate R_opt, the cutoff, the branch and the bound B over a time grid.
    Rate,
    /// Check the Tauberian condition, the lemma bounds, the step counterexample
    /// and growth admissibility on grids.
    Verify,
    /// Check the contour representation of A(t) - f(0) and the three piece estimates.
    Contour {
        /// Quadrature panels per unit of oscillation (default 1).
        #[arg(long)]
        quad_density: Option<f64>,
        /// Write every contour node with |integrand| to this CSV (single (t, R) pair only).
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Partial-sum decay of a Dirichlet series against the rate bound.
    Dirichlet,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Rate => "rate",
            Command::Verify => "verify",
            Command::Contour { .. } => "contour",
            Command::Dirichlet => "dirichlet",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub problem: Option<PathBuf>,
    pub norm: &'static str,
    pub t_grid: String,
    pub x_grid: String,
    pub quad_tol: f64,
    pub seed: u64,
    pub timestamp_unix: u64,
    pub notes: Vec<String>,
}

struct Outcome {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    violation: bool,
    t_grid: String,
    x_grid: String,
    notes: Vec<String>,
}

/// Parse `a:b:n` or a comma list; `log` selects log spacing for `a:b:n`.
pub fn parse_grid(spec: &str, log: bool) -> Result<Vec<f64>> {
    let bad = || LabError::Invalid(format!("grid {spec:?}: expected a:b:n or a comma-separated list"));
    let parts: Vec<&str> = spec.split(':').collect();
    let pts = if parts.len() == 3 {
        let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
        if log {
            verification::logspace(a, b, n)?
        } else {
            verification::linspace(a, b, n)?
        }
    } else if parts.len() == 1 {
        spec.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?
    } else {
        return Err(bad());
    };
    if pts.is_empty() || pts.iter().any(|v| !v.is_finite()) {
        return Err(bad());
    }
    Ok(pts)
}

fn fmt(v: f64) -> String {
    if v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

fn missing(section: &str, command: &str) -> LabError {
    LabError::Invalid(format!("problem file lacks the `{section}` section required by `{command}`"))
}

fn load_problem(common: &CommonArgs) -> Result<(Problem, PathBuf)> {
    let path = common
        .problem
        .as_ref()
        .ok_or_else(|| LabError::Invalid("--problem <path> is required".into()))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((Problem::load(path)?, base))
}

/// Run one command; returns the process exit status.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(violation) => {
            if violation {
                EXIT_VIOLATION
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

fn execute(cli: &Cli) -> Result<bool> {
    let common = &cli.common;
    if !(common.quad_tol > 0.0) {
        return Err(LabError::Invalid(format!("--quad-tol {} must be positive", common.quad_tol)));
    }
    let (problem, base) = load_problem(common)?;
    let outcome = match &cli.command {
        Command::Rate => rate(&problem, common)?,
        Command::Verify => verify(&problem, common)?,
        Command::Contour { quad_density, dump } => contour(&problem, &base, common, *quad_density, dump.as_deref())?,
        Command::Dirichlet => dirichlet(&problem, &base, common)?,
    };
    write_csv(common.out.as_deref(), &outcome.header, &outcome.rows)?;
    let meta = Metadata {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: cli.command.name(),
        problem: common.problem.clone(),
        norm: problem.norm.as_str(),
        t_grid: outcome.t_grid,
        x_grid: outcome.x_grid,
        quad_tol: common.quad_tol,
        seed: common.seed,
        timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        notes: outcome.notes,
    };
    let json = serde_json::to_string_pretty(&meta).map_err(|e| LabError::Io(e.to_string()))?;
    match &common.out {
        Some(out) => {
            let mut p = out.clone().into_os_string();
            p.push(".meta.json");
            std::fs::write(PathBuf::from(p), json + "\n")?;
        }
        None => eprintln!("{json}"),
    }
    Ok(outcome.violation)
}

fn write_csv(out: Option<&Path>, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let sink: Box<dyn Write> = match out {
        Some(p) => Box::new(std::fs::File::create(p).map_err(|e| LabError::Io(format!("{}: {e}", p.display())))?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    let io = |e: csv::Error| LabError::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

fn rate_inputs(problem: &Problem, command: &str) -> Result<RateInputs> {
    let cert = problem.certificate.ok_or_else(|| missing("certificate", command))?;
    let growth = problem.growth_bound()?.ok_or_else(|| missing("growth", command))?;
    RateInputs::new(cert.c, cert.t, growth, problem.cutoff_rule())
}

fn rate(problem: &Problem, common: &CommonArgs) -> Result<Outcome> {
    let engine = RateEngine::new(rate_inputs(problem, "rate")?)?;
    let t_spec = common.t_grid.clone().unwrap_or_else(|| "1:50:50".into());
    let ts = parse_grid(&t_spec, false)?;
    let tp = engine.t_prime();
    let mut notes = vec![format!(
        "T' = {} (log term {}{})",
        tp.value,
        tp.log_term,
        if tp.clamped { ", clamped at 0" } else { "" }
    )];
    if let Some(k) = crate::rate_engine::k_prime(engine.inputs()) {
        notes.push(format!("K' = {k}"));
    }
    let results: Vec<_> = ts.par_iter().map(|&t| engine.decay_rate(t)).collect();
    let mut rows = Vec::new();
    for (t, r) in ts.iter().zip(results) {
        match r {
            Ok(r) => rows.push(vec![
                fmt(r.t),
                fmt(r.r_opt),
                r.r_rule.to_string(),
                r.branch.as_str().into(),
                fmt(r.bound),
                fmt(r.rate_shape),
            ]),
            Err(LabError::BelowThreshold { .. }) => {
                eprintln!("warning: skipping t = {t}, not beyond T' = {}", tp.value);
                notes.push(format!("skipped t = {t} <= T'"));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Outcome {
        header: vec!["t", "R_opt", "R_rule_t", "branch", "bound_B", "rate_shape"],
        rows,
        violation: false,
        t_grid: t_spec,
        x_grid: String::new(),
        notes,
    })
}

fn t_grid_for(a: &BVFunction, common: &CommonArgs) -> Result<TGrid> {
    match &common.t_grid {
        Some(s) => TGrid::from_points(parse_grid(s, false)?, format!("explicit {s}")),
        None => TGrid::default_for(a),
    }
}

fn x_grid_for(cert: &TauberianCertificate, grid: &TGrid, common: &CommonArgs) -> Result<(Vec<f64>, String)> {
    if let Some(s) = &common.x_grid {
        return Ok((parse_grid(s, true)?, format!("explicit {s}")));
    }
    let t_max = *grid.points().last().expect("nonempty");
    let hi = match cert.cutoff.value(t_max) {
        CutoffValue::Finite(r) => r.min(1e6),
        CutoffValue::Infinite => 1e6,
    }
    .max(cert.x0);
    Ok((
        verification::logspace(cert.x0, hi, verification::DEFAULT_X_POINTS)?,
        format!("log {}:{}:{}", cert.x0, hi, verification::DEFAULT_X_POINTS),
    ))
}

struct Case {
    report: SupReport,
    expected_violation: bool,
}

fn verify(problem: &Problem, common: &CommonArgs) -> Result<Outcome> {
    let a = problem.integrator()?;
    let cert = problem.tauberian_certificate()?;
    let tol = common.quad_tol;
    let mut cases = Vec::new();
    let mut notes = Vec::new();
    let grid = t_grid_for(&a, common)?;
    let mut x_desc = String::new();

    if let Some(cert) = &cert {
        let (xs, desc) = x_grid_for(cert, &grid, common)?;
        x_desc = desc;
        let r = verification::check_tauberian(&a, cert, &grid, &xs, tol)?;
        cases.push(Case {
            report: r.with_case("tauberian"),
            expected_violation: false,
        });
    }

    if let Some(lem) = &problem.lemmas {
        let cert = cert.as_ref().ok_or_else(|| missing("certificate", "verify (lemmas)"))?;
        let mut pairs: Vec<(f64, f64)> = lem.x.iter().flat_map(|&x| lem.y.iter().map(move |&y| (x, y))).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
        for _ in 0..lem.random_cases {
            let x = (rng.gen_range((0.05f64).ln()..(2f64).ln())).exp();
            pairs.push((x, rng.gen_range(-20.0..20.0)));
        }
        if lem.random_cases > 0 {
            notes.push(format!("{} random lemma cases from seed {}", lem.random_cases, common.seed));
        }
        for (x, y) in pairs {
            let c = cert.hypothesis_constant(x);
            let r = verification::check_lemma_2_1(&a, c, x, y, &grid, tol)?;
            cases.push(Case {
                report: r.with_case(format!("lemma_2_1 x={x} y={y}")),
                expected_violation: false,
            });
            let r = verification::check_lemma_2_2(&a, c, x, y, &grid, tol)?;
            cases.push(Case {
                report: r.with_case(format!("lemma_2_2 x={x} y={y}")),
                expected_violation: false,
            });
        }
        let small: Vec<f64> = lem.x.iter().copied().filter(|&x| x <= cert.x0).collect();
        if !small.is_empty() {
            let r = verification::check_lemma_2_3(&a, cert.c / cert.x0, cert.x0, &small, &grid, tol)?;
            cases.push(Case {
                report: r.with_case(format!("lemma_2_3 x0={}", cert.x0)),
                expected_violation: false,
            });
        }
    }

    if let Some(ce) = &problem.remark_2_4 {
        let step = BVFunction::step(ce.t, 1.0)?;
        let g = t_grid_for(&step, common)?;
        notes.push("remark_2_4 uses x0 = 1, C = 1; T' = T + max(log x, 0)/x + 1 is an explicit choice".into());
        for &x in &ce.x {
            let rep = verification::counterexample_report(ce.t, x, &g)?;
            let expected = x > 1.0;
            let tag = if expected { " expected_violation" } else { "" };
            cases.push(Case {
                report: rep.global.with_case(format!("remark_2_4_global x={x}{tag}")),
                expected_violation: expected,
            });
            cases.push(Case {
                report: rep.tail.with_case(format!("remark_2_4_tail x={x} T'={}", rep.t_prime)),
                expected_violation: false,
            });
        }
    }

    if let Some(adm) = &problem.admissibility {
        let f = problem.extension.as_ref().ok_or_else(|| missing("extension", "verify (admissibility)"))?;
        let m = problem.growth_bound()?.ok_or_else(|| missing("growth", "verify (admissibility)"))?;
        let q = dirichlet_app::q_grid(&m, adm.y_max, adm.ny, adm.nx)?;
        let r = dirichlet_app::check_admissibility(f, &m, &q)?;
        cases.push(Case {
            report: r.with_case(format!("admissibility {}", f.name())),
            expected_violation: false,
        });
    }

    if cases.is_empty() {
        return Err(LabError::Invalid(
            "nothing to verify: add a certificate, lemmas, remark_2_4 or admissibility section".into(),
        ));
    }
    let mut violation = false;
    let rows = cases
        .iter()
        .map(|c| {
            if c.report.hypothesis_failed {
                notes.push(format!("{}: hypothesis fails on the grid", c.report.case_id));
            }
            violation |= !c.expected_violation && !c.report.passes();
            vec![
                c.report.case_id.clone(),
                fmt(c.report.grid_sup),
                fmt(c.report.bound),
                fmt(c.report.margin),
                fmt(c.report.witness_t),
            ]
        })
        .collect();
    Ok(Outcome {
        header: vec!["case_id", "grid_sup", "bound", "margin", "witness_t"],
        rows,
        violation,
        t_grid: format!("{:?}", grid.spec()),
        x_grid: x_desc,
        notes,
    })
}

/// The integrator, its tail source and certificate, from the problem's
/// `dirichlet` section if present, otherwise from its jumps and densities.
enum Subject {
    Plain(BVFunction, Option<TauberianCertificate>),
    Dirichlet(Box<DirichletInstance>),
}

impl Subject {
    fn load(problem: &Problem, base: &Path) -> Result<Self> {
        match problem.coefficients(base)? {
            Some((seq, n_max)) => Ok(Subject::Dirichlet(Box::new(build_instance(seq, n_max)?))),
            None => Ok(Subject::Plain(problem.integrator()?, problem.tauberian_certificate()?)),
        }
    }

    fn a(&self) -> &BVFunction {
        match self {
            Subject::Plain(a, _) => a,
            Subject::Dirichlet(d) => &d.a,
        }
    }

    fn tail(&self) -> &dyn ScaledTail {
        match self {
            Subject::Plain(a, _) => a,
            Subject::Dirichlet(d) => d.as_ref(),
        }
    }

    fn cert(&self) -> Option<TauberianCertificate> {
        match self {
            Subject::Plain(_, c) => *c,
            Subject::Dirichlet(d) => Some(d.cert),
        }
    }

    fn extension(&self, problem: &Problem, command: &str) -> Result<ExtensionEvaluator> {
        if let Some(e) = &problem.extension {
            e.validate()?;
            return Ok(e.clone());
        }
        match self {
            Subject::Dirichlet(d) => d.extension().ok_or_else(|| missing("extension", command)),
            Subject::Plain(..) => Err(missing("extension", command)),
        }
    }

    /// `M` from the problem, or calibrated on samples of the extension.
    fn growth(&self, problem: &Problem, f: &ExtensionEvaluator, notes: &mut Vec<String>) -> Result<GrowthBound> {
        if let Some(m) = problem.growth_bound()? {
            return Ok(m);
        }
        let y_max = problem
            .dirichlet
            .as_ref()
            .and_then(|d| d.calibrate_y_max)
            .unwrap_or(30.0);
        let cal: GrowthCalibration = dirichlet_app::calibrate_affine_growth(f, y_max)?;
        notes.push(format!(
            "M(s) = {} (1 + s) calibrated on |y| <= {y_max}: {}",
            cal.c,
            GrowthCalibration::LABEL
        ));
        Ok(cal.growth)
    }
}

fn contour(
    problem: &Problem,
    base: &Path,
    common: &CommonArgs,
    density: Option<f64>,
    dump: Option<&Path>,
) -> Result<Outcome> {
    let section = problem.contour.as_ref().ok_or_else(|| missing("contour", "contour"))?;
    let subject = Subject::load(problem, base)?;
    let f = subject.extension(problem, "contour")?;
    let mut notes = Vec::new();
    let m = subject.growth(problem, &f, &mut notes)?;
    let density = density.or(section.density).unwrap_or(DEFAULT_QUAD_DENSITY);
    let tol = common.quad_tol;
    let cert = subject.cert();
    if cert.is_none() {
        notes.push("no certificate: piece estimates omitted".into());
    }
    let pairs: Vec<(f64, f64)> = section
        .t
        .iter()
        .flat_map(|&t| section.r.iter().map(move |&r| (t, r)))
        .collect();
    if pairs.is_empty() {
        return Err(LabError::Invalid("contour.t and contour.R must be nonempty".into()));
    }
    let mut violation = false;
    let mut rows = Vec::new();
    for &(t, r) in &pairs {
        let rep = contour_lab::cauchy_report(subject.a(), subject.tail(), &f, &m, t, r, density, tol)?;
        let mut row = vec![fmt(t), fmt(r), fmt(rep.residual)];
        match &cert {
            Some(cert) => {
                let tb = contour_lab::term_bounds(subject.a(), subject.tail(), cert, &f, &m, t, r, density, tol)?;
                for p in [tb.i, tb.ii] {
                    row.extend([fmt(p.measured), fmt(p.displayed_bound), fmt(p.derived_bound)]);
                }
                row.extend([fmt(tb.iii.measured), fmt(tb.iii.displayed_bound)]);
                for p in [tb.i, tb.ii, tb.iii] {
                    violation |= p.margin_displayed < -verification::NOISE * p.displayed_bound;
                }
            }
            None => row.extend(std::iter::repeat_n(String::new(), 8)),
        }
        rows.push(row);
    }
    if let Some(path) = dump {
        if pairs.len() != 1 {
            return Err(LabError::Invalid("--dump needs exactly one (t, R) pair in the contour section".into()));
        }
        let (t, r) = pairs[0];
        let samples = contour_lab::contour_samples(subject.a(), subject.tail(), &f, &m, t, r, density, tol)?;
        write_csv(
            Some(path),
            &["piece", "s_param", "re_z", "im_z", "abs_integrand"],
            &samples.iter().map(sample_row).collect::<Vec<_>>(),
        )?;
    }
    notes.push(format!("extension {}, growth {m}, quadrature density {density}", f.name()));
    Ok(Outcome {
        header: vec![
            "t",
            "R",
            "residual",
            "I",
            "I_bound_displayed",
            "I_bound_derived",
            "II",
            "II_bound_displayed",
            "II_bound_derived",
            "III",
            "III_bound",
        ],
        rows,
        violation,
        t_grid: format!("{:?}", section.t),
        x_grid: String::new(),
        notes,
    })
}

fn sample_row(s: &ContourSample) -> Vec<String> {
    vec![s.piece.into(), fmt(s.s_param), fmt(s.re_z), fmt(s.im_z), fmt(s.abs_integrand)]
}

fn dirichlet(problem: &Problem, base: &Path, common: &CommonArgs) -> Result<Outcome> {
    let (seq, n_max) = problem.coefficients(base)?.ok_or_else(|| missing("dirichlet", "dirichlet"))?;
    let mut inst = build_instance(seq, n_max)?;
    if let Some(v) = problem.f0_value()? {
        inst = inst.with_f0(v, "supplied in problem file")?;
    }
    let Some(f0) = inst.f0.clone() else {
        return Err(LabError::MissingLimit(format!(
            "f0 is absent and {} coefficients have no known limit; supply `f0` in the problem file",
            inst.coeffs.name()
        )));
    };
    let mut notes = vec![
        format!("f0 = {} ({})", f0.value, f0.provenance),
        format!("C = D e = {}, R(t) = e^t, N_max = {n_max}", inst.cert.c),
    ];
    let m = match problem.growth_bound()? {
        Some(m) => m,
        None => {
            let f = Subject::Dirichlet(Box::new(inst.clone())).extension(problem, "dirichlet").map_err(|_| {
                LabError::Invalid("problem file lacks `growth` and no extension is known to calibrate one".into())
            })?;
            Subject::Dirichlet(Box::new(inst.clone())).growth(problem, &f, &mut notes)?
        }
    };
    let inputs = RateInputs::new(inst.cert.c, inst.cert.t, m, CutoffRule::Exponential)?;
    let engine = RateEngine::new(inputs)?;
    notes.push(format!("T' = {}", engine.t_prime().value));
    let limit = inst.t_limit();
    let t_spec = common.t_grid.clone().unwrap_or_else(|| {
        let b = (limit.min(13.0) * 4.0).floor() / 4.0;
        format!("0.25:{b}:{}", ((b - 0.25) * 4.0).round() as usize + 1)
    });
    let mut ts = parse_grid(&t_spec, false)?;
    if let Some(&bad) = ts.iter().find(|&&t| t > limit) {
        eprintln!("warning: t = {bad} and beyond exceed log N_max = {limit}; those points are dropped");
        notes.push(format!("dropped grid points beyond log N_max = {limit}"));
        ts.retain(|&t| t <= limit);
    }
    let samples = dirichlet_app::partial_sum_decay(&inst, &engine, &ts)?;
    let violation = samples.iter().any(|s| s.margin.is_some_and(|m| m < 0.0));
    let rows = samples
        .iter()
        .map(|s| vec![fmt(s.t), fmt(s.decay_norm), fmt_opt(s.bound_b), fmt_opt(s.margin)])
        .collect();
    Ok(Outcome {
        header: vec!["t", "decay_norm", "bound_B", "margin"],
        rows,
        violation,
        t_grid: t_spec,
        x_grid: String::new(),
        notes,
    })
}

/// Configure the global thread pool from [`THREADS_ENV`], if set.
pub fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| LabError::Invalid(format!("{THREADS_ENV}={v:?} is not a positive integer")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| LabError::Invalid(e.to_string()))?;
    }
    Ok(())
}
