//! Command-line front end for the `fracpoly` solver.

pub mod output;
pub mod problem;
pub mod report;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use fracpoly::dinkelbach::{self, relative_error, DinkelbachOptions, FractionalProblem};
use fracpoly::eeapp::{load_objective, solve_ee, EeConfig, EeError, EeOptions, DEFAULT_ORDER};
use fracpoly::lasserre::{solve_relaxation, PolyProblem, RelaxOptions, Sense};
use fracpoly::momentidx::{moment_matrix_spec, MomentIndexMap};
use fracpoly::polycore::{enumerate_basis, Polynomial};
use fracpoly::sosdual::{sos_decompose, SosCertificateDoc, SosError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use output::{emit_grid_csv, emit_trace_csv};
use problem::{line_col, parse_problem, Objective, ProblemFile};
use report::{
    ComplexityDoc, Example1Result, EeResult, FracResult, PointDoc, PolyResult, Report, RunOptions,
    RunResult, SolverDoc, SosResult, TraceSummary, QUOTED_EE_BASIS,
};

pub use report::validate_report;

/// Points sampled by `certify-sos` to spot-check nonnegativity.
pub const SOS_SAMPLES: usize = 1000;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Schema {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Solve { path: String, message: String },
}

#[derive(Debug, Parser)]
#[command(name = "fracpoly", version, about = "Fractional polynomial optimization via moment relaxations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimize or maximize a polynomial over a semialgebraic set.
    SolvePoly {
        input: PathBuf,
        #[command(flatten)]
        solver: SolverFlags,
        #[command(flatten)]
        out: OutputFlags,
    },
    /// Maximize f/g with Dinkelbach's iteration.
    SolveFrac {
        input: PathBuf,
        #[command(flatten)]
        solver: SolverFlags,
        #[command(flatten)]
        outer: OuterFlags,
        #[command(flatten)]
        out: OutputFlags,
    },
    /// Energy-efficiency dimensioning over users K and antennas M.
    SolveEe {
        config: PathBuf,
        #[command(flatten)]
        solver: SolverFlags,
        #[command(flatten)]
        outer: OuterFlags,
        /// Run the exhaustive integer-grid search and report the error.
        #[arg(long)]
        oracle: bool,
        /// Write the EE surface as CSV (implies --oracle).
        #[arg(long)]
        grid: Option<PathBuf>,
        #[command(flatten)]
        out: OutputFlags,
    },
    /// Decompose an unconstrained polynomial as a sum of squares.
    CertifySos {
        input: PathBuf,
        #[command(flatten)]
        out: OutputFlags,
    },
    /// Walk through the two-variable quadratic example at order 1.
    Example1 {
        #[command(flatten)]
        out: OutputFlags,
    },
    /// Check a report file against the report schema.
    ValidateReport { report: PathBuf },
}

#[derive(Debug, Clone, Args)]
pub struct SolverFlags {
    /// Relaxation order d.
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long)]
    pub feas_tol: Option<f64>,
    #[arg(long)]
    pub gap_tol: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct OuterFlags {
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub max_outer: Option<usize>,
    /// Write the outer iteration trace as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputFlags {
    /// Write the JSON run report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Runs one command; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("fracpoly: error: {e}");
            1
        }
    }
}

fn dispatch(cli: &Cli) -> Result<i32, CliError> {
    match &cli.command {
        Command::SolvePoly { input, solver, out } => finish(solve_poly(input, solver, out)?, out),
        Command::SolveFrac {
            input,
            solver,
            outer,
            out,
        } => finish(solve_frac(input, solver, outer, out)?, out),
        Command::SolveEe {
            config,
            solver,
            outer,
            oracle,
            grid,
            out,
        } => finish(
            solve_ee_cmd(config, solver, outer, *oracle, grid.as_deref(), out)?,
            out,
        ),
        Command::CertifySos { input, out } => finish(certify_sos(input, out)?, out),
        Command::Example1 { out } => finish(example1(out)?, out),
        Command::ValidateReport { report } => {
            let path = report.display().to_string();
            let r = validate_report(&path, &read(report)?)?;
            println!("{path}: valid {} report ({:?})", r.command, r.status);
            Ok(0)
        }
    }
}

fn finish(report: Report, out: &OutputFlags) -> Result<i32, CliError> {
    if let Some(path) = &out.report {
        write(path, &report.to_json())?;
    }
    println!("status: {:?}", report.status);
    Ok(report.status.exit_code())
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn solve_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Solve {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

struct Resolved {
    order: Option<usize>,
    eps: f64,
    max_outer: usize,
    relax: RelaxOptions,
}

fn resolve(
    solver: &SolverFlags,
    outer: Option<&OuterFlags>,
    file: &problem::FileOptions,
) -> Result<Resolved, CliError> {
    let mut relax = RelaxOptions::default();
    let feas = solver.feas_tol.or(file.feas_tol).unwrap_or(relax.sdp.feas_tol);
    let gap = solver.gap_tol.or(file.gap_tol).unwrap_or(relax.sdp.gap_tol);
    let defaults = DinkelbachOptions::default();
    let eps = outer.and_then(|o| o.eps).or(file.eps).unwrap_or(defaults.eps);
    let max_outer = outer
        .and_then(|o| o.max_outer)
        .or(file.max_outer)
        .unwrap_or(defaults.max_outer);
    let order = solver.order.or(file.order);
    for (name, v) in [("feas-tol", feas), ("gap-tol", gap), ("eps", eps)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(CliError::Usage(format!("--{name} must be positive, got {v}")));
        }
    }
    if !(eps < 1.0) {
        return Err(CliError::Usage(format!("--eps must be below 1, got {eps}")));
    }
    if order == Some(0) {
        return Err(CliError::Usage("--order must be at least 1".into()));
    }
    if max_outer == 0 {
        return Err(CliError::Usage("--max-outer must be at least 1".into()));
    }
    relax.sdp.feas_tol = feas;
    relax.sdp.gap_tol = gap;
    Ok(Resolved {
        order,
        eps,
        max_outer,
        relax,
    })
}

fn load_problem(path: &Path) -> Result<ProblemFile, CliError> {
    let text = read(path)?;
    parse_problem(&path.display().to_string(), &text)
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.9}")).collect();
    format!("({})", parts.join(", "))
}

fn solve_poly(input: &Path, solver: &SolverFlags, out: &OutputFlags) -> Result<Report, CliError> {
    let file = load_problem(input)?;
    let Objective::Poly(objective) = file.objective.clone() else {
        return Err(CliError::Usage(format!(
            "{}: objective is a fraction; use solve-frac",
            input.display()
        )));
    };
    let res = resolve(solver, None, &file.options)?;
    let sense = file.sense.unwrap_or(Sense::Minimize);
    let prob = PolyProblem::new(sense, objective, file.constraints.clone()).map_err(|e| solve_err(input, e))?;
    let d = res.order.unwrap_or_else(|| prob.default_order());
    let r = solve_relaxation(&prob, d, &res.relax).map_err(|e| solve_err(input, e))?;
    let point = r.point().to_vec();
    let value = prob.objective.eval(&point).map_err(|e| solve_err(input, e))?;
    println!("order d = {d}");
    println!("bound = {:.12}", r.bound);
    println!(
        "point = {} ({})",
        fmt_vec(&point),
        if r.extracted.is_some() {
            "rank-one extraction"
        } else {
            "first-order moments"
        }
    );
    println!("rank ratio = {:.3e}", r.rank_ratio);
    let result = PolyResult {
        sense: format!("{sense:?}").to_lowercase(),
        n: prob.n(),
        order: d,
        bound: r.bound,
        point,
        extracted: r.extracted.is_some(),
        value_at_point: value,
        rank_ratio: r.rank_ratio,
        certified: r.certified,
        solver: SolverDoc {
            status: format!("{:?}", r.solver.status),
            iterations: r.solver.iterations,
            duality_gap: r.solver.duality_gap,
        },
        complexity: ComplexityDoc::new(prob.n(), prob.constraints.len(), d),
    };
    let opts = RunOptions {
        order: Some(d),
        eps: None,
        feas_tol: res.relax.sdp.feas_tol,
        gap_tol: res.relax.sdp.gap_tol,
        max_outer: None,
        oracle: false,
        seed: out.seed,
    };
    Ok(Report::new(
        "solve-poly",
        Some(&input.display().to_string()),
        opts,
        RunResult::Poly(result),
    ))
}

fn solve_frac(
    input: &Path,
    solver: &SolverFlags,
    outer: &OuterFlags,
    out: &OutputFlags,
) -> Result<Report, CliError> {
    let file = load_problem(input)?;
    let Objective::Fraction {
        numerator,
        denominator,
    } = file.objective.clone()
    else {
        return Err(CliError::Usage(format!(
            "{}: objective is a polynomial; use solve-poly",
            input.display()
        )));
    };
    if file.sense == Some(Sense::Minimize) {
        return Err(CliError::Usage(format!(
            "{}: fractional problems are maximized; negate the numerator to minimize",
            input.display()
        )));
    }
    let res = resolve(solver, Some(outer), &file.options)?;
    let prob = FractionalProblem::new(numerator, denominator, file.constraints.clone())
        .map_err(|e| solve_err(input, e))?;
    let d = res.order.unwrap_or_else(|| prob.default_order());
    let dopts = DinkelbachOptions {
        eps: res.eps,
        d: Some(d),
        max_outer: res.max_outer,
        relax: res.relax.clone(),
        ..DinkelbachOptions::default()
    };
    let r = dinkelbach::solve(&prob, &dopts).map_err(|e| solve_err(input, e))?;
    if let Some(path) = &outer.trace {
        emit_trace_csv(path, &r.trace)?;
    }
    let fx = prob.numerator.eval(&r.x).map_err(|e| solve_err(input, e))?;
    let gx = prob.denominator.eval(&r.x).map_err(|e| solve_err(input, e))?;
    println!("order d = {d}");
    for rec in &r.trace.records {
        println!("k = {:2}  lambda = {:.12}  F = {:+.3e}", rec.k, rec.lambda, rec.f_value);
    }
    println!("lambda* = {:.12} at x = {}", r.lambda, fmt_vec(&r.x));
    let result = FracResult {
        n: prob.n(),
        order: d,
        lambda: r.lambda,
        x: r.x.clone(),
        numerator_at_x: fx,
        denominator_at_x: gx,
        certified: r.certified,
        trace: TraceSummary::new(&r.trace),
        complexity: ComplexityDoc::new(prob.n(), prob.constraints.len(), d),
    };
    let opts = RunOptions {
        order: Some(d),
        eps: Some(res.eps),
        feas_tol: res.relax.sdp.feas_tol,
        gap_tol: res.relax.sdp.gap_tol,
        max_outer: Some(res.max_outer),
        oracle: false,
        seed: out.seed,
    };
    Ok(Report::new(
        "solve-frac",
        Some(&input.display().to_string()),
        opts,
        RunResult::Fractional(result),
    ))
}

/// Position of the first occurrence of `"token"` in `text`, else the start.
fn locate(text: &str, token: &str) -> (usize, usize) {
    text.find(&format!("\"{token}\""))
        .map_or((1, 1), |off| line_col(text, off))
}

fn ee_config_error(path: &str, text: &str, e: EeError) -> CliError {
    let token = match &e {
        EeError::BadKey(k) => Some(k.clone()),
        EeError::Unsupported { key, .. } | EeError::NonFinite { key, .. } => Some(key.clone()),
        EeError::Param { name, .. } => Some(name.to_string()),
        EeError::Missing(which) => Some(which.to_string()),
        _ => None,
    };
    match token {
        Some(t) => {
            let (line, column) = locate(text, &t);
            CliError::Schema {
                path: path.into(),
                line,
                column,
                message: e.to_string(),
            }
        }
        None => CliError::Solve {
            path: path.into(),
            message: e.to_string(),
        },
    }
}

fn solve_ee_cmd(
    config: &Path,
    solver: &SolverFlags,
    outer: &OuterFlags,
    oracle: bool,
    grid: Option<&Path>,
    out: &OutputFlags,
) -> Result<Report, CliError> {
    let path = config.display().to_string();
    let text = read(config)?;
    let cfg: EeConfig = serde_json::from_str(&text).map_err(|e| {
        let msg = e.to_string();
        CliError::Schema {
            path: path.clone(),
            line: e.line(),
            column: e.column(),
            message: msg.rfind(" at line ").map_or(msg.clone(), |i| msg[..i].to_string()),
        }
    })?;
    let prob = load_objective(&cfg).map_err(|e| ee_config_error(&path, &text, e))?;
    let res = resolve(solver, Some(outer), &Default::default())?;
    let d = res.order.unwrap_or(DEFAULT_ORDER);
    let run_oracle = oracle || grid.is_some();
    let opts = EeOptions {
        d,
        dinkelbach: DinkelbachOptions {
            eps: res.eps,
            max_outer: res.max_outer,
            relax: res.relax.clone(),
            ..DinkelbachOptions::default()
        },
        oracle: run_oracle,
    };
    let sol = solve_ee(&prob, &opts).map_err(|e| solve_err(config, e))?;
    if let Some(p) = &outer.trace {
        emit_trace_csv(p, &sol.dinkelbach.trace)?;
    }
    if let (Some(p), Some(o)) = (grid, &sol.oracle) {
        emit_grid_csv(p, &o.points)?;
    }
    let (k, m) = sol.continuous;
    println!("order d = {d}");
    for rec in &sol.dinkelbach.trace.records {
        println!("k = {:2}  lambda = {:.12}  F = {:+.3e}", rec.k, rec.lambda, rec.f_value);
    }
    println!("continuous (K, M) = ({k:.4}, {m:.4}), EE = {:.9}", sol.ee_continuous);
    match (sol.rounding.chosen, sol.ee_rounded) {
        (Some((rk, rm)), Some(ee)) => println!("rounded (K, M) = ({rk}, {rm}), EE = {ee:.9}"),
        _ => println!("rounded point and its axis neighbours are infeasible"),
    }
    let epsilon_trace = match &sol.oracle {
        Some(o) => {
            println!("grid optimum (K, M) = ({}, {}), EE = {:.9}", o.best.k, o.best.m, o.best.ee);
            Some(relative_error(&sol.dinkelbach.trace, o.best.ee).map_err(|e| solve_err(config, e))?)
        }
        None => None,
    };
    if let Some(eps) = sol.epsilon {
        println!("epsilon = {eps:.3e}");
    }
    let frac_m = prob.scaled_fractional().constraints.len();
    let mut complexity = ComplexityDoc::new(2, frac_m, d);
    if d == DEFAULT_ORDER {
        complexity = complexity.with_quoted(QUOTED_EE_BASIS);
    }
    let result = EeResult {
        order: d,
        source: prob.source.clone(),
        continuous: PointDoc {
            k,
            m,
            ee: sol.ee_continuous,
        },
        nearest: [sol.rounding.nearest.0, sol.rounding.nearest.1],
        nearest_feasible: sol.rounding.nearest_feasible,
        rounded: sol.rounding.chosen.zip(sol.ee_rounded).map(|((rk, rm), ee)| PointDoc {
            k: rk as f64,
            m: rm as f64,
            ee,
        }),
        lambda: sol.dinkelbach.lambda,
        certified: sol.certified(),
        trace: TraceSummary::new(&sol.dinkelbach.trace),
        oracle: sol.oracle.as_ref().map(|o| PointDoc {
            k: o.best.k as f64,
            m: o.best.m as f64,
            ee: o.best.ee,
        }),
        epsilon: sol.epsilon,
        epsilon_trace,
        complexity,
    };
    let opts = RunOptions {
        order: Some(d),
        eps: Some(res.eps),
        feas_tol: res.relax.sdp.feas_tol,
        gap_tol: res.relax.sdp.gap_tol,
        max_outer: Some(res.max_outer),
        oracle: run_oracle,
        seed: out.seed,
    };
    Ok(Report::new("solve-ee", Some(&path), opts, RunResult::Ee(result)))
}

fn sampled_min(p: &Polynomial<f64>, seed: u64, count: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0; p.n()];
    (0..count).fold(f64::INFINITY, |best, _| {
        for v in x.iter_mut() {
            *v = rng.gen_range(-3.0..=3.0);
        }
        best.min(p.eval(&x).expect("dimension matches"))
    })
}

fn certify_sos(input: &Path, out: &OutputFlags) -> Result<Report, CliError> {
    let file = load_problem(input)?;
    let Objective::Poly(p) = &file.objective else {
        return Err(CliError::Usage(format!(
            "{}: certify-sos takes a polynomial objective",
            input.display()
        )));
    };
    if !file.constraints.is_empty() {
        return Err(CliError::Usage(format!(
            "{}: certify-sos takes an unconstrained polynomial",
            input.display()
        )));
    }
    let sampled = sampled_min(p, out.seed, SOS_SAMPLES);
    let result = match sos_decompose(p) {
        Ok(cert) => {
            let err = cert.reconstruction_error(p);
            let squares = cert.factor().len();
            println!("SOS: {squares} squares, reconstruction error {err:.3e}");
            SosResult {
                n: p.n(),
                degree: p.degree(),
                sos: true,
                reason: None,
                squares: Some(squares),
                reconstruction_error: Some(err),
                min_eigenvalue: Some(cert.min_eigenvalue()),
                certificate: Some(SosCertificateDoc::from_certificate(&cert)),
                sampled_min: sampled,
                samples: SOS_SAMPLES,
            }
        }
        Err(SosError::NotSos(reason)) => {
            println!("not SOS: {reason:?}");
            SosResult {
                n: p.n(),
                degree: p.degree(),
                sos: false,
                reason: Some(format!("{reason:?}")),
                squares: None,
                reconstruction_error: None,
                min_eigenvalue: None,
                certificate: None,
                sampled_min: sampled,
                samples: SOS_SAMPLES,
            }
        }
        Err(e) => return Err(solve_err(input, e)),
    };
    println!("min over {SOS_SAMPLES} sampled points: {sampled:.6e}");
    let opts = RunOptions {
        order: None,
        eps: None,
        feas_tol: fracpoly::sosdual::PSD_TOL,
        gap_tol: fracpoly::sosdual::RECONSTRUCTION_TOL,
        max_outer: None,
        oracle: false,
        seed: out.seed,
    };
    Ok(Report::new(
        "certify-sos",
        Some(&input.display().to_string()),
        opts,
        RunResult::Sos(result),
    ))
}

/// `(x₂ − 2)² + 2x₁² + x₁x₂ + 5`, expanded.
pub fn example1_polynomial() -> Polynomial<f64> {
    Polynomial::from_pairs(
        2,
        &[
            (&[0, 0], 9.0),
            (&[0, 1], -4.0),
            (&[2, 0], 2.0),
            (&[1, 1], 1.0),
            (&[0, 2], 1.0),
        ],
    )
    .expect("valid polynomial")
}

fn label(alpha: &[u32]) -> String {
    let parts: Vec<String> = alpha.iter().map(u32::to_string).collect();
    format!("y_{}", parts.join(","))
}

fn example1(out: &OutputFlags) -> Result<Report, CliError> {
    let p = example1_polynomial();
    let d = 1;
    let basis = enumerate_basis(2, 2 * d).expect("small basis");
    let coeffs = p.to_coeff_vector(&basis).expect("degree 2");
    let index = MomentIndexMap::new(2, d).expect("order 1");
    let spec = moment_matrix_spec::<f64>(2, d).expect("order 1");
    let side = spec.side();
    let matrix: Vec<Vec<String>> = (0..side)
        .map(|i| {
            (0..side)
                .map(|j| {
                    let pos = spec.entry(i, j)[0].1;
                    label(index.y_basis().get(pos).exponents())
                })
                .collect()
        })
        .collect();
    let prob = PolyProblem::new(Sense::Minimize, p.clone(), vec![]).expect("unconstrained");
    let r = solve_relaxation(&prob, d, &RelaxOptions::default()).map_err(|e| solve_err(Path::new("example1"), e))?;
    let published = [-1.0, 2.0];
    let at_published = p.eval(&published).expect("two variables");
    let erratum = vec![
        format!(
            "the published Example 1 states x* = (-1, 2), but p(-1, 2) = {at_published}, above the optimum 31/7 = {:.6}; \
             the gradient there is (-2, -1), not zero",
            31.0 / 7.0
        ),
        "the published coefficient vector [9, 0, -4, 2, 1, 2] has p_(0,2) = 2, but (x2 - 2)^2 contributes \
         x2^2 once, so p_(0,2) = 1"
            .to_string(),
        "with the printed coefficients the optimum would be 103/15 at (-4/15, 16/15); neither matches (-1, 2)".to_string(),
    ];
    let basis_list: Vec<Vec<u32>> = basis.entries().iter().map(|a| a.exponents().to_vec()).collect();
    let shown: Vec<String> = basis_list
        .iter()
        .map(|a| format!("({},{})", a[0], a[1]))
        .collect();
    println!("basis N^2_2 = [{}]", shown.join(", "));
    println!("p_alpha = {coeffs:?}");
    println!("moment matrix M_1(y): {side}x{side}");
    for row in &matrix {
        println!("  [{}]", row.join("  "));
    }
    println!("bound = {:.12} (31/7 = {:.12})", r.bound, 31.0 / 7.0);
    println!("point = {} (exact (-4/7, 16/7))", fmt_vec(r.point()));
    println!("certified = {}", r.certified);
    for line in &erratum {
        println!("erratum: {line}");
    }
    let result = Example1Result {
        basis: basis_list,
        coefficients: coeffs,
        moment_matrix: matrix,
        order: d,
        bound: r.bound,
        bound_exact: "31/7".into(),
        point: r.point().to_vec(),
        point_exact: ["-4/7".into(), "16/7".into()],
        certified: r.certified,
        erratum,
    };
    let defaults = RelaxOptions::default();
    let opts = RunOptions {
        order: Some(d),
        eps: None,
        feas_tol: defaults.sdp.feas_tol,
        gap_tol: defaults.sdp.gap_tol,
        max_outer: None,
        oracle: false,
        seed: out.seed,
    };
    Ok(Report::new("example1", None, opts, RunResult::Example1(result)))
}
