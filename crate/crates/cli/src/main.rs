//! `neumann-mps`: tension sweeps, eigenvalue solves, mode rasters and the disc
//! identity checks.

mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use neumann_mps::assembly::{Discretization, Problem, DEFAULT_EPS_H, DEFAULT_EPS_SVD};
use neumann_mps::disc::{identity_suite, quasi_orth_gram_norm, BesselProvider, StdBessel};
use neumann_mps::error::Error;
use neumann_mps::field::rasterize_mode;
use neumann_mps::geometry::RadialCurve;
use neumann_mps::search::{
    localize_minimum, sweep, BoundConstants, EigenResult, SearchOptions, C_ENNENBACH, C_EST,
    DEFAULT_MAX_EVALS, DEFAULT_TOL,
};

use report::{csv_writer, fmt, num, write_json};

const EXIT_VALIDATION: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

/// Frequency centres of the quasi-orthogonality scan.
const QUASI_CENTRES: [f64; 3] = [20.0, 40.0, 80.0];
/// Allowed range of the quasi-orthogonality norm and its largest spread.
const QUASI_RANGE: (f64, f64) = (0.3, 6.0);
const QUASI_SPREAD: f64 = 2.0;

#[derive(Parser)]
#[command(name = "neumann-mps", version, about = "Neumann eigenvalues of smooth planar domains by the method of particular solutions")]
struct Cli {
    /// File of key=value lines that pre-populate flags; explicit flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimum tension at equispaced frequencies.
    #[command(args_override_self = true)]
    Sweep(SweepArgs),
    /// Localize an eigenfrequency in a bracket and report inclusion bounds.
    #[command(args_override_self = true)]
    Solve(SolveArgs),
    /// Sample the trial function of a converged frequency on a raster.
    #[command(args_override_self = true)]
    Mode(ModeArgs),
    /// Unit-disc norm identities and quasi-orthogonality scan.
    #[command(name = "disc-check", args_override_self = true)]
    DiscCheck(DiscCheckArgs),
}

#[derive(Args)]
struct Discretize {
    /// radial:a0=<f>,eps=<f>,k=<int>,b=<f>[,warp=sin|cos], trig:<path>, reference or circle.
    #[arg(long)]
    curve: String,
    /// Boundary nodes (multiple of 4).
    #[arg(long = "M")]
    m: usize,
    /// Charge points.
    #[arg(long = "N")]
    n: usize,
    /// Imaginary shift of the charge curve.
    #[arg(long)]
    tau: f64,
    /// Relative eigenvalue cutoff of the interior-norm factor.
    #[arg(long, default_value_t = DEFAULT_EPS_H)]
    eps_h: f64,
    /// Relative singular-value cutoff of the stacked SVD.
    #[arg(long, default_value_t = DEFAULT_EPS_SVD)]
    eps_svd: f64,
}

impl Discretize {
    fn problem(&self) -> Result<Problem, Error> {
        let curve = RadialCurve::parse_spec(&self.curve)?;
        let params = Discretization {
            eps_h: self.eps_h,
            eps_svd: self.eps_svd,
            ..Discretization::new(self.m, self.n, self.tau)
        };
        Problem::new(curve, params)
    }
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    disc: Discretize,
    #[arg(long)]
    fmin: f64,
    #[arg(long)]
    fmax: f64,
    #[arg(long)]
    steps: usize,
    /// Output CSV (`-` for standard output).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    disc: Discretize,
    /// Lower end of the frequency bracket.
    #[arg(long)]
    f0: f64,
    /// Upper end of the frequency bracket.
    #[arg(long)]
    f1: f64,
    /// Relative stopping tolerance on E.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Tension evaluations allowed per localized minimum.
    #[arg(long, default_value_t = DEFAULT_MAX_EVALS)]
    max_evals: usize,
    /// Constant of the new inclusion bound.
    #[arg(long, default_value_t = C_EST)]
    cest: f64,
    /// Constant of the classical inclusion bound.
    #[arg(long, default_value_t = C_ENNENBACH)]
    cenn: f64,
    /// Output JSON (`-` for standard output).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ModeArgs {
    #[command(flatten)]
    disc: Discretize,
    /// Eigenfrequency √E, typically from `solve`.
    #[arg(long)]
    freq: f64,
    /// Raster points per side.
    #[arg(long)]
    nx: usize,
    /// Output CSV (`-` for standard output).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DiscCheckArgs {
    #[arg(long, default_value_t = 60)]
    nmax: u32,
    #[arg(long, default_value_t = 5)]
    lmax: u32,
    /// Circle grid size for the quasi-orthogonality Gram matrices.
    #[arg(long, default_value_t = 1024)]
    grid: usize,
    /// Report CSV (`-` for standard output).
    #[arg(long, default_value = "-")]
    out: PathBuf,
    /// Multiply J_n(x) by 1 + δ·x (fault injection).
    #[arg(long, hide = true)]
    perturb_bessel: Option<f64>,
}

/// Command failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidCurve(_)
            | Error::InvalidParameter(_)
            | Error::Parse { .. }
            | Error::ChargePlacement { .. } => EXIT_USAGE,
            Error::IdentityViolation { .. } => EXIT_VALIDATION,
            _ => EXIT_NUMERICAL,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: EXIT_NUMERICAL,
            message: format!("output: {e}"),
        }
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure {
            code: EXIT_NUMERICAL,
            message: format!("output: {e}"),
        }
    }
}

fn run_sweep(a: &SweepArgs) -> Result<(), Failure> {
    if a.steps < 2 {
        return Err(Failure::usage(format!("--steps must be at least 2, got {}", a.steps)));
    }
    let problem = a.disc.problem()?;
    let points = sweep(&problem, a.fmin, a.fmax, a.steps)?;
    let mut w = csv_writer(&a.out)?;
    w.write_record(["sqrtE", "tension_min", "rank_eps", "c_min"])?;
    let mut failed = Vec::new();
    for p in &points {
        match &p.outcome {
            Ok(s) => w.write_record([fmt(p.sqrt_e), fmt(s.t_min), s.rank_eps.to_string(), fmt(s.c_min)])?,
            Err(e) => {
                w.write_record([fmt(p.sqrt_e), String::new(), String::new(), String::new()])?;
                failed.push(format!("sqrtE = {}: {e}", fmt(p.sqrt_e)));
            }
        }
    }
    w.flush()?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_NUMERICAL,
            message: failed.join("\n"),
        })
    }
}

fn solve_json(r: &EigenResult, a: &SolveArgs, wall: f64) -> Value {
    let others: Vec<Value> = r
        .others
        .iter()
        .map(|c| json!({"sqrtE": num(c.sqrt_e), "t_min": num(c.t_min), "converged": c.converged}))
        .collect();
    json!({
        "sqrtE": num(r.sqrt_e),
        "E": num(r.e),
        "t_min": num(r.t_min),
        "t_classical": num(r.t_classical),
        "eps_new": num(r.eps_new),
        "eps_clas": num(r.eps_clas),
        "eps_new_rel": num(r.eps_new_rel()),
        "eps_clas_rel": num(r.eps_clas_rel()),
        "n_evals": r.n_evals,
        "n_scan": r.n_scan,
        "slope": num(r.slope),
        "slope_minus": num(r.slope_minus),
        "slope_plus": num(r.slope_plus),
        "weyl_index": num(r.weyl_index),
        "M": a.disc.m,
        "N": a.disc.n,
        "tau": num(a.disc.tau),
        "wall_seconds": num(wall),
        "converged": r.converged,
        "other_minima": others,
    })
}

fn run_solve(a: &SolveArgs) -> Result<(), Failure> {
    let start = Instant::now();
    let problem = a.disc.problem()?;
    let opts = SearchOptions {
        tol: a.tol,
        max_evals: a.max_evals,
        bounds: BoundConstants {
            c_est: a.cest,
            c_ennenbach: a.cenn,
        },
    };
    match localize_minimum(&problem, a.f0, a.f1, &opts) {
        Ok(r) => {
            write_json(&a.out, &solve_json(&r, a, start.elapsed().as_secs_f64()))?;
            Ok(())
        }
        Err(Error::ConvergenceFailure {
            best: Some(best), evals, ..
        }) => {
            write_json(&a.out, &solve_json(&best, a, start.elapsed().as_secs_f64()))?;
            Err(Failure {
                code: EXIT_NUMERICAL,
                message: format!(
                    "no converged minimum after {evals} evaluations (best sqrtE = {})",
                    fmt(best.sqrt_e)
                ),
            })
        }
        Err(e) => Err(e.into()),
    }
}

fn run_mode(a: &ModeArgs) -> Result<(), Failure> {
    let problem = a.disc.problem()?;
    let raster = rasterize_mode(&problem, a.freq, a.nx)?;
    let mut w = csv_writer(&a.out)?;
    w.write_record(["ix", "iy", "x", "y", "u"])?;
    for (g, u) in raster.grid.points.iter().zip(&raster.values) {
        w.write_record([g.ix.to_string(), g.iy.to_string(), fmt(g.p.x), fmt(g.p.y), fmt(*u)])?;
    }
    w.flush()?;
    eprintln!(
        "t_min = {} at sqrtE = {}, {} interior points",
        fmt(raster.sample.t_min),
        fmt(a.freq),
        raster.values.len()
    );
    Ok(())
}

struct Perturbed(f64);

impl BesselProvider for Perturbed {
    fn jn(&self, n: u32, x: f64) -> f64 {
        StdBessel.jn(n, x) * (1.0 + self.0 * x)
    }
}

fn run_disc_check(a: &DiscCheckArgs) -> Result<(), Failure> {
    let provider: Box<dyn BesselProvider> = match a.perturb_bessel {
        Some(d) => Box::new(Perturbed(d)),
        None => Box::new(StdBessel),
    };
    let rows = identity_suite(a.nmax, a.lmax, provider.as_ref())?;
    let mut w = csv_writer(&a.out)?;
    w.write_record(["n", "l", "parity", "mu", "h", "ratio", "expected", "rel_err", "weighted", "pass"])?;
    for r in &rows {
        let m = &r.mode;
        w.write_record([
            m.n.to_string(),
            m.l.to_string(),
            m.parity.name().to_string(),
            fmt(m.mu),
            fmt(m.h),
            fmt(r.ratio),
            fmt(r.expected),
            fmt(r.rel_err),
            r.weighted.map_or(String::new(), fmt),
            r.pass.to_string(),
        ])?;
    }
    w.flush()?;

    let norms = QUASI_CENTRES
        .iter()
        .map(|&c| quasi_orth_gram_norm(c, 1.0, a.grid))
        .collect::<Result<Vec<f64>, Error>>()?;
    let (lo, hi) = norms
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let quasi_ok = lo >= QUASI_RANGE.0 && hi <= QUASI_RANGE.1 && hi < QUASI_SPREAD * lo;
    let passed = rows.iter().filter(|r| r.pass).count();
    let ok = passed == rows.len() && quasi_ok;
    let norms_text: Vec<String> = QUASI_CENTRES
        .iter()
        .zip(&norms)
        .map(|(c, v)| format!("{c}:{v:.6}"))
        .collect();
    let summary = format!(
        "disc-check {}: identities {passed}/{}, quasi-orthogonality norms {}",
        if ok { "PASS" } else { "FAIL" },
        rows.len(),
        norms_text.join(" ")
    );
    if ok {
        eprintln!("{summary}");
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_VALIDATION,
            message: summary,
        })
    }
}

fn main() -> ExitCode {
    let args = match config::expand(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let outcome = match &cli.command {
        Command::Sweep(a) => run_sweep(a),
        Command::Solve(a) => run_solve(a),
        Command::Mode(a) => run_mode(a),
        Command::DiscCheck(a) => run_disc_check(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
