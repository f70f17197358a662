//! The `riemann-entropy` command line.

pub mod output;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use log::info;
use riemann_entropy::entropy::{coercivity_box, entropy, entropy_alt};
use riemann_entropy::fd_oracle::Comparison;
use riemann_entropy::verifier::default_tolerance;
use riemann_entropy::{
    compare, initial_point, minimize, solve_fd, verify, Error, FdParams, KktReport,
    MinimizeOptions, Minimum, PiecewiseProblem, SelfSimilarProfile, ValidatedProblem,
    VerificationReport,
};
use serde::Serialize;

use output::{fd_csv, fd_json, sample_csv, to_json};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Minimize the entropy and print the speeds.
    Solve,
    /// Solve and check the jump conditions of the resulting profile.
    Verify,
    /// Solve and tabulate the profile u(ξ).
    Sample,
    /// Solve, run the finite-volume solver and compare.
    Oracle,
    /// Everything above, written into the `--out` directory.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Parser)]
#[command(
    name = "riemann-entropy",
    version,
    about = "Entropy solutions of piecewise-constant Riemann problems"
)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Problem file: {"u": [...], "v": [...], "a": [...]}.
    #[arg(long)]
    pub problem: PathBuf,
    /// KKT tolerance of the minimizer.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    /// Verification tolerance [default: 1e-8·(1 + max|v|)·(β − α)].
    #[arg(long)]
    pub verify_tol: Option<f64>,
    /// Sampling window in ξ (or in x with --time).
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    pub window: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1001)]
    pub count: usize,
    /// Half-width of the finite-volume grid [default: smallest admissible].
    #[arg(long = "L")]
    pub half_width: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub h: f64,
    #[arg(long = "t-final", default_value_t = 1.0)]
    pub t_final: f64,
    #[arg(long, default_value_t = 0.4)]
    pub cfl: f64,
    /// Output file, or directory for `oracle` and `all`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Format of tabular output.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Sample u(t, x) = u(x/t) at this time instead of u(ξ).
    #[arg(long)]
    pub time: Option<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("verification failed (max residual {residual:e})")]
    Verification { residual: f64 },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification { .. } => 2,
            CliError::Core(Error::MaxIterationsExceeded { .. }) => 3,
            _ => 1,
        }
    }
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    xi: &'a [f64],
    #[serde(rename = "E")]
    e: f64,
    #[serde(rename = "E1")]
    e1: f64,
    kkt_report: &'a KktReport,
    iterations: usize,
}

#[derive(Serialize)]
struct OracleOutput<'a> {
    params: &'a FdParams,
    steps_taken: usize,
    #[serde(flatten)]
    comparison: &'a Comparison,
}

struct Solved {
    problem: ValidatedProblem,
    minimum: Minimum,
    profile: SelfSimilarProfile,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    fs::write(path, text).map_err(io_err(path))
}

/// Writes to `--out` when given, otherwise returns the text for stdout.
fn emit(out: &Option<PathBuf>, text: String) -> Result<Option<String>, CliError> {
    match out {
        Some(path) => write_file(path, &text).map(|_| None),
        None => Ok(Some(text)),
    }
}

fn solve(cli: &Cli) -> Result<Solved, CliError> {
    let text = fs::read_to_string(&cli.problem).map_err(io_err(&cli.problem))?;
    let problem = PiecewiseProblem::from_json(&text)?.validate()?;
    let options = MinimizeOptions {
        tol: cli.tol,
        max_iter: cli.max_iter,
        ..Default::default()
    };
    let minimum = minimize(&problem, &options)?;
    info!(
        "minimized in {} iterations, KKT violation {:e}",
        minimum.iterations, minimum.kkt.max_violation
    );
    let profile = SelfSimilarProfile::build(&problem, &minimum.xi)?;
    Ok(Solved {
        problem,
        minimum,
        profile,
    })
}

fn solve_json(s: &Solved) -> Result<String, CliError> {
    let xi = s.minimum.xi.as_slice();
    Ok(to_json(&SolveOutput {
        xi,
        e: entropy(&s.problem, xi)?,
        e1: entropy_alt(&s.problem, xi)?,
        kkt_report: &s.minimum.kkt,
        iterations: s.minimum.iterations,
    }))
}

fn verification(cli: &Cli, s: &Solved) -> VerificationReport {
    let tol = cli
        .verify_tol
        .unwrap_or_else(|| default_tolerance(&s.problem));
    verify(&s.profile, tol)
}

/// `[r1 − 1, r2 + 1]` from the coercivity box at the level of the initial
/// point; without unknowns, five diffusion widths around `v_0`.
fn default_window(problem: &ValidatedProblem) -> Result<(f64, f64), CliError> {
    if problem.d() == 0 {
        let (v, a) = (problem.v()[0], problem.a()[0]);
        return Ok((v - 5.0 * a - 1.0, v + 5.0 * a + 1.0));
    }
    let level = entropy(problem, &initial_point(problem))?;
    let b = coercivity_box(problem, level)?;
    Ok((b.r1 - 1.0, b.r2 + 1.0))
}

fn sample_text(cli: &Cli, s: &Solved, format: Format) -> Result<String, CliError> {
    let time = cli.time;
    if let Some(t) = time {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Usage(format!("--time {t} must be positive")));
        }
    }
    let scale = time.unwrap_or(1.0);
    let (lo, hi) = match &cli.window {
        Some(w) => (w[0] / scale, w[1] / scale),
        None => default_window(&s.problem)?,
    };
    let rows = s.profile.sample(lo, hi, cli.count)?;
    Ok(match format {
        Format::Csv => sample_csv(&rows, time),
        Format::Json => to_json(&rows),
    })
}

fn oracle(cli: &Cli, s: &Solved) -> Result<(String, String, Comparison), CliError> {
    let mut params = FdParams::for_problem(&s.problem, cli.h, cli.t_final, cli.cfl);
    if let Some(l) = cli.half_width {
        params.half_width = l;
    }
    let fd = solve_fd(&s.problem, &params)?;
    let comparison = compare(&fd, &s.profile)?;
    let grid = match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => fd_csv(&fd),
        Format::Json => fd_json(&fd),
    };
    let report = to_json(&OracleOutput {
        params: &params,
        steps_taken: fd.steps_taken,
        comparison: &comparison,
    });
    Ok((grid, report, comparison))
}

fn grid_name(cli: &Cli) -> &'static str {
    match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => "fd.csv",
        Format::Json => "fd.json",
    }
}

fn summary(s: &Solved, report: &VerificationReport, comparison: &Comparison) -> String {
    let mut text = String::new();
    let m = &s.minimum;
    let _ = writeln!(
        text,
        "intervals n = {}, unknowns d = {}",
        s.problem.n(),
        s.problem.d()
    );
    let _ = writeln!(
        text,
        "E = {:.12e} after {} iterations (KKT violation {:.3e})",
        m.energy, m.iterations, m.kkt.max_violation
    );
    let _ = writeln!(
        text,
        "verification: {} (max residual {:.3e}, tolerance {:.3e})",
        if report.passed { "passed" } else { "FAILED" },
        report.max_equality_residual,
        report.tolerance
    );
    let _ = writeln!(
        text,
        "finite volumes: l1 = {:.3e}, sup away from jumps = {:.3e}",
        comparison.l1_error, comparison.linf_error_away_from_jumps
    );
    let _ = writeln!(text);
    if report.per_jump.is_empty() {
        let _ = writeln!(text, "no discontinuities");
    }
    for j in &report.per_jump {
        let config = serde_json::to_value(j.configuration).expect("unit enum");
        let kind = serde_json::to_value(j.kind).expect("unit enum");
        let _ = writeln!(
            text,
            "xi_{}..xi_{}  c = {:+.10}  {} {}  u- = {:.6}  u+ = {:.6}",
            j.first,
            j.last,
            j.c,
            kind.as_str().unwrap_or("?"),
            config.as_str().unwrap_or("?"),
            j.u_minus,
            j.u_plus
        );
        for margin in &j.oleinik_margins {
            let _ = writeln!(
                text,
                "    Oleinik margin at u_{}: {:.6e}",
                margin.j, margin.margin
            );
        }
    }
    text
}

/// Runs one command. Text meant for stdout is returned.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    let s = solve(cli)?;
    match cli.command {
        Command::Solve => Ok(emit(&cli.out, solve_json(&s)?)?.unwrap_or_default()),
        Command::Verify => {
            let report = verification(cli, &s);
            let stdout = emit(&cli.out, to_json(&report))?.unwrap_or_default();
            if report.passed {
                Ok(stdout)
            } else {
                print!("{stdout}");
                Err(CliError::Verification {
                    residual: report.max_equality_residual,
                })
            }
        }
        Command::Sample => {
            let text = sample_text(cli, &s, cli.format.unwrap_or(Format::Csv))?;
            Ok(emit(&cli.out, text)?.unwrap_or_default())
        }
        Command::Oracle => {
            let (grid, report, _) = oracle(cli, &s)?;
            match &cli.out {
                Some(dir) => {
                    write_file(&dir.join(grid_name(cli)), &grid)?;
                    write_file(&dir.join("compare.json"), &report)?;
                    Ok(String::new())
                }
                None => Ok(report),
            }
        }
        Command::All => {
            let dir = cli
                .out
                .as_ref()
                .ok_or_else(|| CliError::Usage("`all` needs --out DIR".into()))?;
            let report = verification(cli, &s);
            let (grid, compare_json, comparison) = oracle(cli, &s)?;
            write_file(&dir.join("solve.json"), &solve_json(&s)?)?;
            write_file(&dir.join("verify.json"), &to_json(&report))?;
            write_file(
                &dir.join("profile.csv"),
                &sample_text(cli, &s, Format::Csv)?,
            )?;
            write_file(&dir.join(grid_name(cli)), &grid)?;
            write_file(&dir.join("compare.json"), &compare_json)?;
            write_file(&dir.join("summary.txt"), &summary(&s, &report, &comparison))?;
            if report.passed {
                Ok(String::new())
            } else {
                Err(CliError::Verification {
                    residual: report.max_equality_residual,
                })
            }
        }
    }
}
