//! Command-line driver.
//!
//! Exit codes: 0 on success, 1 for usage, configuration or input errors,
//! 2 when a numerical method fails (the reason is printed to standard error
//! as `error kind=<kind> detail="..."`).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{self, ReferenceKind, SweepProblem};
use crate::bounds::{self, SeriesControl, SpectralEnclosure};
use crate::dense::sym_min_eig;
use crate::error::{Error, Result};
use crate::krylov::{default_breakdown_tol, ArnoldiDecomposition, KrylovOptions, Step};
use crate::mm::{self, Symmetry};
use crate::oracle::{dense_phi_solve, DenseProblem};
use crate::phi_rt::{self, phi_rt_solve, projected_solution, residual_norm, ModeSelect, SolverConfig};
use crate::problems::{self, ProblemInstance, Source3d};
use crate::sparse::SparseMatrix;
use crate::vector::norm2;

#[derive(Debug, Parser)]
#[command(name = "phirt", version, about = "Krylov phi-function solver with residual-time restarting")]
struct Cli {
    /// Plain-text `key = value` file; keys are long flag names, command-line flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve y' = -Ay + g on [0, t] and print diagnostics.
    Solve(SolveArgs),
    /// Write a test problem as Matrix Market and vector files.
    Gen(GenArgs),
    /// Tabulate the a-priori residual bound against measured residuals.
    Bounds(BoundsArgs),
    /// Run a tolerance sweep and write CSV records.
    Bench(BenchArgs),
    /// Estimate the number of restarts from the a-priori bound.
    Estimate(EstimateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProblemName {
    Laplacian1d,
    Worst,
    Aniso3d,
    Convdiff2d,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SourceArg {
    Sine,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Auto,
    Arnoldi,
    Lanczos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReferenceArg {
    Auto,
    Oracle,
    #[value(name = "self")]
    SelfSolve,
    None,
}

#[derive(Debug, Clone, Args)]
struct ProblemArgs {
    /// Built-in problem generator (overrides --matrix/--g/--v0).
    #[arg(long, value_enum)]
    problem: Option<ProblemName>,
    /// Dimension for laplacian1d and worst.
    #[arg(long)]
    n: Option<usize>,
    /// Grid points per axis for aniso3d and convdiff2d.
    #[arg(long)]
    m: Option<usize>,
    /// Peclet number for convdiff2d.
    #[arg(long, default_value_t = 10.0)]
    pe: f64,
    #[arg(long, value_enum, default_value_t = SourceArg::Sine)]
    source: SourceArg,
}

#[derive(Debug, Clone, Args)]
struct InputArgs {
    /// Matrix Market file with A.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Vector file with g, one value per line.
    #[arg(long)]
    g: Option<PathBuf>,
    /// Vector file with the initial value (zero when absent).
    #[arg(long)]
    v0: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
struct SolverArgs {
    /// Absolute error budget over [0, t].
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 30)]
    kmax: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    mode: ModeArg,
    /// Full reorthogonalization of the Krylov basis.
    #[arg(long)]
    reorth: bool,
    #[arg(long)]
    max_restarts: Option<usize>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Final time (defaults to the generator's value).
    #[arg(long)]
    t: Option<f64>,
    /// Reference for the reported error; auto uses the dense oracle for small n.
    #[arg(long, value_enum, default_value_t = ReferenceArg::Auto)]
    reference: ReferenceArg,
    /// Write y to this vector file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    input: InputArgs,
    /// Half-length of the spectral segment (default ||A||_1 / 2).
    #[arg(long)]
    c: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 30)]
    kmax: usize,
    #[arg(long, default_value_t = 2)]
    kmin: usize,
    #[arg(long)]
    reorth: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    t: Option<f64>,
    /// Comma-separated tolerances.
    #[arg(long, value_delimiter = ',', default_value = "1e-3,1e-4,1e-5,1e-6")]
    sweep: Vec<f64>,
    #[arg(long, value_enum, default_value_t = ReferenceArg::Auto)]
    reference: ReferenceArg,
    /// Run sweep points one after another.
    #[arg(long)]
    sequential: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    /// Fit (c, rho) to the numerical range of the k_max-step Krylov projection.
    #[arg(long)]
    enclosure: bool,
    /// Total time interval.
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, default_value_t = 30)]
    kmax: usize,
    /// Absolute tolerance; the residual tolerance is tol / t.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Residual tolerance, overriding --tol.
    #[arg(long)]
    tol_r: Option<f64>,
}

/// Runs the CLI on `argv` (including the program name) with process stdio.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with_io(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with_io<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let args = match apply_config_file(args) {
        Ok(a) => a,
        Err(e) => return report(err, &e),
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Estimate(a) => cmd_estimate(a),
    };
    match result {
        Ok(text) => {
            let _ = write!(out, "{text}");
            0
        }
        Err(e) => report(err, &e),
    }
}

fn report(err: &mut dyn Write, e: &Error) -> i32 {
    let detail = e.to_string().replace('"', "'");
    let _ = writeln!(err, "error kind={} detail=\"{detail}\"", e.kind());
    if e.is_solver_failure() {
        2
    } else {
        1
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("config line {}: expected key = value", no + 1)))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(Error::Parse(format!("config line {}: empty key", no + 1)));
        }
        pairs.push((key, v.trim().to_string()));
    }
    Ok(pairs)
}

/// Appends flags from the `--config` file that are not given on the command line.
fn apply_config_file(mut args: Vec<OsString>) -> Result<Vec<OsString>> {
    let strs: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let mut path = None;
    for (i, a) in strs.iter().enumerate() {
        if a == "--config" {
            path = strs.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else { return Ok(args) };
    let text = std::fs::read_to_string(&path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
    let base = Path::new(&path).parent().map(Path::to_path_buf).unwrap_or_default();
    for (key, value) in parse_config(&text)? {
        let flag = format!("--{key}");
        let present = strs.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")));
        if present || key == "config" {
            continue;
        }
        match value.as_str() {
            "true" => args.push(flag.into()),
            "false" => {}
            _ => {
                // relative file paths are resolved against the config file's directory
                let value = if matches!(key.as_str(), "matrix" | "g" | "v0") && Path::new(&value).is_relative() {
                    base.join(&value).to_string_lossy().into_owned()
                } else {
                    value
                };
                args.push(format!("{flag}={value}").into());
            }
        }
    }
    Ok(args)
}

fn generate(p: &ProblemArgs) -> Result<Option<ProblemInstance>> {
    let need = |v: Option<usize>, flag: &str| v.ok_or_else(|| Error::InvalidArgument(format!("--{flag} is required")));
    let inst = match p.problem {
        None => return Ok(None),
        Some(ProblemName::Laplacian1d) => problems::gen_laplacian_1d(need(p.n, "n")?)?,
        Some(ProblemName::Worst) => problems::gen_worst_case(need(p.n, "n")?)?,
        Some(ProblemName::Aniso3d) => {
            let src = match p.source {
                SourceArg::Sine => Source3d::Sine,
                SourceArg::Gaussian => Source3d::Gaussian,
            };
            problems::gen_aniso_diffusion_3d(need(p.m, "m")?, src)?
        }
        Some(ProblemName::Convdiff2d) => problems::gen_conv_diff_2d(need(p.m, "m")?, p.pe)?,
    };
    Ok(Some(inst))
}

/// Problem from a generator, or from files (`A.mtx`, `g.txt`, optional `v0.txt` by default).
fn load_problem(p: &ProblemArgs, input: &InputArgs) -> Result<(ProblemInstance, bool)> {
    if let Some(inst) = generate(p)? {
        return Ok((inst, true));
    }
    let matrix = input.matrix.clone().unwrap_or_else(|| PathBuf::from("A.mtx"));
    let gpath = input.g.clone().unwrap_or_else(|| PathBuf::from("g.txt"));
    let a = mm::read_matrix_market(&matrix)?;
    let g = mm::read_vector(&gpath)?;
    let v0 = match &input.v0 {
        Some(path) => mm::read_vector(path)?,
        None if Path::new("v0.txt").exists() && input.matrix.is_none() => mm::read_vector(Path::new("v0.txt"))?,
        None => vec![0.0; a.n()],
    };
    if g.len() != a.n() || v0.len() != a.n() {
        return Err(Error::InvalidArgument(format!(
            "vector lengths g = {}, v0 = {} do not match n = {}",
            g.len(),
            v0.len(),
            a.n()
        )));
    }
    let label = matrix.display().to_string();
    Ok((ProblemInstance { a, g, v0, t_final: f64::NAN, label }, false))
}

fn final_time(t: Option<f64>, inst: &ProblemInstance, generated: bool) -> Result<f64> {
    let t = match t {
        Some(t) => t,
        None if generated => inst.t_final,
        None => return Err(Error::InvalidArgument("--t is required".into())),
    };
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("t must be positive, got {t}")));
    }
    Ok(t)
}

fn solver_config(s: &SolverArgs) -> Result<SolverConfig> {
    let mut cfg = SolverConfig::with_tol(s.tol);
    cfg.k_max = s.kmax;
    cfg.reorthogonalize = s.reorth;
    cfg.mode = match s.mode {
        ModeArg::Auto => ModeSelect::Auto,
        ModeArg::Arnoldi => ModeSelect::Arnoldi,
        ModeArg::Lanczos => ModeSelect::Lanczos,
    };
    if let Some(m) = s.max_restarts {
        cfg.max_restarts = m;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn resolve_reference(r: ReferenceArg, n: usize) -> Option<ReferenceKind> {
    match r {
        ReferenceArg::Auto => match ReferenceKind::auto(n) {
            ReferenceKind::Oracle => Some(ReferenceKind::Oracle),
            ReferenceKind::SelfSolve => None,
        },
        ReferenceArg::Oracle => Some(ReferenceKind::Oracle),
        ReferenceArg::SelfSolve => Some(ReferenceKind::SelfSolve),
        ReferenceArg::None => None,
    }
}

fn cmd_solve(a: SolveArgs) -> Result<String> {
    let (inst, generated) = load_problem(&a.problem, &a.input)?;
    let t = final_time(a.t, &inst, generated)?;
    let cfg = solver_config(&a.solver)?;
    let outcome = phi_rt_solve(&inst.a, &inst.v0, &inst.g, t, &cfg)?;
    let mut s = String::new();
    let _ = writeln!(s, "problem={}", inst.label);
    let _ = writeln!(s, "n={}", inst.a.n());
    let _ = writeln!(s, "mode={:?}", outcome.mode);
    let _ = writeln!(s, "t={t:e}");
    let _ = writeln!(s, "tol={:e}", cfg.tol);
    let _ = writeln!(s, "kmax={}", cfg.k_max);
    let _ = writeln!(s, "converged={}", outcome.converged);
    let _ = writeln!(s, "restarts={}", outcome.restarts);
    let _ = writeln!(s, "matvecs={}", outcome.matvecs);
    let _ = writeln!(s, "y_norm={:e}", norm2(&outcome.y));
    if let Some(kind) = resolve_reference(a.reference, inst.a.n()) {
        let y_ref = match kind {
            ReferenceKind::Oracle => dense_phi_solve(&DenseProblem::from_sparse(&inst.a, &inst.v0, &inst.g, t)?)?,
            ReferenceKind::SelfSolve => {
                bench::reference_solution(SweepProblem { a: &inst.a, v0: &inst.v0, g: &inst.g, t }, kind, &cfg)?
            }
        };
        let diff: Vec<f64> = outcome.y.iter().zip(&y_ref).map(|(x, y)| x - y).collect();
        let _ = writeln!(s, "reference={}", kind.label());
        let _ = writeln!(s, "error_abs={:e}", norm2(&diff));
        let _ = writeln!(s, "error_rel={:e}", phi_rt::relative_error(&outcome.y, &y_ref));
    }
    if let Some(path) = &a.out {
        mm::write_vector(path, &outcome.y)?;
        let _ = writeln!(s, "wrote={}", path.display());
    }
    Ok(s)
}

fn cmd_gen(a: GenArgs) -> Result<String> {
    let inst = generate(&a.problem)?.ok_or_else(|| Error::InvalidArgument("--problem is required".into()))?;
    std::fs::create_dir_all(&a.out)?;
    let symmetry = if inst.a.is_symmetric(0.0) { Symmetry::Symmetric } else { Symmetry::General };
    mm::write_matrix_market(&a.out.join("A.mtx"), &inst.a, symmetry)?;
    mm::write_vector(&a.out.join("g.txt"), &inst.g)?;
    mm::write_vector(&a.out.join("v0.txt"), &inst.v0)?;
    let conf = format!(
        "# {}\nmatrix = A.mtx\ng = g.txt\nv0 = v0.txt\nt = {:e}\n",
        inst.label, inst.t_final
    );
    std::fs::write(a.out.join("problem.conf"), conf)?;
    let mut s = String::new();
    let _ = writeln!(s, "problem={}", inst.label);
    let _ = writeln!(s, "n={}", inst.a.n());
    let _ = writeln!(s, "nnz={}", inst.a.nnz());
    let _ = writeln!(s, "dir={}", a.out.display());
    Ok(s)
}

fn optional_problem(p: &ProblemArgs, input: &InputArgs) -> Result<Option<(ProblemInstance, bool)>> {
    if p.problem.is_none() && input.matrix.is_none() {
        return Ok(None);
    }
    load_problem(p, input).map(Some)
}

fn cmd_bounds(a: BoundsArgs) -> Result<String> {
    if a.kmin < 2 || a.kmax < a.kmin {
        return Err(Error::InvalidArgument("need 2 <= kmin <= kmax".into()));
    }
    if !(a.t >= 0.0) {
        return Err(Error::InvalidArgument("t must be nonnegative".into()));
    }
    let problem = optional_problem(&a.problem, &a.input)?;
    let c = match (a.c, &problem) {
        (Some(c), _) => c,
        (None, Some((inst, _))) => 0.5 * inst.a.one_norm(),
        (None, None) => return Err(Error::InvalidArgument("--c or a problem is required".into())),
    };
    let enc = SpectralEnclosure::new(c, a.rho)?;
    let ctl = SeriesControl::default();
    let measured = match &problem {
        Some((inst, _)) => Some(measured_residuals(inst, a.kmax, a.t, a.reorth)?),
        None => None,
    };
    let mut s = String::new();
    let _ = writeln!(s, "# phirt-bounds v1 c={c:e} rho={:e} t={:e}", a.rho, a.t);
    let _ = writeln!(s, "{}", if measured.is_some() { "k,bound,residual" } else { "k,bound" });
    for k in a.kmin..=a.kmax {
        let b = bounds::residual_bound_ellipse(k, &enc, a.t, &ctl)?;
        match &measured {
            Some(r) => match r.get(k - 1) {
                Some(v) => {
                    let _ = writeln!(s, "{k},{b:e},{v:e}");
                }
                None => break,
            },
            None => {
                let _ = writeln!(s, "{k},{b:e}");
            }
        }
    }
    if let Some(path) = &a.out {
        std::fs::write(path, &s)?;
        return Ok(format!("wrote={}\n", path.display()));
    }
    Ok(s)
}

/// `||r_k(t)|| / beta` for `k = 1..` until `kmax` or an invariant subspace.
fn measured_residuals(inst: &ProblemInstance, kmax: usize, t: f64, reorth: bool) -> Result<Vec<f64>> {
    let a = &inst.a;
    let mode = phi_rt::resolve_mode(a, &SolverConfig::default());
    let opts = KrylovOptions { mode, reorthogonalize: reorth, breakdown_tol: default_breakdown_tol(a.one_norm()) };
    let av = a.matvec(&inst.v0)?;
    let r0: Vec<f64> = inst.g.iter().zip(&av).map(|(g, x)| g - x).collect();
    let mut dec = ArnoldiDecomposition::start(a, &r0, opts)?;
    let mut out = Vec::new();
    while dec.k() < kmax.min(a.n()) {
        let step = dec.extend(a)?;
        let u = projected_solution(&dec, t)?;
        out.push(residual_norm(&dec, &u) / dec.beta());
        if step == Step::HappyBreakdown {
            break;
        }
    }
    Ok(out)
}

fn cmd_bench(a: BenchArgs) -> Result<String> {
    let (inst, generated) = load_problem(&a.problem, &a.input)?;
    let t = final_time(a.t, &inst, generated)?;
    let cfg = solver_config(&a.solver)?;
    if a.sweep.is_empty() || a.sweep.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::InvalidArgument("--sweep needs positive tolerances".into()));
    }
    let kind = match a.reference {
        ReferenceArg::Auto => ReferenceKind::auto(inst.a.n()),
        ReferenceArg::Oracle => ReferenceKind::Oracle,
        ReferenceArg::SelfSolve => ReferenceKind::SelfSolve,
        ReferenceArg::None => return Err(Error::InvalidArgument("bench needs a reference".into())),
    };
    let sp = SweepProblem { a: &inst.a, v0: &inst.v0, g: &inst.g, t };
    let y_ref = bench::reference_solution(sp, kind, &cfg)?;
    let records = if a.sequential {
        bench::sweep_sequential(sp, &a.sweep, &cfg, &y_ref)?
    } else {
        bench::sweep(sp, &a.sweep, &cfg, &y_ref)?
    };
    let csv = bench::format_csv(&records);
    if let Some(path) = &a.out {
        std::fs::write(path, &csv)?;
        return Ok(format!("wrote={}\nreference={}\n", path.display(), kind.label()));
    }
    Ok(csv)
}

fn cmd_estimate(a: EstimateArgs) -> Result<String> {
    let problem = optional_problem(&a.problem, &a.input)?;
    let t = match (a.t, &problem) {
        (Some(t), _) => t,
        (None, Some((inst, true))) => inst.t_final,
        _ => return Err(Error::InvalidArgument("--t is required".into())),
    };
    if !(t > 0.0) {
        return Err(Error::InvalidArgument("t must be positive".into()));
    }
    let tol_r = a.tol_r.unwrap_or(a.tol / t);
    let mut s = String::new();
    let enc = match (&problem, a.enclosure) {
        (Some((inst, _)), true) => {
            let h = krylov_projection(inst, a.kmax)?;
            let _ = writeln!(s, "omega_k={:e}", sym_min_eig(&h)?);
            bounds::estimate_enclosure(&h)?
        }
        (None, true) => return Err(Error::InvalidArgument("--enclosure needs a problem or matrix".into())),
        (Some((inst, _)), false) => SpectralEnclosure::new(a.c.unwrap_or(0.5 * inst.a.one_norm()), a.rho)?,
        (None, false) => {
            let c = a.c.ok_or_else(|| Error::InvalidArgument("--c or a problem is required".into()))?;
            SpectralEnclosure::new(c, a.rho)?
        }
    };
    let est = bounds::estimate_restarts(&enc, t, a.kmax, tol_r, &SeriesControl::default())?;
    let _ = writeln!(s, "c={:e}", enc.c);
    let _ = writeln!(s, "rho={:e}", enc.rho);
    let _ = writeln!(s, "t={t:e}");
    let _ = writeln!(s, "kmax={}", a.kmax);
    let _ = writeln!(s, "tol_r={tol_r:e}");
    let _ = writeln!(s, "delta={:e}", est.delta);
    let _ = writeln!(s, "restarts={}", est.restarts);
    Ok(s)
}

fn krylov_projection(inst: &ProblemInstance, kmax: usize) -> Result<crate::dense::DenseMatrix> {
    let a: &SparseMatrix = &inst.a;
    let mode = phi_rt::resolve_mode(a, &SolverConfig::default());
    let opts = KrylovOptions::for_matrix(a, mode);
    let av = a.matvec(&inst.v0)?;
    let r0: Vec<f64> = inst.g.iter().zip(&av).map(|(g, x)| g - x).collect();
    let mut dec = ArnoldiDecomposition::start(a, &r0, opts)?;
    while dec.k() < kmax.min(a.n()) {
        if dec.extend(a)? == Step::HappyBreakdown {
            break;
        }
    }
    if dec.k() < 2 {
        return Err(Error::InvalidArgument("Krylov space too small for an enclosure".into()));
    }
    Ok(dec.h_square())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let code = run_with_io(std::iter::once("phirt").chain(args.iter().copied()), &mut o, &mut e);
        (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
    }

    #[test]
    fn config_parsing() {
        let pairs = parse_config("# c\nt = 1\nmax_restarts=5 # trailing\n\n").unwrap();
        assert_eq!(pairs, vec![("t".into(), "1".into()), ("max-restarts".into(), "5".into())]);
        assert!(parse_config("novalue\n").is_err());
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run_capture(&["frobnicate"]).0, 1);
        assert_eq!(run_capture(&["solve", "--problem", "laplacian1d"]).0, 1);
        assert_eq!(run_capture(&["solve", "--problem", "laplacian1d", "--n", "10", "--tol", "-1"]).0, 1);
        assert_eq!(run_capture(&["--help"]).0, 0);
    }

    #[test]
    fn estimate_trivial() {
        let (code, out, _) = run_capture(&["estimate", "--c", "1", "--t", "1", "--kmax", "30", "--tol-r", "1e-3"]);
        assert_eq!(code, 0);
        assert!(out.contains("restarts=1\n"));
    }

    #[test]
    fn stagnation_exits_two() {
        let (code, _, err) = run_capture(&[
            "solve", "--problem", "laplacian1d", "--n", "50", "--t", "1", "--tol", "1e-6", "--kmax", "2",
            "--max-restarts", "1",
        ]);
        assert_eq!(code, 2);
        assert!(err.starts_with("error kind=non_convergence"));
    }
}
