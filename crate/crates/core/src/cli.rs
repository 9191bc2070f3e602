//! Command-line front end: `generate`, `solve`, `bench` and `stability`.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{run_bench_with, write_csv, BenchRow, BenchSpec, Experiment, InstanceKind, CSV_HEADER};
use crate::error::{Error, Result};
use crate::generators::{
    cart_system, csma_theta, known_example, random_spd_problem, random_stable_problem, theta_csv, CartConfig, CsmaConfig,
    ErrorMemory, MjlsSystem,
};
use crate::io::{format_problem, format_solution, format_system, read_input, read_solution, write_solution, InputFile};
use crate::model::{error_norm, Method, MjlsProblem};
use crate::solve::{solve, SolveOptions};
use crate::stability::{is_ms_stable, StabilityCertificate, Verdict};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_UNSTABLE: i32 = 3;
pub const EXIT_INPUT: i32 = 4;

/// Exit status for an error, by cause.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Mode { source, .. } => exit_code(source),
        Error::Unstable { .. } => EXIT_UNSTABLE,
        Error::Dimension(_)
        | Error::NotSquare { .. }
        | Error::NonFinite(_)
        | Error::Asymmetric { .. }
        | Error::CouplingSign { .. }
        | Error::CouplingRowSum { .. }
        | Error::TooLarge { .. }
        | Error::Config(_)
        | Error::Parse { .. }
        | Error::Io(_) => EXIT_INPUT,
        Error::SchurNoConvergence { .. }
        | Error::SingularLyapunov { .. }
        | Error::SingularSystem
        | Error::Breakdown { .. }
        | Error::LineSearch(_)
        | Error::Consistency(_) => EXIT_NOT_CONVERGED,
    }
}

#[derive(Debug, Parser)]
#[command(name = "mjls", version, about = "Coupled Lyapunov equation solvers for Markov jump linear systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a generated problem, system or transition matrix.
    Generate {
        #[command(subcommand)]
        kind: GenerateKind,
    },
    /// Solve the equation stored in a problem or system file.
    Solve(SolveArgs),
    /// Run a benchmark and print CSV rows.
    Bench(BenchArgs),
    /// Check mean-square stability of a problem or system file.
    Stability {
        file: PathBuf,
        /// For system files: which Gramian equation to check.
        #[arg(long, value_enum, default_value_t = Gramian::Observability)]
        gramian: Gramian,
    },
}

#[derive(Debug, Args)]
struct OutArg {
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum GenerateKind {
    /// Two-mode example with a known solution.
    Known {
        #[command(flatten)]
        out: OutArg,
        /// Also write the exact solution here.
        #[arg(long)]
        solution_out: Option<PathBuf>,
    },
    /// Two modes with symmetric negative definite state matrices.
    RandomSpd {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Nonsymmetric modes with coupling scaled to a target spectral radius.
    RandomStable {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        modes: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0.9)]
        rho: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Transition matrix of the CSMA/CA channel model, as CSV.
    Csma {
        #[arg(long, default_value_t = 2)]
        nu: usize,
        #[arg(long, default_value_t = 3)]
        tau: usize,
        #[arg(long, default_value_t = 0.03)]
        p_err_good: f64,
        #[arg(long, default_value_t = 0.75)]
        p_err_stay: f64,
        /// Keep the transmission memory unchanged while in error.
        #[arg(long)]
        frozen_memory: bool,
        #[command(flatten)]
        out: OutArg,
    },
    /// Networked cart system file.
    Cart {
        #[arg(long, default_value_t = 3)]
        nu: usize,
        #[arg(long, default_value_t = 3)]
        tau: usize,
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Gramian {
    Observability,
    Controllability,
}

#[derive(Debug, Args)]
struct SolveArgs {
    file: PathBuf,
    #[arg(long, short, default_value = "krylov-gs", value_parser = parse_method)]
    method: Method,
    /// Residual tolerance, or gradient tolerance for sd/cg/tr.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    solution_out: Option<PathBuf>,
    /// Known solution; adds the error column.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Refuse to solve problems that are not mean-square stable.
    #[arg(long)]
    require_stable: bool,
    #[arg(long, value_enum, default_value_t = Gramian::Observability)]
    gramian: Gramian,
    /// Omit the CSV header line.
    #[arg(long)]
    no_header: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExperimentArg {
    Table1,
    Table2,
    Table3,
    Table6,
    Custom,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    Known,
    RandomSpd,
    RandomStable,
    Cart,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(value_enum)]
    experiment: ExperimentArg,
    /// Instance family for `custom`.
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    /// State dimensions (station counts for cart instances).
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    modes: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long, value_delimiter = ',', value_parser = parse_method)]
    methods: Option<Vec<Method>>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    grad_tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    rho: Option<f64>,
    #[command(flatten)]
    out: OutArg,
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Generate { kind } => cmd_generate(kind, out, err),
        Command::Solve(args) => cmd_solve(&args, out, err),
        Command::Bench(args) => cmd_bench(&args, out, err),
        Command::Stability { file, gramian } => cmd_stability(&file, gramian, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn emit(out_arg: &OutArg, text: &str, out: &mut dyn Write) -> Result<()> {
    match &out_arg.out {
        Some(path) => std::fs::write(path, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn summarize(p: &MjlsProblem, err: &mut dyn Write) -> Result<()> {
    let cert = is_ms_stable(p)?;
    writeln!(err, "n={} N={} stability={:?} rho={:.6e}", p.dim(), p.modes(), cert.verdict, cert.rho_linv_pi)?;
    Ok(())
}

fn cmd_generate(kind: GenerateKind, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match kind {
        GenerateKind::Known { out: o, solution_out } => {
            let (p, x) = known_example();
            emit(&o, &format_problem(&p), out)?;
            if let Some(path) = solution_out {
                write_solution(path, &x)?;
            }
            summarize(&p, err)?;
        }
        GenerateKind::RandomSpd { n, seed, out: o } => {
            let p = random_spd_problem(n, seed)?;
            emit(&o, &format_problem(&p), out)?;
            summarize(&p, err)?;
        }
        GenerateKind::RandomStable { n, modes, seed, rho, out: o } => {
            let p = random_stable_problem(n, modes, seed, rho)?;
            emit(&o, &format_problem(&p), out)?;
            summarize(&p, err)?;
        }
        GenerateKind::Csma { nu, tau, p_err_good, p_err_stay, frozen_memory, out: o } => {
            let cfg = CsmaConfig {
                nu,
                tau,
                p_err_good,
                p_err_stay,
                error_memory: if frozen_memory { ErrorMemory::Frozen } else { ErrorMemory::Retransmit },
                ..Default::default()
            };
            let theta = csma_theta(&cfg)?;
            let mut buf = Vec::new();
            theta_csv(&theta, &cfg, &mut buf)?;
            emit(&o, &String::from_utf8_lossy(&buf), out)?;
            writeln!(err, "states={}", cfg.states())?;
        }
        GenerateKind::Cart { nu, tau, a, out: o } => {
            let sys = cart_system(&CartConfig { nu, tau, a, ..CartConfig::new(nu) })?;
            emit(&o, &format_system(&sys), out)?;
            summarize(&sys.observability_problem()?, err)?;
        }
    }
    Ok(EXIT_OK)
}

fn gramian_problem(sys: &MjlsSystem, g: Gramian) -> Result<MjlsProblem> {
    match g {
        Gramian::Observability => sys.observability_problem(),
        Gramian::Controllability => sys.controllability_problem(),
    }
}

fn load(path: &PathBuf, g: Gramian) -> Result<MjlsProblem> {
    match read_input(path)? {
        InputFile::Problem(p) => Ok(p),
        InputFile::System(sys) => gramian_problem(&sys, g),
    }
}

fn cmd_solve(args: &SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let p = load(&args.file, args.gramian)?;
    let reference = args.reference.as_ref().map(read_solution).transpose()?;
    let cert = is_ms_stable(&p)?;
    if !cert.stable() {
        if args.require_stable {
            writeln!(err, "problem is not mean-square stable ({:?})", cert.verdict)?;
            return Ok(EXIT_UNSTABLE);
        }
        writeln!(err, "warning: problem is not certified mean-square stable ({:?}); solving anyway", cert.verdict)?;
    }
    let opts = SolveOptions { tol: args.tol, max_iter: args.max_iter, ..Default::default() };
    let (x, report) = solve(&p, args.method, &opts)?;
    let error = reference.as_ref().map(|r| error_norm(&x, r)).transpose()?;
    let row = BenchRow {
        method: report.method,
        n: p.dim(),
        modes: p.modes(),
        time_s: report.wall_time_s,
        iterations: report.iterations,
        residual: report.residual,
        error,
        status: if report.converged { crate::bench::RowStatus::Converged } else { crate::bench::RowStatus::NotConverged },
        seed: None,
    };
    if !args.no_header {
        writeln!(out, "{}", CSV_HEADER.join(","))?;
    }
    writeln!(out, "{}", row.fields().join(","))?;
    if let Some(path) = &args.solution_out {
        std::fs::write(path, format_solution(&x))?;
    }
    Ok(if report.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

fn cmd_bench(args: &BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let experiment = match args.experiment {
        ExperimentArg::Table1 => Experiment::Table1,
        ExperimentArg::Table2 => Experiment::Table2,
        ExperimentArg::Table3 => Experiment::Table3,
        ExperimentArg::Table6 => Experiment::Table6,
        ExperimentArg::Custom => Experiment::Custom,
    };
    let mut spec = BenchSpec::preset(experiment);
    if let Some(k) = args.kind {
        if experiment != Experiment::Custom {
            return Err(Error::Config("--kind is only accepted by `custom`".into()));
        }
        spec.kind = match k {
            KindArg::Known => InstanceKind::Known,
            KindArg::RandomSpd => InstanceKind::RandomSpd,
            KindArg::RandomStable => InstanceKind::RandomStable,
            KindArg::Cart => InstanceKind::Cart,
        };
    }
    if let Some(v) = &args.sizes {
        spec.sizes = v.clone();
    }
    if let Some(v) = &args.modes {
        spec.modes = v.clone();
    }
    if let Some(v) = &args.seeds {
        spec.seeds = v.clone();
    }
    if let Some(v) = &args.methods {
        spec.methods = v.clone();
    }
    if let Some(t) = args.tol {
        spec.tol = t;
    }
    spec.grad_tol = args.grad_tol;
    spec.max_iter = args.max_iter;
    if let Some(r) = args.rho {
        spec.target_rho = r;
    }
    let rows = run_bench_with(&spec, |r| {
        let _ = writeln!(err, "{}", r.fields().join(" "));
    })?;
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf)?;
    emit(&args.out, &String::from_utf8_lossy(&buf), out)?;
    let all_ok = rows.iter().all(BenchRow::converged);
    Ok(if all_ok { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

fn print_certificate(cert: &StabilityCertificate, out: &mut dyn Write) -> Result<()> {
    let abscissae: Vec<String> = cert.modewise_abscissae.iter().map(|a| format!("{a:.6e}")).collect();
    writeln!(out, "modewise_abscissae: {}", abscissae.join(" "))?;
    writeln!(out, "rho_linv_pi: {:.6e} ({:?})", cert.rho_linv_pi, cert.method)?;
    if let Some(a) = cert.kronecker_abscissa {
        writeln!(out, "kronecker_abscissa: {a:.6e}")?;
    }
    writeln!(out, "verdict: {:?}", cert.verdict)?;
    Ok(())
}

fn cmd_stability(file: &PathBuf, g: Gramian, out: &mut dyn Write) -> Result<i32> {
    let p = load(file, g)?;
    let cert = is_ms_stable(&p)?;
    print_certificate(&cert, out)?;
    Ok(match cert.verdict {
        Verdict::Stable => EXIT_OK,
        Verdict::Unstable | Verdict::Indeterminate => EXIT_UNSTABLE,
    })
}
