//! `polydisc`: verify sharp integral inequalities on the unit polydisc.
//!
//! Exit status: 0 when every verdict is `holds` or `equality`, 2 when at
//! least one is `violated`, 1 on usage or configuration errors.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use polydisc::inequalities::Tolerances;
use polydisc::report::{self, CoefficientLaw, Command, ProfilePath, RunConfig, SearchFamily};
use polydisc::{InequalityId, QuadratureConfig};

#[derive(Parser)]
#[command(name = "polydisc", version, about = "Sharp integral inequalities on the unit polydisc")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate inequalities on input coefficient files (default: f = 1).
    Verify(Common),
    /// Evaluate inequalities on seeded random polynomials.
    Sweep(Common),
    /// Maximize lhs/rhs over a function family.
    Extremal(Common),
    /// Riesz factorization of one-variable polynomials; outer function from a boundary modulus.
    Factor(Common),
    /// Coefficient and integral norms.
    Norms(Common),
    /// Ratio along a one-parameter path, written as tab-separated text.
    Profile(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Law {
    UniformDisc,
    Gaussian,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Kernel,
    Ball,
}

#[derive(Clone, Copy, ValueEnum)]
enum PathArg {
    Kernel,
    Mixing,
}

#[derive(Args)]
struct Common {
    /// Inequality id, repeatable: burbea_hilbert, main_product, equal_function,
    /// carleman, carleman_double, isoperimetric, logsub, phi_main.
    #[arg(long = "inequality", value_delimiter = ',', default_value = "carleman")]
    inequalities: Vec<InequalityId>,
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    m: usize,
    /// Exponent p_j, repeatable; one value applies to every factor.
    #[arg(long = "p", value_delimiter = ',', default_value = "2")]
    p: Vec<f64>,
    /// Weight q_j, repeatable; one value applies to every factor.
    #[arg(long = "q", value_delimiter = ',', default_value = "1")]
    q: Vec<f64>,
    #[arg(long, default_value_t = 3)]
    degree: usize,
    /// Initial angular points per axis.
    #[arg(long, default_value_t = 32)]
    grid: usize,
    /// Initial radial points per axis.
    #[arg(long, default_value_t = 16)]
    radial: usize,
    #[arg(long, default_value_t = 8192)]
    max_grid: usize,
    #[arg(long, default_value_t = 512)]
    max_radial: usize,
    #[arg(long, default_value_t = 1 << 22)]
    max_nodes: usize,
    /// Relative change accepted by the adaptive quadrature.
    #[arg(long, default_value_t = 1e-10)]
    rel_tol: f64,
    /// Compensated summation in quadrature reductions.
    #[arg(long)]
    compensated: bool,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Relative violation tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Relative equality tolerance.
    #[arg(long, default_value_t = 1e-6)]
    equality_tol: f64,
    #[arg(long, value_enum, default_value = "uniform-disc")]
    law: Law,
    #[arg(long, value_enum, default_value = "kernel")]
    family: FamilyArg,
    /// Search budget; 0 means 50 x dimension.
    #[arg(long, default_value_t = 0)]
    budget: usize,
    #[arg(long, default_value_t = 5)]
    restarts: usize,
    /// Radius of the kernel-family parameter disc.
    #[arg(long, default_value_t = 0.6)]
    rho: f64,
    #[arg(long, value_enum, default_value = "kernel")]
    path: PathArg,
    #[arg(long, default_value_t = 11)]
    samples: usize,
    /// Coefficient file, repeatable.
    #[arg(long = "in")]
    inputs: Vec<PathBuf>,
    /// Boundary-modulus file for `factor`.
    #[arg(long)]
    modulus: Option<PathBuf>,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record wall-clock time (reports then differ between runs).
    #[arg(long)]
    timing: bool,
}

fn config(command: Command, a: Common) -> RunConfig {
    RunConfig {
        command,
        inequalities: a.inequalities,
        n: a.n,
        m: a.m,
        degree: a.degree,
        p: a.p,
        q: a.q,
        quadrature: QuadratureConfig {
            grid: a.grid,
            radial: a.radial,
            max_grid: a.max_grid,
            max_radial: a.max_radial,
            max_nodes: a.max_nodes,
            rel_tol: a.rel_tol,
            compensated: a.compensated,
        },
        tolerances: Tolerances { violation: a.tol, equality: a.equality_tol },
        trials: a.trials,
        seed: a.seed,
        law: match a.law {
            Law::UniformDisc => CoefficientLaw::UniformDisc,
            Law::Gaussian => CoefficientLaw::Gaussian,
        },
        family: match a.family {
            FamilyArg::Kernel => SearchFamily::KernelFamily,
            FamilyArg::Ball => SearchFamily::CoefficientBall,
        },
        budget: a.budget,
        restarts: a.restarts,
        rho: a.rho,
        path: match a.path {
            PathArg::Kernel => ProfilePath::Kernel,
            PathArg::Mixing => ProfilePath::Mixing,
        },
        samples: a.samples,
        inputs: a.inputs,
        modulus: a.modulus,
        output: a.out,
        timing: a.timing,
    }
}

fn execute(cfg: &RunConfig) -> polydisc::Result<i32> {
    let report = report::run(cfg)?;
    let text = match cfg.command {
        Command::Profile => report.profile_table(),
        _ => report.to_json()?,
    };
    match &cfg.output {
        Some(path) => report::write_atomically(path, &text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let cfg = match cli.command {
        Cmd::Verify(a) => config(Command::Verify, a),
        Cmd::Sweep(a) => config(Command::Sweep, a),
        Cmd::Extremal(a) => config(Command::Extremal, a),
        Cmd::Factor(a) => config(Command::Factor, a),
        Cmd::Norms(a) => config(Command::Norms, a),
        Cmd::Profile(a) => config(Command::Profile, a),
    };
    match execute(&cfg) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
