//! Command-line driver: run one convergence study, reproduce the four
//! benchmark tables, or run the verification suite.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ocfem::qp::PdasOptions;
use ocfem::study::{
    benchmark_configs, render, run_study, MeshSpec, ProblemRef, StudyConfig, TableFormat,
};
use ocfem::{verify, Error};

const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;

#[derive(Parser)]
#[command(
    name = "ocfem",
    about = "C1 finite elements for 1D optimal control with derivative bounds",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one convergence study and write its table.
    Solve(SolveArgs),
    /// Run the four benchmark studies and write one table per study.
    Reproduce(ReproduceArgs),
    /// Run the solver self-checks and print one pass/fail line per check.
    Verify,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeshFamilyArg {
    Uniform,
    Perturbed,
    #[value(name = "third-aligned")]
    ThirdAligned,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Markdown,
}

#[derive(Args)]
struct SolveArgs {
    /// Built-in problem (`example-dirichlet`, `example-mixed`) or a path to
    /// a JSON problem document.
    #[arg(long)]
    problem: String,

    /// Mesh family to sweep.
    #[arg(long, value_enum, default_value_t = MeshFamilyArg::Uniform)]
    mesh: MeshFamilyArg,

    /// Element count at the first level (uniform/perturbed families).
    #[arg(long, default_value_t = 2)]
    base: usize,

    /// First-level refinement index for the third-aligned family
    /// (`3 * 2^k` elements).
    #[arg(long, default_value_t = 0)]
    base_k: u32,

    /// Interior-node shift, as a fraction of the element length, for the
    /// perturbed family.
    #[arg(long, default_value_t = 0.25)]
    shift: f64,

    /// Number of refinement levels.
    #[arg(long, default_value_t = 1)]
    levels: usize,

    /// Gauss points per panel for load assembly (default 6; the
    /// OCFEM_QUAD_ORDER environment variable also overrides it).
    #[arg(long)]
    quad_order: Option<usize>,

    /// Active-set weight in the activity test.
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,

    /// Iteration cap for the active-set solver.
    #[arg(long, default_value_t = 100)]
    max_iter: usize,

    /// Output table format.
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,

    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReproduceArgs {
    /// Directory for the four CSV tables.
    #[arg(long, default_value = "tables")]
    out_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Reproduce(args) => run_reproduce(args),
        Command::Verify => run_verify(),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::NoConvergence { .. } | Error::Internal(_) | Error::Solver { .. } => EXIT_SOLVER,
        _ => EXIT_CONFIG,
    }
}

fn run_solve(args: SolveArgs) -> Result<ExitCode, Error> {
    let mesh = match args.mesh {
        MeshFamilyArg::Uniform => MeshSpec::Uniform { base: args.base },
        MeshFamilyArg::Perturbed => MeshSpec::Perturbed {
            base: args.base,
            shift: args.shift,
        },
        MeshFamilyArg::ThirdAligned => MeshSpec::ThirdAligned {
            base_k: args.base_k,
        },
    };
    let config = StudyConfig::<f64> {
        problem: ProblemRef::parse(&args.problem),
        mesh,
        levels: args.levels,
        load_quad_order: args.quad_order,
        solver: PdasOptions {
            gamma: args.gamma,
            max_iter: args.max_iter,
        },
    };
    let study = run_study(&config)?;
    let format = match args.format {
        FormatArg::Csv => TableFormat::Csv,
        FormatArg::Markdown => TableFormat::Markdown,
    };
    let table = render(&study, format);
    match &args.out {
        Some(path) => std::fs::write(path, &table)
            .map_err(|e| Error::Document(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{table}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn run_reproduce(args: ReproduceArgs) -> Result<ExitCode, Error> {
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| Error::Document(format!("cannot create {}: {e}", args.out_dir.display())))?;
    for (name, config) in benchmark_configs::<f64>() {
        let study = run_study(&config)?;
        let path = args.out_dir.join(format!("{name}.csv"));
        std::fs::write(&path, render(&study, TableFormat::Csv))
            .map_err(|e| Error::Document(format!("cannot write {}: {e}", path.display())))?;
        let last = study.levels.last().expect("study has levels");
        println!(
            "{name}: {} levels, finest n = {}, wrote {}",
            study.levels.len(),
            last.elements,
            path.display()
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn run_verify() -> Result<ExitCode, Error> {
    let results = verify::run_all();
    let mut all_ok = true;
    for r in &results {
        println!(
            "{} {:<24} {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        );
        all_ok &= r.passed;
    }
    if all_ok {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(EXIT_SOLVER))
    }
}
