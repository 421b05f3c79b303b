//! Convergence-study driver: builds a mesh family, solves every level, and
//! renders the error/EOC tables.

use std::path::PathBuf;

use crate::analysis::{
    eoc, error_norms, multiplier_diag, ErrorRecord, MultiplierDiag, NormSet, RecoveredControl,
    NORM_QUAD_ORDER,
};
use crate::assembly::{assemble_load, assemble_system, DEFAULT_LOAD_QUAD_ORDER};
use crate::band::inf_norm;
use crate::error::{Error, Result};
use crate::mesh::Mesh1D;
use crate::problems::{example_dirichlet, example_mixed, load_problem, ProblemSpec};
use crate::qp::{kkt_report, solve_pdas, Bound, BoundQp, KktReport, PdasOptions, QpSolution};
use crate::scalar::{real, Real};
use crate::space::{constraint_rows, ConstraintRow, HermiteFunction, HermiteSpace};

/// Which problem a study runs.
#[derive(Clone, Debug)]
pub enum ProblemRef {
    ExampleDirichlet,
    ExampleMixed,
    File(PathBuf),
}

impl ProblemRef {
    /// Built-in name or path to a JSON document.
    pub fn parse(s: &str) -> Self {
        match s {
            "example-dirichlet" => ProblemRef::ExampleDirichlet,
            "example-mixed" => ProblemRef::ExampleMixed,
            other => ProblemRef::File(PathBuf::from(other)),
        }
    }

    pub fn load<R: Real>(&self) -> Result<ProblemSpec<R>> {
        match self {
            ProblemRef::ExampleDirichlet => Ok(example_dirichlet()),
            ProblemRef::ExampleMixed => Ok(example_mixed()),
            ProblemRef::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Document(format!("cannot read {}: {e}", path.display())))?;
                load_problem(&text)
            }
        }
    }
}

/// Mesh family swept by a study.
#[derive(Clone, Debug)]
pub enum MeshSpec<R> {
    Uniform { base: usize },
    Perturbed { base: usize, shift: R },
    ThirdAligned { base_k: u32 },
}

impl<R: Real> MeshSpec<R> {
    pub fn build(&self, level: usize) -> Result<Mesh1D<R>> {
        match self {
            MeshSpec::Uniform { base } => Mesh1D::uniform(base << level),
            MeshSpec::Perturbed { base, shift } => Mesh1D::perturbed(base << level, *shift),
            MeshSpec::ThirdAligned { base_k } => Ok(Mesh1D::third_aligned(base_k + level as u32)),
        }
    }

    pub fn elements(&self, level: usize) -> usize {
        match self {
            MeshSpec::Uniform { base } | MeshSpec::Perturbed { base, .. } => base << level,
            MeshSpec::ThirdAligned { base_k } => 3 << (base_k + level as u32),
        }
    }
}

/// Output table format.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Markdown,
}

#[derive(Clone, Debug)]
pub struct StudyConfig<R> {
    pub problem: ProblemRef,
    pub mesh: MeshSpec<R>,
    pub levels: usize,
    /// Gauss points per panel for load assembly; `None` consults the
    /// `OCFEM_QUAD_ORDER` environment variable, then the built-in default.
    pub load_quad_order: Option<usize>,
    pub solver: PdasOptions,
}

impl<R: Real> StudyConfig<R> {
    pub fn new(problem: ProblemRef, mesh: MeshSpec<R>, levels: usize) -> Self {
        StudyConfig {
            problem,
            mesh,
            levels,
            load_quad_order: None,
            solver: PdasOptions::default(),
        }
    }
}

/// Everything produced by solving one problem instance on one mesh.
pub struct SolvedLevel<R> {
    pub y_h: HermiteFunction<R>,
    pub qp: BoundQp<R>,
    pub rows: Vec<ConstraintRow<R>>,
    pub solution: QpSolution<R>,
}

/// Assembles and solves the discrete variational inequality on one mesh.
pub fn solve_on_mesh<R: Real>(
    problem: &ProblemSpec<R>,
    mesh: &Mesh1D<R>,
    load_order: usize,
    solver: &PdasOptions,
) -> Result<SolvedLevel<R>> {
    let space = HermiteSpace::new(mesh.clone(), problem.bc);
    let a = assemble_system(&space, problem.beta)?;
    let b = assemble_load(&space, &problem.y_d, &problem.f, problem.beta, load_order)?;
    let rows = constraint_rows(&space, |x| problem.psi.eval(x, 0))?;
    let bounds = rows
        .iter()
        .map(|r| Bound {
            index: r.free_dof,
            upper: r.bound,
        })
        .collect();
    let qp = BoundQp::new(a, b, bounds)?;
    let solution = solve_pdas(&qp, solver)?;
    let y_h = HermiteFunction::from_coeffs(space, solution.x.clone())?;
    Ok(SolvedLevel {
        y_h,
        qp,
        rows,
        solution,
    })
}

/// One row of a convergence table.
#[derive(Clone, Debug)]
pub struct LevelResult<R> {
    pub level: usize,
    pub elements: usize,
    pub h: R,
    pub errors: Option<NormSet<R>>,
    pub eoc: NormSet<Option<R>>,
    pub control_l2: Option<R>,
    pub diag: MultiplierDiag<R>,
    pub kkt: KktReport<R>,
    pub b_inf: R,
    /// `eps * max_i sum_j |A_ij x_j|`: the stationarity level implied by
    /// rounding the solution coefficients alone.
    pub representation_floor: R,
    pub iterations: usize,
}

pub struct Study<R> {
    pub levels: Vec<LevelResult<R>>,
}

/// Effective load-quadrature order: explicit config, else the
/// `OCFEM_QUAD_ORDER` environment variable, else the default.
pub fn effective_load_order(explicit: Option<usize>) -> Result<usize> {
    if let Some(o) = explicit {
        return Ok(o);
    }
    match std::env::var("OCFEM_QUAD_ORDER") {
        Ok(v) => v.trim().parse::<usize>().map_err(|_| {
            Error::InvalidArgument(format!(
                "OCFEM_QUAD_ORDER must be a positive integer, got {v:?}"
            ))
        }),
        Err(_) => Ok(DEFAULT_LOAD_QUAD_ORDER),
    }
}

/// Runs every level of a study: build mesh, assemble, solve, compute
/// errors, rates and multiplier diagnostics.
pub fn run_study<R: Real>(config: &StudyConfig<R>) -> Result<Study<R>> {
    if config.levels == 0 {
        return Err(Error::InvalidArgument(
            "study needs at least one level".into(),
        ));
    }
    if let MeshSpec::Uniform { base } | MeshSpec::Perturbed { base, .. } = config.mesh {
        if base == 0 {
            return Err(Error::InvalidArgument(
                "mesh base size must be positive".into(),
            ));
        }
    }
    let load_order = effective_load_order(config.load_quad_order)?;
    let problem = config.problem.load::<R>()?;
    let mut levels = Vec::with_capacity(config.levels);
    for level in 0..config.levels {
        let mesh = config.mesh.build(level)?;
        let elements = mesh.n_elements();
        let solved =
            solve_on_mesh(&problem, &mesh, load_order, &config.solver).map_err(|e| match e {
                cfg @ (Error::InvalidArgument(_)
                | Error::Document(_)
                | Error::InfeasibleData(_)) => cfg,
                other => Error::Solver {
                    level,
                    elements,
                    source: Box::new(other),
                },
            })?;
        let h = mesh.h_max();
        let errors = match &problem.exact {
            Some(ex) => Some(error_norms(&solved.y_h, ex, NORM_QUAD_ORDER)?),
            None => None,
        };
        let control_l2 = match &problem.exact {
            Some(ex) => Some(
                RecoveredControl::new(&solved.y_h, &problem.f)
                    .l2_error(&ex.ubar, NORM_QUAD_ORDER)?,
            ),
            None => None,
        };
        let diag = multiplier_diag(
            &solved.qp,
            &solved.solution,
            &solved.rows,
            &problem,
            mesh.nodes(),
            h,
        )?;
        let kkt = kkt_report(&solved.qp, &solved.solution);
        let representation_floor = R::epsilon() * solved.qp.a.abs_matvec_inf(&solved.solution.x);
        levels.push(LevelResult {
            level,
            elements,
            h,
            errors,
            eoc: NormSet::default(),
            control_l2,
            diag,
            kkt,
            b_inf: inf_norm(&solved.qp.b),
            representation_floor,
            iterations: solved.solution.iterations,
        });
    }
    // Rates, for the levels that carry errors.
    let mut records: Vec<ErrorRecord<R>> = levels
        .iter()
        .filter_map(|l| {
            l.errors.map(|errors| ErrorRecord {
                level: l.level,
                elements: l.elements,
                h: l.h,
                errors,
                eoc: NormSet::default(),
            })
        })
        .collect();
    eoc(&mut records);
    for (lvl, rec) in levels
        .iter_mut()
        .filter(|l| l.errors.is_some())
        .zip(records)
    {
        lvl.eoc = rec.eoc;
    }
    Ok(Study { levels })
}

/// The error records of a study (levels with exact solutions only).
pub fn records_of<R: Real>(study: &Study<R>) -> Vec<ErrorRecord<R>> {
    study
        .levels
        .iter()
        .filter_map(|l| {
            l.errors.map(|errors| ErrorRecord {
                level: l.level,
                elements: l.elements,
                h: l.h,
                errors,
                eoc: l.eoc,
            })
        })
        .collect()
}

/// Paper-style scientific notation with 7 significant digits and a
/// two-digit signed exponent (`5.040206e-04`).
pub fn sci7(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{v:.6e}");
    match s.split_once('e') {
        Some((mant, exp)) => {
            let e: i32 = exp.parse().unwrap_or(0);
            format!("{mant}e{}{:02}", if e < 0 { '-' } else { '+' }, e.abs())
        }
        None => s,
    }
}

const COLUMNS: [&str; 12] = [
    "elements",
    "h",
    "L2",
    "Linf",
    "H1",
    "H2",
    "EOC_L2",
    "EOC_Linf",
    "EOC_H1",
    "EOC_H2",
    "active_nodes",
    "mass",
];

fn row_cells<R: Real>(l: &LevelResult<R>) -> Vec<String> {
    let f = |v: R| sci7(v.to_f64().expect("scalar convertible"));
    let opt = |v: Option<R>| v.map(&f).unwrap_or_default();
    let mut cells = vec![l.elements.to_string(), f(l.h)];
    match l.errors {
        Some(e) => {
            cells.extend([f(e.l2), f(e.linf), f(e.h1), f(e.h2)]);
            cells.extend([opt(l.eoc.l2), opt(l.eoc.linf), opt(l.eoc.h1), opt(l.eoc.h2)]);
        }
        None => cells.extend(std::iter::repeat_with(String::new).take(8)),
    }
    cells.push(l.diag.active_nodes.len().to_string());
    cells.push(f(l.diag.total_mass));
    cells
}

/// Renders the study as CSV (deterministic: identical configs produce
/// byte-identical output).
pub fn render_csv<R: Real>(study: &Study<R>) -> String {
    let mut out = String::new();
    out.push_str(&COLUMNS.join(","));
    out.push('\n');
    for l in &study.levels {
        out.push_str(&row_cells(l).join(","));
        out.push('\n');
    }
    out
}

/// Markdown table mirroring the CSV columns.
pub fn render_markdown<R: Real>(study: &Study<R>) -> String {
    let mut out = String::new();
    out.push_str("| ");
    out.push_str(&COLUMNS.join(" | "));
    out.push_str(" |\n|");
    out.push_str(&COLUMNS.map(|_| " --- |").concat());
    out.push('\n');
    for l in &study.levels {
        let cells: Vec<String> = row_cells(l)
            .into_iter()
            .map(|c| if c.is_empty() { "-".to_string() } else { c })
            .collect();
        out.push_str("| ");
        out.push_str(&cells.join(" | "));
        out.push_str(" |\n");
    }
    out
}

pub fn render<R: Real>(study: &Study<R>, format: TableFormat) -> String {
    match format {
        TableFormat::Csv => render_csv(study),
        TableFormat::Markdown => render_markdown(study),
    }
}

/// The four benchmark studies, in presentation order. Each sweeps the mesh
/// range of the corresponding published table row for row (those tables
/// label rows by DOF count, twice the element count for these spaces), so
/// `reproduce` output can be eyeball-diffed against the reference values.
pub fn benchmark_configs<R: Real>() -> Vec<(&'static str, StudyConfig<R>)> {
    vec![
        (
            "dirichlet_dyadic",
            StudyConfig::new(
                ProblemRef::ExampleDirichlet,
                MeshSpec::Uniform { base: 1 },
                7,
            ),
        ),
        (
            "dirichlet_perturbed",
            StudyConfig::new(
                ProblemRef::ExampleDirichlet,
                MeshSpec::Perturbed {
                    base: 2,
                    shift: real(0.25),
                },
                7,
            ),
        ),
        (
            "mixed_dyadic",
            StudyConfig::new(ProblemRef::ExampleMixed, MeshSpec::Uniform { base: 1 }, 7),
        ),
        (
            "mixed_third_aligned",
            StudyConfig::new(
                ProblemRef::ExampleMixed,
                MeshSpec::ThirdAligned { base_k: 0 },
                6,
            ),
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sci7_matches_paper_notation() {
        assert_eq!(sci7(5.040206e-4), "5.040206e-04");
        assert_eq!(sci7(2.178934), "2.178934e+00");
        assert_eq!(sci7(-1.5e12), "-1.500000e+12");
        assert_eq!(sci7(0.0), "0.000000e+00");
    }

    #[test]
    fn problem_ref_parses_builtins_and_paths() {
        assert!(matches!(
            ProblemRef::parse("example-dirichlet"),
            ProblemRef::ExampleDirichlet
        ));
        assert!(matches!(
            ProblemRef::parse("example-mixed"),
            ProblemRef::ExampleMixed
        ));
        assert!(matches!(ProblemRef::parse("foo.json"), ProblemRef::File(_)));
    }

    #[test]
    fn mesh_spec_levels() {
        let u = MeshSpec::<f64>::Uniform { base: 2 };
        assert_eq!(u.elements(0), 2);
        assert_eq!(u.elements(6), 128);
        let t = MeshSpec::<f64>::ThirdAligned { base_k: 1 };
        assert_eq!(t.elements(0), 6);
        assert_eq!(t.elements(5), 192);
    }

    #[test]
    fn small_study_produces_table() {
        let config = StudyConfig::new(
            ProblemRef::ExampleDirichlet,
            MeshSpec::Uniform { base: 2 },
            3,
        );
        let study = run_study::<f64>(&config).unwrap();
        assert_eq!(study.levels.len(), 3);
        let csv = render_csv(&study);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with("elements,h,L2,"));
        assert_eq!(lines[1].split(',').count(), 12);
        // Deterministic output.
        let again = render_csv(&run_study::<f64>(&config).unwrap());
        assert_eq!(csv, again);
        // Markdown mirrors the columns.
        let md = render_markdown(&study);
        assert!(md.starts_with("| elements | h | L2 |"));
    }

    #[test]
    fn zero_levels_rejected() {
        let config = StudyConfig::<f64> {
            problem: ProblemRef::ExampleDirichlet,
            mesh: MeshSpec::Uniform { base: 2 },
            levels: 0,
            load_quad_order: None,
            solver: PdasOptions::default(),
        };
        assert!(run_study(&config).is_err());
    }
}
