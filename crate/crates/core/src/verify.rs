//! Self-check suite behind the `verify` CLI subcommand: solver oracles,
//! Galerkin exactness, KKT residuals and structural identities.

use crate::analysis::{energy_error, error_norms, NORM_QUAD_ORDER};
use crate::assembly::assemble_load;
use crate::band::inf_norm;
use crate::error::Result;
use crate::mesh::Mesh1D;
use crate::problems::{example_dirichlet, example_mixed, manufactured_unconstrained};
use crate::qp::{solve_bruteforce, KktTolerances, PdasOptions};
use crate::space::{interpolate, BcKind, HermiteSpace};
use crate::study::{run_study, solve_on_mesh, MeshSpec, ProblemRef, StudyConfig};

/// Outcome of one named check.
#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, run: impl FnOnce() -> Result<(bool, String)>) -> CheckResult {
    match run() {
        Ok((passed, detail)) => CheckResult {
            name,
            passed,
            detail,
        },
        Err(e) => CheckResult {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

/// Runs the whole suite; cheap enough for interactive use.
pub fn run_all() -> Vec<CheckResult> {
    vec![
        check("oracle-equivalence", oracle_equivalence),
        check("galerkin-exactness", galerkin_exactness),
        check("kkt-residuals", kkt_residuals),
        check("interpolant-feasibility", interpolant_feasibility),
        check("objective-minimality", objective_minimality),
        check("energy-identity", energy_identity),
        check("quadrature-stability", quadrature_stability),
    ]
}

/// PDAS and brute-force enumeration agree on every built-in problem small
/// enough to enumerate.
fn oracle_equivalence() -> Result<(bool, String)> {
    let opts = PdasOptions::default();
    let mut worst = 0.0f64;
    let mut cases = 0;
    let mut pass = true;
    let mut detail = String::new();
    let dirichlet = example_dirichlet::<f64>();
    let mixed = example_mixed::<f64>();
    let mut instances: Vec<(&str, &_, Mesh1D<f64>)> = Vec::new();
    for n in [2usize, 4, 8] {
        instances.push(("dirichlet/uniform", &dirichlet, Mesh1D::uniform(n)?));
    }
    instances.push((
        "dirichlet/perturbed",
        &dirichlet,
        Mesh1D::perturbed(4, 0.25)?,
    ));
    for n in [4usize, 8, 16] {
        instances.push(("mixed/uniform", &mixed, Mesh1D::uniform(n)?));
    }
    instances.push(("mixed/third", &mixed, Mesh1D::third_aligned(1)));
    for (label, problem, mesh) in instances {
        let solved = solve_on_mesh(problem, &mesh, 6, &opts)?;
        let oracle = solve_bruteforce(&solved.qp)?;
        let diff = solved
            .solution
            .x
            .iter()
            .zip(&oracle.x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst = worst.max(diff);
        cases += 1;
        if diff > 1e-10 || solved.solution.active != oracle.active {
            pass = false;
            detail = format!(
                "{label} n={}: max |x_pdas - x_oracle| = {diff:e}, active {:?} vs {:?}",
                mesh.n_elements(),
                solved.solution.active,
                oracle.active
            );
        }
    }
    if pass {
        detail = format!("{cases} instances, max solution gap {worst:.2e}");
    }
    Ok((pass, detail))
}

/// Manufactured cubic data solves to the interpolant of the cubic itself,
/// with an empty active set.
fn galerkin_exactness() -> Result<(bool, String)> {
    let cases: [(&str, BcKind, [f64; 4]); 2] = [
        ("dirichlet", BcKind::Dirichlet, [0.0, -1.0, 0.0, 1.0]),
        ("mixed", BcKind::Mixed, [5.0, 5.0, -1.0, -1.0]),
    ];
    let mut worst = 0.0f64;
    for (label, bc, coeffs) in cases {
        let problem = manufactured_unconstrained(&coeffs, bc)?;
        for n in [2usize, 5, 8] {
            let mesh = Mesh1D::uniform(n)?;
            let solved = solve_on_mesh(&problem, &mesh, 6, &PdasOptions::default())?;
            if !solved.solution.active.is_empty() {
                return Ok((false, format!("{label} n={n}: expected empty active set")));
            }
            let ex = problem.exact.as_ref().expect("fixture has exact data");
            let err = energy_error(&solved.y_h, ex, problem.beta, NORM_QUAD_ORDER)?;
            worst = worst.max(err);
            if err > 1e-10 {
                return Ok((false, format!("{label} n={n}: energy error {err:e}")));
            }
        }
    }
    Ok((true, format!("max energy error {worst:.2e}")))
}

/// Every level of the moderate-size benchmark studies satisfies the KKT
/// residual tolerances.
fn kkt_residuals() -> Result<(bool, String)> {
    let tol = KktTolerances::default();
    let configs: Vec<StudyConfig<f64>> = vec![
        StudyConfig::new(
            ProblemRef::ExampleDirichlet,
            MeshSpec::Uniform { base: 2 },
            6,
        ),
        StudyConfig::new(ProblemRef::ExampleMixed, MeshSpec::Uniform { base: 4 }, 5),
    ];
    let mut worst_stat = 0.0f64;
    for config in configs {
        let study = run_study(&config)?;
        for level in &study.levels {
            let scaled = level.kkt.stationarity / (1.0 + level.b_inf);
            worst_stat = worst_stat.max(scaled);
            if !level.kkt.within(&tol, level.b_inf) {
                return Ok((
                    false,
                    format!(
                        "level {} ({} elements): stationarity {:e}, feasibility {:e}, \
                         complementarity {:e}, min lambda {:e}",
                        level.level,
                        level.elements,
                        level.kkt.stationarity,
                        level.kkt.max_feasibility_violation,
                        level.kkt.max_complementarity,
                        level.kkt.min_lambda
                    ),
                ));
            }
        }
    }
    Ok((
        true,
        format!(
            "max scaled stationarity {worst_stat:.2e} (tolerance {:.0e})",
            tol.stationarity
        ),
    ))
}

/// The nodal interpolant of each exact state is feasible for the discrete
/// constraints (with zero slack where the continuous constraint is tight).
fn interpolant_feasibility() -> Result<(bool, String)> {
    for (label, problem) in [
        ("dirichlet", example_dirichlet::<f64>()),
        ("mixed", example_mixed::<f64>()),
    ] {
        for n in [4usize, 16, 64] {
            let space = HermiteSpace::new(Mesh1D::uniform(n)?, problem.bc);
            let ex = problem.exact.as_ref().expect("built-ins carry exact data");
            let u = interpolate(&space, &ex.ybar)?;
            let rows = crate::space::constraint_rows(&space, |x| problem.psi.eval(x, 0))?;
            for row in rows {
                let slack = row.bound - u.coeffs()[row.free_dof];
                if slack < -1e-12 {
                    return Ok((
                        false,
                        format!("{label} n={n}: interpolant violates a nodal bound by {slack:e}"),
                    ));
                }
            }
        }
    }
    Ok((true, "interpolants feasible on all sampled meshes".into()))
}

/// The PDAS minimizer does not lose to the bound-projected interpolant of
/// the exact state.
fn objective_minimality() -> Result<(bool, String)> {
    let mut best_margin = f64::INFINITY;
    for problem in [example_dirichlet::<f64>(), example_mixed::<f64>()] {
        for n in [4usize, 8, 32] {
            let mesh = Mesh1D::uniform(n)?;
            let solved = solve_on_mesh(&problem, &mesh, 6, &PdasOptions::default())?;
            let ex = problem.exact.as_ref().expect("built-ins carry exact data");
            let mut feas = interpolate(solved.y_h.space(), &ex.ybar)?.coeffs().to_vec();
            for bound in &solved.qp.bounds {
                feas[bound.index] = feas[bound.index].min(bound.upper);
            }
            let j_solver = solved.qp.a.objective(&solved.solution.x, &solved.qp.b);
            let j_feasible = solved.qp.a.objective(&feas, &solved.qp.b);
            best_margin = best_margin.min(j_feasible - j_solver);
            if j_solver > j_feasible + 1e-12 {
                return Ok((
                    false,
                    format!("n={n}: solver objective {j_solver} above feasible point {j_feasible}"),
                ));
            }
        }
    }
    Ok((true, format!("min objective margin {best_margin:.2e}")))
}

/// `|e|_a^2 = |e|_L2^2 + beta |e|_H2^2` holds against independently
/// computed norms.
fn energy_identity() -> Result<(bool, String)> {
    let problem = example_mixed::<f64>();
    let ex = problem.exact.as_ref().expect("built-in");
    let space = HermiteSpace::new(Mesh1D::uniform(8)?, problem.bc);
    let u = interpolate(&space, &ex.ybar)?;
    let n = error_norms(&u, ex, NORM_QUAD_ORDER)?;
    let e = energy_error(&u, ex, problem.beta, NORM_QUAD_ORDER)?;
    let gap = (e * e - (n.l2 * n.l2 + problem.beta * n.h2 * n.h2)).abs();
    Ok((
        gap <= 1e-12 * (1.0 + e * e),
        format!("identity gap {gap:.2e}"),
    ))
}

/// Load assembly is converged in quadrature order on the built-in data.
fn quadrature_stability() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for problem in [example_dirichlet::<f64>(), example_mixed::<f64>()] {
        let space = HermiteSpace::new(Mesh1D::uniform(32)?, problem.bc);
        let b1 = assemble_load(&space, &problem.y_d, &problem.f, problem.beta, 6)?;
        let b2 = assemble_load(&space, &problem.y_d, &problem.f, problem.beta, 12)?;
        let diff: Vec<f64> = b1.iter().zip(&b2).map(|(a, b)| a - b).collect();
        worst = worst.max(inf_norm(&diff));
    }
    Ok((
        worst < 1e-12,
        format!("max load-entry change under order doubling: {worst:.2e}"),
    ))
}
