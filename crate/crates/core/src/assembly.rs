//! Assembly of the bilinear form `a(y, z) = beta * int y'' z'' + int y z`
//! and the load functional `l(z) = int y_d z - beta * int f z''`.

use crate::band::SymBandMatrix;
use crate::error::Result;
use crate::piecewise::PiecewiseSmooth;
use crate::quadrature::{integrate_with_rule, GaussRule};
use crate::scalar::{real, Accumulator, Real};
use crate::space::{shape_eval, HermiteSpace};

/// Half-bandwidth of the assembled system in node-major DOF ordering.
pub const SYSTEM_BANDWIDTH: usize = 3;

/// Default Gauss points per panel for load assembly; enough margin for the
/// built-in data (piecewise sextics times cubics, and sine data at study
/// mesh sizes).
pub const DEFAULT_LOAD_QUAD_ORDER: usize = 6;

/// Assembles `A = beta * S + M` restricted to the free DOFs. The bending
/// block `S` uses 2-point Gauss per element (exact: integrands are
/// quadratic), the mass block `M` 4-point Gauss (exact: degree six).
pub fn assemble_system<R: Real>(space: &HermiteSpace<R>, beta: R) -> Result<SymBandMatrix<R>> {
    let mesh = space.mesh();
    let mut a = SymBandMatrix::zeros(space.n_free(), SYSTEM_BANDWIDTH);
    let rule_s = GaussRule::<R>::legendre(2)?;
    let rule_m = GaussRule::<R>::legendre(4)?;
    let half = real::<R>(0.5);
    for e in 0..mesh.n_elements() {
        let h = mesh.h(e);
        let dofs = space.element_dofs(e);
        let mut local = [[R::zero(); 4]; 4];
        // Reference-interval quadrature; dx = h * dxi.
        for (&xi, &w) in rule_s.nodes.iter().zip(&rule_s.weights) {
            let xi01 = (xi + R::one()) * half;
            let d2 = shape_eval(xi01, h, 2)?;
            let scale = w * half * h * beta;
            for i in 0..4 {
                for j in i..4 {
                    local[i][j] += scale * d2[i] * d2[j];
                }
            }
        }
        for (&xi, &w) in rule_m.nodes.iter().zip(&rule_m.weights) {
            let xi01 = (xi + R::one()) * half;
            let d0 = shape_eval(xi01, h, 0)?;
            let scale = w * half * h;
            for i in 0..4 {
                for j in i..4 {
                    local[i][j] += scale * d0[i] * d0[j];
                }
            }
        }
        for i in 0..4 {
            let Some(gi) = dofs[i] else { continue };
            for j in i..4 {
                let Some(gj) = dofs[j] else { continue };
                a.add(gi, gj, local[i][j]);
            }
        }
    }
    Ok(a)
}

/// Assembles `b[j] = int y_d phi_j - beta * int f phi_j''` over the free
/// basis functions, splitting element quadrature at every declared
/// breakpoint of the data.
pub fn assemble_load<R: Real>(
    space: &HermiteSpace<R>,
    y_d: &PiecewiseSmooth<R>,
    f: &PiecewiseSmooth<R>,
    beta: R,
    order: usize,
) -> Result<Vec<R>> {
    let mesh = space.mesh();
    let rule = GaussRule::legendre(order)?;
    let mut acc: Vec<Accumulator<R>> = vec![Accumulator::new(); space.n_free()];
    for e in 0..mesh.n_elements() {
        let (a, b) = mesh.element(e);
        let h = b - a;
        let dofs = space.element_dofs(e);
        for (i, gdof) in dofs.into_iter().enumerate() {
            let Some(g) = gdof else { continue };
            let v = integrate_with_rule(
                (a, b),
                &mut |x| {
                    let xi = (x - a) / h;
                    let shape = shape_eval(xi, h, 0).expect("der 0 valid")[i];
                    y_d.eval(x, 0) * shape
                },
                y_d.breakpoints(),
                &rule,
            );
            acc[g].add(v);
            let v = integrate_with_rule(
                (a, b),
                &mut |x| {
                    let xi = (x - a) / h;
                    let shape = shape_eval(xi, h, 2).expect("der 2 valid")[i];
                    f.eval(x, 0) * shape
                },
                f.breakpoints(),
                &rule,
            );
            acc[g].add(-beta * v);
        }
    }
    Ok(acc.into_iter().map(|a| a.value()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Mesh1D;
    use crate::piecewise::PiecewiseSmooth;
    use crate::space::{constraint_rows, interpolate, BcKind, DofKind, FnPair};

    fn space(n: usize, bc: BcKind) -> HermiteSpace<f64> {
        HermiteSpace::new(Mesh1D::uniform(n).unwrap(), bc)
    }

    /// Local 4x4 blocks on a single element of length `h` via high-order
    /// quadrature, as an independent route to the closed forms.
    fn local_blocks(h: f64, der: usize, order: usize) -> [[f64; 4]; 4] {
        let rule = GaussRule::<f64>::legendre(order).unwrap();
        let mut m = [[0.0; 4]; 4];
        for (&xi, &w) in rule.nodes.iter().zip(&rule.weights) {
            let xi01 = (xi + 1.0) / 2.0;
            let s = shape_eval(xi01, h, der).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    m[i][j] += w / 2.0 * h * s[i] * s[j];
                }
            }
        }
        m
    }

    #[test]
    fn local_bending_and_mass_entries() {
        for h in [0.5f64, 1.0, 1.7] {
            let s = local_blocks(h, 2, 6);
            let m = local_blocks(h, 0, 6);
            // Classic beam element values.
            assert!((s[0][0] - 12.0 / h.powi(3)).abs() < 1e-9 / h.powi(3));
            assert!((s[0][2] + 12.0 / h.powi(3)).abs() < 1e-9 / h.powi(3));
            assert!((s[1][1] - 4.0 / h).abs() < 1e-12);
            assert!((m[0][0] - 13.0 * h / 35.0).abs() < 1e-14);
            assert!((m[0][2] - 9.0 * h / 70.0).abs() < 1e-14);
        }
    }

    #[test]
    fn assembled_matrix_is_symmetric_and_banded() {
        for bc in [BcKind::Dirichlet, BcKind::Mixed] {
            let sp = space(4, bc);
            let a = assemble_system(&sp, 1.0).unwrap();
            let d = a.to_dense();
            let n = a.dim();
            for i in 0..n {
                for j in 0..n {
                    let rel = (d[i][j] - d[j][i]).abs() / (1.0 + d[i][j].abs());
                    assert!(rel < 1e-14);
                }
            }
            // DOFs sharing no element do not couple.
            for i in 0..n {
                for j in 0..n {
                    let ni = sp.dof_of_free(i).node;
                    let nj = sp.dof_of_free(j).node;
                    if ni.abs_diff(nj) > 1 {
                        assert_eq!(d[i][j], 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn assembled_matrix_is_positive_definite() {
        // Dense Jacobi eigensolve as an independent check at desk scale.
        for bc in [BcKind::Dirichlet, BcKind::Mixed] {
            let sp = space(4, bc);
            let a = assemble_system(&sp, 1.0).unwrap();
            let eigs = jacobi_eigenvalues(a.to_dense());
            let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(min > 0.0, "{bc:?}: min eigenvalue {min}");
        }
    }

    #[test]
    fn load_slope_entry_for_constant_data() {
        // y_d = 1, f = 0, Dirichlet on two elements of length 1: the slope
        // shape integrates to h^2/12.
        let sp = space(2, BcKind::Dirichlet);
        let y_d = PiecewiseSmooth::constant(1.0);
        let f = PiecewiseSmooth::constant(0.0);
        let b = assemble_load(&sp, &y_d, &f, 1.0, 6).unwrap();
        let slope_left = sp.free_index(0, DofKind::Slope).unwrap();
        assert!((b[slope_left] - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn load_vanishes_for_zero_data() {
        let sp = space(3, BcKind::Mixed);
        let zero = PiecewiseSmooth::constant(0.0);
        let b = assemble_load(&sp, &zero, &zero, 1.0, 6).unwrap();
        assert!(b.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_f_gives_zero_interior_value_entries() {
        // int f phi'' telescopes to f [phi'] = 0 across the support of any
        // interior value shape.
        let sp = space(4, BcKind::Dirichlet);
        let y_d = PiecewiseSmooth::constant(0.0);
        let f = PiecewiseSmooth::constant(3.25);
        let b = assemble_load(&sp, &y_d, &f, 2.0, 6).unwrap();
        for node in 1..4 {
            let i = sp.free_index(node, DofKind::Value).unwrap();
            assert!(b[i].abs() < 1e-14, "node {node}: {:?}", b[i]);
        }
    }

    #[test]
    fn galerkin_exactness_for_cubic_data() {
        // f = -p'', y_d = p with p in the space: the unconstrained solve
        // returns p's DOFs (uniqueness via coercivity of the energy norm).
        let p = |x: f64| x * x * x - x;
        let dp = |x: f64| 3.0 * x * x - 1.0;
        let f = PiecewiseSmooth::poly(vec![0.0, -6.0]);
        let y_d = PiecewiseSmooth::poly(vec![0.0, -1.0, 0.0, 1.0]);
        for n in [2usize, 3, 5] {
            let sp = space(n, BcKind::Dirichlet);
            let a = assemble_system(&sp, 1.0).unwrap();
            let b = assemble_load(&sp, &y_d, &f, 1.0, 6).unwrap();
            let x = a.solve_refined(&b).unwrap();
            let want = interpolate(&sp, &FnPair(p, dp)).unwrap();
            for (xi, wi) in x.iter().zip(want.coeffs()) {
                assert!(
                    (xi - wi).abs() <= 1e-10 * (1.0 + wi.abs()),
                    "n={n}: {xi} vs {wi}"
                );
            }
        }
    }

    #[test]
    fn load_quadrature_order_is_converged() {
        // Doubling the order must not move any entry: panels are polynomial
        // (Dirichlet example) or analytic (sine data; its Gauss-6 remainder
        // falls below 1e-12 once panels are shorter than ~1/16).
        let specs = [
            crate::problems::example_dirichlet::<f64>(),
            crate::problems::example_mixed::<f64>(),
        ];
        for prob in specs {
            let sp = HermiteSpace::new(Mesh1D::uniform(32).unwrap(), prob.bc);
            let b6 = assemble_load(&sp, &prob.y_d, &prob.f, prob.beta, 6).unwrap();
            let b12 = assemble_load(&sp, &prob.y_d, &prob.f, prob.beta, 12).unwrap();
            for (x, y) in b6.iter().zip(&b12) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn interpolant_of_feasible_function_satisfies_rows() {
        let sp = space(4, BcKind::Dirichlet);
        let g = FnPair(|x: f64| x * x * x - x, |x: f64| 3.0 * x * x - 1.0);
        let u = interpolate(&sp, &g).unwrap();
        let rows = constraint_rows(&sp, |_| 2.0).unwrap();
        for row in rows {
            assert!(u.coeffs()[row.free_dof] <= row.bound);
        }
    }

    /// Plain Jacobi rotation eigensolver for small dense symmetric matrices.
    fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
        let n = a.len();
        for _sweep in 0..100 {
            let mut off = 0.0f64;
            for i in 0..n {
                for j in i + 1..n {
                    off = off.max(a[i][j].abs());
                }
            }
            if off < 1e-12 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k][p];
                        let akq = a[k][q];
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p][k];
                        let aqk = a[q][k];
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        (0..n).map(|i| a[i][i]).collect()
    }
}
