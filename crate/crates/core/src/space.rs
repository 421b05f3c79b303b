//! Cubic Hermite C1 finite-element space: one value DOF and one slope DOF
//! per node, with the essential boundary DOFs masked out.

use crate::error::{Error, Result};
use crate::mesh::Mesh1D;
use crate::scalar::{real, Real};

/// Boundary conditions on the state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BcKind {
    /// `y(-1) = y(1) = 0`
    Dirichlet,
    /// `y(-1) = y'(1) = 0`
    Mixed,
}

/// What a degree of freedom carries at its node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DofKind {
    Value,
    Slope,
}

/// A degree of freedom identified by node and kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DofId {
    pub node: usize,
    pub kind: DofKind,
}

/// Values (or physical derivatives) of the four local basis functions at
/// reference coordinate `xi` in an element of length `h`, ordered as
/// (value-left, slope-left, value-right, slope-right). Slope shapes
/// interpolate the physical derivative, so they carry a factor `h`;
/// derivatives carry `1/h` per order.
pub fn shape_eval<R: Real>(xi: R, h: R, der: usize) -> Result<[R; 4]> {
    if der > 2 {
        return Err(Error::InvalidArgument(format!(
            "cubic Hermite shapes support derivatives up to order 2, got {der}"
        )));
    }
    debug_assert!(h > R::zero());
    debug_assert!(xi >= -R::epsilon() && xi <= R::one() + R::epsilon());
    let c = |v: f64| real::<R>(v);
    let x2 = xi * xi;
    let x3 = x2 * xi;
    Ok(match der {
        0 => [
            c(1.0) - c(3.0) * x2 + c(2.0) * x3,
            h * (xi - c(2.0) * x2 + x3),
            c(3.0) * x2 - c(2.0) * x3,
            h * (x3 - x2),
        ],
        1 => [
            (c(6.0) * x2 - c(6.0) * xi) / h,
            c(1.0) - c(4.0) * xi + c(3.0) * x2,
            (c(6.0) * xi - c(6.0) * x2) / h,
            c(3.0) * x2 - c(2.0) * xi,
        ],
        _ => [
            (c(12.0) * xi - c(6.0)) / (h * h),
            (c(6.0) * xi - c(4.0)) / h,
            (c(6.0) - c(12.0) * xi) / (h * h),
            (c(6.0) * xi - c(2.0)) / h,
        ],
    })
}

/// Cubic Hermite space over a mesh with boundary-condition masking.
#[derive(Clone, Debug)]
pub struct HermiteSpace<R> {
    mesh: Mesh1D<R>,
    bc: BcKind,
    /// free index per full DOF id (`2*node + kind`), `None` when masked.
    free_of_full: Vec<Option<usize>>,
    full_of_free: Vec<usize>,
}

impl<R: Real> HermiteSpace<R> {
    pub fn new(mesh: Mesh1D<R>, bc: BcKind) -> Self {
        let n_nodes = mesh.n_nodes();
        let last = n_nodes - 1;
        let masked: [usize; 2] = match bc {
            BcKind::Dirichlet => [full_id(0, DofKind::Value), full_id(last, DofKind::Value)],
            BcKind::Mixed => [full_id(0, DofKind::Value), full_id(last, DofKind::Slope)],
        };
        let mut free_of_full = vec![None; 2 * n_nodes];
        let mut full_of_free = Vec::with_capacity(2 * n_nodes - 2);
        for full in 0..2 * n_nodes {
            if !masked.contains(&full) {
                free_of_full[full] = Some(full_of_free.len());
                full_of_free.push(full);
            }
        }
        HermiteSpace {
            mesh,
            bc,
            free_of_full,
            full_of_free,
        }
    }

    pub fn mesh(&self) -> &Mesh1D<R> {
        &self.mesh
    }

    pub fn bc(&self) -> BcKind {
        self.bc
    }

    pub fn n_free(&self) -> usize {
        self.full_of_free.len()
    }

    /// Free index of `(node, kind)`, or `None` when masked by the BC.
    pub fn free_index(&self, node: usize, kind: DofKind) -> Option<usize> {
        self.free_of_full[full_id(node, kind)]
    }

    pub fn dof_of_free(&self, free: usize) -> DofId {
        let full = self.full_of_free[free];
        DofId {
            node: full / 2,
            kind: if full.is_multiple_of(2) {
                DofKind::Value
            } else {
                DofKind::Slope
            },
        }
    }

    /// Free indices of the four local DOFs of element `e`, masked entries as
    /// `None`, in shape order (v-left, s-left, v-right, s-right).
    pub fn element_dofs(&self, e: usize) -> [Option<usize>; 4] {
        [
            self.free_index(e, DofKind::Value),
            self.free_index(e, DofKind::Slope),
            self.free_index(e + 1, DofKind::Value),
            self.free_index(e + 1, DofKind::Slope),
        ]
    }
}

fn full_id(node: usize, kind: DofKind) -> usize {
    2 * node
        + match kind {
            DofKind::Value => 0,
            DofKind::Slope => 1,
        }
}

/// Anything with a value and a first derivative, evaluable pointwise.
pub trait C1Function<R> {
    fn value(&self, x: R) -> R;
    fn deriv(&self, x: R) -> R;
}

impl<R: Real> C1Function<R> for crate::piecewise::PiecewiseSmooth<R> {
    fn value(&self, x: R) -> R {
        self.eval(x, 0)
    }
    fn deriv(&self, x: R) -> R {
        self.eval(x, 1)
    }
}

/// Adapter for a pair of closures `(g, g')`.
pub struct FnPair<F, G>(pub F, pub G);

impl<R: Real, F: Fn(R) -> R, G: Fn(R) -> R> C1Function<R> for FnPair<F, G> {
    fn value(&self, x: R) -> R {
        (self.0)(x)
    }
    fn deriv(&self, x: R) -> R {
        (self.1)(x)
    }
}

/// A member of the space: coefficients over the free DOFs, masked DOFs
/// implicitly zero. The represented function is C1 on `[-1, 1]` and
/// satisfies the essential boundary conditions identically.
#[derive(Clone, Debug)]
pub struct HermiteFunction<R> {
    space: HermiteSpace<R>,
    coeffs: Vec<R>,
}

impl<R: Real> HermiteFunction<R> {
    pub fn from_coeffs(space: HermiteSpace<R>, coeffs: Vec<R>) -> Result<Self> {
        if coeffs.len() != space.n_free() {
            return Err(Error::InvalidArgument(format!(
                "coefficient length {} does not match free DOF count {}",
                coeffs.len(),
                space.n_free()
            )));
        }
        Ok(HermiteFunction { space, coeffs })
    }

    pub fn zero(space: HermiteSpace<R>) -> Self {
        let n = space.n_free();
        HermiteFunction {
            space,
            coeffs: vec![R::zero(); n],
        }
    }

    pub fn space(&self) -> &HermiteSpace<R> {
        &self.space
    }

    pub fn coeffs(&self) -> &[R] {
        &self.coeffs
    }

    /// Coefficient of `(node, kind)`, zero when masked.
    pub fn dof_value(&self, node: usize, kind: DofKind) -> R {
        self.space
            .free_index(node, kind)
            .map_or(R::zero(), |i| self.coeffs[i])
    }

    /// Value of the `der`-th derivative at `x`. The function is C1, so for
    /// `der <= 1` the two one-sided values at interior nodes agree; for
    /// `der = 2` the left element's value is returned.
    pub fn eval(&self, x: R, der: usize) -> Result<R> {
        if x < real(-1.0) || x > real(1.0) {
            return Err(Error::InvalidArgument(format!(
                "evaluation point {x} outside [-1, 1]"
            )));
        }
        let e = self.space.mesh().element_of(x);
        let (a, b) = self.space.mesh().element(e);
        let h = b - a;
        let xi = (x - a) / h;
        let shapes = shape_eval(xi, h, der)?;
        let local = [
            self.dof_value(e, DofKind::Value),
            self.dof_value(e, DofKind::Slope),
            self.dof_value(e + 1, DofKind::Value),
            self.dof_value(e + 1, DofKind::Slope),
        ];
        Ok(shapes
            .iter()
            .zip(&local)
            .fold(R::zero(), |acc, (&s, &c)| acc + s * c))
    }
}

/// Nodal interpolation onto the space: the output matches `g` in value and
/// slope at every node. `g` must satisfy the essential boundary conditions
/// (checked against a small tolerance).
pub fn interpolate<R: Real, F: C1Function<R>>(
    space: &HermiteSpace<R>,
    g: &F,
) -> Result<HermiteFunction<R>> {
    let nodes = space.mesh().nodes();
    let last = nodes.len() - 1;
    let tol = real::<R>(1e-12).max(R::epsilon() * real(64.0));
    let checks: [(usize, DofKind); 2] = match space.bc() {
        BcKind::Dirichlet => [(0, DofKind::Value), (last, DofKind::Value)],
        BcKind::Mixed => [(0, DofKind::Value), (last, DofKind::Slope)],
    };
    for (node, kind) in checks {
        let x = nodes[node];
        let v = match kind {
            DofKind::Value => g.value(x),
            DofKind::Slope => g.deriv(x),
        };
        if v.abs() > tol {
            return Err(Error::BcViolation {
                node: x.to_f64().unwrap_or(f64::NAN),
                detail: format!(
                    "interpolation input has {} {v:e} where the space requires 0",
                    match kind {
                        DofKind::Value => "value",
                        DofKind::Slope => "slope",
                    }
                ),
            });
        }
    }
    let mut coeffs = vec![R::zero(); space.n_free()];
    for (node, &x) in nodes.iter().enumerate() {
        if let Some(i) = space.free_index(node, DofKind::Value) {
            coeffs[i] = g.value(x);
        }
        if let Some(i) = space.free_index(node, DofKind::Slope) {
            coeffs[i] = g.deriv(x);
        }
    }
    HermiteFunction::from_coeffs(space.clone(), coeffs)
}

/// One nodal derivative bound.
#[derive(Clone, Debug)]
pub struct ConstraintRow<R> {
    /// Free index of the slope DOF being bounded.
    pub free_dof: usize,
    /// Node the bound lives at.
    pub node: usize,
    /// Upper bound `psi(node)`.
    pub bound: R,
}

/// Upper bounds for the unmasked slope DOFs: the derivative constraint
/// imposed at the grid points. Since the P1 interpolants of `y'` and `psi`
/// are both piecewise linear with the same nodes, bounding the nodal values
/// is equivalent to bounding the interpolants on all of `[-1, 1]`.
///
/// For mixed boundary conditions the slope at `+1` is masked (it is
/// essentially zero), so it gets no row; its feasibility `0 <= psi(1)` is
/// required of the data.
pub fn constraint_rows<R: Real, F: Fn(R) -> R>(
    space: &HermiteSpace<R>,
    psi: F,
) -> Result<Vec<ConstraintRow<R>>> {
    let nodes = space.mesh().nodes();
    if space.bc() == BcKind::Mixed {
        let at_one = psi(*nodes.last().unwrap());
        if at_one < R::zero() {
            return Err(Error::InfeasibleData(format!(
                "mixed boundary conditions force y'(1) = 0 but psi(1) = {at_one} < 0"
            )));
        }
    }
    Ok(nodes
        .iter()
        .enumerate()
        .filter_map(|(node, &x)| {
            space
                .free_index(node, DofKind::Slope)
                .map(|free_dof| ConstraintRow {
                    free_dof,
                    node,
                    bound: psi(x),
                })
        })
        .collect())
}
