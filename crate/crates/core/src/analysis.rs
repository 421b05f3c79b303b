//! Error norms against exact solutions, estimated orders of convergence,
//! control recovery, and multiplier diagnostics.

use crate::error::Result;
use crate::piecewise::PiecewiseSmooth;
use crate::problems::{ExactInfo, ProblemSpec};
use crate::qp::{BoundQp, QpSolution};
use crate::quadrature::{integrate_with_rule, GaussRule};
use crate::scalar::{real, Accumulator, Real};
use crate::space::{ConstraintRow, HermiteFunction};

/// Gauss points per panel for error norms.
pub const NORM_QUAD_ORDER: usize = 10;
/// Sample points per element (plus nodes) for the max-norm.
pub const LINF_SAMPLES_PER_ELEMENT: usize = 32;

/// Errors in the four reported norms.
#[derive(Clone, Copy, Debug, Default)]
pub struct NormSet<R> {
    pub l2: R,
    pub linf: R,
    pub h1: R,
    pub h2: R,
}

impl<R: Real> NormSet<R> {
    pub fn get(&self, norm: Norm) -> R {
        match norm {
            Norm::L2 => self.l2,
            Norm::Linf => self.linf,
            Norm::H1 => self.h1,
            Norm::H2 => self.h2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Norm {
    L2,
    Linf,
    H1,
    H2,
}

pub const ALL_NORMS: [Norm; 4] = [Norm::L2, Norm::Linf, Norm::H1, Norm::H2];

/// Per-level record of a convergence study.
#[derive(Clone, Debug)]
pub struct ErrorRecord<R> {
    pub level: usize,
    pub elements: usize,
    pub h: R,
    pub errors: NormSet<R>,
    /// log2 error ratios against the previous level; `None` at level 0 or
    /// when a level hits exactly zero error.
    pub eoc: NormSet<Option<R>>,
}

/// L2 / H1 / H2 errors by panel-split Gauss quadrature (split at the exact
/// solution's breakpoints; element boundaries split automatically since the
/// discrete second derivative jumps there), max-norm by dense sampling.
pub fn error_norms<R: Real>(
    u_h: &HermiteFunction<R>,
    exact: &ExactInfo<R>,
    order: usize,
) -> Result<NormSet<R>> {
    let ybar = &exact.ybar;
    let rule = GaussRule::legendre(order)?;
    let mesh = u_h.space().mesh();
    let mut sq = [
        Accumulator::<R>::new(),
        Accumulator::new(),
        Accumulator::new(),
    ];
    let mut linf = R::zero();
    for e in 0..mesh.n_elements() {
        let (a, b) = mesh.element(e);
        for (der, acc) in sq.iter_mut().enumerate() {
            let v = integrate_with_rule(
                (a, b),
                &mut |x| {
                    let d = u_h.eval(x, der).expect("in-domain evaluation") - ybar.eval(x, der);
                    d * d
                },
                ybar.breakpoints(),
                &rule,
            );
            acc.add(v);
        }
        let m = LINF_SAMPLES_PER_ELEMENT;
        for i in 0..=m {
            let x = a + (b - a) * real::<R>(i as f64) / real::<R>(m as f64);
            let d = (u_h.eval(x, 0)? - ybar.eval(x, 0)).abs();
            linf = linf.max(d);
        }
    }
    Ok(NormSet {
        l2: sq[0].value().max(R::zero()).sqrt(),
        linf,
        h1: sq[1].value().max(R::zero()).sqrt(),
        h2: sq[2].value().max(R::zero()).sqrt(),
    })
}

/// Energy norm `sqrt(|v|_L2^2 + beta |v|_H2^2)` of the error.
pub fn energy_error<R: Real>(
    u_h: &HermiteFunction<R>,
    exact: &ExactInfo<R>,
    beta: R,
    order: usize,
) -> Result<R> {
    let n = error_norms(u_h, exact, order)?;
    Ok((n.l2 * n.l2 + beta * n.h2 * n.h2).sqrt())
}

/// Fills in estimated orders of convergence `log2(e_prev / e)` for a
/// sequence of records with halving mesh size.
pub fn eoc<R: Real>(records: &mut [ErrorRecord<R>]) {
    for k in 0..records.len() {
        if k == 0 {
            records[k].eoc = NormSet::default();
            continue;
        }
        let prev = records[k - 1].errors;
        let cur = records[k].errors;
        let rate = |p: R, c: R| {
            if p > R::zero() && c > R::zero() {
                Some((p / c).log2())
            } else {
                None
            }
        };
        records[k].eoc = NormSet {
            l2: rate(prev.l2, cur.l2),
            linf: rate(prev.linf, cur.linf),
            h1: rate(prev.h1, cur.h1),
            h2: rate(prev.h2, cur.h2),
        };
    }
}

/// Mean of the rates over the last three levels (two ratios).
pub fn eoc_tail3<R: Real>(records: &[ErrorRecord<R>], norm: Norm) -> Option<R> {
    if records.len() < 3 {
        return None;
    }
    let e0 = records[records.len() - 3].errors.get(norm);
    let e2 = records[records.len() - 1].errors.get(norm);
    if e0 > R::zero() && e2 > R::zero() {
        Some((e0 / e2).log2() * real(0.5))
    } else {
        None
    }
}

/// Recovered control `u_h = -y_h'' - f`, evaluable away from its
/// breakpoints (element nodes and the kinks of `f`).
pub struct RecoveredControl<'a, R: Real> {
    y_h: &'a HermiteFunction<R>,
    f: &'a PiecewiseSmooth<R>,
}

impl<'a, R: Real> RecoveredControl<'a, R> {
    pub fn new(y_h: &'a HermiteFunction<R>, f: &'a PiecewiseSmooth<R>) -> Self {
        RecoveredControl { y_h, f }
    }

    pub fn eval(&self, x: R) -> R {
        -self.y_h.eval(x, 2).expect("in-domain evaluation") - self.f.eval(x, 0)
    }

    /// Quadrature split points: mesh nodes plus the kinks of `f`.
    pub fn breakpoints(&self) -> Vec<R> {
        let mut b = self.y_h.space().mesh().nodes().to_vec();
        b.extend_from_slice(self.f.breakpoints());
        b.sort_by(|a, c| a.partial_cmp(c).expect("finite breakpoints"));
        b
    }

    /// `|ubar - u_h|_L2` against an exact control.
    pub fn l2_error(&self, ubar: &PiecewiseSmooth<R>, order: usize) -> Result<R> {
        let rule = GaussRule::legendre(order)?;
        let mesh = self.y_h.space().mesh();
        let mut acc = Accumulator::new();
        for e in 0..mesh.n_elements() {
            let (a, b) = mesh.element(e);
            let mut splits = self.f.breakpoints().to_vec();
            splits.extend_from_slice(ubar.breakpoints());
            splits.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
            let v = integrate_with_rule(
                (a, b),
                &mut |x| {
                    let d = self.eval(x) - ubar.eval(x, 0);
                    d * d
                },
                &splits,
                &rule,
            );
            acc.add(v);
        }
        Ok(acc.value().max(R::zero()).sqrt())
    }
}

/// Multiplier diagnostics for one solved level.
#[derive(Clone, Debug)]
pub struct MultiplierDiag<R> {
    /// `(node position, lambda)` per constraint row, in node order.
    pub nodal: Vec<(R, R)>,
    /// Positions of the active nodes.
    pub active_nodes: Vec<R>,
    /// Sum of the multipliers; the discrete counterpart of the multiplier
    /// measure's total mass (the assembled stationarity already pairs
    /// multipliers with slope test values, so no beta rescaling applies).
    pub total_mass: R,
    /// Exact mass when the problem records the multiplier measure.
    pub exact_mass: Option<R>,
    /// Active nodes farther than `2h` from the exact active set.
    pub far_nodes: Vec<R>,
}

pub fn multiplier_diag<R: Real>(
    qp: &BoundQp<R>,
    sol: &QpSolution<R>,
    rows: &[ConstraintRow<R>],
    problem: &ProblemSpec<R>,
    nodes: &[R],
    h: R,
) -> Result<MultiplierDiag<R>> {
    debug_assert_eq!(rows.len(), qp.bounds.len());
    let nodal: Vec<(R, R)> = rows
        .iter()
        .zip(&sol.lambda)
        .map(|(row, &l)| (nodes[row.node], l))
        .collect();
    let active_nodes: Vec<R> = sol.active.iter().map(|&k| nodes[rows[k].node]).collect();
    let total_mass = sol.lambda.iter().fold(R::zero(), |a, &l| a + l);
    let exact = problem.exact.as_ref();
    let exact_mass = exact.map(|e| e.mu.total_mass()).transpose()?;
    let far_nodes = match exact {
        Some(e) => active_nodes
            .iter()
            .copied()
            .filter(|&x| e.active_set.distance(x) > real::<R>(2.0) * h)
            .collect(),
        None => Vec::new(),
    };
    Ok(MultiplierDiag {
        nodal,
        active_nodes,
        total_mass,
        exact_mass,
        far_nodes,
    })
}
