//! Bound-constrained quadratic programs: minimize `x'Ax/2 - b'x` subject to
//! upper bounds on a subset of coordinates (the slope DOFs), solved by a
//! primal-dual active set iteration with a brute-force enumeration oracle.

use crate::band::{inf_norm, SymBandMatrix};
use crate::error::{Error, Result};
use crate::scalar::{real, Accumulator, Real};

/// One upper bound `x[index] <= upper`.
#[derive(Clone, Copy, Debug)]
pub struct Bound<R> {
    pub index: usize,
    pub upper: R,
}

/// Quadratic program with upper bounds on a subset of DOFs.
#[derive(Clone, Debug)]
pub struct BoundQp<R> {
    pub a: SymBandMatrix<R>,
    pub b: Vec<R>,
    pub bounds: Vec<Bound<R>>,
}

impl<R: Real> BoundQp<R> {
    pub fn new(a: SymBandMatrix<R>, b: Vec<R>, bounds: Vec<Bound<R>>) -> Result<Self> {
        if b.len() != a.dim() {
            return Err(Error::InvalidArgument(format!(
                "load length {} does not match system dimension {}",
                b.len(),
                a.dim()
            )));
        }
        let mut seen = vec![false; a.dim()];
        for bound in &bounds {
            if bound.index >= a.dim() {
                return Err(Error::InvalidArgument(format!(
                    "bound index {} out of range for dimension {}",
                    bound.index,
                    a.dim()
                )));
            }
            if seen[bound.index] {
                return Err(Error::InvalidArgument(format!(
                    "duplicate bound on DOF {}",
                    bound.index
                )));
            }
            seen[bound.index] = true;
        }
        Ok(BoundQp { a, b, bounds })
    }
}

/// Solver tolerances; the defaults are what the verification suite asserts.
#[derive(Clone, Copy, Debug)]
pub struct KktTolerances {
    /// `x[i] - upper[i] <= feasibility`
    pub feasibility: f64,
    /// `lambda[i] >= -dual`
    pub dual: f64,
    /// `lambda[i] * (upper[i] - x[i]) <= complementarity`
    pub complementarity: f64,
    /// `|A x - b + sum lambda e|_inf <= stationarity * (1 + |b|_inf)`
    pub stationarity: f64,
}

impl Default for KktTolerances {
    fn default() -> Self {
        KktTolerances {
            feasibility: 1e-10,
            dual: 1e-12,
            complementarity: 1e-9,
            stationarity: 1e-9,
        }
    }
}

/// Options for the active-set iteration.
#[derive(Clone, Copy, Debug)]
pub struct PdasOptions {
    /// Complementarity weight; the activity test is applied after symmetric
    /// diagonal scaling of `A` to unit diagonal, which this parameter
    /// multiplies.
    pub gamma: f64,
    pub max_iter: usize,
}

impl Default for PdasOptions {
    fn default() -> Self {
        PdasOptions {
            gamma: 1.0,
            max_iter: 100,
        }
    }
}

/// Solution with multipliers.
#[derive(Clone, Debug)]
pub struct QpSolution<R> {
    pub x: Vec<R>,
    /// Multiplier per bound row (zero on inactive rows).
    pub lambda: Vec<R>,
    /// Bound rows whose variable sits at the bound.
    pub active: Vec<usize>,
    /// Number of linear solves performed.
    pub iterations: usize,
    /// Stationarity residual `|A x - b + sum lambda e|_inf`.
    pub kkt_residual: R,
}

/// Residual diagnostics of a candidate solution.
#[derive(Clone, Copy, Debug)]
pub struct KktReport<R> {
    pub stationarity: R,
    pub max_feasibility_violation: R,
    pub max_complementarity: R,
    pub min_lambda: R,
}

impl<R: Real> KktReport<R> {
    pub fn within(&self, tol: &KktTolerances, b_inf: R) -> bool {
        self.stationarity <= real::<R>(tol.stationarity) * (R::one() + b_inf)
            && self.max_feasibility_violation <= real(tol.feasibility)
            && self.max_complementarity <= real(tol.complementarity)
            && self.min_lambda >= -real::<R>(tol.dual)
    }
}

/// Stationarity, feasibility, complementarity and multiplier-sign residuals
/// of `sol` for `qp`, computed with compensated accumulation.
pub fn kkt_report<R: Real>(qp: &BoundQp<R>, sol: &QpSolution<R>) -> KktReport<R> {
    let mut grad = qp.a.residual(&sol.x, &qp.b); // b - A x
    for (bound, &l) in qp.bounds.iter().zip(&sol.lambda) {
        grad[bound.index] -= l; // b - A x - lambda = -(A x - b + lambda)
    }
    let stationarity = inf_norm(&grad);
    let mut feas = R::zero();
    let mut comp = R::zero();
    let mut min_lambda = R::infinity();
    for (bound, &l) in qp.bounds.iter().zip(&sol.lambda) {
        feas = feas.max(sol.x[bound.index] - bound.upper);
        comp = comp.max(l * (bound.upper - sol.x[bound.index]));
        min_lambda = min_lambda.min(l);
    }
    if qp.bounds.is_empty() {
        min_lambda = R::zero();
    }
    KktReport {
        stationarity,
        max_feasibility_violation: feas.max(R::zero()),
        max_complementarity: comp,
        min_lambda,
    }
}

/// Fixes `x = upper` on the active rows, solves the reduced system for the
/// remaining coordinates, and recovers multipliers from the residual.
fn solve_with_active<R: Real>(qp: &BoundQp<R>, active: &[bool]) -> Result<(Vec<R>, Vec<R>)> {
    let n = qp.a.dim();
    let bw = qp.a.bandwidth();
    let mut fixed_value = vec![None; n];
    for (k, bound) in qp.bounds.iter().enumerate() {
        if active[k] {
            fixed_value[bound.index] = Some(bound.upper);
        }
    }
    let keep: Vec<usize> = (0..n).filter(|&i| fixed_value[i].is_none()).collect();
    let mut red_index = vec![usize::MAX; n];
    for (r, &i) in keep.iter().enumerate() {
        red_index[i] = r;
    }
    // Reduced matrix: removing rows/columns never widens the band.
    let mut ared = SymBandMatrix::zeros(keep.len(), bw.min(keep.len().saturating_sub(1)));
    let mut bred = vec![R::zero(); keep.len()];
    for (r, &i) in keep.iter().enumerate() {
        let mut acc = Accumulator::new();
        acc.add(qp.b[i]);
        let lo = i.saturating_sub(bw);
        let hi = (i + bw).min(n - 1);
        for j in lo..=hi {
            match fixed_value[j] {
                Some(c) => acc.add_prod(-qp.a.at(i, j), c),
                None if j >= i => ared.add(r, red_index[j], qp.a.at(i, j)),
                None => {}
            }
        }
        bred[r] = acc.value();
    }
    let xred = ared.solve_refined(&bred)?;
    let mut x = vec![R::zero(); n];
    for (r, &i) in keep.iter().enumerate() {
        x[i] = xred[r];
    }
    for i in 0..n {
        if let Some(c) = fixed_value[i] {
            x[i] = c;
        }
    }
    let grad = qp.a.residual(&x, &qp.b); // b - A x
    let lambda = qp
        .bounds
        .iter()
        .enumerate()
        .map(|(k, bound)| {
            if active[k] {
                grad[bound.index]
            } else {
                R::zero()
            }
        })
        .collect();
    Ok((x, lambda))
}

/// Final ulp-granularity polish of the stationarity residual.
///
/// At fine meshes the bending block carries entries of order `1/h^3`
/// against state values of order one, so merely representing the solution
/// in floating point leaves a residual of order `eps * |A| |x|` that no
/// amount of plain iterative refinement can remove (the correction rounds
/// away). Columns with small entries (the slope DOFs) still offer
/// per-ulp residual steps far below that floor, so nudging coordinates by
/// integer multiples of their floating spacing trims rows toward the
/// representation optimum. Total movement is a few hundred ulps per
/// coordinate, orders of magnitude below the discretization error.
fn polish_residual<R: Real>(
    a: &SymBandMatrix<R>,
    b: &[R],
    x: &mut [R],
    adjustable: &[bool],
    trim_row: &[bool],
    target: R,
) {
    let n = a.dim();
    let bw = a.bandwidth();
    let xmax = inf_norm(x).max(R::min_positive_value());
    let spacing = |v: R| R::epsilon() * v.abs().max(xmax * real(1e-6));
    let cap: R = real(1e7);
    let trimmed_norm = |r: &[R]| {
        r.iter()
            .zip(trim_row)
            .filter(|(_, &t)| t)
            .map(|(v, _)| v.abs())
            .fold(R::zero(), R::max)
    };

    // Dithered quantization passes: compute the (sub-ulp) real correction
    // from the reduced system, then round it coordinate by coordinate onto
    // the floating lattice. The rounding of each coordinate is chosen to
    // trim the row whose adjustable columns end there, so every row is
    // finalized to within half of its closing granularity instead of
    // accumulating independent rounding noise. Rows that lose their closing
    // column to a larger competitor settle in a later pass.
    let kept: Vec<usize> = (0..n).filter(|&k| adjustable[k] && trim_row[k]).collect();
    let chol = if kept.is_empty() {
        None
    } else {
        let mut red_index = vec![usize::MAX; n];
        for (rk, &k) in kept.iter().enumerate() {
            red_index[k] = rk;
        }
        let mut ared = SymBandMatrix::zeros(kept.len(), bw.min(kept.len().saturating_sub(1)));
        for (rk, &i) in kept.iter().enumerate() {
            let hi = (i + bw).min(n - 1);
            for j in i..=hi {
                if red_index[j] != usize::MAX {
                    ared.add(rk, red_index[j], a.at(i, j));
                }
            }
        }
        ared.cholesky().ok()
    };
    if let Some(chol) = &chol {
        // Last adjustable nonzero column of each row: the point where the
        // row's residual must be settled.
        let mut last_opt = vec![usize::MAX; n];
        for i in 0..n {
            if !trim_row[i] {
                continue;
            }
            let lo = i.saturating_sub(bw);
            let hi = (i + bw).min(n - 1);
            for j in lo..=hi {
                if adjustable[j] && a.at(i, j) != R::zero() {
                    last_opt[i] = j;
                }
            }
        }
        for _pass in 0..4 {
            let r0 = a.residual(x, b);
            let norm0 = trimmed_norm(&r0);
            if norm0 <= target {
                return;
            }
            let rred: Vec<R> = kept.iter().map(|&i| r0[i]).collect();
            let dred = chol.solve(&rred);
            let mut delta = vec![R::zero(); n];
            for (rk, &i) in kept.iter().enumerate() {
                delta[i] = dred[rk];
            }
            let snapshot = x.to_vec();
            let mut pending = r0;
            for j in 0..n {
                if !adjustable[j] {
                    continue;
                }
                let u = spacing(x[j]);
                let lo = j.saturating_sub(bw);
                let duty = (lo..=j)
                    .filter(|&i| trim_row[i] && last_opt[i] == j && pending[i].abs() > target)
                    .max_by(|&p, &q| {
                        pending[p]
                            .abs()
                            .partial_cmp(&pending[q].abs())
                            .expect("finite residuals")
                    });
                // A closing column trims its duty row outright (the move
                // stays bounded by `cap` ulps, far below the discretization
                // error); other columns round the real correction.
                let k = match duty {
                    Some(i) => (pending[i] / (a.at(i, j) * u)).round(),
                    None => (delta[j] / u).round(),
                };
                if k == R::zero() || k.abs() > cap {
                    continue;
                }
                let moved = x[j] + k * u;
                if moved == x[j] {
                    continue;
                }
                let dx = moved - x[j];
                x[j] = moved;
                let mlo = j.saturating_sub(bw);
                let mhi = (j + bw).min(n - 1);
                for m in mlo..=mhi {
                    pending[m] -= a.at(m, j) * dx;
                }
            }
            if trimmed_norm(&a.residual(x, b)) >= norm0 {
                x.copy_from_slice(&snapshot);
                break;
            }
        }
    }

    // Greedy cleanup: single moves accepted only when they lower the local
    // max over the rows they touch.
    for _pass in 0..8 {
        let mut r = a.residual(x, b);
        if trimmed_norm(&r) <= target {
            return;
        }
        let mut improved = false;
        for i in 0..n {
            if !trim_row[i] || r[i].abs() <= target {
                continue;
            }
            let lo = i.saturating_sub(bw);
            let hi = (i + bw).min(n - 1);
            let mut best: Option<(usize, R, R)> = None;
            for j in lo..=hi {
                if !adjustable[j] {
                    continue;
                }
                let aij = a.at(i, j);
                if aij == R::zero() {
                    continue;
                }
                let step = spacing(x[j]);
                let k = (r[i] / (aij * step)).round();
                if k == R::zero() || k.abs() > cap {
                    continue;
                }
                let moved = x[j] + k * step;
                if moved == x[j] {
                    continue;
                }
                let delta = moved - x[j];
                let mlo = j.saturating_sub(bw);
                let mhi = (j + bw).min(n - 1);
                let mut before = R::zero();
                let mut after = R::zero();
                for m in mlo..=mhi {
                    if !trim_row[m] {
                        continue;
                    }
                    before = before.max(r[m].abs());
                    after = after.max((r[m] - a.at(m, j) * delta).abs());
                }
                if after < before && best.as_ref().is_none_or(|&(_, _, b)| after < b) {
                    best = Some((j, moved, after));
                }
            }
            if let Some((j, moved, _)) = best {
                let delta = moved - x[j];
                x[j] = moved;
                let mlo = j.saturating_sub(bw);
                let mhi = (j + bw).min(n - 1);
                for m in mlo..=mhi {
                    r[m] -= a.at(m, j) * delta;
                }
                improved = true;
            }
        }
        if !improved {
            return;
        }
    }
}

fn active_list(active: &[bool]) -> Vec<usize> {
    active
        .iter()
        .enumerate()
        .filter_map(|(k, &a)| if a { Some(k) } else { None })
        .collect()
}

/// Bound rows whose variable sits at the bound (within a small slack), the
/// canonical report shared by both solvers.
fn rows_at_bound<R: Real>(qp: &BoundQp<R>, x: &[R]) -> Vec<usize> {
    qp.bounds
        .iter()
        .enumerate()
        .filter_map(|(k, bound)| {
            let slack = bound.upper - x[bound.index];
            if slack <= real::<R>(1e-8) * (R::one() + bound.upper.abs()) {
                Some(k)
            } else {
                None
            }
        })
        .collect()
}

fn finish<R: Real>(qp: &BoundQp<R>, x: Vec<R>, lambda: Vec<R>, iterations: usize) -> QpSolution<R> {
    let mut sol = QpSolution {
        active: rows_at_bound(qp, &x),
        x,
        lambda,
        iterations,
        kkt_residual: R::zero(),
    };
    sol.kkt_residual = kkt_report(qp, &sol).stationarity;
    sol
}

/// Primal-dual active set iteration. Each step fixes the predicted active
/// rows at their bounds, solves the reduced SPD system, recovers multipliers
/// from the residual, and re-predicts activity from
/// `lambda + gamma * d * (x - upper) > 0` (with `d` the matrix diagonal, the
/// unit-diagonal scaling of the activity test). Stops when the active set
/// repeats; by strict convexity the fixed point is the unique minimizer.
pub fn solve_pdas<R: Real>(qp: &BoundQp<R>, opts: &PdasOptions) -> Result<QpSolution<R>> {
    let m = qp.bounds.len();
    let polish_target = real::<R>(5e-11) * (R::one() + inf_norm(&qp.b));
    if m == 0 {
        let mut x = qp.a.solve_refined(&qp.b)?;
        let all = vec![true; qp.a.dim()];
        polish_residual(&qp.a, &qp.b, &mut x, &all, &all, polish_target);
        return Ok(finish(qp, x, Vec::new(), 1));
    }
    let gamma: R = real(opts.gamma);
    if gamma <= R::zero() {
        return Err(Error::InvalidArgument(format!(
            "gamma must be positive, got {}",
            opts.gamma
        )));
    }
    let mut active = vec![false; m];
    let mut previous: Option<Vec<bool>> = None;
    for iter in 1..=opts.max_iter {
        let (mut x, mut lambda) = solve_with_active(qp, &active)?;
        let mut next = vec![false; m];
        for (k, bound) in qp.bounds.iter().enumerate() {
            let scale = qp.a.at(bound.index, bound.index);
            next[k] = lambda[k] + gamma * scale * (x[bound.index] - bound.upper) > R::zero();
        }
        if next == active {
            // Converged: trim the residual of the multiplier-free rows, then
            // refresh the multipliers from the polished solution. Bounded
            // coordinates sitting close to their bound are left untouched so
            // the polish cannot push them infeasible.
            let mut adjustable = vec![true; qp.a.dim()];
            let mut trim_row = vec![true; qp.a.dim()];
            for (k, bound) in qp.bounds.iter().enumerate() {
                if active[k] {
                    adjustable[bound.index] = false;
                    trim_row[bound.index] = false;
                } else if bound.upper - x[bound.index]
                    <= real::<R>(1e-6) * (R::one() + bound.upper.abs())
                {
                    adjustable[bound.index] = false;
                }
            }
            polish_residual(&qp.a, &qp.b, &mut x, &adjustable, &trim_row, polish_target);
            let grad = qp.a.residual(&x, &qp.b);
            for (k, bound) in qp.bounds.iter().enumerate() {
                lambda[k] = if active[k] {
                    grad[bound.index]
                } else {
                    R::zero()
                };
            }
            return Ok(finish(qp, x, lambda, iter));
        }
        previous = Some(std::mem::replace(&mut active, next));
    }
    Err(Error::NoConvergence {
        max_iter: opts.max_iter,
        previous: previous.map(|p| active_list(&p)).unwrap_or_default(),
        current: active_list(&active),
    })
}

/// Enumeration oracle: tries all `2^m` active sets and returns the candidate
/// that is primal feasible with nonnegative multipliers. Deliberately uses a
/// dense Cholesky independent of the banded path, so the oracle also
/// cross-checks the linear algebra.
pub fn solve_bruteforce<R: Real>(qp: &BoundQp<R>) -> Result<QpSolution<R>> {
    let m = qp.bounds.len();
    if m > 16 {
        return Err(Error::TooLarge(m));
    }
    let n = qp.a.dim();
    let dense = qp.a.to_dense();
    let feas_tol = real::<R>(KktTolerances::default().feasibility);
    let dual_tol = real::<R>(KktTolerances::default().dual);
    // Popcount-then-value order: the non-degenerate optimum is unique, and
    // smaller active sets are checked first.
    let mut masks: Vec<u32> = (0..1u32 << m).collect();
    masks.sort_by_key(|mask| (mask.count_ones(), *mask));
    for (tried, mask) in masks.into_iter().enumerate() {
        let active: Vec<bool> = (0..m).map(|k| mask >> k & 1 == 1).collect();
        let mut fixed = vec![None; n];
        for (k, bound) in qp.bounds.iter().enumerate() {
            if active[k] {
                fixed[bound.index] = Some(bound.upper);
            }
        }
        let keep: Vec<usize> = (0..n).filter(|&i| fixed[i].is_none()).collect();
        let mut ared = vec![vec![R::zero(); keep.len()]; keep.len()];
        let mut bred = vec![R::zero(); keep.len()];
        for (r, &i) in keep.iter().enumerate() {
            let mut rhs = qp.b[i];
            for j in 0..n {
                if let Some(c) = fixed[j] {
                    rhs -= dense[i][j] * c
                }
            }
            bred[r] = rhs;
            for (s, &j) in keep.iter().enumerate() {
                ared[r][s] = dense[i][j];
            }
        }
        let Some(xred) = dense_cholesky_solve(ared, bred) else {
            return Err(Error::Internal(
                "reduced system not positive definite in brute-force enumeration".into(),
            ));
        };
        let mut x = vec![R::zero(); n];
        for (r, &i) in keep.iter().enumerate() {
            x[i] = xred[r];
        }
        for i in 0..n {
            if let Some(c) = fixed[i] {
                x[i] = c;
            }
        }
        let mut lambda = vec![R::zero(); m];
        let mut ok = true;
        for (k, bound) in qp.bounds.iter().enumerate() {
            if active[k] {
                let mut acc = Accumulator::new();
                acc.add(qp.b[bound.index]);
                for j in 0..n {
                    acc.add_prod(-dense[bound.index][j], x[j]);
                }
                lambda[k] = acc.value();
                if lambda[k] < -dual_tol {
                    ok = false;
                }
            } else if x[bound.index] - bound.upper > feas_tol {
                ok = false;
            }
        }
        if ok {
            return Ok(finish(qp, x, lambda, tried + 1));
        }
    }
    Err(Error::Internal(
        "no active set yields a feasible KKT point; matrix is likely not positive definite".into(),
    ))
}

/// Dense Cholesky solve for the oracle; returns `None` if not SPD.
fn dense_cholesky_solve<R: Real>(mut a: Vec<Vec<R>>, mut b: Vec<R>) -> Option<Vec<R>> {
    let n = a.len();
    for j in 0..n {
        let mut d = a[j][j];
        for k in 0..j {
            d -= a[j][k] * a[j][k];
        }
        if d <= R::zero() || !d.is_finite() {
            return None;
        }
        let ljj = d.sqrt();
        a[j][j] = ljj;
        for i in j + 1..n {
            let mut v = a[i][j];
            for k in 0..j {
                v -= a[i][k] * a[j][k];
            }
            a[i][j] = v / ljj;
        }
    }
    for i in 0..n {
        let mut v = b[i];
        for k in 0..i {
            v -= a[i][k] * b[k];
        }
        b[i] = v / a[i][i];
    }
    for i in (0..n).rev() {
        let mut v = b[i];
        for k in i + 1..n {
            v -= a[k][i] * b[k];
        }
        b[i] = v / a[i][i];
    }
    Some(b)
}
