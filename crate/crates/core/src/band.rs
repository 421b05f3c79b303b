//! Symmetric banded matrices and a banded Cholesky solver.
//!
//! Cubic Hermite assembly couples DOFs only within shared elements, so the
//! system matrix has half-bandwidth 3 in the node-major DOF ordering.

use crate::error::{Error, Result};
use crate::scalar::{Accumulator, Real};

/// Symmetric banded matrix; `diags[d][i]` stores the entry `(i, i + d)`.
#[derive(Clone, Debug)]
pub struct SymBandMatrix<R> {
    n: usize,
    bw: usize,
    diags: Vec<Vec<R>>,
}

impl<R: Real> SymBandMatrix<R> {
    pub fn zeros(n: usize, bw: usize) -> Self {
        let diags = (0..=bw)
            .map(|d| vec![R::zero(); n.saturating_sub(d)])
            .collect();
        SymBandMatrix { n, bw, diags }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    /// Entry `(i, j)`; zero outside the band.
    pub fn at(&self, i: usize, j: usize) -> R {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        if d > self.bw {
            R::zero()
        } else {
            self.diags[d][lo]
        }
    }

    /// Adds `v` to the entry `(i, j)` (and by symmetry `(j, i)`).
    pub fn add(&mut self, i: usize, j: usize, v: R) {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        assert!(
            d <= self.bw,
            "entry ({i}, {j}) outside bandwidth {}",
            self.bw
        );
        self.diags[d][lo] += v;
    }

    /// `y = A x` with compensated per-row accumulation.
    pub fn matvec(&self, x: &[R]) -> Vec<R> {
        debug_assert_eq!(x.len(), self.n);
        let mut y = vec![R::zero(); self.n];
        for i in 0..self.n {
            let mut acc = Accumulator::new();
            let lo = i.saturating_sub(self.bw);
            let hi = (i + self.bw).min(self.n - 1);
            for j in lo..=hi {
                acc.add_prod(self.at(i, j), x[j]);
            }
            y[i] = acc.value();
        }
        y
    }

    /// `max_i sum_j |A_ij| |x_j|`: scaled by the machine epsilon this is the
    /// stationarity-residual floor implied by merely representing `x`.
    pub fn abs_matvec_inf(&self, x: &[R]) -> R {
        let mut worst = R::zero();
        for i in 0..self.n {
            let mut acc = R::zero();
            let lo = i.saturating_sub(self.bw);
            let hi = (i + self.bw).min(self.n - 1);
            for j in lo..=hi {
                acc += self.at(i, j).abs() * x[j].abs();
            }
            worst = worst.max(acc);
        }
        worst
    }

    /// Residual `b - A x` with compensated accumulation.
    pub fn residual(&self, x: &[R], b: &[R]) -> Vec<R> {
        let mut r = vec![R::zero(); self.n];
        for i in 0..self.n {
            let mut acc = Accumulator::new();
            acc.add(b[i]);
            let lo = i.saturating_sub(self.bw);
            let hi = (i + self.bw).min(self.n - 1);
            for j in lo..=hi {
                acc.add_prod(-self.at(i, j), x[j]);
            }
            r[i] = acc.value();
        }
        r
    }

    /// Quadratic-form value `x' A x / 2 - b' x`, compensated.
    pub fn objective(&self, x: &[R], b: &[R]) -> R {
        let ax = self.matvec(x);
        let mut acc = Accumulator::new();
        for i in 0..self.n {
            acc.add_prod(x[i], ax[i] * crate::scalar::real(0.5));
            acc.add_prod(-b[i], x[i]);
        }
        acc.value()
    }

    pub fn to_dense(&self) -> Vec<Vec<R>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.at(i, j)).collect())
            .collect()
    }

    /// Banded Cholesky factorization `A = L L'`. Fails when the matrix is
    /// not positive definite.
    pub fn cholesky(&self) -> Result<BandCholesky<R>> {
        let n = self.n;
        let bw = self.bw;
        // l[d][i] stores L(i + d, i): column-major lower band.
        let mut l: Vec<Vec<R>> = (0..=bw)
            .map(|d| vec![R::zero(); n.saturating_sub(d)])
            .collect();
        for j in 0..n {
            let mut acc = Accumulator::new();
            acc.add(self.at(j, j));
            let k0 = j.saturating_sub(bw);
            for k in k0..j {
                let v = l[j - k][k];
                acc.add_prod(-v, v);
            }
            let pivot = acc.value();
            if pivot <= R::zero() || !pivot.is_finite() {
                return Err(Error::Internal(format!(
                    "matrix is not positive definite (pivot {pivot:e} at column {j})"
                )));
            }
            let ljj = pivot.sqrt();
            l[0][j] = ljj;
            let imax = (j + bw).min(n - 1);
            for i in j + 1..=imax {
                let mut acc = Accumulator::new();
                acc.add(self.at(i, j));
                let k0 = i.saturating_sub(bw);
                for k in k0..j {
                    acc.add_prod(-l[i - k][k], l[j - k][k]);
                }
                l[i - j][j] = acc.value() / ljj;
            }
        }
        Ok(BandCholesky { n, bw, l })
    }

    /// Direct solve `A x = b` with extended-precision iterative refinement:
    /// the compensated residual lets refinement drive `x` to the accuracy of
    /// its own floating representation, which the convergence tables need at
    /// fine meshes.
    pub fn solve_refined(&self, b: &[R]) -> Result<Vec<R>> {
        let chol = self.cholesky()?;
        Ok(self.solve_refined_with(&chol, b))
    }

    pub fn solve_refined_with(&self, chol: &BandCholesky<R>, b: &[R]) -> Vec<R> {
        let mut x = chol.solve(b);
        let mut best = x.clone();
        let mut best_norm = inf_norm(&self.residual(&x, b));
        for _ in 0..8 {
            let r = self.residual(&x, b);
            let norm = inf_norm(&r);
            if norm < best_norm {
                best_norm = norm;
                best.copy_from_slice(&x);
            }
            if norm == R::zero() {
                break;
            }
            let dx = chol.solve(&r);
            let mut moved = false;
            for i in 0..x.len() {
                let nx = x[i] + dx[i];
                if nx != x[i] {
                    moved = true;
                }
                x[i] = nx;
            }
            if !moved {
                break;
            }
        }
        if inf_norm(&self.residual(&x, b)) <= best_norm {
            x
        } else {
            best
        }
    }
}

/// Lower-triangular banded Cholesky factor.
#[derive(Clone, Debug)]
pub struct BandCholesky<R> {
    n: usize,
    bw: usize,
    l: Vec<Vec<R>>,
}

impl<R: Real> BandCholesky<R> {
    /// Solves `L L' x = b`.
    pub fn solve(&self, b: &[R]) -> Vec<R> {
        debug_assert_eq!(b.len(), self.n);
        let mut y = b.to_vec();
        // Forward: L y = b.
        for i in 0..self.n {
            let mut acc = Accumulator::new();
            acc.add(y[i]);
            let k0 = i.saturating_sub(self.bw);
            for k in k0..i {
                acc.add_prod(-self.l[i - k][k], y[k]);
            }
            y[i] = acc.value() / self.l[0][i];
        }
        // Backward: L' x = y.
        for i in (0..self.n).rev() {
            let mut acc = Accumulator::new();
            acc.add(y[i]);
            let imax = (i + self.bw).min(self.n - 1);
            for k in i + 1..=imax {
                acc.add_prod(-self.l[k - i][i], y[k]);
            }
            y[i] = acc.value() / self.l[0][i];
        }
        y
    }
}

pub fn inf_norm<R: Real>(v: &[R]) -> R {
    v.iter().map(|x| x.abs()).fold(R::zero(), R::max)
}
