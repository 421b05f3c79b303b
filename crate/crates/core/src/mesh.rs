//! Partitions of the interval `I = (-1, 1)`.
//!
//! Node coordinates are generated from integer ratios, so that special
//! points like `0` and `1/3` land on the exact (correctly rounded) floating
//! values whenever the construction intends them to be grid points.

use crate::error::{Error, Result};
use crate::scalar::{real, Real};

/// Construction family of a mesh, used for reporting.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFamily {
    Uniform,
    Perturbed,
    ThirdAligned,
    Custom,
}

/// Ordered partition of `[-1, 1]` into elements.
#[derive(Clone, Debug)]
pub struct Mesh1D<R> {
    nodes: Vec<R>,
    family: MeshFamily,
}

impl<R: Real> Mesh1D<R> {
    /// `n` equal elements of length `2/n`; for even `n` the origin is a node.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "uniform mesh needs at least one element".into(),
            ));
        }
        let nodes = (0..=n)
            .map(|i| fraction_node::<R>(2 * i as i64 - n as i64, n as i64))
            .collect();
        Ok(Mesh1D {
            nodes,
            family: MeshFamily::Uniform,
        })
    }

    /// Uniform mesh with every interior node moved by `shift * (2/n)`, so the
    /// origin is no longer a grid point. Requires even `n` and
    /// `shift` in `(0, 1/2)`.
    pub fn perturbed(n: usize, shift: R) -> Result<Self> {
        if n == 0 || !n.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "perturbed mesh needs a positive even element count, got {n}"
            )));
        }
        if shift <= R::zero() || shift >= real(0.5) {
            return Err(Error::InvalidArgument(format!(
                "perturbation shift must lie in (0, 1/2), got {shift}"
            )));
        }
        let nf: R = real(n as f64);
        let offset = shift * real::<R>(2.0) / nf;
        let mut nodes = Vec::with_capacity(n + 1);
        nodes.push(real(-1.0));
        for i in 1..n {
            nodes.push(fraction_node::<R>(2 * i as i64 - n as i64, n as i64) + offset);
        }
        nodes.push(real(1.0));
        let mesh = Mesh1D {
            nodes,
            family: MeshFamily::Perturbed,
        };
        debug_assert!(mesh.nodes.iter().all(|&x| x != R::zero()));
        Ok(mesh)
    }

    /// Uniform mesh with `3 * 2^k` elements; `1/3` is a grid point.
    pub fn third_aligned(k: u32) -> Self {
        let n = 3usize << k;
        let mut mesh = Self::uniform(n).expect("element count is positive");
        mesh.family = MeshFamily::ThirdAligned;
        mesh
    }

    /// Wraps an explicit node list (must be strictly increasing from -1 to 1).
    pub fn from_nodes(nodes: Vec<R>) -> Result<Self> {
        let mesh = Mesh1D {
            nodes,
            family: MeshFamily::Custom,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    fn validate(&self) -> Result<()> {
        if self.nodes.len() < 2 {
            return Err(Error::InvalidArgument(
                "mesh needs at least one element".into(),
            ));
        }
        if self.nodes[0] != real(-1.0) || *self.nodes.last().unwrap() != real(1.0) {
            return Err(Error::InvalidArgument(
                "mesh must span [-1, 1] exactly".into(),
            ));
        }
        if self.nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "mesh nodes must be strictly increasing".into(),
            ));
        }
        Ok(())
    }

    /// Bisects every element at its midpoint; the original nodes survive.
    pub fn refine(&self) -> Self {
        let mut nodes = Vec::with_capacity(2 * self.nodes.len() - 1);
        for w in self.nodes.windows(2) {
            nodes.push(w[0]);
            nodes.push((w[0] + w[1]) * real(0.5));
        }
        nodes.push(*self.nodes.last().unwrap());
        Mesh1D {
            nodes,
            family: self.family,
        }
    }

    pub fn nodes(&self) -> &[R] {
        &self.nodes
    }

    pub fn family(&self) -> MeshFamily {
        self.family
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Endpoints of element `e`.
    pub fn element(&self, e: usize) -> (R, R) {
        (self.nodes[e], self.nodes[e + 1])
    }

    /// Length of element `e`.
    pub fn h(&self, e: usize) -> R {
        self.nodes[e + 1] - self.nodes[e]
    }

    /// Mesh size `h`: the largest element length.
    pub fn h_max(&self) -> R {
        (0..self.n_elements())
            .map(|e| self.h(e))
            .fold(R::zero(), R::max)
    }

    pub fn h_min(&self) -> R {
        (0..self.n_elements())
            .map(|e| self.h(e))
            .fold(R::infinity(), R::min)
    }

    /// Index of the element containing `x`; at interior nodes the left
    /// element wins, matching the derivative conventions downstream.
    pub fn element_of(&self, x: R) -> usize {
        let c = self.nodes.partition_point(|&n| n < x);
        c.max(1).min(self.n_elements()) - 1
    }
}

/// `num / den` with both operands exact integers (single correctly rounded
/// division).
fn fraction_node<R: Real>(num: i64, den: i64) -> R {
    real::<R>(num as f64) / real::<R>(den as f64)
}
