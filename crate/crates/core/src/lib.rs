//! A C1 finite-element solver for one-dimensional elliptic distributed
//! optimal control with pointwise upper bounds on the derivative of the
//! state.
//!
//! The reduced problem minimizes
//! `(|y - y_d|^2 + beta |y'' + f|^2) / 2` over states satisfying `y' <= psi`
//! and either Dirichlet (`y(-1) = y(1) = 0`) or mixed (`y(-1) = y'(1) = 0`)
//! boundary conditions. Discretizing with cubic Hermite elements and
//! enforcing the bound at the grid points turns each solve into a small
//! quadratic program with upper bounds on the slope DOFs, handled by a
//! primal-dual active set iteration.
//!
//! The crate is generic over the working scalar (`f32`/`f64`) through
//! [`scalar::Real`]; the `*64` aliases below fix `f64` for everyday use.

// Band-window arithmetic reads better with explicit indices.
#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod assembly;
pub mod band;
pub mod error;
pub mod mesh;
pub mod piecewise;
pub mod problems;
pub mod qp;
pub mod quadrature;
pub mod scalar;
pub mod space;
pub mod study;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::{real, Real};
pub use space::BcKind;

/// `f64` instantiations of the core types.
pub type Mesh1D64 = mesh::Mesh1D<f64>;
pub type HermiteSpace64 = space::HermiteSpace<f64>;
pub type HermiteFunction64 = space::HermiteFunction<f64>;
pub type PiecewiseSmooth64 = piecewise::PiecewiseSmooth<f64>;
pub type ProblemSpec64 = problems::ProblemSpec<f64>;
pub type BoundQp64 = qp::BoundQp<f64>;
pub type QpSolution64 = qp::QpSolution<f64>;
pub type StudyConfig64 = study::StudyConfig<f64>;
