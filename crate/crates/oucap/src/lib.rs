//! Numerical Gaussian potential theory on finite-dimensional model spaces.
//!
//! The ambient space is `R^n` with the standard Gaussian measure. On top of a
//! Hermite spectral discretization the crate provides
//!
//! * the Ornstein-Uhlenbeck semigroup (Mehler quadrature and spectral form),
//!   its maximal function and Cameron-Martin derivatives ([`semigroup`]),
//! * Bessel potentials, Hilbert-Schmidt derivative norms, Sobolev norms and a
//!   Meyer-equivalence probe ([`potential`]),
//! * smooth truncation operators and the composition/multiplicative
//!   estimates behind them ([`truncation`]),
//! * two Sobolev capacities posed as convex optimization problems, their
//!   equivalence experiment and an `L^p`-uniqueness verdict ([`capacity`]),
//! * Gaussian Hausdorff measures of fractional codimension ([`hausdorff`]),
//! * exact sampling of multiparameter Ornstein-Uhlenbeck sheets and
//!   Kakutani-type hitting experiments ([`sheet`]).
//!
//! See the `book/` guide for worked examples; the `oucap` binary drives the
//! experiments from configuration files.

pub mod capacity;
pub mod error;
pub mod hausdorff;
pub mod io;
pub mod jet;
pub mod model;
pub mod potential;
pub mod random;
pub mod region;
pub mod selftest;
pub mod semigroup;
pub mod sheet;
pub mod truncation;

pub use error::{Error, Result};
pub use model::{
    basis_matrix, build_grid, expand, expand_nodal, hermite_eval, GaussModelSpace,
    HermiteExpansion, MultiIndex, QuadGrid,
};
