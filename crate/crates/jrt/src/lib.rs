//! Exact p-adic lattice computations for relative trace comparisons on
//! unitary and general linear groups: orbital integrals, Hecke algebras,
//! transfer factors and finite hermitian geometry.

pub mod error;
pub mod finite;
pub mod hecke;
pub mod lattice;
pub mod linalg;
pub mod orbital;
pub mod orbits;
pub mod plocal;

pub use error::{Error, Result};
pub use lattice::{Budget, InvariantProfile, Lattice};
pub use linalg::Matrix;
pub use plocal::{FNumber, FieldConfig, Scalar, XLaurent, Q};

pub type QMatrix = Matrix<Q>;
pub type FMatrix = Matrix<FNumber>;
/// Lattices over the ring of integers of the quadratic extension.
pub type OFLattice = Lattice<FNumber>;
/// Lattices over the ring of integers of the base field.
pub type OF0Lattice = Lattice<Q>;
