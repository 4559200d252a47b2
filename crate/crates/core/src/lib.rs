//! Numerical toolkit for singular integral operators on intrinsic Lipschitz
//! graphs in the first Heisenberg group ℍ.

pub mod error;
pub mod graphs;
pub mod group;
pub mod kernels;
pub mod quadrature;
pub mod removability;
pub mod sio;
pub mod summation;

pub use error::{Error, Result};
pub use group::{Point, VerticalSubgroup, WPoint};
pub use kernels::{BumpProfile, CZKernel, Symmetry};
