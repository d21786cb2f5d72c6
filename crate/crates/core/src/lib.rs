//! Finite-dimensional numerics for generalized resolvents of isometric and
//! symmetric operators.

pub mod error;
pub mod extensions;
pub mod fixtures;
pub mod generate;
pub mod numkernel;
pub mod operators;
pub mod par;
pub mod partial;
pub mod random;
pub mod resolvents;
pub mod spectral;

pub use error::{Error, Result};
pub use numkernel::{CMatrix, Subspace, TolPolicy};
pub use operators::{IsometryOp, Point, SymmetricOp};
pub use partial::PartialMap;
