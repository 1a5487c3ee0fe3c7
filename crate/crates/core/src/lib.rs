//! Analysis of the complementarity set of the copositive cone.
//!
//! For a copositive `X` and a completely positive `U` with `X • U = 0` the
//! crate computes the zero set of `X` (vertices, contact sets, blocks),
//! splits `U` into block components, checks the non-degeneracy assumptions
//! under which the pair admits a local description by bi-linear defining
//! equations, builds those equations and certifies that their Jacobian has
//! full row rank.

pub mod cli;
pub mod complement;
pub mod cones;
pub mod defeq;
pub mod error;
pub mod indices;
pub mod linalg;
pub mod nnls;
pub mod paperlab;
pub mod symcore;
pub mod wire;
pub mod zerostruct;

pub use error::{Error, Result};
pub use symcore::{SymMat, Tolerances};
