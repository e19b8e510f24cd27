//! Exact block-encoding circuits for finite-difference Laplacians.
//!
//! Each axis of a grid picks its own boundary condition (periodic, Dirichlet
//! or Neumann), resolution and spacing. The crate builds the classical
//! operator ([`lattice`]), synthesizes a circuit whose postselected block is
//! that operator ([`encoder`]), checks the two against each other by exact
//! simulation ([`simulator`]) and estimates Clifford+T costs ([`resources`]).

pub mod circuit;
pub mod encoder;
pub mod error;
pub mod format;
pub mod lattice;
pub mod resources;
pub mod simulator;

pub use circuit::{Circuit, Control, Gate, Polarity, RegisterLayout};
pub use encoder::{build_nd, EncodingDescriptor};
pub use error::{Error, Result};
pub use lattice::{BoundaryCondition, GridAxisSpec, LaplacianSpec, SparseMatrix};
pub use simulator::{BlockMatrix, SimOptions, StateVector};
