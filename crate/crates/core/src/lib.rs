//! Overlapping balanced canonical forms for lossless discrete-time MIMO
//! systems.
//!
//! - [`pivot`]: pivot vectors and pivot structures on `[B, A]` and `K`.
//! - [`young`]: admissible numbered Young diagrams and atlas enumeration.
//! - [`schur`]: orthogonal realizations from Schur vectors.
//! - [`sysid`]: Gramians, input normalization and canonicalization.
//! - [`io`]: JSON formats shared with the command line tool.

pub mod error;
pub mod io;
pub mod linalg;
pub mod pivot;
pub mod schur;
pub mod sysid;
pub mod young;

pub use error::{Error, Result};
pub use pivot::{ColumnPivotStructure, PivotStructure, SuccessorFunction};
pub use schur::{RealizationMatrix, SchurParams};
pub use sysid::{Gramian, StateSpace};
pub use young::{Chart, DynamicalIndices, NumberedYoungDiagram};

/// Dense real matrix used throughout.
pub type RealMatrix = nalgebra::DMatrix<f64>;

/// Default tolerance for pivot-entry tests.
pub const DEFAULT_TOL: f64 = 1e-9;
