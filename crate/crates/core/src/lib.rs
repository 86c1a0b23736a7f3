//! Anisotropic eikonal solvers on Cartesian grids.
//!
//! The main solver is Fast Marching with anisotropic stencil refinement (FM-ASR): every
//! grid point gets a lattice stencil whose boundary angles are acute for the local
//! asymmetric norm, which makes a single Dijkstra-like pass solve the discrete fixed-point
//! problem exactly. Two baselines (FM-8 and adaptive Gauss-Seidel) and the benchmark cases
//! used to compare them are included.

pub mod baselines;
pub mod bench;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod norms;
pub mod par;
pub mod solver;
pub mod stencil;

#[cfg(test)]
pub(crate) mod test_util;

pub use linalg::{Rect, SymMat2, Vec2};
pub use norms::{MetricField, NormError, OffsetNorm};
pub use par::Parallelism;
pub use stencil::{ElementaryTriangle, LatticeVec, StencilError, StencilMesh};
