//! Weak Galerkin finite elements for the steady transport-reaction equation
//!
//! ```text
//! ∇·(βu) + αu = f   in Ω,
//!           u = g   on the inflow boundary ∂Ω₋,
//! ```
//!
//! on two-dimensional meshes of arbitrary simple polygons, including
//! non-compatible meshes with hanging nodes and slit domains.
//!
//! The crate is organised bottom-up:
//!
//! * [`mesh`]: polygonal meshes, generators, face classification, file I/O.
//! * [`quadrature`] and [`basis`]: exact polygon/segment rules and scaled
//!   monomial / Legendre bases.
//! * [`wg`]: weak functions, the weak divergence, projections and the
//!   element-local bilinear form.
//! * [`dofmap`], [`assembly`], [`sparse`], [`solver`]: global numbering,
//!   inflow constraints, sparse assembly and the direct solver.
//! * [`analysis`]: error norms, the energy norm, derivative recovery and
//!   consistency diagnostics.
//! * [`problem`] and [`study`]: benchmark problems and convergence drivers.

pub mod analysis;
pub mod assembly;
pub mod basis;
pub mod dd;
pub mod dofmap;
mod error;
pub mod geometry;
pub mod mesh;
pub mod problem;
pub mod quadrature;
pub mod solver;
pub mod sparse;
pub mod study;
pub mod wg;

pub use analysis::{energy_norm, l2_error, recover_derivative, ErrorReport};
pub use assembly::{assemble, solve_problem, Discretization};
pub use dofmap::{build_dofmap, DofMap, TraceDofs};
pub use error::{Result, WgError};
pub use geometry::Vec2;
pub use mesh::{
    check_mesh_condition, classify_faces, Element, FaceClassification, FlowClass, Interface,
    InterfaceTag, PolygonalMesh,
};
pub use problem::{builtin_problems, ProblemSpec};
pub use solver::solve;
pub use sparse::{CsrMatrix, SparseSystem};
pub use study::{MeshFamily, StudyConfig};
pub use wg::{LocalOperator, WeakFunction};
