//! Fixtures shared by the criterion benches.

use wgtransport_core::mesh::{generate_noncompatible_quads, generate_structured_triangles, Rect};
use wgtransport_core::PolygonalMesh;

/// Structured triangle mesh of level `level` (`n = 2^level`).
pub fn tri_mesh(level: usize) -> PolygonalMesh {
    generate_structured_triangles(1 << level, Rect::UNIT)
}

/// Non-compatible quad mesh of level `level` with the default refinement.
pub fn poly_mesh(level: usize) -> PolygonalMesh {
    generate_noncompatible_quads(1 << level, 0.5, 0)
}
