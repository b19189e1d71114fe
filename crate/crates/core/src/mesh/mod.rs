//! Background meshes, interfaces and cut-cell geometry.

mod cut;
mod dump;
mod levelset;
mod quadrature;
mod structured;

pub use cut::{
    classify_and_cut, cut_triangle, CutDecomposition, CutElement, ElementClass, GhostFace, DEFAULT_SNAP_TOL,
};
pub use dump::write_dump;
pub use levelset::{InterfaceSet, LevelSet};
pub use quadrature::{
    quadrature_for_part, quadrature_for_segment, triangle_rule, QuadratureRule, TriangleRule, DEGENERATE_AREA,
};
pub use structured::{
    barycentric, build_hierarchy, p1_gradients, signed_area, BackgroundHierarchy, Point, StructuredMesh,
};
