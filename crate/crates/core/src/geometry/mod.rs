//! Planar kernel: convex regions, circles, hyperbola branches, typed boundary
//! segments, convex clipping and boundary integrals.

mod cell;
mod clip;
mod conic;
pub mod quadrature;
mod region;
mod segment;
mod vec2;

pub use cell::{sample_segment, CellRegion, LOOP_TOLERANCE};
pub use clip::{clip, clip_disk, clip_halfplane, clip_halfregion_hyperbolic, Constraint};
pub use conic::{Circle, Focus, HyperbolaBranch};
pub use region::ConvexRegion;
pub use segment::{BoundarySegment, SegmentKind, SegmentSource, LINE_INTEGRAL_TOL};
pub use vec2::{Mat2, Vec2};

pub fn hyperbola_point(branch: &HyperbolaBranch, t: f64) -> Vec2 {
    branch.point(t)
}

pub fn region_area(cell: &CellRegion) -> f64 {
    cell.area()
}

/// `∫ f n ds` over one oriented boundary piece.
pub fn line_integral(seg: &BoundarySegment, f: impl Fn(Vec2) -> f64) -> Vec2 {
    seg.line_integral(f)
}
