use super::conic::Circle;
use super::region::ConvexRegion;
use super::segment::{BoundarySegment, SegmentKind, SegmentSource};
use super::Vec2;
use crate::error::{Error, Result};

/// Gap allowed between consecutive segment endpoints of a loop.
pub const LOOP_TOLERANCE: f64 = 1e-7;

/// A planar region bounded by closed counter-clockwise loops of typed
/// segments. An empty loop list is the empty region.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CellRegion {
    loops: Vec<Vec<BoundarySegment>>,
}

impl CellRegion {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a region from loops, checking that every loop closes.
    pub fn from_loops(loops: Vec<Vec<BoundarySegment>>) -> Result<Self> {
        let loops: Vec<_> = loops.into_iter().filter(|l| !l.is_empty()).collect();
        let cell = Self { loops };
        cell.check_closed()?;
        Ok(cell)
    }

    pub(crate) fn from_loops_unchecked(loops: Vec<Vec<BoundarySegment>>) -> Self {
        Self {
            loops: loops.into_iter().filter(|l| !l.is_empty()).collect(),
        }
    }

    pub fn from_region(region: &ConvexRegion) -> Self {
        let lp = region
            .edges()
            .map(|(a, b)| BoundarySegment::line(a, b, SegmentSource::RegionBoundary))
            .collect();
        Self { loops: vec![lp] }
    }

    pub fn disk(circle: Circle, source: SegmentSource) -> Self {
        if !(circle.radius > 0.0) {
            return Self::empty();
        }
        let theta = 0.0;
        Self {
            loops: vec![vec![BoundarySegment::circ_arc(
                circle,
                theta,
                theta + std::f64::consts::TAU,
                source,
            )]],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.loops.is_empty()
    }

    pub fn loops(&self) -> &[Vec<BoundarySegment>] {
        &self.loops
    }

    pub fn segments(&self) -> impl Iterator<Item = &BoundarySegment> {
        self.loops.iter().flatten()
    }

    /// Green's-theorem area.
    pub fn area(&self) -> f64 {
        self.segments().map(BoundarySegment::area_term).sum()
    }

    /// Crossing-number membership against the segment loops.
    pub fn contains(&self, p: Vec2) -> bool {
        self.segments().map(|s| s.ray_crossings(p)).sum::<i32>() != 0
    }

    /// Total length of boundary carrying `source`.
    pub fn boundary_length(&self, source: SegmentSource) -> f64 {
        self.segments()
            .filter(|s| s.source == source)
            .map(BoundarySegment::length)
            .sum()
    }

    pub fn bounding_box(&self) -> Option<(Vec2, Vec2)> {
        if self.is_empty() {
            return None;
        }
        let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for seg in self.segments() {
            let mut probe = |p: Vec2| {
                lo.x = lo.x.min(p.x);
                lo.y = lo.y.min(p.y);
                hi.x = hi.x.max(p.x);
                hi.y = hi.y.max(p.y);
            };
            probe(seg.start());
            probe(seg.end());
            if seg.is_curved() {
                for k in 1..64 {
                    probe(seg.point_at(k as f64 / 64.0));
                }
                for s in seg.y_stationary_points() {
                    probe(seg.point_at(s));
                }
                if let SegmentKind::CircArc {
                    circle,
                    start_angle,
                    end_angle,
                } = seg.kind
                {
                    // x-extrema of a circle are at multiples of π
                    let (a, b) = (start_angle.min(end_angle), start_angle.max(end_angle));
                    let mut k = (a / std::f64::consts::PI).ceil();
                    while k * std::f64::consts::PI < b {
                        probe(circle.point(k * std::f64::consts::PI));
                        k += 1.0;
                    }
                }
            }
        }
        Some((lo, hi))
    }

    /// Largest gap between consecutive segment endpoints over all loops.
    pub fn max_gap(&self) -> f64 {
        self.loops
            .iter()
            .flat_map(|lp| {
                (0..lp.len()).map(move |k| lp[k].end().distance(lp[(k + 1) % lp.len()].start()))
            })
            .fold(0.0, f64::max)
    }

    pub fn check_closed(&self) -> Result<()> {
        let gap = self.max_gap();
        if gap > LOOP_TOLERANCE {
            return Err(Error::BrokenLoop(format!(
                "endpoint gap {gap:e} exceeds {LOOP_TOLERANCE:e}"
            )));
        }
        Ok(())
    }

    /// Dense polyline approximation of each loop; chord error at most `tol`.
    pub fn polylines(&self, tol: f64) -> Vec<Vec<Vec2>> {
        self.loops
            .iter()
            .map(|lp| {
                let mut pts = Vec::new();
                for seg in lp {
                    sample_segment(seg, tol, &mut pts);
                }
                pts
            })
            .collect()
    }
}

/// Appends the start of `seg` and interior samples such that every chord lies
/// within `tol` of the curve. The end point is left to the next segment.
pub fn sample_segment(seg: &BoundarySegment, tol: f64, out: &mut Vec<Vec2>) {
    out.push(seg.start());
    if !seg.is_curved() {
        return;
    }
    // Seed with a few panels so a chord cannot skip a whole bulge.
    let seeds = 8;
    for k in 0..seeds {
        let s0 = k as f64 / seeds as f64;
        let s1 = (k + 1) as f64 / seeds as f64;
        subdivide(seg, s0, s1, tol, 0, out);
        if k + 1 < seeds {
            out.push(seg.point_at(s1));
        }
    }
}

fn subdivide(seg: &BoundarySegment, s0: f64, s1: f64, tol: f64, depth: u32, out: &mut Vec<Vec2>) {
    let a = seg.point_at(s0);
    let b = seg.point_at(s1);
    let chord = b - a;
    let len = chord.norm();
    let deviation = |s: f64| {
        let p = seg.point_at(s) - a;
        if len > 0.0 {
            (chord.cross(p) / len).abs()
        } else {
            p.norm()
        }
    };
    let mid = 0.5 * (s0 + s1);
    let worst = deviation(mid)
        .max(deviation(0.5 * (s0 + mid)))
        .max(deviation(0.5 * (mid + s1)));
    if worst <= tol || depth > 24 {
        return;
    }
    subdivide(seg, s0, mid, tol, depth + 1, out);
    out.push(seg.point_at(mid));
    subdivide(seg, mid, s1, tol, depth + 1, out);
}
