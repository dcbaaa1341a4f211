//! Intersection of a cell with a convex constraint set.
//!
//! Every constraint used here (half-plane, disk, the focus side of a
//! hyperbola branch) is convex, and all cells are built by intersecting such
//! sets, so cells stay convex. Clipping a convex loop against a convex set
//! keeps the boundary pieces inside the set and bridges each exit point to the
//! following entry point along the constraint curve, traversed
//! counter-clockwise around the constraint set.

use super::cell::{CellRegion, LOOP_TOLERANCE};
use super::conic::{Circle, HyperbolaBranch};
use super::segment::{BoundarySegment, SegmentKind, SegmentSource};
use super::Vec2;
use crate::error::Result;

/// Sample spacing (in length units) used to bracket sign changes.
const SAMPLE_SPACING: f64 = 0.004;
const MIN_SAMPLES: usize = 24;
const MAX_SAMPLES: usize = 4000;
/// Pieces shorter than this are dropped.
const MIN_PIECE: f64 = 1e-13;
/// Tolerance for recognising a segment lying on the constraint curve.
const ON_CURVE_TOL: f64 = 1e-10;

/// A closed convex set `{x : value(x) >= 0}` with a traceable boundary.
#[derive(Clone, Copy, Debug)]
pub enum Constraint {
    /// Keeps `(x - point) · normal <= 0`; `normal` points out of the kept side.
    HalfPlane {
        point: Vec2,
        normal: Vec2,
    },
    Disk(Circle),
    /// Keeps the side of the branch containing its near focus.
    Hyperbolic(HyperbolaBranch),
}

impl Constraint {
    #[inline]
    pub fn value(&self, p: Vec2) -> f64 {
        match self {
            Constraint::HalfPlane { point, normal } => -(p - *point).dot(*normal),
            Constraint::Disk(c) => c.radius - p.distance(c.center),
            Constraint::Hyperbolic(h) => h.residual(p),
        }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        self.value(p) >= 0.0
    }

    /// Whether `seg` lies on this constraint's boundary curve.
    fn carries(&self, seg: &BoundarySegment) -> bool {
        match (self, &seg.kind) {
            (Constraint::HalfPlane { .. }, SegmentKind::Line { start, end }) => {
                self.value(*start).abs() < ON_CURVE_TOL && self.value(*end).abs() < ON_CURVE_TOL
            }
            (Constraint::Disk(c), SegmentKind::CircArc { circle, .. }) => {
                c.approx_eq(circle, ON_CURVE_TOL)
            }
            (Constraint::Hyperbolic(h), SegmentKind::HypArc { branch, .. }) => {
                h.approx_eq(branch, ON_CURVE_TOL)
            }
            _ => false,
        }
    }

    /// Boundary piece from `from` to `to`, counter-clockwise around the set.
    fn bridge(&self, from: Vec2, to: Vec2, source: SegmentSource) -> Option<BoundarySegment> {
        if from.distance(to) < MIN_PIECE {
            return None;
        }
        match self {
            Constraint::HalfPlane { .. } => Some(BoundarySegment::line(from, to, source)),
            Constraint::Disk(c) => {
                let t0 = c.angle_of(from);
                let t1 = c.angle_of(to);
                let span = (t1 - t0).rem_euclid(std::f64::consts::TAU);
                Some(BoundarySegment::circ_arc(*c, t0, t0 + span, source))
            }
            Constraint::Hyperbolic(h) => {
                let t0 = h.param_of(from);
                let t1 = h.param_of(to);
                if t1 <= t0 {
                    log::debug!("hyperbolic bridge with reversed parameters {t0} -> {t1}");
                }
                Some(BoundarySegment::hyp_arc(*h, t0, t1, source))
            }
        }
    }

    /// The whole boundary as a loop, for bounded constraint sets.
    fn full_loop(&self, source: SegmentSource) -> Option<(Vec2, CellRegion)> {
        match self {
            Constraint::Disk(c) => Some((c.center, CellRegion::disk(*c, source))),
            _ => None,
        }
    }
}

/// `cell ∩ {x : (x - point)·normal <= 0}`; new edges are tagged
/// [`SegmentSource::RegionBoundary`].
pub fn clip_halfplane(cell: &CellRegion, point: Vec2, normal: Vec2) -> Result<CellRegion> {
    if normal.normalized().is_none() {
        return Ok(cell.clone());
    }
    clip(
        cell,
        &Constraint::HalfPlane { point, normal },
        SegmentSource::RegionBoundary,
    )
}

/// `cell ∩ disk`; new arcs are tagged `SensingBoundary(agent)`. A disk with
/// non-positive radius yields the empty cell.
pub fn clip_disk(cell: &CellRegion, disk: Circle, agent: usize) -> Result<CellRegion> {
    if !(disk.radius > 0.0) {
        return Ok(CellRegion::empty());
    }
    clip(
        cell,
        &Constraint::Disk(disk),
        SegmentSource::SensingBoundary(agent),
    )
}

/// `cell ∩ {x : |x - far| - |x - near| >= 2a}`; new arcs are tagged
/// `HyperbolaEdge { owner, neighbor }`.
pub fn clip_halfregion_hyperbolic(
    cell: &CellRegion,
    branch: &HyperbolaBranch,
    owner: usize,
    neighbor: usize,
) -> Result<CellRegion> {
    clip(
        cell,
        &Constraint::Hyperbolic(*branch),
        SegmentSource::HyperbolaEdge { owner, neighbor },
    )
}

/// Generic convex clip.
pub fn clip(
    cell: &CellRegion,
    constraint: &Constraint,
    source: SegmentSource,
) -> Result<CellRegion> {
    let mut loops = Vec::with_capacity(cell.loops().len());
    for lp in cell.loops() {
        let pieces = split_loop(lp, constraint);
        if pieces.iter().all(|(_, inside)| *inside) {
            loops.push(lp.clone());
            continue;
        }
        if pieces.iter().all(|(_, inside)| !*inside) {
            // Either disjoint, or the constraint set sits inside this loop.
            if let Some((probe, full)) = constraint.full_loop(source) {
                let this = CellRegion::from_loops_unchecked(vec![lp.clone()]);
                if this.contains(probe) {
                    loops.extend(full.loops().iter().cloned());
                }
            }
            continue;
        }
        loops.push(assemble(pieces, constraint, source));
    }
    let out = CellRegion::from_loops_unchecked(loops);
    out.check_closed()?;
    Ok(out)
}

fn split_loop(lp: &[BoundarySegment], constraint: &Constraint) -> Vec<(BoundarySegment, bool)> {
    let mut pieces = Vec::with_capacity(lp.len() + 4);
    for seg in lp {
        if constraint.carries(seg) {
            pieces.push((*seg, true));
            continue;
        }
        let roots = crossings(seg, constraint);
        let mut cuts = Vec::with_capacity(roots.len() + 2);
        cuts.push(0.0);
        cuts.extend(roots);
        cuts.push(1.0);
        for w in cuts.windows(2) {
            let piece = seg.sub(w[0], w[1]);
            if piece.start().distance(piece.end()) < MIN_PIECE && piece.length() < MIN_PIECE {
                continue;
            }
            let mid = seg.point_at(0.5 * (w[0] + w[1]));
            pieces.push((piece, constraint.contains(mid)));
        }
    }
    pieces
}

fn assemble(
    pieces: Vec<(BoundarySegment, bool)>,
    constraint: &Constraint,
    source: SegmentSource,
) -> Vec<BoundarySegment> {
    let n = pieces.len();
    // Start at an inside piece that follows an outside one.
    let start = (0..n)
        .find(|&k| pieces[k].1 && !pieces[(k + n - 1) % n].1)
        .expect("mixed loop has an entry");
    let mut out: Vec<BoundarySegment> = Vec::with_capacity(n + 2);
    let mut k = 0;
    while k < n {
        let (seg, inside) = pieces[(start + k) % n];
        if inside {
            out.push(seg);
            k += 1;
            continue;
        }
        let exit = out
            .last()
            .map(BoundarySegment::end)
            .expect("run starts inside");
        while k < n && !pieces[(start + k) % n].1 {
            k += 1;
        }
        let entry = pieces[(start + k) % n].0.start();
        if let Some(bridge) = constraint.bridge(exit, entry, source) {
            out.push(bridge);
        }
    }
    snap_lines(&mut out);
    out
}

/// Pins line endpoints onto their curved neighbours so the loop closes
/// exactly where possible.
fn snap_lines(lp: &mut [BoundarySegment]) {
    let n = lp.len();
    for k in 0..n {
        let prev_end = lp[(k + n - 1) % n].end();
        let next_start = lp[(k + 1) % n].start();
        if let SegmentKind::Line { start, end } = &mut lp[k].kind {
            if start.distance(prev_end) < LOOP_TOLERANCE {
                *start = prev_end;
            }
            if end.distance(next_start) < LOOP_TOLERANCE {
                *end = next_start;
            }
        }
    }
}

/// Parameters in `(0, 1)` where the constraint value changes sign along `seg`.
fn crossings(seg: &BoundarySegment, constraint: &Constraint) -> Vec<f64> {
    let f = |s: f64| constraint.value(seg.point_at(s));
    let n = sample_count(seg);
    let samples: Vec<(f64, f64)> = (0..=n)
        .map(|k| {
            let s = k as f64 / n as f64;
            (s, f(s))
        })
        .collect();
    let inside = |v: f64| v >= 0.0;
    let mut roots = Vec::new();
    for w in samples.windows(2) {
        if inside(w[0].1) != inside(w[1].1) {
            roots.push(bisect(&f, w[0].0, w[1].0));
        }
    }
    // Two crossings between neighbouring samples show up as an extremum of
    // the constraint value that never changes class at the samples.
    for k in 0..=n {
        let v = samples[k].1;
        let lo = k.saturating_sub(1);
        let hi = (k + 1).min(n);
        if samples[lo].0 == samples[hi].0 {
            continue;
        }
        let same_class = inside(samples[lo].1) == inside(v) && inside(samples[hi].1) == inside(v);
        if !same_class {
            continue;
        }
        let toward_boundary = if inside(v) {
            (k == 0 || v < samples[lo].1) && (k == n || v <= samples[hi].1)
        } else {
            (k == 0 || v > samples[lo].1) && (k == n || v >= samples[hi].1)
        };
        if !toward_boundary {
            continue;
        }
        let sign = if inside(v) { 1.0 } else { -1.0 };
        let s_ext = golden_min(|s| sign * f(s), samples[lo].0, samples[hi].0);
        if inside(f(s_ext)) != inside(v) {
            if s_ext > samples[lo].0 {
                roots.push(bisect(&f, samples[lo].0, s_ext));
            }
            if s_ext < samples[hi].0 {
                roots.push(bisect(&f, s_ext, samples[hi].0));
            }
        }
    }
    roots.retain(|&s| s > 1e-12 && s < 1.0 - 1e-12);
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
    roots
}

fn sample_count(seg: &BoundarySegment) -> usize {
    let approx_len = match seg.kind {
        SegmentKind::Line { start, end } => start.distance(end),
        _ => (0..16)
            .map(|k| {
                seg.point_at(k as f64 / 16.0)
                    .distance(seg.point_at((k + 1) as f64 / 16.0))
            })
            .sum(),
    };
    ((approx_len / SAMPLE_SPACING).ceil() as usize).clamp(MIN_SAMPLES, MAX_SAMPLES)
}

/// Locates the class change of `f` between `a` and `b` to machine precision.
fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let a_inside = f(a) >= 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if (f(mid) >= 0.0) == a_inside {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        if b - a < 1e-15 {
            break;
        }
    }
    0.5 * (a + b)
}
