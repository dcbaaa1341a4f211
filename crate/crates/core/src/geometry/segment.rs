use std::f64::consts::FRAC_PI_2;

use super::conic::{Circle, HyperbolaBranch};
use super::quadrature::integrate_adaptive;
use super::Vec2;

/// Absolute tolerance for boundary line integrals.
pub const LINE_INTEGRAL_TOL: f64 = 1e-8;
/// Absolute tolerance for the area contribution of curved pieces.
const AREA_TOL: f64 = 1e-14;

/// Geometry of one boundary piece, parametrised over `s ∈ [0, 1]` from start
/// to end.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SegmentKind {
    Line {
        start: Vec2,
        end: Vec2,
    },
    /// Traversed from `start_angle` to `end_angle`; counter-clockwise when
    /// `end_angle > start_angle`.
    CircArc {
        circle: Circle,
        start_angle: f64,
        end_angle: f64,
    },
    HypArc {
        branch: HyperbolaBranch,
        t_start: f64,
        t_end: f64,
    },
}

/// What produced a boundary piece.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SegmentSource {
    RegionBoundary,
    SensingBoundary(usize),
    /// Piece of the branch separating `owner`'s cell from `neighbor`.
    HyperbolaEdge {
        owner: usize,
        neighbor: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundarySegment {
    pub kind: SegmentKind,
    pub source: SegmentSource,
}

impl BoundarySegment {
    pub fn line(start: Vec2, end: Vec2, source: SegmentSource) -> Self {
        Self {
            kind: SegmentKind::Line { start, end },
            source,
        }
    }

    pub fn circ_arc(
        circle: Circle,
        start_angle: f64,
        end_angle: f64,
        source: SegmentSource,
    ) -> Self {
        Self {
            kind: SegmentKind::CircArc {
                circle,
                start_angle,
                end_angle,
            },
            source,
        }
    }

    pub fn hyp_arc(
        branch: HyperbolaBranch,
        t_start: f64,
        t_end: f64,
        source: SegmentSource,
    ) -> Self {
        Self {
            kind: SegmentKind::HypArc {
                branch,
                t_start,
                t_end,
            },
            source,
        }
    }

    #[inline]
    pub fn point_at(&self, s: f64) -> Vec2 {
        match self.kind {
            SegmentKind::Line { start, end } => start.lerp(end, s),
            SegmentKind::CircArc {
                circle,
                start_angle,
                end_angle,
            } => circle.point(start_angle + s * (end_angle - start_angle)),
            SegmentKind::HypArc {
                branch,
                t_start,
                t_end,
            } => branch.point(t_start + s * (t_end - t_start)),
        }
    }

    /// `d point / ds`
    #[inline]
    pub fn velocity_at(&self, s: f64) -> Vec2 {
        match self.kind {
            SegmentKind::Line { start, end } => end - start,
            SegmentKind::CircArc {
                circle,
                start_angle,
                end_angle,
            } => {
                let span = end_angle - start_angle;
                circle.tangent(start_angle + s * span) * span
            }
            SegmentKind::HypArc {
                branch,
                t_start,
                t_end,
            } => {
                let span = t_end - t_start;
                branch.tangent(t_start + s * span) * span
            }
        }
    }

    pub fn start(&self) -> Vec2 {
        match self.kind {
            SegmentKind::Line { start, .. } => start,
            _ => self.point_at(0.0),
        }
    }

    pub fn end(&self) -> Vec2 {
        match self.kind {
            SegmentKind::Line { end, .. } => end,
            _ => self.point_at(1.0),
        }
    }

    /// The piece between `s0` and `s1` of this segment, same source.
    pub fn sub(&self, s0: f64, s1: f64) -> Self {
        let kind = match self.kind {
            SegmentKind::Line { start, end } => SegmentKind::Line {
                start: if s0 == 0.0 {
                    start
                } else {
                    start.lerp(end, s0)
                },
                end: if s1 == 1.0 { end } else { start.lerp(end, s1) },
            },
            SegmentKind::CircArc {
                circle,
                start_angle,
                end_angle,
            } => {
                let span = end_angle - start_angle;
                SegmentKind::CircArc {
                    circle,
                    start_angle: start_angle + s0 * span,
                    end_angle: start_angle + s1 * span,
                }
            }
            SegmentKind::HypArc {
                branch,
                t_start,
                t_end,
            } => {
                let span = t_end - t_start;
                SegmentKind::HypArc {
                    branch,
                    t_start: t_start + s0 * span,
                    t_end: t_start + s1 * span,
                }
            }
        };
        Self {
            kind,
            source: self.source,
        }
    }

    pub fn is_curved(&self) -> bool {
        !matches!(self.kind, SegmentKind::Line { .. })
    }

    pub fn length(&self) -> f64 {
        match self.kind {
            SegmentKind::Line { start, end } => start.distance(end),
            SegmentKind::CircArc {
                circle,
                start_angle,
                end_angle,
            } => circle.radius * (end_angle - start_angle).abs(),
            SegmentKind::HypArc { .. } => {
                integrate_adaptive(0.0, 1.0, 1e-12, |s| self.velocity_at(s).norm())
            }
        }
    }

    /// `½ ∫ (x dy - y dx)` along the piece; summing over a closed loop gives
    /// its signed area.
    pub fn area_term(&self) -> f64 {
        match self.kind {
            SegmentKind::Line { start, end } => 0.5 * start.cross(end),
            SegmentKind::CircArc {
                circle,
                start_angle: t0,
                end_angle: t1,
            } => {
                let Circle {
                    center: c,
                    radius: r,
                } = circle;
                0.5 * (r * r * (t1 - t0)
                    + c.x * r * (t1.sin() - t0.sin())
                    + c.y * r * (t0.cos() - t1.cos()))
            }
            SegmentKind::HypArc { .. } => integrate_adaptive(0.0, 1.0, AREA_TOL, |s| {
                0.5 * self.point_at(s).cross(self.velocity_at(s))
            }),
        }
    }

    /// `∫ f n ds` with `n` the unit normal to the right of the direction of
    /// travel (outward for a counter-clockwise loop).
    pub fn line_integral(&self, f: impl Fn(Vec2) -> f64) -> Vec2 {
        self.weighted_flux(|p, n_ds| n_ds * f(p))
    }

    /// `∫ g(x, n ds)` where `n ds = (y', -x') ds` is the outward normal scaled
    /// by the arc-length element.
    pub fn weighted_flux(&self, mut g: impl FnMut(Vec2, Vec2) -> Vec2) -> Vec2 {
        if let SegmentKind::Line { start, end } = self.kind {
            let d = end - start;
            let n_ds = Vec2::new(d.y, -d.x);
            return integrate_adaptive(0.0, 1.0, LINE_INTEGRAL_TOL, |s| {
                g(start.lerp(end, s), n_ds)
            });
        }
        integrate_adaptive(0.0, 1.0, LINE_INTEGRAL_TOL, |s| {
            let v = self.velocity_at(s);
            g(self.point_at(s), Vec2::new(v.y, -v.x))
        })
    }

    /// Interior parameters where `y(s)` is stationary, sorted.
    pub fn y_stationary_points(&self) -> Vec<f64> {
        let mut out = Vec::new();
        match self.kind {
            SegmentKind::Line { .. } => {}
            SegmentKind::CircArc {
                start_angle,
                end_angle,
                ..
            } => {
                let (lo, hi) = (start_angle.min(end_angle), start_angle.max(end_angle));
                let span = end_angle - start_angle;
                let mut k = ((lo - FRAC_PI_2) / std::f64::consts::PI).ceil();
                loop {
                    let theta = FRAC_PI_2 + k * std::f64::consts::PI;
                    if theta >= hi {
                        break;
                    }
                    if theta > lo {
                        out.push((theta - start_angle) / span);
                    }
                    k += 1.0;
                }
            }
            SegmentKind::HypArc {
                branch,
                t_start,
                t_end,
            } => {
                // y'(t) = a sinh t e1.y + b cosh t e2.y = 0  =>  tanh t = -b e2.y / (a e1.y)
                let a = branch.semi_transverse();
                let b = branch.semi_conjugate();
                let axis = (branch.focus_near() - branch.focus_far())
                    .normalized()
                    .unwrap();
                let e2y = -axis.x;
                let ratio = -b * e2y / (a * axis.y);
                if ratio.is_finite() && ratio.abs() < 1.0 {
                    let t = ratio.atanh();
                    let s = (t - t_start) / (t_end - t_start);
                    if s > 0.0 && s < 1.0 {
                        out.push(s);
                    }
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out
    }

    /// Signed count of crossings of the ray `{p + (λ, 0) : λ > 0}`, using the
    /// half-open rule so shared endpoints are counted once.
    pub fn ray_crossings(&self, p: Vec2) -> i32 {
        let mut breaks = vec![0.0];
        breaks.extend(self.y_stationary_points());
        breaks.push(1.0);
        let mut count = 0;
        for w in breaks.windows(2) {
            let (s0, s1) = (w[0], w[1]);
            let (a, b) = (self.point_at(s0), self.point_at(s1));
            let above_a = a.y > p.y;
            let above_b = b.y > p.y;
            if above_a == above_b {
                continue;
            }
            let x = if self.is_curved() {
                // y is monotone on [s0, s1]; bisect for the crossing.
                let (mut lo, mut hi) = (s0, s1);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if (self.point_at(mid).y > p.y) == above_a {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo < 1e-15 {
                        break;
                    }
                }
                self.point_at(0.5 * (lo + hi)).x
            } else {
                a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y)
            };
            if x > p.x {
                count += if above_b { 1 } else { -1 };
            }
        }
        count
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const SRC: SegmentSource = SegmentSource::RegionBoundary;

    #[test]
    fn full_circle_normal_integral_vanishes() {
        let seg =
            BoundarySegment::circ_arc(Circle::new(Vec2::new(0.3, -0.2), 0.7), 0.0, 2.0 * PI, SRC);
        let v = seg.line_integral(|_| 1.0);
        assert!(v.norm() < 1e-12);
    }

    #[test]
    fn right_half_circle_normal_integral() {
        let r = 0.25;
        let seg = BoundarySegment::circ_arc(Circle::new(Vec2::ZERO, r), -PI / 2.0, PI / 2.0, SRC);
        let v = seg.line_integral(|_| 1.0);
        // r ∫ (cos θ, sin θ) dθ over [-π/2, π/2]
        let (t1, t2) = (-PI / 2.0, PI / 2.0);
        let expected = Vec2::new(r * (t2.sin() - t1.sin()), r * (t1.cos() - t2.cos()));
        assert!((v - expected).norm() < 1e-10, "{v}");
        assert!((v - Vec2::new(2.0 * r, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn line_normal_points_right_of_travel() {
        let seg = BoundarySegment::line(Vec2::new(0.0, 1.0), Vec2::ZERO, SRC);
        assert_eq!(seg.line_integral(|_| 1.0), Vec2::new(-1.0, 0.0));
        let up = BoundarySegment::line(Vec2::ZERO, Vec2::new(0.0, 1.0), SRC);
        assert_eq!(up.line_integral(|_| 1.0), Vec2::new(1.0, 0.0));
    }

    #[test]
    fn hyperbolic_area_term_matches_closed_form() {
        let h = HyperbolaBranch::new(Vec2::new(0.2, 0.1), Vec2::new(0.9, 0.5), 0.07).unwrap();
        let (t0, t1) = (-1.3, 0.8);
        let seg = BoundarySegment::hyp_arc(h, t0, t1, SRC);
        // x × x' = c × P' + ab (e1 × e2) with P the centred point.
        let c = h.center();
        let p = |t: f64| h.point(t) - c;
        let e1 = (h.focus_near() - h.focus_far()).normalized().unwrap();
        let e2 = Vec2::new(e1.y, -e1.x);
        let closed = 0.5
            * (c.cross(p(t1) - p(t0))
                + h.semi_transverse() * h.semi_conjugate() * e1.cross(e2) * (t1 - t0));
        assert!((seg.area_term() - closed).abs() < 1e-13);
    }

    #[test]
    fn stationary_points_of_circle() {
        let seg = BoundarySegment::circ_arc(Circle::new(Vec2::ZERO, 1.0), 0.0, 2.0 * PI, SRC);
        let s = seg.y_stationary_points();
        assert_eq!(s.len(), 2);
        assert!((s[0] - 0.25).abs() < 1e-15 && (s[1] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn hyperbola_stationary_point_is_extremum_of_y() {
        // focal axis close to vertical, so the branch turns in y
        let h = HyperbolaBranch::new(Vec2::new(0.0, 0.0), Vec2::new(0.05, 0.5), 0.1).unwrap();
        let seg = BoundarySegment::hyp_arc(h, -3.0, 3.0, SRC);
        let s = seg.y_stationary_points();
        assert_eq!(s.len(), 1);
        let vy = seg.velocity_at(s[0]).y;
        assert!(vy.abs() < 1e-12);
    }

    #[test]
    fn sub_preserves_geometry() {
        let h = HyperbolaBranch::new(Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), 0.1).unwrap();
        let seg = BoundarySegment::hyp_arc(h, -1.0, 2.0, SRC);
        let piece = seg.sub(0.25, 0.5);
        assert!(piece.start().distance(seg.point_at(0.25)) < 1e-15);
        assert!(piece.end().distance(seg.point_at(0.5)) < 1e-15);
    }
}
