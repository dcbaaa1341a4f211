use serde::{Deserialize, Serialize};

use super::Vec2;
use crate::error::{Error, Result};

/// A strictly convex polygon with counter-clockwise vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec2>", into = "Vec<Vec2>")]
pub struct ConvexRegion {
    vertices: Vec<Vec2>,
}

impl ConvexRegion {
    pub fn new(vertices: Vec<Vec2>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidRegion(format!(
                "need at least 3 vertices, got {n}"
            )));
        }
        if let Some(k) = vertices.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidRegion(format!("vertex {k} is not finite")));
        }
        for k in 0..n {
            let a = vertices[k];
            let b = vertices[(k + 1) % n];
            let c = vertices[(k + 2) % n];
            let turn = (b - a).cross(c - b);
            if turn <= 0.0 {
                return Err(Error::InvalidRegion(format!(
                    "vertices must be strictly convex and counter-clockwise (turn at vertex {} is {turn:e})",
                    (k + 1) % n
                )));
            }
        }
        // Consistent left turns can still wind around more than once.
        let total_angle: f64 = (0..n)
            .map(|k| {
                let e0 = vertices[(k + 1) % n] - vertices[k];
                let e1 = vertices[(k + 2) % n] - vertices[(k + 1) % n];
                e0.cross(e1).atan2(e0.dot(e1))
            })
            .sum();
        if (total_angle - std::f64::consts::TAU).abs() > 1e-6 {
            return Err(Error::InvalidRegion("boundary self-intersects".into()));
        }
        let region = Self { vertices };
        if region.area() <= 0.0 {
            return Err(Error::InvalidRegion("area must be positive".into()));
        }
        Ok(region)
    }

    /// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        Self::new(vec![
            Vec2::new(x0, y0),
            Vec2::new(x1, y0),
            Vec2::new(x1, y1),
            Vec2::new(x0, y1),
        ])
    }

    pub fn unit_square() -> Self {
        Self::rectangle(0.0, 0.0, 1.0, 1.0).expect("unit square is convex")
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    /// Directed edges `(start, end)` in counter-clockwise order.
    pub fn edges(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |k| (self.vertices[k], self.vertices[(k + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        0.5 * self.edges().map(|(a, b)| a.cross(b)).sum::<f64>()
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| a.distance(b)).sum()
    }

    /// Closed-set membership with a small absolute slack.
    pub fn contains(&self, p: Vec2) -> bool {
        self.edges().all(|(a, b)| (b - a).cross(p - a) >= -1e-12)
    }

    /// Signed distance to the boundary, positive inside.
    pub fn signed_distance(&self, p: Vec2) -> f64 {
        self.edges()
            .map(|(a, b)| {
                let dir = (b - a) / a.distance(b);
                dir.cross(p - a)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Index and outward unit normal of the edge nearest to `p` (as a line).
    pub fn nearest_edge(&self, p: Vec2) -> (usize, Vec2, f64) {
        self.edges()
            .enumerate()
            .map(|(k, (a, b))| {
                let dir = (b - a) / a.distance(b);
                let inward = dir.perp();
                (k, -inward, inward.dot(p - a))
            })
            .min_by(|x, y| x.2.total_cmp(&y.2))
            .expect("region has edges")
    }

    pub fn bounding_box(&self) -> (Vec2, Vec2) {
        let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &self.vertices {
            lo.x = lo.x.min(v.x);
            lo.y = lo.y.min(v.y);
            hi.x = hi.x.max(v.x);
            hi.y = hi.y.max(v.y);
        }
        (lo, hi)
    }

    pub fn diameter(&self) -> f64 {
        let mut d = 0.0_f64;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                d = d.max(a.distance(*b));
            }
        }
        d
    }

    /// Applies `f` to every vertex. `f` must preserve orientation.
    pub fn map(&self, f: impl Fn(Vec2) -> Vec2) -> Result<Self> {
        Self::new(self.vertices.iter().map(|v| f(*v)).collect())
    }
}

impl TryFrom<Vec<Vec2>> for ConvexRegion {
    type Error = Error;
    fn try_from(v: Vec<Vec2>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ConvexRegion> for Vec<Vec2> {
    fn from(r: ConvexRegion) -> Self {
        r.vertices
    }
}
