//! Circles and hyperbola branches.
//!
//! A branch is stored in a local frame centred at the midpoint of the foci:
//! `e1` points from `focus_far` to `focus_near` and `e2 = (e1.y, -e1.x)`. The
//! point at parameter `t` is
//!
//! ```text
//! center + a·cosh(t)·e1 + b·sinh(t)·e2,    b = sqrt(c² - a²),  c = |foci| / 2
//! ```
//!
//! With this choice increasing `t` walks the branch counter-clockwise around
//! the convex region it bounds (the side that contains `focus_near`), and
//! `t = 0` is the vertex on the focal segment.

use serde::{Deserialize, Serialize};

use super::{Mat2, Vec2};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Vec2,
    pub radius: f64,
}

impl Circle {
    pub fn new(center: Vec2, radius: f64) -> Self {
        Self { center, radius }
    }

    #[inline]
    pub fn point(&self, theta: f64) -> Vec2 {
        self.center + Vec2::from_angle(theta) * self.radius
    }

    #[inline]
    pub fn tangent(&self, theta: f64) -> Vec2 {
        Vec2::from_angle(theta).perp() * self.radius
    }

    pub fn angle_of(&self, p: Vec2) -> f64 {
        (p - self.center).angle()
    }

    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.radius * self.radius
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.distance(self.center) <= self.radius
    }

    /// Same circle up to `tol` in center and radius.
    pub fn approx_eq(&self, other: &Circle, tol: f64) -> bool {
        self.center.distance(other.center) <= tol && (self.radius - other.radius).abs() <= tol
    }
}

/// Which focus of a branch a derivative is taken with respect to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Focus {
    /// The focus the branch bends around.
    Near,
    Far,
}

/// One branch of the hyperbola `|x - far| - |x - near| = 2a`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperbolaBranch {
    focus_near: Vec2,
    focus_far: Vec2,
    a: f64,
    center: Vec2,
    half_focal: f64,
    b: f64,
    e1: Vec2,
    e2: Vec2,
}

impl HyperbolaBranch {
    /// Requires `|near - far| > 2a` and `a >= 0`. With `a = 0` the branch is the
    /// perpendicular bisector of the foci.
    pub fn new(focus_near: Vec2, focus_far: Vec2, a: f64) -> Result<Self> {
        let d = focus_near.distance(focus_far);
        if !(a >= 0.0)
            || !a.is_finite()
            || !(d > 2.0 * a)
            || !focus_near.is_finite()
            || !focus_far.is_finite()
        {
            return Err(Error::DegenerateBranch {
                distance: d,
                two_a: 2.0 * a,
            });
        }
        let e1 = (focus_near - focus_far) / d;
        let half_focal = 0.5 * d;
        // c² - a² = (c - a)(c + a) keeps precision when c is close to a.
        let b = ((half_focal - a) * (half_focal + a)).sqrt();
        Ok(Self {
            focus_near,
            focus_far,
            a,
            center: (focus_near + focus_far) * 0.5,
            half_focal,
            b,
            e1,
            e2: Vec2::new(e1.y, -e1.x),
        })
    }

    pub fn focus_near(&self) -> Vec2 {
        self.focus_near
    }

    pub fn focus_far(&self) -> Vec2 {
        self.focus_far
    }

    pub fn semi_transverse(&self) -> f64 {
        self.a
    }

    pub fn semi_conjugate(&self) -> f64 {
        self.b
    }

    pub fn center(&self) -> Vec2 {
        self.center
    }

    /// `|near - far| / 2a`; infinite when `a = 0`.
    pub fn eccentricity(&self) -> f64 {
        if self.a == 0.0 {
            f64::INFINITY
        } else {
            self.half_focal / self.a
        }
    }

    /// The other branch of the same hyperbola, bending around `focus_far`.
    pub fn mirror(&self) -> Self {
        Self::new(self.focus_far, self.focus_near, self.a).expect("mirror of a valid branch")
    }

    #[inline]
    pub fn point(&self, t: f64) -> Vec2 {
        self.center + self.e1 * (self.a * t.cosh()) + self.e2 * (self.b * t.sinh())
    }

    /// `d point / dt`
    #[inline]
    pub fn tangent(&self, t: f64) -> Vec2 {
        self.e1 * (self.a * t.sinh()) + self.e2 * (self.b * t.cosh())
    }

    pub fn vertex(&self) -> Vec2 {
        self.point(0.0)
    }

    /// Parameter of the branch point closest (in the local frame) to `p`.
    /// Exact for points on the branch.
    pub fn param_of(&self, p: Vec2) -> f64 {
        ((p - self.center).dot(self.e2) / self.b).asinh()
    }

    /// `|p - far| - |p - near| - 2a`: zero on the branch, positive on the side
    /// of `focus_near`.
    #[inline]
    pub fn residual(&self, p: Vec2) -> f64 {
        p.distance(self.focus_far) - p.distance(self.focus_near) - 2.0 * self.a
    }

    /// Residual scaled to be dimensionless.
    pub fn relative_residual(&self, p: Vec2) -> f64 {
        let scale = p.distance(self.focus_far) + p.distance(self.focus_near);
        self.residual(p).abs() / scale.max(f64::MIN_POSITIVE)
    }

    /// `∂ point(t) / ∂ focus` with `a` and `t` held fixed: centre, rotation and
    /// conjugate axis follow the moving focus.
    pub fn point_jacobian(&self, t: f64, focus: Focus) -> Mat2 {
        let d = 2.0 * self.half_focal;
        // e1 = (near - far)/d. Derivatives w.r.t. near; far flips the sign.
        let sign = match focus {
            Focus::Near => 1.0,
            Focus::Far => -1.0,
        };
        let de1 = (Mat2::IDENTITY - Mat2::outer(self.e1, self.e1)) * (sign / d);
        // e2 = R e1 with R = [[0, 1], [-1, 0]].
        let rot = Mat2 {
            m: [[0.0, 1.0], [-1.0, 0.0]],
        };
        let de2 = rot * de1;
        // b² = d²/4 - a², so ∂b = (d / 4b) ∂d and ∂d = sign · e1ᵀ.
        let db_row = self.e1 * (sign * d / (4.0 * self.b));
        let (ch, sh) = (t.cosh(), t.sinh());
        Mat2::IDENTITY * 0.5
            + de1 * (self.a * ch)
            + Mat2::outer(self.e2, db_row) * sh
            + de2 * (self.b * sh)
    }

    pub fn approx_eq(&self, other: &HyperbolaBranch, tol: f64) -> bool {
        self.focus_near.distance(other.focus_near) <= tol
            && self.focus_far.distance(other.focus_far) <= tol
            && (self.a - other.a).abs() <= tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> HyperbolaBranch {
        HyperbolaBranch::new(Vec2::new(0.0, 0.0), Vec2::new(0.4, 0.0), 0.05).unwrap()
    }

    #[test]
    fn vertex_lies_on_focal_segment() {
        let h = example();
        let v = h.point(0.0);
        // Solving |v - far| - |v - near| = 0.1 on the axis between the foci:
        // (0.4 - x) - x = 0.1  =>  x = 0.15.
        assert!((v.x - 0.15).abs() < 1e-15);
        assert!(v.y.abs() < 1e-15);
        assert_eq!(h.eccentricity(), 4.0);
    }

    #[test]
    fn points_satisfy_focal_equation() {
        let h = example();
        for k in -40..=40 {
            let p = h.point(k as f64 * 0.1);
            let diff = p.distance(h.focus_far()) - p.distance(h.focus_near());
            assert!(
                (diff - 0.1).abs() <= 1e-9 * diff,
                "t={} diff={diff}",
                k as f64 * 0.1
            );
        }
    }

    #[test]
    fn swapping_foci_reflects_across_bisector() {
        let h = HyperbolaBranch::new(Vec2::new(0.1, 0.3), Vec2::new(0.7, -0.2), 0.05).unwrap();
        let m = h.mirror();
        let mid = h.center();
        let axis = (h.focus_near() - h.focus_far()).normalized().unwrap();
        for k in -10..=10 {
            let t = k as f64 * 0.3;
            let p = h.point(t);
            let reflected = p - axis * (2.0 * (p - mid).dot(axis));
            // Reflection reverses orientation, so it maps t to -t.
            assert!(reflected.distance(m.point(-t)) < 1e-12);
        }
    }

    #[test]
    fn param_round_trip() {
        let h = HyperbolaBranch::new(Vec2::new(-0.3, 0.2), Vec2::new(0.5, 0.6), 0.1).unwrap();
        for k in -20..=20 {
            let t = k as f64 * 0.17;
            assert!((h.param_of(h.point(t)) - t).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_a_is_the_bisector() {
        let h = HyperbolaBranch::new(Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), 0.0).unwrap();
        for k in -5..=5 {
            assert!((h.point(k as f64).x - 0.5).abs() < 1e-15);
        }
        assert!(h.eccentricity().is_infinite());
    }

    #[test]
    fn rejects_non_separated_foci() {
        assert!(HyperbolaBranch::new(Vec2::ZERO, Vec2::new(0.1, 0.0), 0.05).is_err());
        assert!(HyperbolaBranch::new(Vec2::ZERO, Vec2::new(0.08, 0.0), 0.05).is_err());
        assert!(HyperbolaBranch::new(Vec2::ZERO, Vec2::ZERO, 0.0).is_err());
    }

    #[test]
    fn increasing_parameter_is_counter_clockwise_around_near_focus() {
        let h = example();
        let p = h.point(0.0);
        let tangent = h.tangent(0.0);
        // near focus lies to the left of the direction of travel
        assert!(tangent.cross(h.focus_near() - p) > 0.0);
    }
}
