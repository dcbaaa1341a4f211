//! Adaptive Gauss–Legendre integration on an interval.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;

use super::Vec2;

const ORDER: usize = 10;
const MAX_DEPTH: u32 = 40;

fn rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(NonZeroUsize::new(ORDER).unwrap()))
        .as_node_weight_pairs()
}

/// Values that quadrature can sum: scalars and plane vectors.
pub trait Integrand: Copy + std::ops::Add<Output = Self> {
    fn zero() -> Self;
    fn scale(self, s: f64) -> Self;
    fn distance(self, other: Self) -> f64;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn distance(self, other: Self) -> f64 {
        (self - other).abs()
    }
}

impl Integrand for Vec2 {
    fn zero() -> Self {
        Vec2::ZERO
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }
}

/// Single fixed-order panel on `[a, b]`.
pub fn gauss_legendre<T: Integrand>(a: f64, b: f64, f: &mut impl FnMut(f64) -> T) -> T {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = T::zero();
    for &(x, w) in rule() {
        acc = acc + f(mid + half * x).scale(w);
    }
    acc.scale(half)
}

/// Bisects panels until the two-panel refinement changes the estimate by less
/// than `tol` (absolute).
pub fn integrate_adaptive<T: Integrand>(
    a: f64,
    b: f64,
    tol: f64,
    mut f: impl FnMut(f64) -> T,
) -> T {
    let whole = gauss_legendre(a, b, &mut f);
    refine(a, b, whole, tol, 0, &mut f)
}

fn refine<T: Integrand>(
    a: f64,
    b: f64,
    whole: T,
    tol: f64,
    depth: u32,
    f: &mut impl FnMut(f64) -> T,
) -> T {
    let mid = 0.5 * (a + b);
    let left = gauss_legendre(a, mid, f);
    let right = gauss_legendre(mid, b, f);
    let split = left + right;
    if split.distance(whole) < tol || depth >= MAX_DEPTH {
        return split;
    }
    refine(a, mid, left, 0.5 * tol, depth + 1, f) + refine(mid, b, right, 0.5 * tol, depth + 1, f)
}
