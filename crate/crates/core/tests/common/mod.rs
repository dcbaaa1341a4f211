//! Random instances and brute-force oracles shared by the integration tests.

#![allow(dead_code)]

use std::f64::consts::TAU;

use gv_coverage::geometry::{ConvexRegion, Vec2};
use gv_coverage::partition::AgentState;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Convex polygon of 5 to 9 vertices on an ellipse around (0.5, 0.5).
pub fn random_region(rng: &mut ChaCha8Rng) -> ConvexRegion {
    let k = rng.gen_range(5..=9);
    let (ax, ay) = (rng.gen_range(0.4..0.6), rng.gen_range(0.4..0.6));
    let phase = rng.gen_range(0.0..TAU);
    let step = TAU / k as f64;
    let vertices = (0..k)
        .map(|m| {
            let th = phase + step * (m as f64 + rng.gen_range(-0.3..0.3));
            Vec2::new(0.5 + ax * th.cos(), 0.5 + ay * th.sin())
        })
        .collect();
    ConvexRegion::new(vertices).expect("ellipse vertices are in convex position")
}

/// `n` centers inside `region`, pairwise at least `min_sep` apart.
pub fn random_agents(
    rng: &mut ChaCha8Rng,
    region: &ConvexRegion,
    n: usize,
    r_u: f64,
    r_s: f64,
    min_sep: f64,
) -> Vec<AgentState> {
    let (lo, hi) = region.bounding_box();
    let mut centers: Vec<Vec2> = Vec::new();
    while centers.len() < n {
        let p = Vec2::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
        if region.contains(p) && centers.iter().all(|c| c.distance(p) >= min_sep) {
            centers.push(p);
        }
    }
    centers
        .into_iter()
        .enumerate()
        .map(|(id, c)| AgentState::new(id, c, r_u, r_s))
        .collect()
}

pub fn inside(vertices: &[Vec2], p: Vec2) -> bool {
    let n = vertices.len();
    (0..n).all(|k| (vertices[(k + 1) % n] - vertices[k]).cross(p - vertices[k]) >= 0.0)
}

/// Owner of `p` under `|p - x_i| + r_i <= |p - x_j| - r_j` for all `j`.
pub fn gv_owner(agents: &[AgentState], p: Vec2) -> Option<usize> {
    let (mut best, mut score) = (None, f64::INFINITY);
    for a in agents {
        let s = p.distance(a.center) + a.r_u;
        if s < score {
            score = s;
            best = Some(a.id);
        }
    }
    let i = best?;
    agents
        .iter()
        .filter(|a| a.id != i)
        .all(|a| score <= p.distance(a.center) - a.r_u)
        .then_some(i)
}

pub fn nearest(agents: &[AgentState], p: Vec2) -> usize {
    agents
        .iter()
        .min_by(|a, b| p.distance(a.center).total_cmp(&p.distance(b.center)))
        .map(|a| a.id)
        .unwrap()
}

pub struct GridAreas {
    pub cells: Vec<f64>,
    pub neutral: f64,
}

/// Midpoint samples on a `res × res` grid over the region's bounding box.
pub fn grid_areas(agents: &[AgentState], region: &ConvexRegion, res: usize) -> GridAreas {
    let (lo, hi) = region.bounding_box();
    let (dx, dy) = ((hi.x - lo.x) / res as f64, (hi.y - lo.y) / res as f64);
    let verts = region.vertices();
    let mut counts = vec![0u64; agents.len()];
    let mut neutral = 0u64;
    for r in 0..res {
        let y = lo.y + (r as f64 + 0.5) * dy;
        for c in 0..res {
            let p = Vec2::new(lo.x + (c as f64 + 0.5) * dx, y);
            if !inside(verts, p) {
                continue;
            }
            match gv_owner(agents, p) {
                Some(i) => counts[i] += 1,
                None => neutral += 1,
            }
        }
    }
    let px = dx * dy;
    GridAreas {
        cells: counts.iter().map(|&k| k as f64 * px).collect(),
        neutral: neutral as f64 * px,
    }
}

pub fn polygon_area(poly: &[Vec2]) -> f64 {
    let n = poly.len();
    0.5 * (0..n)
        .map(|k| poly[k].cross(poly[(k + 1) % n]))
        .sum::<f64>()
}

/// Keeps the part of `poly` with `(p - point) · normal <= 0`.
pub fn clip_polygon(poly: &[Vec2], point: Vec2, normal: Vec2) -> Vec<Vec2> {
    let side = |p: Vec2| (p - point).dot(normal);
    let mut out = Vec::new();
    for k in 0..poly.len() {
        let (a, b) = (poly[k], poly[(k + 1) % poly.len()]);
        let (sa, sb) = (side(a), side(b));
        if sa <= 0.0 {
            out.push(a);
        }
        if (sa < 0.0 && sb > 0.0) || (sa > 0.0 && sb < 0.0) {
            out.push(a.lerp(b, sa / (sa - sb)));
        }
    }
    out
}

/// Ordinary Voronoi cell areas by successive bisector clipping.
pub fn voronoi_areas(agents: &[AgentState], region: &ConvexRegion) -> Vec<f64> {
    agents
        .iter()
        .map(|a| {
            let mut poly = region.vertices().to_vec();
            for b in agents.iter().filter(|b| b.id != a.id) {
                poly = clip_polygon(&poly, (a.center + b.center) * 0.5, b.center - a.center);
                if poly.len() < 3 {
                    return 0.0;
                }
            }
            polygon_area(&poly)
        })
        .collect()
}
