//! Guaranteed Voronoi partition of a convex region among uncertainty disks.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use spade::{DelaunayTriangulation, Point2, Triangulation};

use crate::error::{Error, Result};
use crate::geometry::{
    clip_halfregion_hyperbolic, CellRegion, ConvexRegion, HyperbolaBranch, SegmentSource, Vec2,
};

/// Distance slack for the tangent-disk regime.
pub const TANGENCY_TOL: f64 = 1e-12;
/// Minimum length of a shared arc for two agents to count as neighbors.
pub const NEIGHBOR_ARC_MIN: f64 = 1e-9;

/// One robot: the center of its positioning-uncertainty disk plus radii.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub id: usize,
    pub center: Vec2,
    /// Positioning uncertainty radius.
    pub r_u: f64,
    /// Sensing radius.
    pub r_s: f64,
    pub mobile: bool,
}

impl AgentState {
    pub fn new(id: usize, center: Vec2, r_u: f64, r_s: f64) -> Self {
        Self {
            id,
            center,
            r_u,
            r_s,
            mobile: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| {
            Err(Error::InvalidAgent {
                id: self.id,
                reason,
            })
        };
        if !self.center.is_finite() {
            return bad("center is not finite".into());
        }
        if !(self.r_u >= 0.0) || !self.r_u.is_finite() {
            return bad(format!(
                "uncertainty radius {} must be finite and >= 0",
                self.r_u
            ));
        }
        if !(self.r_s > self.r_u) || !self.r_s.is_finite() {
            return bad(format!(
                "sensing radius {} must be finite and exceed the uncertainty radius {}",
                self.r_s, self.r_u
            ));
        }
        Ok(())
    }
}

/// Checks ids, radii and pairwise-distinct centers.
pub fn validate_agents(agents: &[AgentState]) -> Result<()> {
    for (k, a) in agents.iter().enumerate() {
        if a.id != k {
            return Err(Error::InvalidAgent {
                id: a.id,
                reason: format!("ids must equal positions; found id {} at index {k}", a.id),
            });
        }
        a.validate()?;
    }
    for (i, a) in agents.iter().enumerate() {
        for b in &agents[i + 1..] {
            if a.center == b.center {
                return Err(Error::CoincidentCenters(a.id, b.id));
            }
        }
    }
    Ok(())
}

/// How agent `i` and agent `j` split the plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PairRegime {
    /// Overlapping disks: both guaranteed cells are empty.
    Empty,
    /// Externally tangent disks: both cells collapse to rays (measure zero).
    DegenerateRay,
    /// Disjoint disks: `i` keeps the side of this branch around its center.
    Branch(HyperbolaBranch),
}

impl PairRegime {
    pub fn is_degenerate(&self) -> bool {
        !matches!(self, PairRegime::Branch(_))
    }
}

pub fn pairwise_h_region(i: &AgentState, j: &AgentState) -> Result<PairRegime> {
    if i.center == j.center {
        return Err(Error::CoincidentCenters(i.id, j.id));
    }
    let d = i.center.distance(j.center);
    let sum = i.r_u + j.r_u;
    if (d - sum).abs() <= TANGENCY_TOL {
        return Ok(PairRegime::DegenerateRay);
    }
    if d < sum {
        return Ok(PairRegime::Empty);
    }
    Ok(PairRegime::Branch(HyperbolaBranch::new(
        i.center,
        j.center,
        0.5 * sum,
    )?))
}

/// Which agent pairs to test when building cells.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeighborStrategy {
    /// Every other agent; an exact superset of the guaranteed neighbors.
    #[default]
    AllPairs,
    /// Delaunay neighbors of the centers, which contain the guaranteed
    /// neighbors for disks of equal radius.
    Delaunay,
}

pub fn candidate_neighbors(
    agents: &[AgentState],
    _region: &ConvexRegion,
    strategy: NeighborStrategy,
) -> Result<Vec<BTreeSet<usize>>> {
    validate_agents(agents)?;
    let n = agents.len();
    match strategy {
        NeighborStrategy::AllPairs => Ok((0..n)
            .map(|i| (0..n).filter(|&j| j != i).collect())
            .collect()),
        NeighborStrategy::Delaunay => delaunay_neighbors(agents),
    }
}

fn delaunay_neighbors(agents: &[AgentState]) -> Result<Vec<BTreeSet<usize>>> {
    let n = agents.len();
    let mut out = vec![BTreeSet::new(); n];
    if n < 2 {
        return Ok(out);
    }
    let mut tri: DelaunayTriangulation<Point2<f64>> = DelaunayTriangulation::new();
    let mut owner = vec![usize::MAX; n];
    for a in agents {
        let handle = tri
            .insert(Point2::new(a.center.x, a.center.y))
            .map_err(|e| Error::InvalidAgent {
                id: a.id,
                reason: format!("cannot triangulate center: {e:?}"),
            })?;
        if owner[handle.index()] != usize::MAX {
            return Err(Error::CoincidentCenters(owner[handle.index()], a.id));
        }
        owner[handle.index()] = a.id;
    }
    for edge in tri.undirected_edges() {
        let [u, v] = edge.vertices();
        let (i, j) = (owner[u.fix().index()], owner[v.fix().index()]);
        out[i].insert(j);
        out[j].insert(i);
    }
    Ok(out)
}

/// `V_i^g`: the points of the region guaranteed closer to agent `i` than to
/// any candidate neighbor, whatever the true positions inside the disks.
pub fn gv_cell(i: usize, agents: &[AgentState], region: &ConvexRegion) -> Result<CellRegion> {
    let candidates = candidate_neighbors(agents, region, NeighborStrategy::AllPairs)?;
    let me = agents.get(i).ok_or(Error::UnknownAgent(i))?;
    build_cell(me, agents, &candidates[i], region)
}

fn build_cell(
    me: &AgentState,
    agents: &[AgentState],
    candidates: &BTreeSet<usize>,
    region: &ConvexRegion,
) -> Result<CellRegion> {
    let mut cell = CellRegion::from_region(region);
    // Degenerate pairs empty the cell outright; check them before clipping.
    let mut branches = Vec::with_capacity(candidates.len());
    for &j in candidates {
        match pairwise_h_region(me, &agents[j])? {
            PairRegime::Branch(h) => branches.push((j, h)),
            PairRegime::Empty | PairRegime::DegenerateRay => return Ok(CellRegion::empty()),
        }
    }
    for (j, h) in branches {
        cell = clip_halfregion_hyperbolic(&cell, &h, me.id, j)?;
        if cell.is_empty() {
            break;
        }
    }
    Ok(cell)
}

/// All guaranteed cells with neighbor sets and the unassigned (neutral) area.
#[derive(Clone, Debug, Default)]
pub struct GvDiagram {
    pub cells: Vec<CellRegion>,
    /// Guaranteed Delaunay neighbors of each agent.
    pub gd_neighbors: Vec<BTreeSet<usize>>,
    pub neutral_area: f64,
}

impl GvDiagram {
    pub fn cell_areas(&self) -> Vec<f64> {
        self.cells.iter().map(CellRegion::area).collect()
    }
}

pub fn gv_diagram(agents: &[AgentState], region: &ConvexRegion) -> Result<GvDiagram> {
    gv_diagram_with(agents, region, NeighborStrategy::AllPairs)
}

pub fn gv_diagram_with(
    agents: &[AgentState],
    region: &ConvexRegion,
    strategy: NeighborStrategy,
) -> Result<GvDiagram> {
    let candidates = candidate_neighbors(agents, region, strategy)?;
    let cells = agents
        .par_iter()
        .map(|a| build_cell(a, agents, &candidates[a.id], region))
        .collect::<Result<Vec<_>>>()?;
    let gd_neighbors = cells
        .iter()
        .enumerate()
        .map(|(i, cell)| {
            candidates[i]
                .iter()
                .copied()
                .filter(|&j| {
                    cell.boundary_length(SegmentSource::HyperbolaEdge {
                        owner: i,
                        neighbor: j,
                    }) > NEIGHBOR_ARC_MIN
                })
                .collect()
        })
        .collect();
    let assigned: f64 = cells.iter().map(CellRegion::area).sum();
    Ok(GvDiagram {
        cells,
        gd_neighbors,
        neutral_area: (region.area() - assigned).max(0.0),
    })
}

/// Grid-free membership test of `p` in `V_i^g` straight from the defining
/// inequalities `|p - x_i| + r_i <= |p - x_j| - r_j` for all `j`.
pub fn in_gv_cell(i: usize, agents: &[AgentState], region: &ConvexRegion, p: Vec2) -> bool {
    if !region.contains(p) {
        return false;
    }
    let me = &agents[i];
    let di = p.distance(me.center) + me.r_u;
    agents
        .iter()
        .filter(|a| a.id != i)
        .all(|a| di <= p.distance(a.center) - a.r_u)
}
