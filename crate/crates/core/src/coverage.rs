//! Guaranteed sensing disks, sensed cells and the coverage objective.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{clip_disk, CellRegion, Circle, ConvexRegion, Vec2};
use crate::partition::{gv_diagram, validate_agents, AgentState, GvDiagram};

/// Importance density over the region.
#[derive(Clone)]
pub enum Density {
    Uniform(f64),
    /// Bilinear interpolation of sampled values.
    Grid(Arc<DensityGrid>),
    Callable(Arc<dyn Fn(Vec2) -> f64 + Send + Sync>),
}

/// Density samples on a regular lattice whose corner nodes sit on the corners
/// of `[lo, hi]`. Row 0 is at `lo.y`; rows are stored one after another.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityGrid {
    width: usize,
    height: usize,
    lo: Vec2,
    hi: Vec2,
    values: Vec<f64>,
}

impl DensityGrid {
    pub fn new(width: usize, height: usize, lo: Vec2, hi: Vec2, values: Vec<f64>) -> Result<Self> {
        if width < 2 || height < 2 {
            return Err(Error::InvalidParameter(format!(
                "density grid needs at least 2x2 nodes, got {width}x{height}"
            )));
        }
        if !(lo.is_finite() && hi.is_finite() && hi.x > lo.x && hi.y > lo.y) {
            return Err(Error::InvalidParameter(format!(
                "density grid box {lo}..{hi} is empty"
            )));
        }
        if values.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "density grid expects {} values, got {}",
                width * height,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "density value {v} must be finite and >= 0"
            )));
        }
        Ok(Self {
            width,
            height,
            lo,
            hi,
            values,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bounds(&self) -> (Vec2, Vec2) {
        (self.lo, self.hi)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Bilinear value; points outside the box take the nearest edge value.
    pub fn eval(&self, p: Vec2) -> f64 {
        let fx =
            ((p.x - self.lo.x) / (self.hi.x - self.lo.x)).clamp(0.0, 1.0) * (self.width - 1) as f64;
        let fy = ((p.y - self.lo.y) / (self.hi.y - self.lo.y)).clamp(0.0, 1.0)
            * (self.height - 1) as f64;
        let c = (fx.floor() as usize).min(self.width - 2);
        let r = (fy.floor() as usize).min(self.height - 2);
        let (sx, sy) = (fx - c as f64, fy - r as f64);
        let at = |r: usize, c: usize| self.values[r * self.width + c];
        let bottom = at(r, c) * (1.0 - sx) + at(r, c + 1) * sx;
        let top = at(r + 1, c) * (1.0 - sx) + at(r + 1, c + 1) * sx;
        bottom * (1.0 - sy) + top * sy
    }
}

impl Density {
    pub fn callable(f: impl Fn(Vec2) -> f64 + Send + Sync + 'static) -> Self {
        Density::Callable(Arc::new(f))
    }

    #[inline]
    pub fn eval(&self, p: Vec2) -> f64 {
        match self {
            Density::Uniform(v) => *v,
            Density::Grid(g) => g.eval(p),
            Density::Callable(f) => f(p),
        }
    }

    pub fn uniform_value(&self) -> Option<f64> {
        match self {
            Density::Uniform(v) => Some(*v),
            Density::Grid(_) | Density::Callable(_) => None,
        }
    }
}

impl Default for Density {
    fn default() -> Self {
        Density::Uniform(1.0)
    }
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Density::Uniform(v) => f.debug_tuple("Uniform").field(v).finish(),
            Density::Grid(g) => f.debug_tuple("Grid").field(g).finish(),
            Density::Callable(_) => f.write_str("Callable(..)"),
        }
    }
}

/// Closures compare by identity.
impl PartialEq for Density {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Density::Uniform(a), Density::Uniform(b)) => a == b,
            (Density::Grid(a), Density::Grid(b)) => a == b,
            (Density::Callable(a), Density::Callable(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoverageReport {
    pub per_agent_h: Vec<f64>,
    pub total_h: f64,
    /// `total_h` over the best value the network could reach.
    pub coverage_fraction: f64,
}

/// Disk sensed from anywhere inside the uncertainty disk: radius `r_s - r_u`.
pub fn guaranteed_sensing_disk(agent: &AgentState) -> Result<Circle> {
    if !(agent.r_s > agent.r_u) {
        return Err(Error::NoGuaranteedSensing {
            id: agent.id,
            r_s: agent.r_s,
            r_u: agent.r_u,
        });
    }
    Ok(Circle::new(agent.center, agent.r_s - agent.r_u))
}

/// `V_i^gs = V_i^g ∩ C_i^gs`
pub fn sensed_cell(i: usize, diagram: &GvDiagram, agents: &[AgentState]) -> Result<CellRegion> {
    let agent = agents.get(i).ok_or(Error::UnknownAgent(i))?;
    let disk = guaranteed_sensing_disk(agent)?;
    let cell = diagram.cells.get(i).ok_or(Error::UnknownAgent(i))?;
    if cell.is_empty() {
        return Ok(CellRegion::empty());
    }
    clip_disk(cell, disk, i)
}

pub fn sensed_cells(diagram: &GvDiagram, agents: &[AgentState]) -> Result<Vec<CellRegion>> {
    (0..agents.len())
        .into_par_iter()
        .map(|i| sensed_cell(i, diagram, agents))
        .collect()
}

/// Full objective report; builds the diagram internally.
pub fn objective(
    agents: &[AgentState],
    region: &ConvexRegion,
    phi: &Density,
) -> Result<CoverageReport> {
    validate_agents(agents)?;
    let diagram = gv_diagram(agents, region)?;
    let sensed = sensed_cells(&diagram, agents)?;
    Ok(objective_from_cells(&sensed, agents, region, phi))
}

/// Objective from already-built sensed cells.
pub fn objective_from_cells(
    sensed: &[CellRegion],
    agents: &[AgentState],
    region: &ConvexRegion,
    phi: &Density,
) -> CoverageReport {
    let per_agent_h: Vec<f64> = match phi {
        Density::Uniform(v) => sensed.iter().map(|c| v * c.area()).collect(),
        Density::Grid(_) | Density::Callable(_) => sensed
            .par_iter()
            .enumerate()
            .map(|(i, c)| integrate_over_sensed_cell(i, c, agents, region, phi))
            .collect(),
    };
    let total_h: f64 = per_agent_h.iter().sum();
    let h_max = max_objective(agents, region, phi);
    let coverage_fraction = if h_max > 0.0 {
        (total_h / h_max).clamp(0.0, 1.0)
    } else {
        0.0
    };
    CoverageReport {
        per_agent_h,
        total_h,
        coverage_fraction,
    }
}

/// Denominator of the coverage fraction: every guaranteed sensing disk fully
/// used, capped by the importance mass of the whole region.
pub fn max_objective(agents: &[AgentState], region: &ConvexRegion, phi: &Density) -> f64 {
    let disks: f64 = agents
        .iter()
        .map(|a| {
            let r = (a.r_s - a.r_u).max(0.0);
            PI * r * r
        })
        .sum();
    match phi {
        Density::Uniform(v) => v * disks.min(region.area()),
        Density::Grid(_) | Density::Callable(_) => {
            let (mass, sup) = region_mass_and_sup(region, phi, 256);
            (disks * sup).min(mass)
        }
    }
}

fn region_mass_and_sup(region: &ConvexRegion, phi: &Density, res: usize) -> (f64, f64) {
    let (lo, hi) = region.bounding_box();
    let (dx, dy) = ((hi.x - lo.x) / res as f64, (hi.y - lo.y) / res as f64);
    let mut mass = 0.0;
    let mut sup = 0.0_f64;
    for r in 0..res {
        for c in 0..res {
            let p = Vec2::new(lo.x + (c as f64 + 0.5) * dx, lo.y + (r as f64 + 0.5) * dy);
            if region.contains(p) {
                let v = phi.eval(p);
                mass += v * dx * dy;
                sup = sup.max(v);
            }
        }
    }
    (mass, sup)
}

/// Membership of `p` in `V_i^gs` from the defining inequalities only.
pub fn in_sensed_cell(i: usize, agents: &[AgentState], region: &ConvexRegion, p: Vec2) -> bool {
    let me = &agents[i];
    p.distance(me.center) <= me.r_s - me.r_u && crate::partition::in_gv_cell(i, agents, region, p)
}

/// Midpoint rule over the cell's bounding box, doubling the resolution until
/// the estimate settles to 0.1%.
fn integrate_over_sensed_cell(
    i: usize,
    cell: &CellRegion,
    agents: &[AgentState],
    region: &ConvexRegion,
    phi: &Density,
) -> f64 {
    let Some((lo, hi)) = cell.bounding_box() else {
        return 0.0;
    };
    let estimate = |res: usize| {
        let (dx, dy) = ((hi.x - lo.x) / res as f64, (hi.y - lo.y) / res as f64);
        let mut acc = 0.0;
        for r in 0..res {
            for c in 0..res {
                let p = Vec2::new(lo.x + (c as f64 + 0.5) * dx, lo.y + (r as f64 + 0.5) * dy);
                if in_sensed_cell(i, agents, region, p) {
                    acc += phi.eval(p);
                }
            }
        }
        acc * dx * dy
    };
    let mut res = 32;
    let mut prev = estimate(res);
    while res < 1024 {
        res *= 2;
        let next = estimate(res);
        if (next - prev).abs() <= 1e-3 * next.abs().max(1e-300) {
            return next;
        }
        prev = next;
    }
    prev
}

/// Independent grid estimate of the objective using only the defining
/// inequalities (no constructed boundaries): `resolution²` midpoints over the
/// region's bounding box.
pub fn sampled_objective(
    agents: &[AgentState],
    region: &ConvexRegion,
    phi: &Density,
    resolution: usize,
) -> Result<f64> {
    if resolution < 100 {
        return Err(Error::InvalidParameter(format!(
            "resolution {resolution} must be at least 100"
        )));
    }
    validate_agents(agents)?;
    if agents.is_empty() {
        return Ok(0.0);
    }
    let (lo, hi) = region.bounding_box();
    let (dx, dy) = (
        (hi.x - lo.x) / resolution as f64,
        (hi.y - lo.y) / resolution as f64,
    );
    let total: f64 = (0..resolution)
        .into_par_iter()
        .map(|r| {
            let y = lo.y + (r as f64 + 0.5) * dy;
            let mut acc = 0.0;
            for c in 0..resolution {
                let p = Vec2::new(lo.x + (c as f64 + 0.5) * dx, y);
                if !region.contains(p) {
                    continue;
                }
                if let Some(i) = owner_of(agents, p) {
                    let a = &agents[i];
                    if p.distance(a.center) <= a.r_s - a.r_u {
                        acc += phi.eval(p);
                    }
                }
            }
            acc
        })
        .sum();
    Ok(total * dx * dy)
}

/// The agent whose guaranteed cell holds `p`, if any (region membership not
/// checked). Only the nearest center can qualify.
pub fn owner_of(agents: &[AgentState], p: Vec2) -> Option<usize> {
    let mut best = (f64::INFINITY, usize::MAX);
    for a in agents {
        let d = p.distance(a.center) + a.r_u;
        if d < best.0 {
            best = (d, a.id);
        }
    }
    let i = best.1;
    let di = best.0;
    agents
        .iter()
        .filter(|a| a.id != i)
        .all(|a| di <= p.distance(a.center) - a.r_u)
        .then_some(i)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn agent(id: usize, x: f64, y: f64) -> AgentState {
        AgentState::new(id, Vec2::new(x, y), 0.05, 0.3)
    }

    #[test]
    fn sensing_disk_radius() {
        assert_eq!(
            guaranteed_sensing_disk(&agent(0, 0.0, 0.0)).unwrap().radius,
            0.25
        );
        let mut a = agent(0, 0.0, 0.0);
        a.r_u = 0.0;
        assert_eq!(guaranteed_sensing_disk(&a).unwrap().radius, 0.3);
        a.r_u = 0.3;
        assert!(matches!(
            guaranteed_sensing_disk(&a),
            Err(Error::NoGuaranteedSensing { .. })
        ));
    }

    #[test]
    fn lone_agent_covers_full_disk() {
        let sq = ConvexRegion::unit_square();
        let agents = [agent(0, 0.5, 0.5)];
        let rep = objective(&agents, &sq, &Density::Uniform(1.0)).unwrap();
        assert!((rep.total_h - PI * 0.0625).abs() < 1e-14);
        assert!((rep.coverage_fraction - 1.0).abs() < 1e-12);
        let zero = objective(&agents, &sq, &Density::Uniform(0.0)).unwrap();
        assert_eq!(zero.total_h, 0.0);
        let sampled = sampled_objective(&agents, &sq, &Density::Uniform(1.0), 1000).unwrap();
        assert!((sampled - PI * 0.0625).abs() < 0.01 * PI * 0.0625);
    }

    #[test]
    fn empty_network() {
        let sq = ConvexRegion::unit_square();
        assert_eq!(
            sampled_objective(&[], &sq, &Density::Uniform(1.0), 100).unwrap(),
            0.0
        );
        assert!(sampled_objective(&[], &sq, &Density::Uniform(1.0), 99).is_err());
        let rep = objective(&[], &sq, &Density::Uniform(1.0)).unwrap();
        assert_eq!(rep.total_h, 0.0);
    }

    #[test]
    fn empty_cell_gives_empty_sensed_cell() {
        let sq = ConvexRegion::unit_square();
        let agents = [agent(0, 0.5, 0.5), agent(1, 0.55, 0.5)];
        let d = gv_diagram(&agents, &sq).unwrap();
        assert!(sensed_cell(0, &d, &agents).unwrap().is_empty());
    }

    #[test]
    fn callable_density_matches_uniform_when_constant() {
        let sq = ConvexRegion::unit_square();
        let agents = [agent(0, 0.3, 0.3), agent(1, 0.7, 0.6)];
        let u = objective(&agents, &sq, &Density::Uniform(2.0)).unwrap();
        let c = objective(&agents, &sq, &Density::callable(|_| 2.0)).unwrap();
        assert!(
            (u.total_h - c.total_h).abs() < 3e-3 * u.total_h,
            "{} {}",
            u.total_h,
            c.total_h
        );
    }

    #[test]
    fn grid_density_interpolates_bilinearly() {
        // f(x, y) = 1 + x + 2y is reproduced exactly
        let vals = [1.0, 2.0, 3.0, 4.0];
        let g = DensityGrid::new(
            2,
            2,
            Vec2::ZERO,
            Vec2::new(1.0, 1.0),
            vec![1.0, 2.0, 3.0, 4.0],
        )
        .unwrap();
        assert_eq!(g.values(), &vals);
        for (x, y) in [(0.0, 0.0), (0.25, 0.5), (1.0, 1.0), (0.9, 0.1)] {
            assert!((g.eval(Vec2::new(x, y)) - (1.0 + x + 2.0 * y)).abs() < 1e-15);
        }
        assert_eq!(g.eval(Vec2::new(-3.0, 0.0)), 1.0);
        assert_eq!(g.eval(Vec2::new(5.0, 5.0)), 4.0);
        assert!(DensityGrid::new(1, 2, Vec2::ZERO, Vec2::new(1.0, 1.0), vec![1.0, 1.0]).is_err());
        assert!(DensityGrid::new(2, 2, Vec2::ZERO, Vec2::new(1.0, 1.0), vec![1.0; 3]).is_err());
        assert!(DensityGrid::new(
            2,
            2,
            Vec2::ZERO,
            Vec2::new(1.0, 1.0),
            vec![1.0, -1.0, 1.0, 1.0]
        )
        .is_err());
    }
}
