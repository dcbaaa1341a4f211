//! Gradient coverage laws evaluated as boundary integrals.
//!
//! Moving agent `i` moves three kinds of boundary: its own sensing arcs
//! (rigidly, Jacobian = identity), the hyperbolic arcs of its own sensed cell
//! that face a neighbor, and the mirrored arcs of each neighbor's sensed cell
//! that face `i`. Region edges do not move. Summing `∫ φ (∂x/∂x_i)ᵀ n ds` over
//! those arcs gives `∂H/∂x_i`.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coverage::{objective_from_cells, sensed_cells, CoverageReport, Density};
use crate::error::{Error, Result};
use crate::geometry::quadrature::integrate_adaptive;
use crate::geometry::{
    BoundarySegment, CellRegion, ConvexRegion, Focus, HyperbolaBranch, Mat2, SegmentKind,
    SegmentSource, Vec2, LINE_INTEGRAL_TOL,
};
use crate::partition::{gv_diagram, validate_agents, AgentState, GvDiagram};

/// Residual allowed for a point handed to [`hyperbolic_jacobian`].
pub const ON_BRANCH_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlLaw {
    /// Sensing arcs plus hyperbolic arcs.
    Full,
    /// Sensing arcs only.
    #[default]
    Suboptimal,
}

impl std::str::FromStr for ControlLaw {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "full" => Ok(ControlLaw::Full),
            "suboptimal" => Ok(ControlLaw::Suboptimal),
            other => Err(format!(
                "unknown law `{other}` (expected `full` or `suboptimal`)"
            )),
        }
    }
}

impl std::fmt::Display for ControlLaw {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ControlLaw::Full => "full",
            ControlLaw::Suboptimal => "suboptimal",
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ControlVector {
    /// Velocity command.
    pub u: Vec2,
    pub sensing_arc_term: Vec2,
    pub hyperbolic_terms: BTreeMap<usize, Vec2>,
    /// The agent's sensed cell was empty, so no integral was taken.
    pub empty_cell: bool,
}

/// Transpose Jacobian of a boundary point with respect to an agent center.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArcJacobian {
    pub matrix: Mat2,
}

impl ArcJacobian {
    /// Sensing-circle points translate with the center.
    pub fn identity() -> Self {
        Self {
            matrix: Mat2::IDENTITY,
        }
    }

    /// `ṽ n`
    pub fn apply(&self, n: Vec2) -> Vec2 {
        self.matrix.mul_vec(n)
    }
}

/// `(∂x/∂focus)ᵀ` at a point of `branch`, holding the branch parameter fixed.
pub fn hyperbolic_jacobian(
    branch: &HyperbolaBranch,
    point: Vec2,
    which_focus: Focus,
) -> Result<ArcJacobian> {
    let residual = branch.residual(point);
    if !(residual.abs() <= ON_BRANCH_TOL) {
        return Err(Error::OffCurve { point, residual });
    }
    let t = branch.param_of(point);
    Ok(ArcJacobian {
        matrix: branch.point_jacobian(t, which_focus).transpose(),
    })
}

/// Boundary of a sensed cell split by what bounds it.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BoundaryClasses {
    pub region: Vec<BoundarySegment>,
    pub sensing: Vec<BoundarySegment>,
    /// Hyperbolic arcs, facing the neutral zone.
    pub neutral: Vec<BoundarySegment>,
}

pub fn boundary_decomposition(cell: &CellRegion) -> BoundaryClasses {
    let mut out = BoundaryClasses::default();
    for seg in cell.segments() {
        match seg.source {
            SegmentSource::RegionBoundary => out.region.push(*seg),
            SegmentSource::SensingBoundary(_) => out.sensing.push(*seg),
            SegmentSource::HyperbolaEdge { .. } => out.neutral.push(*seg),
        }
    }
    out
}

/// Diagram and sensed cells of one configuration.
#[derive(Clone, Debug)]
pub struct NetworkSnapshot {
    pub agents: Vec<AgentState>,
    pub region: ConvexRegion,
    pub diagram: GvDiagram,
    pub sensed: Vec<CellRegion>,
}

impl NetworkSnapshot {
    pub fn new(agents: &[AgentState], region: &ConvexRegion) -> Result<Self> {
        validate_agents(agents)?;
        let diagram = gv_diagram(agents, region)?;
        let sensed = sensed_cells(&diagram, agents)?;
        Ok(Self {
            agents: agents.to_vec(),
            region: region.clone(),
            diagram,
            sensed,
        })
    }

    pub fn objective(&self, phi: &Density) -> CoverageReport {
        objective_from_cells(&self.sensed, &self.agents, &self.region, phi)
    }

    pub fn control(
        &self,
        i: usize,
        law: ControlLaw,
        phi: &Density,
        alpha: f64,
    ) -> Result<ControlVector> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "gain {alpha} must be positive"
            )));
        }
        let own = self.sensed.get(i).ok_or(Error::UnknownAgent(i))?;
        if own.is_empty() {
            return Ok(ControlVector {
                empty_cell: true,
                ..ControlVector::default()
            });
        }
        let sensing_arc_term: Vec2 = own
            .segments()
            .filter(|s| s.source == SegmentSource::SensingBoundary(i))
            .map(|s| s.line_integral(|p| phi.eval(p)))
            .sum();
        let mut hyperbolic_terms = BTreeMap::new();
        if law == ControlLaw::Full {
            for j in self.coupled_neighbors(i) {
                let mut term = Vec2::ZERO;
                for seg in own.segments() {
                    if seg.source
                        == (SegmentSource::HyperbolaEdge {
                            owner: i,
                            neighbor: j,
                        })
                    {
                        term += jacobian_flux(seg, Focus::Near, phi);
                    }
                }
                for seg in self.sensed[j].segments() {
                    if seg.source
                        == (SegmentSource::HyperbolaEdge {
                            owner: j,
                            neighbor: i,
                        })
                    {
                        term += jacobian_flux(seg, Focus::Far, phi);
                    }
                }
                hyperbolic_terms.insert(j, term);
            }
        }
        let total = sensing_arc_term + hyperbolic_terms.values().copied().sum::<Vec2>();
        Ok(ControlVector {
            u: total * alpha,
            sensing_arc_term,
            hyperbolic_terms,
            empty_cell: false,
        })
    }

    /// Agents whose shared branch with `i` bounds either cell.
    pub fn coupled_neighbors(&self, i: usize) -> BTreeSet<usize> {
        let mut out = self.diagram.gd_neighbors[i].clone();
        for (j, nbrs) in self.diagram.gd_neighbors.iter().enumerate() {
            if nbrs.contains(&i) {
                out.insert(j);
            }
        }
        out
    }

    /// Controls of every agent from this snapshot.
    pub fn controls(
        &self,
        law: ControlLaw,
        phi: &Density,
        alpha: &[f64],
    ) -> Result<Vec<ControlVector>> {
        (0..self.agents.len())
            .into_par_iter()
            .map(|i| self.control(i, law, phi, alpha[i]))
            .collect()
    }
}

/// `∫ φ (∂x/∂focus)ᵀ n ds` over a hyperbolic arc.
fn jacobian_flux(seg: &BoundarySegment, focus: Focus, phi: &Density) -> Vec2 {
    let SegmentKind::HypArc {
        branch,
        t_start,
        t_end,
    } = seg.kind
    else {
        return Vec2::ZERO;
    };
    let span = t_end - t_start;
    integrate_adaptive(0.0, 1.0, LINE_INTEGRAL_TOL, |s| {
        let t = t_start + s * span;
        let p = branch.point(t);
        let v = branch.tangent(t) * span;
        let n_ds = Vec2::new(v.y, -v.x);
        branch.point_jacobian(t, focus).transpose().mul_vec(n_ds) * phi.eval(p)
    })
}

/// Full law for agent `i`: sensing arcs plus both sides of every shared branch.
pub fn control_full(
    i: usize,
    agents: &[AgentState],
    region: &ConvexRegion,
    phi: &Density,
    alpha: f64,
) -> Result<ControlVector> {
    NetworkSnapshot::new(agents, region)?.control(i, ControlLaw::Full, phi, alpha)
}

/// Sensing-arc-only law for agent `i`.
pub fn control_suboptimal(
    i: usize,
    agents: &[AgentState],
    region: &ConvexRegion,
    phi: &Density,
    alpha: f64,
) -> Result<ControlVector> {
    NetworkSnapshot::new(agents, region)?.control(i, ControlLaw::Suboptimal, phi, alpha)
}

/// Central difference of `eval` with respect to agent `i`'s center.
pub fn fd_gradient<F>(eval: F, agents: &[AgentState], i: usize, step: f64) -> Result<Vec2>
where
    F: Fn(&[AgentState]) -> Result<f64>,
{
    if !(step > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "step {step} must be positive"
        )));
    }
    if i >= agents.len() {
        return Err(Error::UnknownAgent(i));
    }
    let mut moved = agents.to_vec();
    let mut partial = |dir: Vec2| -> Result<f64> {
        moved[i].center = agents[i].center + dir * step;
        let plus = eval(&moved)?;
        moved[i].center = agents[i].center - dir * step;
        let minus = eval(&moved)?;
        Ok((plus - minus) / (2.0 * step))
    };
    Ok(Vec2::new(
        partial(Vec2::new(1.0, 0.0))?,
        partial(Vec2::new(0.0, 1.0))?,
    ))
}
