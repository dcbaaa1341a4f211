//! Synchronous explicit-Euler simulation of the closed-loop network.

use log::{debug, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::control::{ControlLaw, NetworkSnapshot};
use crate::coverage::Density;
use crate::error::{Error, Result};
use crate::geometry::{ConvexRegion, Vec2};
use crate::partition::{validate_agents, AgentState};

pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_MAX_STEPS: usize = 2000;
pub const DEFAULT_CONVERGENCE_EPS: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    /// The agent stops moving but keeps sensing.
    Immobilize(usize),
}

/// An event taking effect once `at_step` steps have been taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimEvent {
    pub at_step: usize,
    pub kind: EventKind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub region: ConvexRegion,
    pub agents: Vec<AgentState>,
    pub dt: f64,
    pub max_steps: usize,
    pub law: ControlLaw,
    /// One gain per agent.
    pub alpha: Vec<f64>,
    pub convergence_eps: f64,
    pub events: Vec<SimEvent>,
    pub phi: Density,
    pub rng_seed: u64,
}

impl SimConfig {
    /// Default parameters around the given agents.
    pub fn new(region: ConvexRegion, agents: Vec<AgentState>) -> Self {
        let n = agents.len();
        Self {
            region,
            agents,
            dt: DEFAULT_DT,
            max_steps: DEFAULT_MAX_STEPS,
            law: ControlLaw::default(),
            alpha: vec![1.0; n],
            convergence_eps: DEFAULT_CONVERGENCE_EPS,
            events: Vec::new(),
            phi: Density::default(),
            rng_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let param = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return param(format!("dt = {} must be positive", self.dt));
        }
        if self.max_steps == 0 {
            return param("max_steps must be at least 1".into());
        }
        if !(self.convergence_eps >= 0.0) {
            return param(format!(
                "convergence_eps = {} must be >= 0",
                self.convergence_eps
            ));
        }
        if self.alpha.len() != self.agents.len() {
            return param(format!(
                "{} gains given for {} agents",
                self.alpha.len(),
                self.agents.len()
            ));
        }
        if let Some(a) = self.alpha.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
            return param(format!("gain {a} must be positive"));
        }
        validate_agents(&self.agents)?;
        for a in &self.agents {
            if !self.region.contains(a.center) {
                return Err(Error::InvalidAgent {
                    id: a.id,
                    reason: format!("center {} lies outside the region", a.center),
                });
            }
        }
        if let Some((i, j, d)) = first_overlap(&self.agents) {
            return Err(Error::InvalidAgent {
                id: i,
                reason: format!("uncertainty disk overlaps agent {j} (center distance {d})"),
            });
        }
        for ev in &self.events {
            if ev.at_step >= self.max_steps {
                return param(format!(
                    "event at step {} is not before max_steps {}",
                    ev.at_step, self.max_steps
                ));
            }
            let EventKind::Immobilize(id) = ev.kind;
            if id >= self.agents.len() {
                return Err(Error::UnknownAgent(id));
            }
        }
        Ok(())
    }
}

/// First pair whose uncertainty disks touch or overlap.
fn first_overlap(agents: &[AgentState]) -> Option<(usize, usize, f64)> {
    for (k, a) in agents.iter().enumerate() {
        for b in &agents[k + 1..] {
            let d = a.center.distance(b.center);
            if d <= a.r_u + b.r_u {
                return Some((a.id, b.id, d));
            }
        }
    }
    None
}

pub fn min_pairwise_distance(agents: &[AgentState]) -> f64 {
    let mut best = f64::INFINITY;
    for (k, a) in agents.iter().enumerate() {
        for b in &agents[k + 1..] {
            best = best.min(a.center.distance(b.center));
        }
    }
    best
}

/// Positions and cached geometry after `step` steps.
#[derive(Clone, Debug)]
pub struct SimState {
    pub step: usize,
    /// Elapsed time; below `step * dt` when steps were shortened.
    pub t: f64,
    pub agents: Vec<AgentState>,
    pub snapshot: NetworkSnapshot,
    /// Objective of `snapshot`.
    pub h: f64,
}

impl SimState {
    pub fn initial(config: &SimConfig) -> Result<Self> {
        config.validate()?;
        let snapshot = NetworkSnapshot::new(&config.agents, &config.region)?;
        let h = snapshot.objective(&config.phi).total_h;
        Ok(Self {
            step: 0,
            t: 0.0,
            agents: config.agents.clone(),
            snapshot,
            h,
        })
    }
}

/// Halvings of `dt` tried before a step is taken regardless of the objective.
pub const MAX_STEP_HALVINGS: u32 = 12;
/// Objective drop tolerated without shortening the step (round-off level).
pub const ASCENT_SLACK: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct StepOutput {
    pub state: SimState,
    /// Velocities actually applied (zero for immobilized agents).
    pub applied: Vec<Vec2>,
    /// Velocities the law asked for, including those of immobilized agents.
    pub computed: Vec<Vec2>,
    /// Time step actually taken.
    pub dt: f64,
}

/// One synchronous step: events due now, every control from the same
/// snapshot, then an Euler update of the mobile agents. The step is halved
/// while it would lower the objective or make uncertainty disks meet.
pub fn step(state: &SimState, config: &SimConfig) -> Result<StepOutput> {
    let mut agents = state.agents.clone();
    for ev in config.events.iter().filter(|e| e.at_step == state.step) {
        let EventKind::Immobilize(id) = ev.kind;
        let a = agents.get_mut(id).ok_or(Error::UnknownAgent(id))?;
        if a.mobile {
            debug!("step {}: immobilizing agent {id}", state.step);
        }
        a.mobile = false;
    }
    let controls = state
        .snapshot
        .controls(config.law, &config.phi, &config.alpha)?;
    let computed: Vec<Vec2> = controls.iter().map(|c| c.u).collect();
    let applied: Vec<Vec2> = agents
        .iter()
        .zip(&computed)
        .map(|(a, u)| if a.mobile { *u } else { Vec2::ZERO })
        .collect();
    let next = state.step + 1;
    let mut dt = config.dt;
    for attempt in 0..=MAX_STEP_HALVINGS {
        let last = attempt == MAX_STEP_HALVINGS;
        let moved: Vec<AgentState> = agents
            .iter()
            .zip(&applied)
            .map(|(a, u)| AgentState {
                center: a.center + *u * dt,
                ..*a
            })
            .collect();
        if let Some((i, j, distance)) = first_overlap(&moved) {
            if last {
                return Err(Error::Collision {
                    step: next,
                    i,
                    j,
                    distance,
                });
            }
            dt *= 0.5;
            continue;
        }
        let snapshot = NetworkSnapshot::new(&moved, &config.region)?;
        let h = snapshot.objective(&config.phi).total_h;
        if h < state.h - ASCENT_SLACK && !last {
            dt *= 0.5;
            continue;
        }
        if dt < config.dt {
            debug!("step {next}: step shortened to {dt:e}");
        }
        for a in &moved {
            if !config.region.contains(a.center) {
                warn!(
                    "step {next}: center of agent {} left the region at {}",
                    a.id, a.center
                );
            }
        }
        return Ok(StepOutput {
            state: SimState {
                step: next,
                t: state.t + dt,
                agents: moved,
                snapshot,
                h,
            },
            applied,
            computed,
            dt,
        });
    }
    unreachable!("the last attempt always returns")
}

/// Network state after a step, or the initial state when `step == 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub step: usize,
    pub t: f64,
    pub positions: Vec<Vec2>,
    /// Velocities applied during this step; zero in the initial row.
    pub controls: Vec<Vec2>,
    pub h: f64,
    pub coverage_fraction: f64,
    pub min_pairwise_dist: f64,
    pub neutral_area: f64,
}

impl TraceRow {
    fn record(state: &SimState, controls: Vec<Vec2>, phi: &Density) -> Self {
        let snapshot = &state.snapshot;
        let report = snapshot.objective(phi);
        Self {
            step: state.step,
            t: state.t,
            positions: snapshot.agents.iter().map(|a| a.center).collect(),
            controls,
            h: report.total_h,
            coverage_fraction: report.coverage_fraction,
            min_pairwise_dist: min_pairwise_distance(&snapshot.agents),
            neutral_area: snapshot.diagram.neutral_area,
        }
    }

    pub fn max_speed(&self) -> f64 {
        self.controls.iter().map(|u| u.norm()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SimDiagnostics {
    pub converged: bool,
    /// `(step, agent)` for every center found outside the region.
    pub exits: Vec<(usize, usize)>,
    /// Immobilized agents at the end of the run.
    pub immobilized: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimTrace {
    pub initial: TraceRow,
    /// One row per step taken, in order.
    pub rows: Vec<TraceRow>,
    pub final_agents: Vec<AgentState>,
    pub diagnostics: SimDiagnostics,
}

impl SimTrace {
    pub fn last(&self) -> &TraceRow {
        self.rows.last().unwrap_or(&self.initial)
    }

    /// Initial row followed by every step row.
    pub fn all_rows(&self) -> impl Iterator<Item = &TraceRow> {
        std::iter::once(&self.initial).chain(&self.rows)
    }

    pub fn agent_count(&self) -> usize {
        self.initial.positions.len()
    }
}

/// Steps until the fastest applied velocity drops below the threshold or the
/// step budget runs out.
pub fn run(config: &SimConfig) -> Result<SimTrace> {
    run_with(config, |_, _| {})
}

/// Like [`run`], calling `observe` after every step.
pub fn run_with(
    config: &SimConfig,
    mut observe: impl FnMut(&SimState, &TraceRow),
) -> Result<SimTrace> {
    let mut state = SimState::initial(config)?;
    let n = state.agents.len();
    let initial = TraceRow::record(&state, vec![Vec2::ZERO; n], &config.phi);
    let mut rows = Vec::new();
    let mut diagnostics = SimDiagnostics::default();
    while state.step < config.max_steps {
        let out = step(&state, config)?;
        state = out.state;
        let row = TraceRow::record(&state, out.applied, &config.phi);
        for a in &state.agents {
            if !config.region.contains(a.center) {
                diagnostics.exits.push((state.step, a.id));
            }
        }
        observe(&state, &row);
        let speed = row.max_speed();
        rows.push(row);
        if speed < config.convergence_eps {
            diagnostics.converged = true;
            break;
        }
    }
    diagnostics.immobilized = state
        .agents
        .iter()
        .filter(|a| !a.mobile)
        .map(|a| a.id)
        .collect();
    Ok(SimTrace {
        initial,
        rows,
        final_agents: state.agents,
        diagnostics,
    })
}

/// True iff every recorded row keeps centers more than `2 r_u` apart.
pub fn check_collision_free(trace: &SimTrace, r_u: f64) -> bool {
    trace.all_rows().all(|r| r.min_pairwise_dist > 2.0 * r_u)
}

/// Region used for randomized placement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpawnBox {
    pub lo: Vec2,
    pub hi: Vec2,
}

/// Rejection-samples `count` centers inside both the box and the region,
/// pairwise at least `min_separation` apart.
pub fn spawn_agents(
    count: usize,
    seed: u64,
    spawn: SpawnBox,
    region: &ConvexRegion,
    r_u: f64,
    r_s: f64,
    min_separation: f64,
) -> Result<Vec<AgentState>> {
    if !(spawn.hi.x >= spawn.lo.x && spawn.hi.y >= spawn.lo.y)
        || !spawn.lo.is_finite()
        || !spawn.hi.is_finite()
    {
        return Err(Error::InvalidParameter(format!(
            "spawn box {}..{} is empty",
            spawn.lo, spawn.hi
        )));
    }
    if !(min_separation > 2.0 * r_u) {
        return Err(Error::InvalidParameter(format!(
            "min_separation {min_separation} must exceed 2 r_u = {}",
            2.0 * r_u
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers: Vec<Vec2> = Vec::with_capacity(count);
    let budget = 10_000 * count.max(1);
    let mut tries = 0;
    while centers.len() < count {
        if tries == budget {
            return Err(Error::InvalidParameter(format!(
                "placed only {} of {count} agents in the spawn box after {budget} attempts",
                centers.len()
            )));
        }
        tries += 1;
        let p = Vec2::new(
            rng.gen_range(spawn.lo.x..=spawn.hi.x),
            rng.gen_range(spawn.lo.y..=spawn.hi.y),
        );
        if region.contains(p) && centers.iter().all(|c| c.distance(p) >= min_separation) {
            centers.push(p);
        }
    }
    let agents: Vec<_> = centers
        .into_iter()
        .enumerate()
        .map(|(id, c)| AgentState::new(id, c, r_u, r_s))
        .collect();
    validate_agents(&agents)?;
    Ok(agents)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_config(centers: &[(f64, f64)]) -> SimConfig {
        let agents = centers
            .iter()
            .enumerate()
            .map(|(id, &(x, y))| AgentState::new(id, Vec2::new(x, y), 0.05, 0.3))
            .collect();
        SimConfig::new(ConvexRegion::unit_square(), agents)
    }

    #[test]
    fn interior_agent_is_a_fixed_point() {
        let cfg = square_config(&[(0.5, 0.5)]);
        let trace = run(&cfg).unwrap();
        assert_eq!(trace.rows.len(), 1);
        assert!(trace.diagnostics.converged);
        assert_eq!(trace.final_agents[0].center, Vec2::new(0.5, 0.5));
        assert!(check_collision_free(&trace, 0.05));
    }

    #[test]
    fn infinite_threshold_stops_after_one_step() {
        let mut cfg = square_config(&[(0.2, 0.2), (0.35, 0.3)]);
        cfg.convergence_eps = f64::INFINITY;
        let trace = run(&cfg).unwrap();
        assert_eq!(trace.rows.len(), 1);
        assert_eq!(trace.rows[0].step, 1);
        assert_eq!(trace.rows[0].t, cfg.dt);
    }

    #[test]
    fn immobilized_agent_keeps_position() {
        let mut cfg = square_config(&[(0.1, 0.1), (0.6, 0.6)]);
        cfg.events.push(SimEvent {
            at_step: 0,
            kind: EventKind::Immobilize(0),
        });
        let state = SimState::initial(&cfg).unwrap();
        let out = step(&state, &cfg).unwrap();
        assert!(out.computed[0].norm() > 1e-3);
        assert_eq!(out.applied[0], Vec2::ZERO);
        assert_eq!(out.state.agents[0].center, Vec2::new(0.1, 0.1));
        assert!(!out.state.agents[0].mobile);
    }

    #[test]
    fn corner_agent_moves_inward_and_gains_coverage() {
        let cfg = square_config(&[(0.1, 0.1)]);
        let trace = run(&cfg).unwrap();
        assert!(trace.diagnostics.converged);
        let last = trace.last();
        assert!(
            (last.coverage_fraction - 1.0).abs() < 1e-3,
            "{}",
            last.coverage_fraction
        );
        let mut prev = trace.initial.h;
        for r in &trace.rows {
            assert!(r.h >= prev - 1e-9);
            prev = r.h;
        }
    }

    #[test]
    fn validation_catches_bad_configs() {
        let mut cfg = square_config(&[(0.2, 0.2), (0.25, 0.2)]);
        assert!(cfg.validate().is_err());
        cfg = square_config(&[(0.2, 0.2)]);
        cfg.dt = 0.0;
        assert!(cfg.validate().is_err());
        cfg = square_config(&[(1.2, 0.2)]);
        assert!(cfg.validate().is_err());
        cfg = square_config(&[(0.2, 0.2)]);
        cfg.events.push(SimEvent {
            at_step: 5,
            kind: EventKind::Immobilize(3),
        });
        assert!(matches!(cfg.validate(), Err(Error::UnknownAgent(3))));
        cfg.events[0].at_step = cfg.max_steps;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn collision_check_flags_violations() {
        let cfg = square_config(&[(0.3, 0.3), (0.7, 0.7)]);
        let mut trace = run(&cfg).unwrap();
        assert!(check_collision_free(&trace, 0.05));
        trace.rows[0].min_pairwise_dist = 0.1;
        assert!(!check_collision_free(&trace, 0.05));
        let single = run(&square_config(&[(0.5, 0.5)])).unwrap();
        assert!(check_collision_free(&single, 0.05));
    }

    #[test]
    fn spawning_is_seeded() {
        let sq = ConvexRegion::unit_square();
        let b = SpawnBox {
            lo: Vec2::new(0.0, 0.0),
            hi: Vec2::new(0.5, 0.5),
        };
        let a = spawn_agents(6, 7, b, &sq, 0.05, 0.3, 0.12).unwrap();
        assert_eq!(a, spawn_agents(6, 7, b, &sq, 0.05, 0.3, 0.12).unwrap());
        assert_ne!(a, spawn_agents(6, 8, b, &sq, 0.05, 0.3, 0.12).unwrap());
        assert!(min_pairwise_distance(&a) >= 0.12);
        assert!(spawn_agents(50, 7, b, &sq, 0.05, 0.3, 0.3).is_err());
    }
}
