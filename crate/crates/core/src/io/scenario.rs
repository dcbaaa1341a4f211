use std::fmt::{self, Write as _};
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;
use toml::Spanned;

use crate::control::ControlLaw;
use crate::coverage::Density;
use crate::geometry::{ConvexRegion, Vec2};
use crate::partition::AgentState;
use crate::sim::{spawn_agents, EventKind, SimConfig, SimEvent, SpawnBox};

use super::grid::read_density_grid;

/// Gap added to `2 r_u` when no spawn separation is given.
const SPAWN_MARGIN: f64 = 0.02;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}", Located { line: *line, field, message })]
    Invalid {
        line: Option<usize>,
        field: String,
        message: String,
    },
}

impl ScenarioError {
    pub fn line(&self) -> Option<usize> {
        match self {
            ScenarioError::Invalid { line, .. } => *line,
            ScenarioError::Io { .. } => None,
        }
    }
}

struct Located<'a> {
    line: Option<usize>,
    field: &'a str,
    message: &'a str,
}

impl fmt::Display for Located<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if !self.field.is_empty() {
            write!(f, "{}: ", self.field)?;
        }
        f.write_str(self.message)
    }
}

/// How the initial agents are given.
#[derive(Clone, Debug, PartialEq)]
pub enum AgentSpec {
    Centers(Vec<Vec2>),
    Spawn {
        count: usize,
        spawn_box: SpawnBox,
        min_separation: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum PhiSpec {
    Uniform(f64),
    /// Grid file, as written in the scenario (relative to the scenario file).
    Grid(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputSpec {
    pub dir: PathBuf,
    /// Write an SVG frame every this many steps; 0 keeps only the final one.
    pub svg_every: usize,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            svg_every: 0,
        }
    }
}

/// A parsed scenario: the simulation config plus the file-level choices
/// needed to write it back.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub config: SimConfig,
    pub r_u: f64,
    pub r_s: f64,
    pub agents: AgentSpec,
    pub phi: PhiSpec,
    pub outputs: OutputSpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    region: Option<Spanned<RawRegion>>,
    agents: Option<Spanned<RawAgents>>,
    radii: Option<Spanned<RawRadii>>,
    simulation: Option<Spanned<RawSimulation>>,
    phi: Option<Spanned<RawPhi>>,
    #[serde(default)]
    events: Vec<Spanned<RawEvent>>,
    outputs: Option<Spanned<RawOutputs>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRegion {
    vertices: Spanned<Vec<[f64; 2]>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAgents {
    centers: Option<Spanned<Vec<Spanned<[f64; 2]>>>>,
    count: Option<Spanned<usize>>,
    seed: Option<Spanned<u64>>,
    spawn_box: Option<Spanned<[[f64; 2]; 2]>>,
    min_separation: Option<Spanned<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRadii {
    r_u: Spanned<f64>,
    r_s: Spanned<f64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawAlpha {
    Shared(f64),
    PerAgent(Vec<f64>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSimulation {
    law: Option<Spanned<String>>,
    alpha: Option<Spanned<RawAlpha>>,
    dt: Option<Spanned<f64>>,
    max_steps: Option<Spanned<usize>>,
    convergence_eps: Option<Spanned<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhi {
    uniform: Option<Spanned<f64>>,
    grid: Option<Spanned<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEvent {
    step: Spanned<usize>,
    immobilize: Spanned<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutputs {
    dir: Option<Spanned<String>>,
    svg_every: Option<Spanned<usize>>,
}

struct Source<'a> {
    text: &'a str,
}

impl Source<'_> {
    fn line(&self, span: Range<usize>) -> usize {
        let end = span.start.min(self.text.len());
        self.text[..end].bytes().filter(|&b| b == b'\n').count() + 1
    }

    fn err(&self, span: Range<usize>, field: &str, message: impl Into<String>) -> ScenarioError {
        ScenarioError::Invalid {
            line: Some(self.line(span)),
            field: field.to_string(),
            message: message.into(),
        }
    }
}

fn missing(field: &str) -> ScenarioError {
    ScenarioError::Invalid {
        line: None,
        field: field.to_string(),
        message: "required section is missing".into(),
    }
}

/// Reads and validates a scenario file; relative paths inside it resolve
/// against the file's directory.
pub fn parse_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_scenario_str(&text, base)
}

pub fn parse_scenario_str(text: &str, base_dir: &Path) -> Result<Scenario, ScenarioError> {
    let src = Source { text };
    let raw: RawScenario = toml::from_str(text).map_err(|e| ScenarioError::Invalid {
        line: e.span().map(|s| src.line(s)),
        field: String::new(),
        message: e.message().trim().to_string(),
    })?;

    let region_raw = raw.region.ok_or_else(|| missing("region"))?.into_inner();
    let vspan = region_raw.vertices.span();
    let vertices = region_raw
        .vertices
        .into_inner()
        .into_iter()
        .map(Vec2::from)
        .collect();
    let region = ConvexRegion::new(vertices)
        .map_err(|e| src.err(vspan, "region.vertices", e.to_string()))?;

    let radii = raw.radii.ok_or_else(|| missing("radii"))?.into_inner();
    let (r_u, r_s) = (*radii.r_u.get_ref(), *radii.r_s.get_ref());
    if !(r_u >= 0.0 && r_u.is_finite()) {
        return Err(src.err(
            radii.r_u.span(),
            "radii.r_u",
            format!("{r_u} must be finite and >= 0"),
        ));
    }
    if !(r_s > r_u && r_s.is_finite()) {
        return Err(src.err(
            radii.r_s.span(),
            "radii.r_s",
            format!("{r_s} must be finite and exceed r_u = {r_u}"),
        ));
    }

    let agents_sp = raw.agents.ok_or_else(|| missing("agents"))?;
    let agents_span = agents_sp.span();
    let ra = agents_sp.into_inner();
    let rng_seed = ra.seed.as_ref().map_or(0, |s| *s.get_ref());
    let (agents, agent_spec) = match (ra.centers, ra.count) {
        (Some(_), Some(c)) => {
            return Err(src.err(
                c.span(),
                "agents.count",
                "give either centers or count, not both",
            ))
        }
        (None, None) => return Err(src.err(agents_span, "agents", "needs `centers` or `count`")),
        (Some(centers), None) => {
            if let Some(b) = &ra.spawn_box {
                return Err(src.err(
                    b.span(),
                    "agents.spawn_box",
                    "only used together with `count`",
                ));
            }
            if let Some(m) = &ra.min_separation {
                return Err(src.err(
                    m.span(),
                    "agents.min_separation",
                    "only used together with `count`",
                ));
            }
            let list = centers.into_inner();
            let mut agents: Vec<AgentState> = Vec::with_capacity(list.len());
            for (id, c) in list.iter().enumerate() {
                let p = Vec2::from(*c.get_ref());
                let field = format!("agents.centers[{id}]");
                if !p.is_finite() || !region.contains(p) {
                    return Err(src.err(
                        c.span(),
                        &field,
                        format!("center {p} lies outside the region"),
                    ));
                }
                for other in &agents {
                    let d = other.center.distance(p);
                    if d <= 2.0 * r_u {
                        return Err(src.err(
                            c.span(),
                            &field,
                            format!(
                                "uncertainty disk overlaps agent {} (center distance {d} <= 2 r_u = {})",
                                other.id,
                                2.0 * r_u
                            ),
                        ));
                    }
                }
                agents.push(AgentState::new(id, p, r_u, r_s));
            }
            let spec = AgentSpec::Centers(agents.iter().map(|a| a.center).collect());
            (agents, spec)
        }
        (None, Some(count)) => {
            let box_sp = ra.spawn_box.ok_or_else(|| {
                src.err(
                    agents_span.clone(),
                    "agents.spawn_box",
                    "required when `count` is given",
                )
            })?;
            let [lo, hi] = *box_sp.get_ref();
            let spawn_box = SpawnBox {
                lo: lo.into(),
                hi: hi.into(),
            };
            let min_separation = ra
                .min_separation
                .as_ref()
                .map_or(2.0 * r_u + SPAWN_MARGIN, |s| *s.get_ref());
            if !(min_separation > 2.0 * r_u) {
                let span = ra.min_separation.map_or(agents_span.clone(), |s| s.span());
                return Err(src.err(
                    span,
                    "agents.min_separation",
                    format!("{min_separation} must exceed 2 r_u = {}", 2.0 * r_u),
                ));
            }
            let n = *count.get_ref();
            let agents = spawn_agents(n, rng_seed, spawn_box, &region, r_u, r_s, min_separation)
                .map_err(|e| src.err(box_sp.span(), "agents.spawn_box", e.to_string()))?;
            (
                agents,
                AgentSpec::Spawn {
                    count: n,
                    spawn_box,
                    min_separation,
                },
            )
        }
    };
    let n = agents.len();

    let mut config = SimConfig::new(region, agents);
    config.rng_seed = rng_seed;
    if let Some(sim) = raw.simulation.map(Spanned::into_inner) {
        if let Some(law) = sim.law {
            config.law = law
                .get_ref()
                .parse::<ControlLaw>()
                .map_err(|e| src.err(law.span(), "simulation.law", e.to_string()))?;
        }
        if let Some(alpha) = sim.alpha {
            let span = alpha.span();
            config.alpha = match alpha.into_inner() {
                RawAlpha::Shared(a) => vec![a; n],
                RawAlpha::PerAgent(v) if v.len() == n => v,
                RawAlpha::PerAgent(v) => {
                    return Err(src.err(
                        span,
                        "simulation.alpha",
                        format!("{} gains given for {n} agents", v.len()),
                    ));
                }
            };
            if let Some(a) = config.alpha.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
                return Err(src.err(
                    span,
                    "simulation.alpha",
                    format!("gain {a} must be positive and finite"),
                ));
            }
        }
        if let Some(dt) = sim.dt {
            config.dt = *dt.get_ref();
            if !(config.dt > 0.0 && config.dt.is_finite()) {
                return Err(src.err(
                    dt.span(),
                    "simulation.dt",
                    format!("{} must be positive", config.dt),
                ));
            }
        }
        if let Some(steps) = sim.max_steps {
            config.max_steps = *steps.get_ref();
            if config.max_steps == 0 {
                return Err(src.err(steps.span(), "simulation.max_steps", "must be at least 1"));
            }
        }
        if let Some(eps) = sim.convergence_eps {
            config.convergence_eps = *eps.get_ref();
            if !(config.convergence_eps >= 0.0) {
                return Err(src.err(
                    eps.span(),
                    "simulation.convergence_eps",
                    format!("{} must be >= 0", config.convergence_eps),
                ));
            }
        }
    }

    let phi = match raw.phi {
        None => PhiSpec::Uniform(1.0),
        Some(p) => {
            let span = p.span();
            match p.into_inner() {
                RawPhi {
                    uniform: Some(v),
                    grid: None,
                } => {
                    let value = *v.get_ref();
                    if !(value >= 0.0 && value.is_finite()) {
                        return Err(src.err(
                            v.span(),
                            "phi.uniform",
                            format!("{value} must be finite and >= 0"),
                        ));
                    }
                    PhiSpec::Uniform(value)
                }
                RawPhi {
                    uniform: None,
                    grid: Some(g),
                } => PhiSpec::Grid(PathBuf::from(g.get_ref())),
                _ => return Err(src.err(span, "phi", "give exactly one of `uniform` or `grid`")),
            }
        }
    };
    config.phi = match &phi {
        PhiSpec::Uniform(v) => Density::Uniform(*v),
        PhiSpec::Grid(path) => {
            let grid =
                read_density_grid(&base_dir.join(path)).map_err(|e| ScenarioError::Invalid {
                    line: None,
                    field: "phi.grid".into(),
                    message: e.to_string(),
                })?;
            Density::Grid(Arc::new(grid))
        }
    };

    for (k, ev) in raw.events.iter().enumerate() {
        let ev = ev.get_ref();
        let at_step = *ev.step.get_ref();
        let id = *ev.immobilize.get_ref();
        if at_step >= config.max_steps {
            return Err(src.err(
                ev.step.span(),
                &format!("events[{k}].step"),
                format!("{at_step} must be below max_steps = {}", config.max_steps),
            ));
        }
        if id >= n {
            return Err(src.err(
                ev.immobilize.span(),
                &format!("events[{k}].immobilize"),
                format!("no agent {id} among {n}"),
            ));
        }
        config.events.push(SimEvent {
            at_step,
            kind: EventKind::Immobilize(id),
        });
    }

    let mut outputs = OutputSpec::default();
    if let Some(o) = raw.outputs.map(Spanned::into_inner) {
        if let Some(dir) = o.dir {
            outputs.dir = PathBuf::from(dir.into_inner());
        }
        if let Some(every) = o.svg_every {
            outputs.svg_every = every.into_inner();
        }
    }

    config.validate().map_err(|e| ScenarioError::Invalid {
        line: None,
        field: "scenario".into(),
        message: e.to_string(),
    })?;
    Ok(Scenario {
        config,
        r_u,
        r_s,
        agents: agent_spec,
        phi,
        outputs,
    })
}

fn point(p: Vec2) -> String {
    format!("[{:?}, {:?}]", p.x, p.y)
}

/// Writes the scenario back in the file grammar; parsing the result yields an
/// equal scenario.
pub fn serialize_scenario(s: &Scenario) -> String {
    let c = &s.config;
    let mut out = String::new();
    let _ = writeln!(out, "[region]\nvertices = [");
    for v in c.region.vertices() {
        let _ = writeln!(out, "  {},", point(*v));
    }
    let _ = writeln!(out, "]\n\n[agents]");
    match &s.agents {
        AgentSpec::Centers(centers) => {
            let _ = writeln!(out, "centers = [");
            for p in centers {
                let _ = writeln!(out, "  {},", point(*p));
            }
            let _ = writeln!(out, "]");
        }
        AgentSpec::Spawn {
            count,
            spawn_box,
            min_separation,
        } => {
            let _ = writeln!(out, "count = {count}");
            let _ = writeln!(
                out,
                "spawn_box = [{}, {}]",
                point(spawn_box.lo),
                point(spawn_box.hi)
            );
            let _ = writeln!(out, "min_separation = {min_separation:?}");
        }
    }
    let _ = writeln!(out, "seed = {}", c.rng_seed);
    let _ = writeln!(out, "\n[radii]\nr_u = {:?}\nr_s = {:?}", s.r_u, s.r_s);
    let _ = writeln!(out, "\n[simulation]\nlaw = \"{}\"", c.law);
    match c.alpha.first() {
        Some(a0) if c.alpha.iter().all(|a| a == a0) => {
            let _ = writeln!(out, "alpha = {a0:?}");
        }
        Some(_) => {
            let list: Vec<String> = c.alpha.iter().map(|a| format!("{a:?}")).collect();
            let _ = writeln!(out, "alpha = [{}]", list.join(", "));
        }
        None => {}
    }
    let _ = writeln!(
        out,
        "dt = {:?}\nmax_steps = {}\nconvergence_eps = {:?}",
        c.dt, c.max_steps, c.convergence_eps
    );
    match &s.phi {
        PhiSpec::Uniform(v) => {
            let _ = writeln!(out, "\n[phi]\nuniform = {v:?}");
        }
        PhiSpec::Grid(path) => {
            let _ = writeln!(
                out,
                "\n[phi]\ngrid = {}",
                toml::Value::from(path.to_string_lossy().into_owned())
            );
        }
    }
    for ev in &c.events {
        let EventKind::Immobilize(id) = ev.kind;
        let _ = writeln!(
            out,
            "\n[[events]]\nstep = {}\nimmobilize = {id}",
            ev.at_step
        );
    }
    let _ = writeln!(
        out,
        "\n[outputs]\ndir = {}\nsvg_every = {}",
        toml::Value::from(s.outputs.dir.to_string_lossy().into_owned()),
        s.outputs.svg_every
    );
    out
}
