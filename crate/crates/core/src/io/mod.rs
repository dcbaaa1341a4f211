//! Scenario files, density grids, trace CSV and SVG frames.

mod csv;
mod grid;
mod scenario;
mod svg;

pub use csv::{coverage_curve_csv, emit_coverage_csv, emit_trace_csv, trace_csv, trace_header};
pub use grid::{parse_density_grid, read_density_grid, write_density_grid};
pub use scenario::{
    parse_scenario, parse_scenario_str, serialize_scenario, AgentSpec, OutputSpec, PhiSpec,
    Scenario, ScenarioError,
};
pub use svg::{emit_svg_frame, render_svg};
