use std::fmt::Write as _;
use std::path::Path;

use crate::sim::SimTrace;

/// Fixed header for `n` agents.
pub fn trace_header(n: usize) -> String {
    let mut cols = vec!["step".to_string(), "t".to_string()];
    for i in 0..n {
        cols.extend([
            format!("x_{i}"),
            format!("y_{i}"),
            format!("ux_{i}"),
            format!("uy_{i}"),
        ]);
    }
    cols.extend(
        [
            "H",
            "coverage_fraction",
            "neutral_area",
            "min_pairwise_dist",
        ]
        .map(String::from),
    );
    cols.join(",")
}

fn num(out: &mut String, v: f64) {
    let _ = write!(out, ",{v:.16e}");
}

/// Header plus one row per step taken (the initial state is not a row).
pub fn trace_csv(trace: &SimTrace) -> String {
    let mut out = trace_header(trace.agent_count());
    out.push('\n');
    for row in &trace.rows {
        let _ = write!(out, "{}", row.step);
        num(&mut out, row.t);
        for (p, u) in row.positions.iter().zip(&row.controls) {
            for v in [p.x, p.y, u.x, u.y] {
                num(&mut out, v);
            }
        }
        for v in [
            row.h,
            row.coverage_fraction,
            row.neutral_area,
            row.min_pairwise_dist,
        ] {
            num(&mut out, v);
        }
        out.push('\n');
    }
    out
}

pub fn emit_trace_csv(trace: &SimTrace, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, trace_csv(trace))
}

/// `step,t,H,coverage_fraction` including the initial state as step 0.
pub fn coverage_curve_csv(trace: &SimTrace) -> String {
    let mut out = String::from("step,t,H,coverage_fraction\n");
    for row in trace.all_rows() {
        let _ = write!(out, "{}", row.step);
        for v in [row.t, row.h, row.coverage_fraction] {
            num(&mut out, v);
        }
        out.push('\n');
    }
    out
}

pub fn emit_coverage_csv(trace: &SimTrace, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, coverage_curve_csv(trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ConvexRegion, Vec2};
    use crate::partition::AgentState;
    use crate::sim::{run, SimConfig};

    #[test]
    fn one_step_run_has_two_lines() {
        let agents = vec![
            AgentState::new(0, Vec2::new(0.2, 0.3), 0.05, 0.3),
            AgentState::new(1, Vec2::new(0.6, 0.5), 0.05, 0.3),
        ];
        let mut cfg = SimConfig::new(ConvexRegion::unit_square(), agents);
        cfg.convergence_eps = f64::INFINITY;
        let trace = run(&cfg).unwrap();
        let csv = trace_csv(&trace);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(
            lines[0],
            "step,t,x_0,y_0,ux_0,uy_0,x_1,y_1,ux_1,uy_1,H,coverage_fraction,neutral_area,min_pairwise_dist"
        );
        let fields: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(fields.len(), 14);
        assert_eq!(fields[0], "1");
        let x0: f64 = fields[2].parse().unwrap();
        assert_eq!(x0, trace.rows[0].positions[0].x);
        assert_eq!(coverage_curve_csv(&trace).lines().count(), 3);
    }
}
