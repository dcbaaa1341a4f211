use std::path::{Path, PathBuf};

use gv_coverage::coverage::Density;
use gv_coverage::io::{parse_scenario, parse_scenario_str, serialize_scenario, AgentSpec, PhiSpec};
use gv_coverage::sim::EventKind;

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

#[test]
fn case_study_one_matches_the_reference_setup() {
    let s = parse_scenario(&shipped("case_study_1.toml")).unwrap();
    assert_eq!(s.config.agents.len(), 10);
    assert_eq!((s.r_u, s.r_s), (0.05, 0.3));
    assert_eq!(s.phi, PhiSpec::Uniform(1.0));
    assert_eq!(s.config.phi, Density::Uniform(1.0));
    assert!((s.config.region.area() - 4.0).abs() < 0.05);
    assert!(s.config.events.is_empty());
    let gs = std::f64::consts::PI * (s.r_s - s.r_u).powi(2);
    assert!(s.config.region.area() > 10.0 * gs);
}

#[test]
fn case_study_two_immobilizes_one_agent() {
    let one = parse_scenario(&shipped("case_study_1.toml")).unwrap();
    let two = parse_scenario(&shipped("case_study_2.toml")).unwrap();
    assert_eq!(one.config.agents, two.config.agents);
    assert_eq!(one.config.region, two.config.region);
    assert_eq!(two.config.events.len(), 1);
    let EventKind::Immobilize(id) = two.config.events[0].kind;
    assert!(id < 10);
}

#[test]
fn randomized_scenario_spawns_with_margin() {
    let s = parse_scenario(&shipped("randomized.toml")).unwrap();
    let AgentSpec::Spawn {
        count,
        min_separation,
        ..
    } = s.agents
    else {
        panic!("expected spawned agents");
    };
    assert_eq!(s.config.agents.len(), count);
    assert!((min_separation - 0.12).abs() < 1e-12);
    assert!(gv_coverage::sim::min_pairwise_distance(&s.config.agents) >= min_separation);
}

#[test]
fn shipped_scenarios_round_trip() {
    for name in ["case_study_1.toml", "case_study_2.toml", "randomized.toml"] {
        let path = shipped(name);
        let s = parse_scenario(&path).unwrap();
        let again = parse_scenario_str(&serialize_scenario(&s), path.parent().unwrap()).unwrap();
        assert_eq!(s, again, "{name}");
    }
}
