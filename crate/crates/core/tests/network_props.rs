mod common;

use gv_coverage::control::{ControlLaw, NetworkSnapshot};
use gv_coverage::coverage::{max_objective, objective, sampled_objective, Density};
use gv_coverage::geometry::{ConvexRegion, Vec2};
use gv_coverage::partition::{gv_diagram, gv_diagram_with, AgentState, NeighborStrategy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn instance(seed: u64) -> (ConvexRegion, Vec<AgentState>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let region = common::random_region(&mut rng);
    let n = rng.gen_range(2..=7);
    let agents = common::random_agents(&mut rng, &region, n, 0.05, 0.3, 0.11);
    (region, agents)
}

#[test]
fn delaunay_candidates_give_the_same_cells() {
    for seed in 0..10 {
        let (region, agents) = instance(seed);
        let all = gv_diagram(&agents, &region).unwrap();
        let fast = gv_diagram_with(&agents, &region, NeighborStrategy::Delaunay).unwrap();
        for (a, b) in all.cell_areas().iter().zip(fast.cell_areas()) {
            assert!((a - b).abs() < 1e-12, "seed {seed}: {a} vs {b}");
        }
        assert_eq!(all.gd_neighbors, fast.gd_neighbors);
    }
}

#[test]
fn objective_is_bounded_and_matches_sampling() {
    let phi = Density::Uniform(1.0);
    for seed in 20..26 {
        let (region, agents) = instance(seed);
        let report = objective(&agents, &region, &phi).unwrap();
        let cap = max_objective(&agents, &region, &phi);
        assert!(report.total_h <= cap * (1.0 + 1e-12));
        assert!((report.per_agent_h.iter().sum::<f64>() - report.total_h).abs() < 1e-12);
        let sampled = sampled_objective(&agents, &region, &phi, 1000).unwrap();
        assert!(
            (report.total_h - sampled).abs() <= 2e-3 * report.total_h,
            "seed {seed}"
        );
    }
}

#[test]
fn relabeling_permutes_the_controls() {
    let phi = Density::Uniform(1.0);
    for seed in 40..45 {
        let (region, agents) = instance(seed);
        let n = agents.len();
        let reversed: Vec<_> = agents
            .iter()
            .rev()
            .enumerate()
            .map(|(id, a)| AgentState { id, ..*a })
            .collect();
        for law in [ControlLaw::Full, ControlLaw::Suboptimal] {
            let u = NetworkSnapshot::new(&agents, &region)
                .unwrap()
                .controls(law, &phi, &vec![1.0; n])
                .unwrap();
            let v = NetworkSnapshot::new(&reversed, &region)
                .unwrap()
                .controls(law, &phi, &vec![1.0; n])
                .unwrap();
            for i in 0..n {
                assert!(
                    (u[i].u - v[n - 1 - i].u).norm() < 1e-9,
                    "seed {seed} {law} agent {i}"
                );
            }
        }
    }
}

#[test]
fn rotating_the_world_rotates_the_controls() {
    let phi = Density::Uniform(1.0);
    let (c, s) = (0.6f64.cos(), 0.6f64.sin());
    let rot = |p: Vec2| Vec2::new(c * p.x - s * p.y, s * p.x + c * p.y);
    for seed in 60..65 {
        let (region, agents) = instance(seed);
        let turned_region = region.map(rot).unwrap();
        let turned: Vec<_> = agents
            .iter()
            .map(|a| AgentState {
                center: rot(a.center),
                ..*a
            })
            .collect();
        let n = agents.len();
        let u = NetworkSnapshot::new(&agents, &region)
            .unwrap()
            .controls(ControlLaw::Full, &phi, &vec![1.0; n])
            .unwrap();
        let v = NetworkSnapshot::new(&turned, &turned_region)
            .unwrap()
            .controls(ControlLaw::Full, &phi, &vec![1.0; n])
            .unwrap();
        for i in 0..n {
            assert!(
                (rot(u[i].u) - v[i].u).norm() < 1e-8,
                "seed {seed} agent {i}"
            );
        }
    }
}

#[test]
fn suboptimal_law_is_the_sensing_term_of_the_full_law() {
    let phi = Density::Uniform(1.0);
    for seed in 80..85 {
        let (region, agents) = instance(seed);
        let snapshot = NetworkSnapshot::new(&agents, &region).unwrap();
        for i in 0..agents.len() {
            let full = snapshot.control(i, ControlLaw::Full, &phi, 1.0).unwrap();
            let sub = snapshot
                .control(i, ControlLaw::Suboptimal, &phi, 1.0)
                .unwrap();
            assert!((full.sensing_arc_term - sub.u).norm() < 1e-12);
            let rebuilt = full
                .hyperbolic_terms
                .values()
                .fold(full.sensing_arc_term, |acc, v| acc + *v);
            assert!((rebuilt - full.u).norm() < 1e-12);
            for j in full.hyperbolic_terms.keys() {
                assert!(snapshot.coupled_neighbors(i).contains(j));
            }
        }
    }
}
