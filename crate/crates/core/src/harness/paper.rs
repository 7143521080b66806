//! The five-agent planar feasibility problem in its three built-in
//! configurations.
//!
//! Agents 0 and 1 hold the boxes `[2, 4] x [0, 2]` and `[2.5, 4.5] x [1, 3]`;
//! agents 2 to 4 hold `2 z1 - 3 z2 <= 2`, `2 z1 + 3 z2 <= 11` and
//! `8 z1 - 3 z2 <= 28`. The feasible region is a quadrilateral inside
//! `[2.5, 4] x [1, 2]`.

use super::scenario::{Assertions, Expected, Scenario};
use crate::algorithms::{AgentProblem, Algorithm, ProblemSpec, SolverConfig, StepSchedule};
use crate::convex::{ConvexInequality, ConvexSet};
use crate::graph::{DeltaGraphParams, Digraph, Edge, Segment, SwitchingSchedule, Topology};
use crate::{Error, Result, Vector};

/// A point strictly inside the feasible region.
pub const PAPER_REFERENCE_POINT: [f64; 2] = [2.58, 1.23];

pub const PAPER_INITIAL_STATES: [[f64; 2]; 5] = [[0.0, 5.0], [3.0, -2.0], [2.0, 3.0], [5.0, 1.0], [2.0, -3.0]];

/// Dwell time of each graph in the switching configuration.
pub const SWITCH_PERIOD: f64 = 0.2;

pub fn paper_problem() -> ProblemSpec {
    let v = Vector::from_row_slice;
    let boxed = |lo: [f64; 2], hi: [f64; 2]| ConvexSet::boxed(v(&lo), v(&hi)).expect("valid box");
    let linear = |a: [f64; 2], b: f64| ConvexInequality::linear(v(&a), b).expect("valid inequality");
    ProblemSpec::new(
        2,
        vec![
            AgentProblem::set_only(boxed([2.0, 0.0], [4.0, 2.0]), 2),
            AgentProblem::set_only(boxed([2.5, 1.0], [4.5, 3.0]), 2),
            AgentProblem::inequality_only(linear([2.0, -3.0], 2.0)),
            AgentProblem::inequality_only(linear([2.0, 3.0], 11.0)),
            AgentProblem::inequality_only(linear([8.0, -3.0], 28.0)),
        ],
    )
    .expect("consistent problem")
}

/// Unit-weight digraph in which agent `i` hears agents `i - 1` and `i - 2`
/// (mod 5). Strongly connected, balanced, every nonzero Laplacian eigenvalue
/// has real part 2.5.
pub fn paper_fixed_graph() -> Digraph {
    let edges = (0..5).flat_map(|i| {
        [1, 2].map(|back| Edge {
            from: (i + 5 - back) % 5,
            to: i,
            weight: 1.0,
        })
    });
    Digraph::from_edges(5, edges).expect("valid graph")
}

fn undirected(pairs: &[(usize, usize)]) -> Digraph {
    let edges = pairs.iter().flat_map(|&(a, b)| {
        [
            Edge { from: a, to: b, weight: 1.0 },
            Edge { from: b, to: a, weight: 1.0 },
        ]
    });
    Digraph::from_edges(5, edges).expect("valid graph")
}

/// Two bidirectional graphs, `{0-1, 1-2}` and `{2-3, 3-4, 4-0}`, alternating
/// every [`SWITCH_PERIOD`]. Neither is connected on its own; over any window
/// of two periods every edge is active for at least one period.
pub fn paper_switching_schedule() -> SwitchingSchedule {
    SwitchingSchedule::new(
        vec![undirected(&[(0, 1), (1, 2)]), undirected(&[(2, 3), (3, 4), (4, 0)])],
        vec![
            Segment { graph: 0, duration: SWITCH_PERIOD },
            Segment { graph: 1, duration: SWITCH_PERIOD },
        ],
    )
    .expect("valid schedule")
    .with_connectivity(DeltaGraphParams::new(2.0 * SWITCH_PERIOD, SWITCH_PERIOD).expect("valid params"))
}

/// Built-in scenario for case 1 (fixed graph, continuous), 2 (switching
/// graphs, continuous) or 3 (fixed graph, discrete).
pub fn paper_scenario(case: u8) -> Result<Scenario> {
    let (topology, algorithm, config) = match case {
        1 => (
            Topology::Fixed {
                graph: paper_fixed_graph(),
            },
            Algorithm::DistributedContinuous,
            SolverConfig {
                tau: 20.0,
                dt: 1e-3,
                horizon: 10.0,
                ..Default::default()
            },
        ),
        2 => (
            Topology::Switching(paper_switching_schedule()),
            Algorithm::DistributedContinuous,
            SolverConfig {
                tau: 35.0,
                dt: 1e-3,
                horizon: 40.0,
                ..Default::default()
            },
        ),
        3 => (
            Topology::Fixed {
                graph: paper_fixed_graph(),
            },
            Algorithm::DistributedDiscrete,
            SolverConfig {
                h: 0.25,
                horizon: 5000.0,
                alpha: StepSchedule::Harmonic { c0: 1.0, c1: 0.02 },
                beta: StepSchedule::Harmonic { c0: 1.0, c1: 0.02 },
                record_every: 1,
                ..Default::default()
            },
        ),
        other => return Err(Error::InvalidParams(format!("no built-in case {other}; expected 1, 2 or 3"))),
    };
    let scenario = Scenario {
        name: Some(format!("paper-case-{case}")),
        problem: paper_problem(),
        topology,
        algorithm,
        config,
        initial_states: PAPER_INITIAL_STATES.iter().map(|x| Vector::from_row_slice(x)).collect(),
        assertions: Assertions {
            lyapunov: true,
            ..Default::default()
        },
        expected: Expected {
            reference_point: Some(PAPER_REFERENCE_POINT.to_vec()),
        },
    };
    scenario.validate()?;
    Ok(scenario)
}
