mod common;

use std::path::PathBuf;

use cfp_core::algorithms::{AgentProblem, Algorithm, ProblemSpec, SolverConfig};
use cfp_core::convex::{ConvexInequality, ConvexSet};
use cfp_core::graph::Topology;
use cfp_core::harness::paper::{paper_fixed_graph, PAPER_INITIAL_STATES, PAPER_REFERENCE_POINT};
use cfp_core::harness::{feasibility_residuals, paper_scenario, run, trajectory_csv, Assertions, Expected, Scenario};
use cfp_core::{Error, Matrix};
use common::v;
use proptest::prelude::*;
use rand::Rng;

fn shipped(case: u8) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../scenarios/paper{case}.json"))
}

fn shortened(case: u8, horizon: f64) -> Scenario {
    let mut s = paper_scenario(case).unwrap();
    s.config.horizon = horizon;
    s
}

#[test]
fn shipped_scenarios_match_the_builtin_cases() {
    for case in 1..=3 {
        let loaded = Scenario::load(shipped(case)).unwrap();
        assert_eq!(loaded, paper_scenario(case).unwrap(), "case {case}");
    }
}

#[test]
fn runs_are_bit_identical() {
    for case in 1..=3 {
        let s = Scenario::load(shipped(case)).unwrap();
        let s = Scenario {
            config: SolverConfig {
                horizon: if case == 3 { 100.0 } else { 2.0 },
                ..s.config
            },
            ..s
        };
        let (a, ra) = run(&s).unwrap();
        let (b, rb) = run(&s).unwrap();
        assert_eq!(a, b, "case {case}");
        assert_eq!(trajectory_csv(&a, 2), trajectory_csv(&b, 2));
        assert_eq!(ra.final_point, rb.final_point);
    }
}

#[test]
fn recording_stride_does_not_change_shared_samples() {
    for (case, horizon) in [(1, 1.5), (2, 1.5), (3, 80.0)] {
        let mut dense = shortened(case, horizon);
        dense.config.record_every = 1;
        let mut sparse = dense.clone();
        sparse.config.record_every = 7;
        let (d, _) = run(&dense).unwrap();
        let (s, _) = run(&sparse).unwrap();
        let mut shared = 0;
        for (k, t) in s.times.iter().enumerate() {
            let j = d.times.iter().position(|u| u == t).unwrap_or_else(|| panic!("case {case}: t = {t} missing"));
            assert_eq!(s.states[k], d.states[j]);
            assert_eq!(s.metrics[k], d.metrics[j]);
            shared += 1;
        }
        assert!(shared > 3);
    }
}

#[test]
fn lyapunov_is_nonincreasing_at_the_end_of_converged_runs() {
    for case in 1..=3 {
        let (traj, report) = run(&paper_scenario(case).unwrap()).unwrap();
        assert!(report.converged, "case {case}");
        let values: Vec<f64> = traj.metrics.iter().map(|m| m.lyapunov.unwrap()).collect();
        let tail = &values[values.len() - values.len().div_ceil(10)..];
        for pair in tail.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-8, "case {case}: {} -> {}", pair[0], pair[1]);
        }
    }
}

fn consistent(report: &cfp_core::harness::RunReport) -> bool {
    !report.converged || report.final_metrics.is_some_and(|m| m.within(report.tolerance))
}

#[test]
fn paper_reports_are_consistent() {
    for case in 1..=3 {
        let (traj, report) = run(&paper_scenario(case).unwrap()).unwrap();
        assert!(consistent(&report));
        assert_eq!(traj.times.len(), traj.metrics.len());
        assert_eq!(report.final_metrics, traj.metrics.last().copied());
        assert!(report.max_rate_excess.is_none() == (case == 3));
        assert!(report.final_correction_norm <= 1e-6, "case {case}: {}", report.final_correction_norm);
    }
}

fn random_scenario(seed: u64) -> Scenario {
    let mut r = common::rng(seed);
    let n = r.random_range(2..=4);
    let m = r.random_range(1..=3);
    let x0 = common::uniform_vector(&mut r, m, -1.0, 1.0);
    let problem = common::problem_through(&mut r, n, &x0);
    let graph = common::strongly_connected(&mut r, n, 0.3);
    let discrete = r.random_bool(0.5);
    let h = 0.5 * cfp_core::graph::step_size_bound(&graph).unwrap();
    Scenario {
        name: None,
        problem,
        topology: Topology::Fixed { graph },
        algorithm: if discrete { Algorithm::DistributedDiscrete } else { Algorithm::DistributedContinuous },
        config: SolverConfig {
            tau: 2.0,
            h,
            dt: 1e-3,
            horizon: if discrete { 400.0 } else { 3.0 },
            record_every: if discrete { 1 } else { 10 },
            dwell: 20,
            tolerances: cfp_core::config::Tolerances {
                convergence: 1e-4,
                ..Default::default()
            },
            ..Default::default()
        },
        initial_states: common::random_states(&mut r, n, m, 3.0),
        assertions: Assertions {
            lyapunov: true,
            ..Default::default()
        },
        expected: Expected {
            reference_point: Some(x0.as_slice().to_vec()),
        },
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_runs_are_consistent_and_satisfy_their_assertions(seed in any::<u64>()) {
        let s = random_scenario(seed);
        let (traj, report) = run(&s).unwrap();
        prop_assert!(consistent(&report));
        prop_assert!(report.violations.is_empty());
        prop_assert!(traj.metrics.iter().all(|m| m.consensus_error >= 0.0));
        prop_assert_eq!(traj.times.len(), traj.states.len());
    }
}

#[test]
fn linear_block_run_reaches_a_feasible_consensus() {
    let rows = |r: &[[f64; 2]]| Matrix::from_fn(r.len(), 2, |i, j| r[i][j]);
    let c = [2.0, -3.0];
    let d = [2.0, 3.0];
    let q = [8.0, -3.0];
    let block = |a: &[[f64; 2]], b: &[f64]| ConvexInequality::linear_block(rows(a), v(b)).unwrap();
    let boxed = |lo: [f64; 2], hi: [f64; 2]| ConvexSet::boxed(v(&lo), v(&hi)).unwrap();
    let problem = ProblemSpec::new(
        2,
        vec![
            AgentProblem::new(block(&[c], &[2.0]), boxed([2.0, 0.0], [4.0, 2.0])),
            AgentProblem::new(block(&[d], &[11.0]), boxed([2.5, 1.0], [4.5, 3.0])),
            AgentProblem::new(block(&[q], &[28.0]), ConvexSet::WholeSpace),
            AgentProblem::new(block(&[c, d], &[2.0, 11.0]), ConvexSet::WholeSpace),
            AgentProblem::new(block(&[q, c], &[28.0, 2.0]), boxed([2.0, 0.0], [4.0, 2.0])),
        ],
    )
    .unwrap();
    let s = Scenario {
        name: Some("linear blocks".into()),
        problem,
        topology: Topology::Fixed {
            graph: paper_fixed_graph(),
        },
        algorithm: Algorithm::LinearCfp,
        config: SolverConfig {
            tau: 20.0,
            horizon: 30.0,
            ..Default::default()
        },
        initial_states: PAPER_INITIAL_STATES.iter().map(|x| v(x)).collect(),
        assertions: Assertions {
            lyapunov: true,
            ..Default::default()
        },
        expected: Expected {
            reference_point: Some(PAPER_REFERENCE_POINT.to_vec()),
        },
    };
    let (_, report) = run(&s).unwrap();
    assert!(report.converged, "{report:?}");
    assert!(report.violations.is_empty());
    let r = feasibility_residuals(&s.problem, &v(&report.final_point)).unwrap();
    assert!(r.max() <= 1e-6);
}

#[test]
fn linear_cfp_scenarios_need_linear_blocks() {
    let mut s = paper_scenario(1).unwrap();
    s.algorithm = Algorithm::LinearCfp;
    assert!(matches!(run(&s), Err(Error::WrongInequalityKind { .. })));
}

#[test]
fn malformed_files_report_the_field_path() {
    let text = std::fs::read_to_string(shipped(1)).unwrap().replace("\"tau\": 20.0", "\"tau\": \"fast\"");
    match Scenario::from_json_str(&text) {
        Err(Error::Parse { path, .. }) => assert_eq!(path, "config.tau"),
        other => panic!("{other:?}"),
    }
}
