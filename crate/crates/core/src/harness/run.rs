use std::time::Instant;

use serde::Serialize;

use super::metrics::{consensus_error, feasibility_residuals, mean_point, Metrics};
use super::scenario::Scenario;
use crate::algorithms::lyapunov::{
    centralized_discrete_check, continuous_check, distributed_discrete_check, lyapunov_weights,
    weighted_distance_sq,
};
use crate::algorithms::{
    centralized_continuous_step, centralized_discrete_step, distributed_continuous_step,
    linear_cfp_step, Algorithm, DiscreteNetwork,
};
use crate::graph::{Digraph, Topology};
use crate::{Error, Result, Vector};

/// Steps shorter than this (relative to `dt`) are skipped when aligning
/// with segment boundaries.
const MIN_STEP_FRACTION: f64 = 1e-9;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<Vector>>,
    pub metrics: Vec<Metrics>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn push(&mut self, t: f64, states: &[Vector], metrics: Metrics) {
        self.times.push(t);
        self.states.push(states.to_vec());
        self.metrics.push(metrics);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub check: String,
    pub step: usize,
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub name: Option<String>,
    pub algorithm: Algorithm,
    /// Metrics stayed within tolerance for `dwell` consecutive recorded points.
    pub converged: bool,
    pub final_point: Vec<f64>,
    pub final_metrics: Option<Metrics>,
    pub steps: usize,
    pub simulated_time: f64,
    pub wall_time_s: f64,
    pub tolerance: f64,
    /// `max_i |x_i - P_i(x_i) + grad g_i^+(x_i)|` at the final state.
    pub final_correction_norm: f64,
    /// Largest `dV/dt - rate` seen on a continuous run with Lyapunov checks.
    pub max_rate_excess: Option<f64>,
    pub violations: Vec<Violation>,
}

/// Runs a scenario to its horizon or until convergence.
pub fn run(scenario: &Scenario) -> Result<(Trajectory, RunReport)> {
    scenario.validate()?;
    let started = Instant::now();
    let mut runner = Runner::new(scenario)?;
    runner.execute()?;
    let final_correction_norm = runner.correction_norm()?;
    let Runner {
        traj,
        states,
        steps,
        t,
        converged,
        violations,
        max_rate_excess,
        ..
    } = runner;
    let report = RunReport {
        name: scenario.name.clone(),
        algorithm: scenario.algorithm,
        converged,
        final_point: mean_point(&states).as_slice().to_vec(),
        final_metrics: traj.metrics.last().copied(),
        steps,
        simulated_time: t,
        wall_time_s: started.elapsed().as_secs_f64(),
        tolerance: scenario.config.tolerances.convergence,
        final_correction_norm,
        max_rate_excess,
        violations,
    };
    Ok((traj, report))
}

struct Runner<'a> {
    s: &'a Scenario,
    weights: Option<Vector>,
    reference: Option<Vector>,
    states: Vec<Vector>,
    traj: Trajectory,
    steps: usize,
    t: f64,
    dwell_count: usize,
    converged: bool,
    violations: Vec<Violation>,
    max_rate_excess: Option<f64>,
}

impl<'a> Runner<'a> {
    fn new(s: &'a Scenario) -> Result<Self> {
        let reference = s.reference_point();
        let weights = match lyapunov_weights(&s.topology, s.config.tolerances.balance) {
            Ok(w) => Some(w),
            Err(_) if !s.assertions.lyapunov => None,
            Err(e) => {
                return Err(Error::InvalidScenario(format!(
                    "lyapunov assertions need strongly connected or balanced graphs: {e}"
                )))
            }
        };
        Ok(Self {
            s,
            weights,
            reference,
            states: s.initial_states.clone(),
            traj: Trajectory::default(),
            steps: 0,
            t: 0.0,
            dwell_count: 0,
            converged: false,
            violations: Vec::new(),
            max_rate_excess: None,
        })
    }

    fn execute(&mut self) -> Result<()> {
        let cfg = &self.s.config;
        if cfg.horizon <= 0.0 {
            return Ok(());
        }
        self.record()?;
        match (&self.s.topology, self.s.algorithm) {
            (Topology::Fixed { graph }, Algorithm::DistributedDiscrete) => {
                let network = DiscreteNetwork::new(graph, cfg)?;
                self.discrete(|r, k| r.distributed_discrete(&network, k))
            }
            (_, Algorithm::CentralizedDiscrete) => self.discrete(|r, k| r.centralized_discrete(k)),
            (Topology::Fixed { graph }, _) => {
                let n_steps = (cfg.horizon / cfg.dt * (1.0 - 1e-12)).ceil() as usize;
                for k in 0..n_steps {
                    let t = k as f64 * cfg.dt;
                    let dt = cfg.dt.min(cfg.horizon - t);
                    self.continuous(graph, dt)?;
                    self.t = if k + 1 == n_steps { cfg.horizon } else { (k + 1) as f64 * cfg.dt };
                    if self.after_step(k + 1 == n_steps)? {
                        break;
                    }
                }
                Ok(())
            }
            (Topology::Switching(schedule), _) => {
                // steps never straddle a switch
                let segments = schedule.segments();
                let mut seg = 0;
                let mut seg_start = 0.0;
                let min_step = cfg.dt * MIN_STEP_FRACTION;
                'outer: loop {
                    let seg_end = seg_start + segments[seg].duration;
                    let graph = schedule.segment_graph(seg);
                    let mut j = 0usize;
                    loop {
                        let t = seg_start + j as f64 * cfg.dt;
                        let end = seg_end.min(cfg.horizon);
                        if end - t <= min_step {
                            break;
                        }
                        let dt = cfg.dt.min(end - t);
                        self.continuous(graph, dt)?;
                        j += 1;
                        self.t = if dt < cfg.dt { end } else { t + dt };
                        let last = cfg.horizon - self.t <= min_step;
                        if self.after_step(last)? || last {
                            break 'outer;
                        }
                    }
                    seg_start = seg_end;
                    seg = (seg + 1) % segments.len();
                }
                Ok(())
            }
        }
    }

    fn discrete(&mut self, mut step: impl FnMut(&mut Self, usize) -> Result<()>) -> Result<()> {
        let n_steps = self.s.config.horizon.floor() as usize;
        for k in 0..n_steps {
            step(self, k)?;
            self.t = (k + 1) as f64;
            if self.after_step(k + 1 == n_steps)? {
                break;
            }
        }
        Ok(())
    }

    fn distributed_discrete(&mut self, network: &DiscreteNetwork, k: usize) -> Result<()> {
        let (s, cfg) = (self.s, &self.s.config);
        self.check_subgradients()?;
        let next = network.step(&self.states, k, &s.problem, cfg)?;
        if let (true, Some(w), Some(x0)) = (s.assertions.lyapunov, &self.weights, &self.reference) {
            let c = distributed_discrete_check(network, &self.states, &next, k, &s.problem, cfg, w, x0)?;
            if !c.holds(cfg.tolerances.lyapunov) {
                self.violation("weighted-discrete-lyapunov", c.delta(), c.bound)?;
            }
        }
        self.states = next;
        Ok(())
    }

    fn centralized_discrete(&mut self, k: usize) -> Result<()> {
        let (s, cfg) = (self.s, &self.s.config);
        self.check_subgradients()?;
        let agent = s.problem.agent(0);
        let next = centralized_discrete_step(&self.states[0], k, agent, cfg)?;
        if let (true, Some(x0)) = (s.assertions.lyapunov, &self.reference) {
            let c = centralized_discrete_check(&self.states[0], &next, k, agent, cfg, x0)?;
            if !c.holds(cfg.tolerances.lyapunov) {
                self.violation("centralized-discrete-lyapunov", c.delta(), c.bound)?;
            }
        }
        self.states = vec![next];
        Ok(())
    }

    fn continuous(&mut self, graph: &Digraph, dt: f64) -> Result<()> {
        let (s, cfg) = (self.s, &self.s.config);
        self.check_subgradients()?;
        let next = match s.algorithm {
            Algorithm::CentralizedContinuous => {
                vec![centralized_continuous_step(&self.states[0], self.t, dt, s.problem.agent(0), cfg)?]
            }
            Algorithm::DistributedContinuous => distributed_continuous_step(&self.states, graph, dt, &s.problem, cfg)?,
            Algorithm::LinearCfp => linear_cfp_step(&self.states, graph, dt, &s.problem, cfg)?,
            other => unreachable!("{} is discrete", other.name()),
        };
        if let (true, Some(w), Some(x0)) = (s.assertions.lyapunov, &self.weights, &self.reference) {
            let c = continuous_check(s.algorithm, &self.states, &next, self.t, dt, &s.problem, cfg, w, x0)?;
            let excess = c.rate_excess();
            self.max_rate_excess = Some(self.max_rate_excess.map_or(excess, |m| m.max(excess)));
            if !c.check.holds(cfg.tolerances.lyapunov) {
                self.violation("continuous-lyapunov", c.check.delta(), c.check.bound)?;
            }
        }
        self.states = next;
        Ok(())
    }

    fn check_subgradients(&mut self) -> Result<()> {
        if !self.s.assertions.subgradient_bound {
            return Ok(());
        }
        for i in 0..self.states.len() {
            if let Some(k) = self.s.problem.bound_for(i) {
                let norm = self.s.problem.agent(i).inequality.subgradient_plus(&self.states[i])?.norm();
                if norm > k * (1.0 + 1e-12) {
                    self.violation("subgradient-bound", norm, k)?;
                }
            }
        }
        Ok(())
    }

    fn violation(&mut self, check: &str, lhs: f64, rhs: f64) -> Result<()> {
        if self.s.assertions.fail_fast {
            return Err(Error::AssertionFailure {
                check: check.into(),
                step: self.steps,
                lhs,
                rhs,
            });
        }
        self.violations.push(Violation {
            check: check.into(),
            step: self.steps,
            t: self.t,
            lhs,
            rhs,
        });
        Ok(())
    }

    /// Bookkeeping after a completed step; returns `true` to stop early.
    fn after_step(&mut self, last: bool) -> Result<bool> {
        self.steps += 1;
        if self.steps.is_multiple_of(self.s.config.record_every) || last {
            self.record()?;
        }
        Ok(self.converged)
    }

    fn record(&mut self) -> Result<()> {
        let metrics = self.metrics()?;
        if metrics.within(self.s.config.tolerances.convergence) {
            self.dwell_count += 1;
        } else {
            self.dwell_count = 0;
        }
        self.converged = self.dwell_count >= self.s.config.dwell;
        self.traj.push(self.t, &self.states, metrics);
        Ok(())
    }

    fn metrics(&self) -> Result<Metrics> {
        let r = feasibility_residuals(&self.s.problem, &mean_point(&self.states))?;
        let lyapunov = match (&self.weights, &self.reference) {
            (Some(w), Some(x0)) => {
                let v = weighted_distance_sq(&self.states, x0, w);
                Some(if self.s.algorithm.is_continuous() { 0.5 * v } else { v })
            }
            _ => None,
        };
        Ok(Metrics {
            consensus_error: consensus_error(&self.states),
            max_set_residual: r.max_set_residual,
            max_inequality_residual: r.max_inequality_residual,
            lyapunov,
        })
    }

    fn correction_norm(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (x, agent) in self.states.iter().zip(self.s.problem.agents()) {
            let phi = x - agent.set.project(x)? + agent.inequality.subgradient_plus(x)?;
            worst = worst.max(phi.norm());
        }
        Ok(worst)
    }
}
