//! Per-step Lyapunov inequalities used as runtime assertions.
//!
//! Every check measures `V = sum_i w_i |x_i - x0|^2` (halved for the
//! continuous flows) against a feasible reference point `x0`, with `w` a
//! positive left null vector of the Laplacian.

use serde::Serialize;

use super::{check_agents, Algorithm, AgentProblem, DiscreteNetwork, ProblemSpec, SolverConfig};
use crate::convex::{ConvexInequality, PenaltyScale};
use crate::graph::{left_null_eigenvector, Topology};
use crate::{Error, Result, Vector};

/// `sum_i w_i |x_i - x0|^2`.
pub fn weighted_distance_sq(states: &[Vector], x0: &Vector, w: &Vector) -> f64 {
    states
        .iter()
        .zip(w.iter())
        .map(|(x, wi)| wi * (x - x0).norm_squared())
        .sum()
}

/// Weights for the Lyapunov function: the normalized left null vector of a
/// fixed strongly connected graph, or uniform weights when every graph of a
/// switching schedule is balanced.
pub fn lyapunov_weights(topology: &Topology, balance_tol: f64) -> Result<Vector> {
    let n = topology.n();
    match topology {
        Topology::Fixed { graph } => left_null_eigenvector(graph),
        Topology::Switching(s) => {
            if s.graphs().iter().all(|g| g.is_balanced(balance_tol)) {
                Ok(Vector::from_element(n, 1.0 / n as f64))
            } else {
                Err(Error::InvalidGraph(
                    "switching graphs must be balanced to share Lyapunov weights".into(),
                ))
            }
        }
    }
}

/// `V(after) - V(before) <= bound`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovCheck {
    pub before: f64,
    pub after: f64,
    pub bound: f64,
}

impl LyapunovCheck {
    pub fn delta(&self) -> f64 {
        self.after - self.before
    }

    /// How far the increment exceeds the bound (negative when it holds).
    pub fn excess(&self) -> f64 {
        self.delta() - self.bound
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.excess() <= tol
    }
}

/// Weighted bound of the distributed discrete iteration:
/// `dV <= -beta(k) sum w_i g_i^+(y_i) + sum w_i |grad_i|^2`, where
/// `y_i` are the mixed points and `grad_i = beta(k) grad g_i^+(y_i)`.
#[allow(clippy::too_many_arguments)]
pub fn distributed_discrete_check(
    network: &DiscreteNetwork,
    before: &[Vector],
    after: &[Vector],
    k: usize,
    problem: &ProblemSpec,
    cfg: &SolverConfig,
    w: &Vector,
    x0: &Vector,
) -> Result<LyapunovCheck> {
    check_agents(after, problem)?;
    let beta = cfg.beta.value_at(k as f64);
    let (mixed, corrections) = network.mix_and_correct(before, k, problem, cfg)?;
    let mut bound = 0.0;
    for i in 0..problem.n() {
        let g_plus = problem.agent(i).inequality.plus_value(&mixed[i])?;
        bound += w[i] * (corrections[i].norm_squared() - beta * g_plus);
    }
    Ok(LyapunovCheck {
        before: weighted_distance_sq(before, x0, w),
        after: weighted_distance_sq(after, x0, w),
        bound,
    })
}

/// Centralized discrete bound `dV <= beta(k)^2 |grad g^+(x)|^2`, with
/// `V = |x - x0|^2`.
pub fn centralized_discrete_check(
    before: &Vector,
    after: &Vector,
    k: usize,
    agent: &AgentProblem,
    cfg: &SolverConfig,
    x0: &Vector,
) -> Result<LyapunovCheck> {
    let beta = cfg.beta.value_at(k as f64);
    let sub = agent.inequality.subgradient_plus(before)?;
    Ok(LyapunovCheck {
        before: (before - x0).norm_squared(),
        after: (after - x0).norm_squared(),
        bound: beta * beta * sub.norm_squared(),
    })
}

/// One Euler step of a continuous flow, checked against the dissipation
/// rate of `V = 1/2 sum w_i |x_i - x0|^2`.
///
/// For a quadratic `V` an Euler step of length `dt` with drift `f` changes
/// `V` by exactly `dt <grad V, f> + dt^2/2 sum w_i |f_i|^2`, so the step
/// satisfies `dV <= dt * rate + euler_term` whenever the flow satisfies
/// `dV/dt <= rate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContinuousCheck {
    pub check: LyapunovCheck,
    pub dt: f64,
    /// Upper bound on `dV/dt` at the start of the step.
    pub rate: f64,
    /// `1/2 sum w_i |x_i(t + dt) - x_i(t)|^2`.
    pub euler_term: f64,
}

impl ContinuousCheck {
    /// `max(0, dV/dt - rate)`: the discretization excess, which is `O(dt)`.
    pub fn rate_excess(&self) -> f64 {
        (self.check.delta() / self.dt - self.rate).max(0.0)
    }
}

/// Dissipation rate bound at `states`:
///
/// - centralized: `-alpha(t) d(x)^2 - beta(t) g^+(x)`;
/// - distributed: `-tau sum w_i (d_i(x_i)^2 + g_i^+(x_i))`;
/// - linear blocks: `-tau sum w_i (d_i(x_i)^2 + psi_i(x_i))`.
pub fn dissipation_rate(
    algorithm: Algorithm,
    states: &[Vector],
    t: f64,
    problem: &ProblemSpec,
    cfg: &SolverConfig,
    w: &Vector,
) -> Result<f64> {
    check_agents(states, problem)?;
    let mut rate = 0.0;
    for (i, (x, agent)) in states.iter().zip(problem.agents()).enumerate() {
        let d = agent.set.distance(x)?;
        let term = match algorithm {
            Algorithm::CentralizedContinuous => {
                cfg.alpha.value_at(t) * d * d + cfg.beta.value_at(t) * agent.inequality.plus_value(x)?
            }
            Algorithm::DistributedContinuous => cfg.tau * (d * d + agent.inequality.plus_value(x)?),
            Algorithm::LinearCfp => {
                let ConvexInequality::LinearBlock(block) = &agent.inequality else {
                    return Err(Error::WrongInequalityKind { agent: i });
                };
                let (psi, _) = block.penalty(x, PenaltyScale::HalfGradient)?;
                cfg.tau * (d * d + psi)
            }
            other => {
                return Err(Error::InvalidParams(format!(
                    "{} is not a continuous flow",
                    other.name()
                )))
            }
        };
        rate -= w[i] * term;
    }
    Ok(rate)
}

#[allow(clippy::too_many_arguments)]
pub fn continuous_check(
    algorithm: Algorithm,
    before: &[Vector],
    after: &[Vector],
    t: f64,
    dt: f64,
    problem: &ProblemSpec,
    cfg: &SolverConfig,
    w: &Vector,
    x0: &Vector,
) -> Result<ContinuousCheck> {
    check_agents(after, problem)?;
    let rate = dissipation_rate(algorithm, before, t, problem, cfg, w)?;
    let euler_term = 0.5
        * before
            .iter()
            .zip(after)
            .zip(w.iter())
            .map(|((a, b), wi)| wi * (b - a).norm_squared())
            .sum::<f64>();
    Ok(ContinuousCheck {
        check: LyapunovCheck {
            before: 0.5 * weighted_distance_sq(before, x0, w),
            after: 0.5 * weighted_distance_sq(after, x0, w),
            bound: dt * rate + euler_term,
        },
        dt,
        rate,
        euler_term,
    })
}
