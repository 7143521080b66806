//! Centralized and distributed iterations for the feasibility problem.
//!
//! Continuous-time flows are integrated with explicit Euler; every step
//! function takes the step length explicitly so that callers can shorten a
//! step to land on a topology switch.

mod centralized;
mod distributed;
pub mod lyapunov;
mod step_size;

pub use centralized::{
    centralized_continuous_step, centralized_discrete_step, centralized_drift,
};
pub use distributed::{
    consensus_term, distributed_continuous_step, distributed_discrete_step, distributed_drift,
    linear_cfp_drift, linear_cfp_step, DiscreteNetwork,
};
pub use step_size::{validate_schedule, Role, ScheduleReport, StepSchedule, Theorem, Validity};

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::convex::{ConvexInequality, ConvexSet};
use crate::{Error, Result, Vector};

/// Which iteration a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    CentralizedContinuous,
    CentralizedDiscrete,
    DistributedContinuous,
    DistributedDiscrete,
    LinearCfp,
}

impl Algorithm {
    pub fn is_continuous(self) -> bool {
        !matches!(self, Algorithm::CentralizedDiscrete | Algorithm::DistributedDiscrete)
    }

    pub fn is_centralized(self) -> bool {
        matches!(self, Algorithm::CentralizedContinuous | Algorithm::CentralizedDiscrete)
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::CentralizedContinuous => "centralized-continuous",
            Algorithm::CentralizedDiscrete => "centralized-discrete",
            Algorithm::DistributedContinuous => "distributed-continuous",
            Algorithm::DistributedDiscrete => "distributed-discrete",
            Algorithm::LinearCfp => "linear-cfp",
        }
    }
}

/// One agent's private constraint pair `(g_i, X_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentProblem {
    pub inequality: ConvexInequality,
    pub set: ConvexSet,
    /// Declared bound `K` on `|subgradient of g_i^+|`, checked at runtime.
    pub subgradient_bound: Option<f64>,
}

impl AgentProblem {
    pub fn new(inequality: ConvexInequality, set: ConvexSet) -> Self {
        Self {
            inequality,
            set,
            subgradient_bound: None,
        }
    }

    /// An agent that only holds a set; its inequality is `g = -1`.
    pub fn set_only(set: ConvexSet, dim: usize) -> Self {
        Self::new(ConvexInequality::trivial(dim), set)
    }

    /// An agent that only holds an inequality; its set is the whole space.
    pub fn inequality_only(inequality: ConvexInequality) -> Self {
        Self::new(inequality, ConvexSet::WholeSpace)
    }

    /// `|x - P_X(x)|`.
    pub fn set_residual(&self, x: &Vector) -> Result<f64> {
        self.set.distance(x)
    }

    /// `g^+(x)`.
    pub fn inequality_residual(&self, x: &Vector) -> Result<f64> {
        self.inequality.plus_value(x)
    }
}

/// A feasibility problem split across agents.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    dim: usize,
    agents: Vec<AgentProblem>,
    subgradient_bound: Option<f64>,
}

impl ProblemSpec {
    pub fn new(dim: usize, agents: Vec<AgentProblem>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidScenario("state dimension must be positive".into()));
        }
        if agents.is_empty() {
            return Err(Error::InvalidScenario("problem has no agents".into()));
        }
        for agent in &agents {
            if agent.inequality.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: agent.inequality.dim(),
                });
            }
            if let Some(d) = agent.set.dim().filter(|&d| d != dim) {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: d,
                });
            }
            check_bound(agent.subgradient_bound)?;
        }
        Ok(Self {
            dim,
            agents,
            subgradient_bound: None,
        })
    }

    /// Global `K` applying to every agent without its own bound.
    pub fn with_subgradient_bound(mut self, k: Option<f64>) -> Result<Self> {
        check_bound(k)?;
        self.subgradient_bound = k;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }

    pub fn agents(&self) -> &[AgentProblem] {
        &self.agents
    }

    pub fn agent(&self, i: usize) -> &AgentProblem {
        &self.agents[i]
    }

    pub fn subgradient_bound(&self) -> Option<f64> {
        self.subgradient_bound
    }

    /// The bound that applies to agent `i`, if any.
    pub fn bound_for(&self, i: usize) -> Option<f64> {
        self.agents[i].subgradient_bound.or(self.subgradient_bound)
    }
}

fn check_bound(k: Option<f64>) -> Result<()> {
    match k {
        Some(k) if !(k.is_finite() && k >= 0.0) => Err(Error::InvalidParams(format!(
            "subgradient bound must be finite and >= 0, got {k}"
        ))),
        _ => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Coupling gain of the distributed continuous flows.
    pub tau: f64,
    /// Consensus gain of the distributed discrete iteration.
    pub h: f64,
    /// Euler step of the continuous flows.
    pub dt: f64,
    /// Simulated time (continuous) or iteration count (discrete).
    pub horizon: f64,
    pub alpha: StepSchedule,
    pub beta: StepSchedule,
    /// Keep every `record_every`-th step in the trajectory.
    pub record_every: usize,
    pub tolerances: Tolerances,
    /// Skip the `0 < h < bound` precondition.
    pub allow_unstable_gain: bool,
    /// Consecutive recorded points below tolerance required to stop early.
    pub dwell: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tau: 1.0,
            h: 0.1,
            dt: 1e-3,
            horizon: 10.0,
            alpha: StepSchedule::default(),
            beta: StepSchedule::default(),
            record_every: 10,
            tolerances: Tolerances::default(),
            allow_unstable_gain: false,
            dwell: 100,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        // tau = 0 is allowed: it switches the constraint terms off
        if !(self.tau.is_finite() && self.tau >= 0.0) {
            return bad(format!("tau must be finite and >= 0, got {}", self.tau));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !self.h.is_finite() {
            return bad(format!("h must be finite, got {}", self.h));
        }
        if !(self.horizon.is_finite() && self.horizon >= 0.0) {
            return bad(format!("horizon must be finite and >= 0, got {}", self.horizon));
        }
        if self.record_every == 0 {
            return bad("record_every must be at least 1".into());
        }
        if self.dwell == 0 {
            return bad("dwell must be at least 1".into());
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("balance", t.balance),
            ("spectral", t.spectral),
            ("convergence", t.convergence),
            ("lyapunov", t.lyapunov),
            ("psd", t.psd),
            ("divergence_bound", t.divergence_bound),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("tolerance `{name}` must be positive, got {v}"));
            }
        }
        self.alpha.validate()?;
        self.beta.validate()
    }
}

/// Fails on the first agent whose state is non-finite or outside the
/// divergence bound.
pub fn check_states(states: &[Vector], bound: f64) -> Result<()> {
    for (agent, x) in states.iter().enumerate() {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { agent });
        }
        let norm = x.norm();
        if norm > bound {
            return Err(Error::Diverged { agent, norm, bound });
        }
    }
    Ok(())
}

/// `alpha(t)` for the discrete iterations, which require it in `[0, 1]`.
pub(crate) fn discrete_alpha(cfg: &SolverConfig, t: f64) -> Result<f64> {
    let value = cfg.alpha.value_at(t);
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::ScheduleViolation { t, value });
    }
    Ok(value)
}

pub(crate) fn check_agents(states: &[Vector], problem: &ProblemSpec) -> Result<()> {
    if states.len() != problem.n() {
        return Err(Error::DimensionMismatch {
            expected: problem.n(),
            found: states.len(),
        });
    }
    if let Some(x) = states.iter().find(|x| x.len() != problem.dim()) {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            found: x.len(),
        });
    }
    Ok(())
}
