use std::path::Path;

use serde::{Deserialize, Serialize};

use super::metrics::feasibility_residuals;
use crate::algorithms::{AgentProblem, Algorithm, ProblemSpec, SolverConfig};
use crate::convex::{ConvexInequality, ConvexSet};
use crate::graph::{Digraph, Topology};
use crate::{Error, Result, Vector};

/// Reference points farther than this from the feasible set are rejected.
const REFERENCE_FEASIBILITY_TOL: f64 = 1e-9;

/// Runtime property checks evaluated on every step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Assertions {
    /// Per-step Lyapunov inequality; needs `expected.reference_point`.
    pub lyapunov: bool,
    /// `|grad g_i^+(x_i)| <= K` for agents with a declared bound.
    pub subgradient_bound: bool,
    /// Abort on the first violation instead of collecting them.
    pub fail_fast: bool,
}

impl Default for Assertions {
    fn default() -> Self {
        Self {
            lyapunov: false,
            subgradient_bound: true,
            fail_fast: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Expected {
    /// A known feasible point; anchors the Lyapunov function.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_point: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScenarioRecord", into = "ScenarioRecord")]
pub struct Scenario {
    pub name: Option<String>,
    pub problem: ProblemSpec,
    pub topology: Topology,
    pub algorithm: Algorithm,
    pub config: SolverConfig,
    pub initial_states: Vec<Vector>,
    pub assertions: Assertions,
    pub expected: Expected,
}

impl Scenario {
    /// Checks that problem, topology, initial states and algorithm agree.
    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidScenario(msg));
        let n = self.problem.n();
        let m = self.problem.dim();
        if self.topology.n() != n {
            return invalid(format!("topology has {} nodes but the problem has {n} agents", self.topology.n()));
        }
        if self.initial_states.len() != n {
            return invalid(format!(
                "{} initial states for {n} agents",
                self.initial_states.len()
            ));
        }
        if let Some(i) = self.initial_states.iter().position(|x| x.len() != m) {
            return invalid(format!("initial state {i} has dimension {}, expected {m}", self.initial_states[i].len()));
        }
        if self.initial_states.iter().any(|x| x.iter().any(|v| !v.is_finite())) {
            return invalid("initial states must be finite".into());
        }
        self.config.validate()?;
        match self.algorithm {
            Algorithm::CentralizedContinuous | Algorithm::CentralizedDiscrete if n != 1 => {
                return invalid(format!("{} needs exactly one agent, got {n}", self.algorithm.name()));
            }
            Algorithm::DistributedDiscrete if !matches!(self.topology, Topology::Fixed { .. }) => {
                return invalid("distributed-discrete needs a fixed topology".into());
            }
            Algorithm::LinearCfp => {
                if let Some(i) = self
                    .problem
                    .agents()
                    .iter()
                    .position(|a| !matches!(a.inequality, ConvexInequality::LinearBlock(_)))
                {
                    return Err(Error::WrongInequalityKind { agent: i });
                }
            }
            _ => {}
        }
        if self.algorithm.is_continuous() {
            if self.config.horizon / self.config.dt > 1e9 {
                return invalid("horizon / dt exceeds 1e9 steps".into());
            }
        } else if self.config.horizon > 1e9 {
            return invalid("horizon exceeds 1e9 iterations".into());
        }
        if let Some(x0) = self.reference_point() {
            if x0.len() != m {
                return invalid(format!("reference point has dimension {}, expected {m}", x0.len()));
            }
            let r = feasibility_residuals(&self.problem, &x0)?;
            if r.max() > REFERENCE_FEASIBILITY_TOL {
                return invalid(format!(
                    "reference point is not feasible (set residual {:e}, inequality residual {:e})",
                    r.max_set_residual, r.max_inequality_residual
                ));
            }
        } else if self.assertions.lyapunov {
            return invalid("lyapunov assertions need expected.reference_point".into());
        }
        Ok(())
    }

    pub fn reference_point(&self) -> Option<Vector> {
        self.expected
            .reference_point
            .as_ref()
            .map(|p| Vector::from_row_slice(p))
    }

    /// Parses and validates a JSON scenario. Errors name the offending
    /// field path and source position.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    set: Option<ConvexSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    inequality: Option<ConvexInequality>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    subgradient_bound: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemRecord {
    dim: usize,
    agents: Vec<AgentRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    subgradient_bound: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    problem: ProblemRecord,
    /// Optional for single-agent runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    topology: Option<Topology>,
    algorithm: Algorithm,
    #[serde(default)]
    config: SolverConfig,
    initial_states: Vec<Vec<f64>>,
    #[serde(default)]
    assertions: Assertions,
    #[serde(default)]
    expected: Expected,
}

impl TryFrom<ScenarioRecord> for Scenario {
    type Error = Error;

    fn try_from(r: ScenarioRecord) -> Result<Self> {
        let dim = r.problem.dim;
        let agents = r
            .problem
            .agents
            .into_iter()
            .enumerate()
            .map(|(i, a)| {
                let (inequality, set) = match (a.inequality, a.set) {
                    (None, None) => {
                        return Err(Error::InvalidScenario(format!(
                            "agent {i} declares neither a set nor an inequality"
                        )))
                    }
                    (g, s) => (
                        g.unwrap_or_else(|| ConvexInequality::trivial(dim)),
                        s.unwrap_or(ConvexSet::WholeSpace),
                    ),
                };
                Ok(AgentProblem {
                    inequality,
                    set,
                    subgradient_bound: a.subgradient_bound,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let problem = ProblemSpec::new(dim, agents)?.with_subgradient_bound(r.problem.subgradient_bound)?;
        let topology = match r.topology {
            Some(t) => t,
            None if problem.n() == 1 => Topology::Fixed {
                graph: Digraph::empty(1)?,
            },
            None => {
                return Err(Error::InvalidScenario(
                    "topology is required with more than one agent".into(),
                ))
            }
        };
        let scenario = Scenario {
            name: r.name,
            problem,
            topology,
            algorithm: r.algorithm,
            config: r.config,
            initial_states: r.initial_states.into_iter().map(Vector::from_vec).collect(),
            assertions: r.assertions,
            expected: r.expected,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

impl From<Scenario> for ScenarioRecord {
    fn from(s: Scenario) -> Self {
        let dim = s.problem.dim();
        let trivial = ConvexInequality::trivial(dim);
        let agents = s
            .problem
            .agents()
            .iter()
            .map(|a| AgentRecord {
                set: (a.set != ConvexSet::WholeSpace).then(|| a.set.clone()),
                inequality: (a.inequality != trivial).then(|| a.inequality.clone()),
                subgradient_bound: a.subgradient_bound,
            })
            .collect();
        ScenarioRecord {
            name: s.name,
            problem: ProblemRecord {
                dim,
                agents,
                subgradient_bound: s.problem.subgradient_bound(),
            },
            topology: Some(s.topology),
            algorithm: s.algorithm,
            config: s.config,
            initial_states: s.initial_states.iter().map(|x| x.as_slice().to_vec()).collect(),
            assertions: s.assertions,
            expected: s.expected,
        }
    }
}
