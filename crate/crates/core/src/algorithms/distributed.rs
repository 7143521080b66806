use super::{check_agents, check_states, discrete_alpha, ProblemSpec, SolverConfig};
use crate::convex::{ConvexInequality, PenaltyScale};
use crate::graph::{step_size_bound, Digraph};
use crate::{Error, Result, Vector};

/// `sum_j a_ij (x_j - x_i)`.
pub fn consensus_term(states: &[Vector], graph: &Digraph, i: usize) -> Vector {
    let mut acc = Vector::zeros(states[i].len());
    for (j, a) in graph.in_neighbors(i) {
        acc += (&states[j] - &states[i]) * a;
    }
    acc
}

fn check_graph(states: &[Vector], graph: &Digraph) -> Result<()> {
    if graph.n() != states.len() {
        return Err(Error::DimensionMismatch {
            expected: states.len(),
            found: graph.n(),
        });
    }
    Ok(())
}

/// Right-hand side of the distributed flow:
/// `sum_j a_ij (x_j - x_i) - tau ((x_i - P_i(x_i)) + grad g_i^+(x_i))`.
pub fn distributed_drift(
    states: &[Vector],
    graph: &Digraph,
    problem: &ProblemSpec,
    tau: f64,
) -> Result<Vec<Vector>> {
    check_agents(states, problem)?;
    check_graph(states, graph)?;
    states
        .iter()
        .zip(problem.agents())
        .enumerate()
        .map(|(i, (x, agent))| {
            let correction = x - agent.set.project(x)? + agent.inequality.subgradient_plus(x)?;
            Ok(consensus_term(states, graph, i) - correction * tau)
        })
        .collect()
}

/// Synchronous Euler step of length `dt` on the graph active during the step.
pub fn distributed_continuous_step(
    states: &[Vector],
    graph: &Digraph,
    dt: f64,
    problem: &ProblemSpec,
    cfg: &SolverConfig,
) -> Result<Vec<Vector>> {
    let drift = distributed_drift(states, graph, problem, cfg.tau)?;
    euler(states, drift, dt, cfg)
}

/// Right-hand side of the linear-inequality flow:
/// `sum_j a_ij (x_j - x_i) - tau (A_i^T (A_i x_i - b_i)^+ + x_i - P_i(x_i))`.
pub fn linear_cfp_drift(
    states: &[Vector],
    graph: &Digraph,
    problem: &ProblemSpec,
    tau: f64,
) -> Result<Vec<Vector>> {
    check_agents(states, problem)?;
    check_graph(states, graph)?;
    states
        .iter()
        .zip(problem.agents())
        .enumerate()
        .map(|(i, (x, agent))| {
            let ConvexInequality::LinearBlock(block) = &agent.inequality else {
                return Err(Error::WrongInequalityKind { agent: i });
            };
            let (_, direction) = block.penalty(x, PenaltyScale::HalfGradient)?;
            let correction = direction + x - agent.set.project(x)?;
            Ok(consensus_term(states, graph, i) - correction * tau)
        })
        .collect()
}

pub fn linear_cfp_step(
    states: &[Vector],
    graph: &Digraph,
    dt: f64,
    problem: &ProblemSpec,
    cfg: &SolverConfig,
) -> Result<Vec<Vector>> {
    let drift = linear_cfp_drift(states, graph, problem, cfg.tau)?;
    euler(states, drift, dt, cfg)
}

fn euler(states: &[Vector], drift: Vec<Vector>, dt: f64, cfg: &SolverConfig) -> Result<Vec<Vector>> {
    let next: Vec<Vector> = states.iter().zip(drift).map(|(x, f)| x + f * dt).collect();
    check_states(&next, cfg.tolerances.divergence_bound)?;
    Ok(next)
}

/// A fixed graph together with its discrete gain bound, validated once for a
/// whole discrete run.
#[derive(Debug, Clone)]
pub struct DiscreteNetwork<'a> {
    graph: &'a Digraph,
    gain_bound: f64,
}

impl<'a> DiscreteNetwork<'a> {
    /// Fails with `StepSizeViolation` unless `0 < h < bound` or the
    /// configuration allows an unstable gain.
    pub fn new(graph: &'a Digraph, cfg: &SolverConfig) -> Result<Self> {
        let gain_bound = match step_size_bound(graph) {
            Ok(b) => b,
            Err(_) if cfg.allow_unstable_gain => f64::NAN,
            Err(e) => return Err(e),
        };
        if !cfg.allow_unstable_gain && !(cfg.h > 0.0 && cfg.h < gain_bound) {
            return Err(Error::StepSizeViolation {
                h: cfg.h,
                bound: gain_bound,
            });
        }
        Ok(Self { graph, gain_bound })
    }

    pub fn graph(&self) -> &Digraph {
        self.graph
    }

    /// NaN when the graph has no spanning tree and the check was overridden.
    pub fn gain_bound(&self) -> f64 {
        self.gain_bound
    }

    /// `y_i = x_i + h sum_j a_ij (x_j - x_i)`.
    pub fn mix(&self, states: &[Vector], h: f64) -> Result<Vec<Vector>> {
        check_graph(states, self.graph)?;
        Ok((0..states.len())
            .map(|i| &states[i] + consensus_term(states, self.graph, i) * h)
            .collect())
    }

    /// Mixed points `y_i` and corrections `beta(k) grad g_i^+(y_i)`.
    pub fn mix_and_correct(
        &self,
        states: &[Vector],
        k: usize,
        problem: &ProblemSpec,
        cfg: &SolverConfig,
    ) -> Result<(Vec<Vector>, Vec<Vector>)> {
        check_agents(states, problem)?;
        let beta = cfg.beta.value_at(k as f64);
        let mixed = self.mix(states, cfg.h)?;
        let corrections = mixed
            .iter()
            .zip(problem.agents())
            .map(|(y, agent)| Ok(agent.inequality.subgradient_plus(y)? * beta))
            .collect::<Result<Vec<_>>>()?;
        Ok((mixed, corrections))
    }

    pub fn step(
        &self,
        states: &[Vector],
        k: usize,
        problem: &ProblemSpec,
        cfg: &SolverConfig,
    ) -> Result<Vec<Vector>> {
        let alpha = discrete_alpha(cfg, k as f64)?;
        let (mixed, corrections) = self.mix_and_correct(states, k, problem, cfg)?;
        let next = mixed
            .into_iter()
            .zip(corrections)
            .zip(problem.agents())
            .map(|((y, grad), agent)| {
                let xi = y - grad;
                let phi = (&xi - agent.set.project(&xi)?) * alpha;
                Ok(xi - phi)
            })
            .collect::<Result<Vec<_>>>()?;
        check_states(&next, cfg.tolerances.divergence_bound)?;
        Ok(next)
    }
}

/// One discrete step; validates the gain on every call. Use
/// [`DiscreteNetwork`] to validate once per run.
pub fn distributed_discrete_step(
    states: &[Vector],
    k: usize,
    graph: &Digraph,
    problem: &ProblemSpec,
    cfg: &SolverConfig,
) -> Result<Vec<Vector>> {
    DiscreteNetwork::new(graph, cfg)?.step(states, k, problem, cfg)
}
