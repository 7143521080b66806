use super::{check_states, discrete_alpha, AgentProblem, SolverConfig};
use crate::{Result, Vector};

/// `-alpha(t) (x - P_X(x)) - beta(t) grad g^+(x)`.
pub fn centralized_drift(
    x: &Vector,
    t: f64,
    agent: &AgentProblem,
    cfg: &SolverConfig,
) -> Result<Vector> {
    let alpha = cfg.alpha.value_at(t);
    let beta = cfg.beta.value_at(t);
    let to_set = x - agent.set.project(x)?;
    let sub = agent.inequality.subgradient_plus(x)?;
    Ok(-(to_set * alpha + sub * beta))
}

/// One explicit Euler step of length `dt` of the centralized flow.
pub fn centralized_continuous_step(
    x: &Vector,
    t: f64,
    dt: f64,
    agent: &AgentProblem,
    cfg: &SolverConfig,
) -> Result<Vector> {
    let next = x + centralized_drift(x, t, agent, cfg)? * dt;
    check_states(std::slice::from_ref(&next), cfg.tolerances.divergence_bound)?;
    Ok(next)
}

/// `xi = x - beta(k) grad g^+(x)`, then `x+ = xi - alpha(k) (xi - P_X(xi))`.
pub fn centralized_discrete_step(
    x: &Vector,
    k: usize,
    agent: &AgentProblem,
    cfg: &SolverConfig,
) -> Result<Vector> {
    let t = k as f64;
    let alpha = discrete_alpha(cfg, t)?;
    let beta = cfg.beta.value_at(t);
    let xi = x - agent.inequality.subgradient_plus(x)? * beta;
    let phi = (&xi - agent.set.project(&xi)?) * alpha;
    let next = xi - phi;
    check_states(std::slice::from_ref(&next), cfg.tolerances.divergence_bound)?;
    Ok(next)
}
