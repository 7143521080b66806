use serde::{Deserialize, Serialize};

use crate::algorithms::ProblemSpec;
use crate::convex::check_dim;
use crate::{Result, Vector};

/// `max_{i,j} |x_i - x_j|`; zero for a single agent.
pub fn consensus_error(states: &[Vector]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in states.iter().enumerate() {
        for b in &states[i + 1..] {
            worst = worst.max((a - b).norm());
        }
    }
    worst
}

pub fn mean_point(states: &[Vector]) -> Vector {
    let mut sum = Vector::zeros(states.first().map_or(0, |x| x.len()));
    for x in states {
        sum += x;
    }
    sum / states.len().max(1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `max_i dist(x, X_i)`.
    pub max_set_residual: f64,
    /// `max_i g_i^+(x)`.
    pub max_inequality_residual: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.max_set_residual.max(self.max_inequality_residual)
    }
}

pub fn feasibility_residuals(problem: &ProblemSpec, x: &Vector) -> Result<Residuals> {
    check_dim(problem.dim(), x)?;
    let mut r = Residuals {
        max_set_residual: 0.0,
        max_inequality_residual: 0.0,
    };
    for agent in problem.agents() {
        r.max_set_residual = r.max_set_residual.max(agent.set_residual(x)?);
        r.max_inequality_residual = r.max_inequality_residual.max(agent.inequality_residual(x)?);
    }
    Ok(r)
}

/// Metrics recorded at one time stamp.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub consensus_error: f64,
    /// Residuals of the mean agent state.
    pub max_set_residual: f64,
    pub max_inequality_residual: f64,
    /// Lyapunov value against the reference point, when one is declared.
    pub lyapunov: Option<f64>,
}

impl Metrics {
    pub fn within(&self, tol: f64) -> bool {
        self.consensus_error <= tol && self.max_set_residual <= tol && self.max_inequality_residual <= tol
    }
}
