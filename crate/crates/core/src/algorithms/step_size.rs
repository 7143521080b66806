use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A nonnegative step-size sequence `alpha(t)` or `beta(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum StepSchedule {
    Constant { value: f64 },
    /// `c0 / (c1 t + 1)`.
    Harmonic { c0: f64, c1: f64 },
    /// `samples[k]` on `[k, k + 1)`, held at the last sample afterwards.
    Custom { samples: Vec<f64> },
}

impl Default for StepSchedule {
    fn default() -> Self {
        StepSchedule::Constant { value: 1.0 }
    }
}

impl StepSchedule {
    pub fn value_at(&self, t: f64) -> f64 {
        match self {
            StepSchedule::Constant { value } => *value,
            StepSchedule::Harmonic { c0, c1 } => c0 / (c1 * t + 1.0),
            StepSchedule::Custom { samples } => {
                let k = (t.max(0.0).floor() as usize).min(samples.len().saturating_sub(1));
                samples.get(k).copied().unwrap_or(0.0)
            }
        }
    }

    /// Rejects schedules that can produce negative or non-finite values.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        match self {
            StepSchedule::Constant { value } if !(value.is_finite() && *value >= 0.0) => {
                bad(format!("constant step size must be finite and >= 0, got {value}"))
            }
            StepSchedule::Harmonic { c0, c1 }
                if !(c0.is_finite() && c1.is_finite() && *c0 >= 0.0 && *c1 >= 0.0) =>
            {
                bad(format!("harmonic schedule needs c0, c1 >= 0, got ({c0}, {c1})"))
            }
            StepSchedule::Custom { samples } if samples.is_empty() => {
                bad("custom schedule has no samples".into())
            }
            StepSchedule::Custom { samples } => match samples.iter().position(|s| !(s.is_finite() && *s >= 0.0)) {
                Some(k) => bad(format!("custom schedule sample {k} is {}", samples[k])),
                None => Ok(()),
            },
            _ => Ok(()),
        }
    }
}

/// Convergence theorem whose step-size hypotheses are being checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    /// Divergent integrals of `alpha` and `beta`.
    CentralizedContinuous,
    /// `alpha in [0, 1]`, divergent sums, square-summable.
    CentralizedDiscrete,
    /// Same conditions as the centralized discrete case.
    DistributedDiscrete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Alpha,
    Beta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Validity {
    Valid,
    Invalid,
    /// Custom samples: the infinite-sum conditions cannot be decided.
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleReport {
    pub validity: Validity,
    pub theorem_valid: bool,
    pub reasons: Vec<String>,
    /// Number of integer time points summed.
    pub horizon: usize,
    pub partial_sum: f64,
    pub partial_sum_squares: f64,
    pub min_value: f64,
    pub max_value: f64,
}

/// Checks a schedule against the step-size hypotheses of `theorem`.
///
/// Parametric families are decided exactly; partial sums over
/// `t = 0..horizon` are reported as diagnostics for every family.
pub fn validate_schedule(
    schedule: &StepSchedule,
    theorem: Theorem,
    role: Role,
    horizon: usize,
) -> ScheduleReport {
    let values: Vec<f64> = (0..horizon).map(|k| schedule.value_at(k as f64)).collect();
    let partial_sum = values.iter().sum();
    let partial_sum_squares = values.iter().map(|v| v * v).sum();
    let (min_value, max_value) = match schedule {
        StepSchedule::Constant { value } => (*value, *value),
        StepSchedule::Harmonic { c0, c1 } if *c1 > 0.0 => (0.0, *c0),
        StepSchedule::Harmonic { c0, .. } => (*c0, *c0),
        StepSchedule::Custom { samples } => samples
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| (lo.min(s), hi.max(s))),
    };

    let mut reasons = Vec::new();
    if let Err(e) = schedule.validate() {
        reasons.push(e.to_string());
    }
    let discrete = theorem != Theorem::CentralizedContinuous;
    if discrete && role == Role::Alpha && max_value > 1.0 {
        reasons.push(format!("alpha reaches {max_value}, outside [0, 1]"));
    }
    match schedule {
        StepSchedule::Constant { value } => {
            if *value == 0.0 {
                reasons.push("zero schedule: the sum does not diverge".into());
            } else if discrete {
                reasons.push("constant schedule: the sum of squares diverges".into());
            }
        }
        StepSchedule::Harmonic { c0, c1 } => {
            if *c0 == 0.0 {
                reasons.push("c0 = 0: the sum does not diverge".into());
            } else if discrete && *c1 == 0.0 {
                reasons.push("c1 = 0 makes the schedule constant: the sum of squares diverges".into());
            }
        }
        // finitely many samples say nothing about the infinite sums
        StepSchedule::Custom { .. } => {}
    }
    let validity = if !reasons.is_empty() {
        Validity::Invalid
    } else if matches!(schedule, StepSchedule::Custom { .. }) {
        Validity::Unknown
    } else {
        Validity::Valid
    };
    ScheduleReport {
        validity,
        theorem_valid: validity == Validity::Valid,
        reasons,
        horizon,
        partial_sum,
        partial_sum_squares,
        min_value,
        max_value,
    }
}
