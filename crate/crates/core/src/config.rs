//! Numeric tolerances shared by every module.

use serde::{Deserialize, Serialize};

/// Environment variable that overrides [`Tolerances::default`].
///
/// Accepts either a bare number, which replaces the convergence tolerance, or
/// a JSON object with any subset of the [`Tolerances`] fields.
pub const TOLERANCE_ENV: &str = "CFP_NUMERIC_TOLERANCE";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// In-weight vs out-weight mismatch accepted as balanced.
    pub balance: f64,
    /// Eigenvalues with modulus at or below this are treated as zero.
    pub spectral: f64,
    /// Consensus error and feasibility residuals below this count as converged.
    pub convergence: f64,
    /// Absolute slack allowed in the per-step Lyapunov checks.
    pub lyapunov: f64,
    /// Negative eigenvalues of a quadratic form above `-psd` are accepted.
    pub psd: f64,
    /// A state with norm above this aborts the run.
    pub divergence_bound: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            balance: 1e-12,
            spectral: 1e-8,
            convergence: 1e-6,
            lyapunov: 1e-10,
            psd: 1e-10,
            divergence_bound: 1e9,
        }
    }
}

impl Tolerances {
    /// Defaults with [`TOLERANCE_ENV`] applied, if set.
    pub fn from_env() -> Result<Self, String> {
        match std::env::var(TOLERANCE_ENV) {
            Ok(raw) => Self::default().with_override(&raw),
            Err(_) => Ok(Self::default()),
        }
    }

    /// Applies an override string in the [`TOLERANCE_ENV`] format.
    pub fn with_override(self, raw: &str) -> Result<Self, String> {
        let raw = raw.trim();
        if let Ok(value) = raw.parse::<f64>() {
            if !(value.is_finite() && value > 0.0) {
                return Err(format!("{TOLERANCE_ENV} must be positive, got {raw}"));
            }
            return Ok(Self {
                convergence: value,
                ..self
            });
        }
        // Unspecified fields keep the values of `self`.
        let mut merged = serde_json::to_value(self).map_err(|e| e.to_string())?;
        let patch: serde_json::Value =
            serde_json::from_str(raw).map_err(|e| format!("{TOLERANCE_ENV}: {e}"))?;
        let (Some(base), Some(patch)) = (merged.as_object_mut(), patch.as_object()) else {
            return Err(format!("{TOLERANCE_ENV} must be a number or a JSON object"));
        };
        for (key, value) in patch {
            base.insert(key.clone(), value.clone());
        }
        serde_json::from_value(merged).map_err(|e| format!("{TOLERANCE_ENV}: {e}"))
    }
}
