use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// How the kernel level `a_T` and the baseline `mu_T` scale with the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "lowercase")]
pub enum AsymptoticSequence {
    /// `a_T = 1 - lambda / T`, `mu_T = mu`.
    Light { lambda: f64, mu: f64 },
    /// `a_T = 1 - lambda_star / T^alpha`, `mu_T = mu T^(alpha - 1)`.
    Heavy { alpha: f64, lambda_star: f64, mu: f64 },
}

/// Resolved `(a_T, mu_T)` for one horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub a_t: f64,
    pub mu_t: f64,
}

impl AsymptoticSequence {
    pub fn validate(&self) -> Result<()> {
        let positive = |name, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("{v} must be positive")))
            }
        };
        match *self {
            Self::Light { lambda, mu } => {
                positive("lambda", lambda)?;
                positive("mu", mu)
            }
            Self::Heavy { alpha, lambda_star, mu } => {
                if !(alpha > 0.5 && alpha < 1.0) {
                    return Err(Error::invalid("alpha", format!("{alpha} is outside (1/2, 1)")));
                }
                positive("lambda_star", lambda_star)?;
                positive("mu", mu)
            }
        }
    }

    /// `1 - a_T`, computed without cancellation.
    pub fn one_minus_a(&self, horizon: f64) -> f64 {
        match *self {
            Self::Light { lambda, .. } => lambda / horizon,
            Self::Heavy { alpha, lambda_star, .. } => lambda_star / horizon.powf(alpha),
        }
    }

    pub fn a_t(&self, horizon: f64) -> f64 {
        1.0 - self.one_minus_a(horizon)
    }

    pub fn mu_t(&self, horizon: f64) -> f64 {
        match *self {
            Self::Light { mu, .. } => mu,
            Self::Heavy { alpha, mu, .. } => mu * horizon.powf(alpha - 1.0),
        }
    }

    pub fn mu(&self) -> f64 {
        match *self {
            Self::Light { mu, .. } | Self::Heavy { mu, .. } => mu,
        }
    }

    /// Horizons strictly above this value have `a_T` in `(0, 1)`.
    pub fn min_horizon(&self) -> f64 {
        match *self {
            Self::Light { lambda, .. } => lambda,
            Self::Heavy { alpha, lambda_star, .. } => lambda_star.powf(1.0 / alpha),
        }
    }

    pub fn scaling(&self, horizon: f64) -> Result<Scaling> {
        self.validate()?;
        if !(horizon > self.min_horizon()) {
            return Err(Error::invalid(
                "horizon",
                format!("T = {horizon} gives a_T <= 0 (need T > {})", self.min_horizon()),
            ));
        }
        Ok(Scaling { a_t: self.a_t(horizon), mu_t: self.mu_t(horizon) })
    }

    pub fn is_heavy(&self) -> bool {
        matches!(self, Self::Heavy { .. })
    }
}
