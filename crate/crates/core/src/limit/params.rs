use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::kernel::{AsymptoticSequence, KernelMatrixSpec, SpectralData};
use crate::{Error, Result};

/// `(1 - beta) / sqrt(2 (1 + beta^2))`.
pub fn leverage_rho(beta: f64) -> f64 {
    (1.0 - beta) / (2.0 * (1.0 + beta * beta)).sqrt()
}

/// `sqrt(2 / (1 + beta)) / (1 - (|phi1|_1 - |phi2|_1))`.
pub fn price_scale(spec: &KernelMatrixSpec) -> Result<f64> {
    let l2 = spec.lambda2_norm()?;
    if !(l2 < 1.0) {
        return Err(Error::invalid("phi", format!("|phi1|_1 - |phi2|_1 = {l2} leaves no price scale")));
    }
    Ok((2.0 / (1.0 + spec.beta)).sqrt() / (1.0 - l2))
}

/// Heston limit
///
/// ```text
/// dX = kappa (theta - X) dt + xi sqrt(X) dB,   dP = price_scale sqrt(X) dW,   d<W,B> = rho dt
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HestonParams {
    pub kappa: f64,
    pub theta: f64,
    pub xi: f64,
    pub rho: f64,
    pub price_scale: f64,
    pub x0: f64,
}

pub fn heston_params_from_micro(
    spec: &KernelMatrixSpec,
    seq: &AsymptoticSequence,
    spectral: &SpectralData,
) -> Result<HestonParams> {
    let AsymptoticSequence::Light { lambda, mu } = *seq else {
        return Err(Error::invalid("regime", "the Heston map needs a light-tailed sequence"));
    };
    seq.validate()?;
    let m = spectral.m.ok_or_else(|| Error::invalid("m", "spectral data carries no first moment"))?;
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::invalid("m", format!("first moment {m} must be positive and finite")));
    }
    let beta = spec.beta;
    Ok(HestonParams {
        kappa: lambda / m,
        theta: (beta + 1.0) * mu / lambda,
        xi: ((1.0 + beta * beta) / (1.0 + beta)).sqrt() / m,
        rho: leverage_rho(beta),
        price_scale: price_scale(spec)?,
        x0: 0.0,
    })
}

/// Rough Heston limit
///
/// ```text
/// Y_t = 1/Gamma(alpha) ∫ (t-s)^(alpha-1) [lambda_eff (theta - Y_s) ds + nu sqrt(Y_s) dB_s]
/// dP = price_scale sqrt(Y) dW,   d<W,B> = rho dt
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoughHestonParams {
    pub alpha: f64,
    pub lambda_eff: f64,
    pub theta: f64,
    pub nu: f64,
    pub rho: f64,
    pub beta: f64,
    pub price_scale: f64,
    pub y0: f64,
}

impl RoughHestonParams {
    /// The variance equation written as a generic rough CIR.
    pub fn variance(&self) -> GenericRoughCirParams {
        GenericRoughCirParams {
            lambda_g: self.lambda_eff,
            theta_g: self.theta,
            nu_g: self.nu / self.lambda_eff,
            alpha: self.alpha,
        }
    }
}

pub fn rough_params_from_micro(
    spec: &KernelMatrixSpec,
    seq: &AsymptoticSequence,
    spectral: &SpectralData,
) -> Result<RoughHestonParams> {
    let AsymptoticSequence::Heavy { alpha, lambda_star, mu } = *seq else {
        return Err(Error::invalid("regime", "the rough Heston map needs a heavy-tailed sequence"));
    };
    seq.validate()?;
    let tail = spectral.tail.ok_or_else(|| Error::TailUndefined("spectral data without tail constants".into()))?;
    if !(tail.c > 0.0) {
        return Err(Error::TailUndefined(format!("tail constant C = {}", tail.c)));
    }
    let beta = spec.beta;
    let lambda_eff = alpha * lambda_star / (tail.c * gamma(1.0 - alpha));
    Ok(RoughHestonParams {
        alpha,
        lambda_eff,
        theta: 1.0 + beta,
        nu: lambda_eff * ((1.0 + beta * beta) / (lambda_star * mu * (1.0 + beta))).sqrt(),
        rho: leverage_rho(beta),
        beta,
        price_scale: price_scale(spec)?,
        y0: 0.0,
    })
}

/// `V = theta F^{alpha,lambda} + nu ∫ f^{alpha,lambda}(t-s) sqrt(V_s) dB_s`, equivalently
/// `V = I^alpha[lambda (theta - V)] + lambda nu I^alpha[sqrt(V) dB]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenericRoughCirParams {
    pub lambda_g: f64,
    pub theta_g: f64,
    pub nu_g: f64,
    pub alpha: f64,
}

impl GenericRoughCirParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.5 && self.alpha < 1.0) {
            return Err(Error::invalid("alpha", format!("{} is outside (1/2, 1)", self.alpha)));
        }
        for (name, v) in [("lambda_g", self.lambda_g), ("theta_g", self.theta_g)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(name, format!("{v} must be positive")));
            }
        }
        if !(self.nu_g >= 0.0) || !self.nu_g.is_finite() {
            return Err(Error::invalid("nu_g", format!("{} must be nonnegative", self.nu_g)));
        }
        Ok(())
    }
}
